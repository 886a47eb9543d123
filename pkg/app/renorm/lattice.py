from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from app.pointfield.field import Box

Site = Tuple[int, int]
Rect = Tuple[float, float, float, float]  # (x0, x1, y0, y1)


@dataclass(frozen=True)
class Bond:
    """Enlace orientado x → y con y = x + (0,1) o x + (1,0)"""

    x: Site
    y: Site

    @property
    def vertical(self) -> bool:
        return self.y == (self.x[0], self.x[1] + 1)

    @property
    def label(self) -> str:
        return f"({self.x[0]},{self.x[1]})->({self.y[0]},{self.y[1]})"


def bond_order(depth: int) -> List[Bond]:
    """
    Enumeración canónica por distancia l1 del origen de cada enlace: para el nivel k,
    los sitios (i, k-i) con i = 0..k, cada uno con su enlace vertical y luego el horizontal.
    """
    bonds = []
    for k in range(depth):
        for i in range(k + 1):
            x = (i, k - i)
            bonds.append(Bond(x, (x[0], x[1] + 1)))
            bonds.append(Bond(x, (x[0] + 1, x[1])))
    return bonds


def site_center(site: Site, R: float) -> np.ndarray:
    return 6.0 * R * np.asarray(site, dtype=float)


def square(site: Site, R: float, half: float) -> Rect:
    cx, cy = site_center(site, R)
    return cx - half, cx + half, cy - half, cy + half


def block(site: Site, R: float) -> Rect:
    """S_x = 6Rx + [-3R, 3R]²"""
    return square(site, R, 3.0 * R)


def middle_square(site: Site, R: float) -> Rect:
    return square(site, R, 2.0 * R)


def target_square(site: Site, R: float) -> Rect:
    return square(site, R, R)


def bond_rectangle(bond: Bond, R: float, inset: float = 0.0) -> Rect:
    """S_x ∪ S_y (un rectángulo de 6R × 12R), recortado en `inset` por cada lado"""
    ax0, ax1, ay0, ay1 = block(bond.x, R)
    bx0, bx1, by0, by1 = block(bond.y, R)
    return min(ax0, bx0) + inset, max(ax1, bx1) - inset, min(ay0, by0) + inset, max(ay1, by1) - inset


def in_rect(points, rect: Rect) -> np.ndarray:
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    x0, x1, y0, y1 = rect
    return (p[:, 0] >= x0) & (p[:, 0] <= x1) & (p[:, 1] >= y0) & (p[:, 1] <= y1)


def lattice_box(depth: int, R: float) -> Box:
    """Caja que contiene todos los bloques con l1 <= depth en el primer cuadrante"""
    side = 6.0 * R * (depth + 1)
    return Box(origin=(-3.0 * R, -3.0 * R), width=side, height=side)
