import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from app.core.errors import InvalidParameterError, TopologyError
from app.core.rng import SeedLike, as_generator
from app.geometry.annulus import Annulus, contains

logger = logging.getLogger(__name__)


class Topology(str, Enum):
    HARD = "hard"
    TORUS = "torus"


class Box(BaseModel):
    origin: Tuple[float, float] = (0.0, 0.0)
    width: float = Field(..., gt=0)
    height: float = Field(..., gt=0)
    topology: Topology = Topology.HARD

    class Config:
        frozen = True

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def upper(self) -> Tuple[float, float]:
        return self.origin[0] + self.width, self.origin[1] + self.height

    @classmethod
    def square(cls, side: float, topology: Topology = Topology.HARD, centered: bool = False) -> "Box":
        origin = (-side / 2.0, -side / 2.0) if centered else (0.0, 0.0)
        return cls(origin=origin, width=side, height=side, topology=topology)

    def expanded(self, margin: float) -> "Box":
        return Box(
            origin=(self.origin[0] - margin, self.origin[1] - margin),
            width=self.width + 2 * margin,
            height=self.height + 2 * margin,
            topology=self.topology,
        )

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        (x0, y0), (x1, y1) = self.origin, self.upper
        return (p[:, 0] >= x0) & (p[:, 0] <= x1) & (p[:, 1] >= y0) & (p[:, 1] <= y1)

    def displacement(self, vectors) -> np.ndarray:
        """Aplica la imagen mínima cuando la topología es toroidal"""
        v = np.array(vectors, dtype=float)
        if self.topology == Topology.TORUS:
            v[..., 0] -= self.width * np.round(v[..., 0] / self.width)
            v[..., 1] -= self.height * np.round(v[..., 1] / self.height)
        return v

    def wrap(self, points) -> np.ndarray:
        p = np.array(points, dtype=float)
        if self.topology == Topology.TORUS:
            p[..., 0] = self.origin[0] + np.mod(p[..., 0] - self.origin[0], self.width)
            p[..., 1] = self.origin[1] + np.mod(p[..., 1] - self.origin[1], self.height)
        return p


@dataclass
class PointField:
    """Conjunto de puntos Poisson en una caja, con índice de rejilla uniforme"""

    box: Box
    points: np.ndarray
    cell_size: float
    seed: Optional[int] = None
    intensity: Optional[float] = None
    nx: int = field(init=False)
    ny: int = field(init=False)
    cell_of_point: np.ndarray = field(init=False, repr=False)
    order: np.ndarray = field(init=False, repr=False)
    cell_start: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.cell_size <= 0:
            raise InvalidParameterError("cell_size debe ser > 0")
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.nx = max(1, int(math.floor(self.box.width / self.cell_size)))
        self.ny = max(1, int(math.floor(self.box.height / self.cell_size)))
        self._build_index()

    # === ÍNDICE ===

    @property
    def cell_w(self) -> float:
        return self.box.width / self.nx

    @property
    def cell_h(self) -> float:
        return self.box.height / self.ny

    def __len__(self) -> int:
        return len(self.points)

    def _raw_cells(self, p: np.ndarray):
        cx = np.floor((p[..., 0] - self.box.origin[0]) / self.cell_w).astype(np.int64)
        cy = np.floor((p[..., 1] - self.box.origin[1]) / self.cell_h).astype(np.int64)
        return cx, cy

    def _build_index(self):
        cx, cy = self._raw_cells(self.points)
        cx = np.clip(cx, 0, self.nx - 1)
        cy = np.clip(cy, 0, self.ny - 1)
        self.cell_of_point = cx * self.ny + cy
        self.order = np.argsort(self.cell_of_point, kind="stable")
        counts = np.bincount(self.cell_of_point, minlength=self.nx * self.ny)
        self.cell_start = np.concatenate(([0], np.cumsum(counts)))

    def cell_points(self, cx: int, cy: int) -> np.ndarray:
        c = cx * self.ny + cy
        return self.order[self.cell_start[c] : self.cell_start[c + 1]]

    def cell_coords(self, p) -> Tuple[int, int]:
        cx, cy = self._raw_cells(np.asarray(p, dtype=float))
        return int(np.clip(cx, 0, self.nx - 1)), int(np.clip(cy, 0, self.ny - 1))

    def _ring(self, radius: float) -> Tuple[int, int]:
        return int(math.ceil(radius / self.cell_w)), int(math.ceil(radius / self.cell_h))

    def _check_torus_radius(self, radius: float):
        if self.box.topology == Topology.TORUS and 2 * radius > min(self.box.width, self.box.height):
            raise TopologyError("el radio de consulta supera la mitad del toro")

    # === CONSULTAS ===

    def annulus_neighbors(self, center, a: Annulus, exclude: Optional[int] = None) -> np.ndarray:
        """
        Índices de los puntos p ≠ center con p - center ∈ A, en orden creciente.

        Bajo topología dura el centro puede estar fuera de la caja.
        """
        self._check_torus_radius(a.r)
        c = np.asarray(center, dtype=float)
        kx, ky = self._ring(a.r)
        cx, cy = self._raw_cells(c)
        torus = self.box.topology == Topology.TORUS
        chunks = []
        seen = set()
        for dx in range(-kx, kx + 1):
            for dy in range(-ky, ky + 1):
                gx, gy = int(cx) + dx, int(cy) + dy
                if torus:
                    gx, gy = gx % self.nx, gy % self.ny
                elif not (0 <= gx < self.nx and 0 <= gy < self.ny):
                    continue
                if (gx, gy) in seen:
                    continue
                seen.add((gx, gy))
                chunks.append(self.cell_points(gx, gy))
        if not chunks:
            return np.empty(0, dtype=np.int64)
        cand = np.concatenate(chunks)
        if cand.size == 0:
            return cand.astype(np.int64)
        disp = self.box.displacement(self.points[cand] - c)
        keep = contains(a, disp) & ((disp[:, 0] != 0.0) | (disp[:, 1] != 0.0))
        if exclude is not None:
            keep &= cand != exclude
        return np.sort(cand[keep]).astype(np.int64)

    def annulus_pairs(self, a: Annulus) -> Tuple[np.ndarray, np.ndarray]:
        """Todos los pares i < j con p_j - p_i ∈ A, vectorizado por desplazamiento de celda"""
        self._check_torus_radius(a.r)
        n = len(self.points)
        if n < 2:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        kx, ky = self._ring(a.r)
        torus = self.box.topology == Topology.TORUS
        base_x = self.cell_of_point // self.ny
        base_y = self.cell_of_point % self.ny
        src_all = np.arange(n)
        out_i, out_j = [], []
        for dx in range(-kx, kx + 1):
            for dy in range(-ky, ky + 1):
                gx, gy = base_x + dx, base_y + dy
                if torus:
                    gx, gy = gx % self.nx, gy % self.ny
                    src = src_all
                else:
                    ok = (gx >= 0) & (gx < self.nx) & (gy >= 0) & (gy < self.ny)
                    src, gx, gy = src_all[ok], gx[ok], gy[ok]
                cell = gx * self.ny + gy
                start = self.cell_start[cell]
                counts = self.cell_start[cell + 1] - start
                total = int(counts.sum())
                if total == 0:
                    continue
                i = np.repeat(src, counts)
                within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
                j = self.order[np.repeat(start, counts) + within]
                upper = j > i
                i, j = i[upper], j[upper]
                disp = self.box.displacement(self.points[j] - self.points[i])
                hit = contains(a, disp)
                out_i.append(i[hit])
                out_j.append(j[hit])
        if not out_i:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        pi = np.concatenate(out_i)
        pj = np.concatenate(out_j)
        if torus:
            # en toros pequeños varias celdas vecinas pueden coincidir
            key = np.unique(pi * n + pj)
            pi, pj = key // n, key % n
        return pi.astype(np.int64), pj.astype(np.int64)

    def subset(self, mask) -> "PointField":
        """Campo con los puntos seleccionados (mismo orden relativo, misma caja)"""
        return PointField(
            box=self.box,
            points=self.points[np.asarray(mask)],
            cell_size=self.cell_size,
            seed=self.seed,
            intensity=self.intensity,
        )

    # === SERIALIZACIÓN ===

    def _header(self) -> dict:
        return {
            "seed": self.seed,
            "intensity": self.intensity,
            "cell_size": self.cell_size,
            "box": {
                "origin": list(self.box.origin),
                "width": self.box.width,
                "height": self.box.height,
                "topology": self.box.topology.value,
            },
        }

    def to_csv(self, path: Union[str, Path]):
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"# {json.dumps(self._header())}\n")
            pd.DataFrame(self.points, columns=["x", "y"]).to_csv(fh, index=False, float_format="%.17g")

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "PointField":
        path = Path(path)
        with path.open("r", encoding="utf-8") as fh:
            header = json.loads(fh.readline().lstrip("#").strip())
        frame = pd.read_csv(path, comment="#", dtype=float)
        return cls._from_header(header, frame[["x", "y"]].to_numpy())

    def to_npz(self, path: Union[str, Path]):
        np.savez(Path(path), points=self.points, header=json.dumps(self._header()))

    @classmethod
    def from_npz(cls, path: Union[str, Path]) -> "PointField":
        with np.load(Path(path)) as data:
            return cls._from_header(json.loads(str(data["header"])), data["points"])

    @classmethod
    def _from_header(cls, header: dict, points: np.ndarray) -> "PointField":
        box = Box(**header["box"])
        return cls(
            box=box,
            points=points,
            cell_size=header["cell_size"],
            seed=header.get("seed"),
            intensity=header.get("intensity"),
        )


def sample_poisson(
    box: Box,
    intensity: float,
    rng: SeedLike,
    cell_size: Optional[float] = None,
    margin: float = 0.0,
    annulus: Optional[Annulus] = None,
) -> PointField:
    """
    Proceso de Poisson de intensidad dada en la caja.

    Args:
        box: Caja de muestreo
        intensity: Intensidad (> 0)
        rng: Semilla entera (se registra para reproducción) o Generator
        cell_size: Tamaño de celda del índice; por defecto el radio exterior de `annulus`
        margin: Con topología dura, amplía la caja en `margin` por cada lado
        annulus: Anillo de consulta; sin él y sin cell_size la celda mide 1 (r unidad)

    Returns:
        PointField con el índice construido
    """
    if intensity <= 0:
        raise InvalidParameterError(f"la intensidad debe ser > 0, recibido {intensity}")
    if cell_size is None:
        cell_size = annulus.r if annulus is not None else 1.0
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    gen = as_generator(rng)
    if margin > 0 and box.topology == Topology.HARD:
        box = box.expanded(margin)
    count = int(gen.poisson(intensity * box.area))
    u = gen.random((count, 2))
    points = np.column_stack(
        (box.origin[0] + u[:, 0] * box.width, box.origin[1] + u[:, 1] * box.height)
    )
    logger.debug(f"Campo Poisson: {count} puntos en caja {box.width}x{box.height} (seed={seed})")
    return PointField(box=box, points=points, cell_size=cell_size, seed=seed, intensity=intensity)
