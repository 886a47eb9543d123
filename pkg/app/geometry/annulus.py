import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, Field

from app.core.errors import InvalidParameterError


class Norm(str, Enum):
    ROUND = "round"    # L2
    SQUARE = "square"  # L∞


class Annulus(BaseModel):
    """Región de conexión A: puntos con r(1-ε) <= ‖v‖ <= r en la norma indicada"""

    norm: Norm = Norm.ROUND
    r: float = Field(..., gt=0, description="Radio exterior")
    eps: float = Field(..., gt=0, le=1, description="Grosor relativo ε")

    class Config:
        frozen = True

    @property
    def inner(self) -> float:
        return self.r * (1.0 - self.eps)

    @property
    def ball_radius(self) -> float:
        return self.r * math.sqrt(self.eps)

    def scaled(self, factor: float) -> "Annulus":
        return Annulus(norm=self.norm, r=self.r * factor, eps=self.eps)


def area(a: Annulus) -> float:
    shape = math.pi if a.norm == Norm.ROUND else 4.0
    return shape * a.r * a.r * a.eps * (2.0 - a.eps)


def area_to_radius(target_area: float, eps: float, norm: Norm = Norm.ROUND) -> float:
    """Inverso de area(): el radio exterior r que da |A| = target_area"""
    if target_area <= 0 or not 0 < eps <= 1:
        raise InvalidParameterError(f"area={target_area}, eps={eps} fuera de rango")
    shape = math.pi if Norm(norm) == Norm.ROUND else 4.0
    return math.sqrt(target_area / (shape * eps * (2.0 - eps)))


def norm_of(a: Annulus, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if a.norm == Norm.ROUND:
        return np.hypot(v[..., 0], v[..., 1])
    return np.maximum(np.abs(v[..., 0]), np.abs(v[..., 1]))


def contains(a: Annulus, v):
    """True sii r(1-ε) <= ‖v‖ <= r (ambos bordes cerrados); vectorizado sobre (..., 2)"""
    n = norm_of(a, v)
    inside = (n >= a.inner) & (n <= a.r)
    return bool(inside) if np.ndim(inside) == 0 else inside


def sample_annulus(a: Annulus, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    Muestras uniformes en el anillo centrado en el origen, forma (size, 2).

    Redondo: inversión polar ρ = r·sqrt(u(1-(1-ε)²) + (1-ε)²), sin rechazo.
    Cuadrado: descomposición en cuatro franjas elegidas según su área.
    """
    if a.norm == Norm.ROUND:
        q = (1.0 - a.eps) ** 2
        rho = a.r * np.sqrt(rng.random(size) * (1.0 - q) + q)
        theta = rng.random(size) * (2.0 * math.pi)
        return np.column_stack((rho * np.cos(theta), rho * np.sin(theta)))

    o, i = a.r, a.inner
    # franjas: superior, inferior (ancho 2o) y derecha, izquierda (alto 2i)
    weights = np.array([o, o, i, i], dtype=float)
    weights /= weights.sum()
    which = rng.choice(4, size=size, p=weights)
    u = rng.random(size)
    w = rng.random(size)
    along_h = -o + 2.0 * o * u
    along_v = -i + 2.0 * i * u
    depth = i + (o - i) * w
    x = np.where(which < 2, along_h, np.where(which == 2, depth, -depth))
    y = np.where(which == 0, depth, np.where(which == 1, -depth, along_v))
    return np.column_stack((x, y))


def lower_bound_nc(eps: float) -> float:
    """Cota inferior rigurosa del área crítica: 1 + ε/(π√3)"""
    if not 0 < eps <= 1:
        raise InvalidParameterError(f"eps debe estar en (0, 1], recibido {eps}")
    return 1.0 + eps / (math.pi * math.sqrt(3.0))
