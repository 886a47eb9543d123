"""
Áreas de intersección entre anillos y los funcionales integrales asociados.

Los núcleos exactos son la fuente de verdad; Monte Carlo solo sirve como verificación
independiente.
"""
import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate, optimize

from app.core.errors import InvalidParameterError, PreconditionError
from app.geometry.annulus import Annulus, Norm, area, contains, sample_annulus

logger = logging.getLogger(__name__)

_CLAMP_TOL = 1e-12
_MC_CHUNK = 200_000


class OverlapMethod(str, Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte_carlo"


class OverlapReport(BaseModel):
    d: Optional[float] = Field(None, ge=0)
    area: float = Field(..., ge=0)
    method: OverlapMethod = OverlapMethod.EXACT
    mc_stderr: float = Field(0.0, ge=0)


class OverlapExtremum(BaseModel):
    ratio: float
    d: float
    grid_steps: int


class IntervalIntegral(BaseModel):
    c: float
    closed_form: float
    quadrature: float
    rel_error: float


class FunctionalEstimate(BaseModel):
    value: float
    stderr: float
    annulus_area: float
    mean_overlap: float
    samples: int


# === NÚCLEOS EXACTOS ===

def lens_area(d, a: float, b: float) -> np.ndarray:
    """Área de D(0, a) ∩ D(d, b) para separaciones d (vectorizado)"""
    d = np.asarray(d, dtype=float)
    out = np.zeros_like(d)
    small = min(a, b)
    if small <= 0:
        return out

    contained = d <= abs(a - b)
    out = np.where(contained, math.pi * small * small, out)
    partial = (~contained) & (d < a + b)
    if np.any(partial):
        dp = np.where(partial, d, 1.0)
        ca = np.clip((dp * dp + a * a - b * b) / (2.0 * dp * a), -1.0, 1.0)
        cb = np.clip((dp * dp + b * b - a * a) / (2.0 * dp * b), -1.0, 1.0)
        kite = (-dp + a + b) * (dp + a - b) * (dp - a + b) * (dp + a + b)
        kite = np.sqrt(np.clip(kite, 0.0, None))
        lens = a * a * np.arccos(ca) + b * b * np.arccos(cb) - 0.5 * kite
        out = np.where(partial, np.clip(lens, 0.0, math.pi * small * small), out)
    return out


def _interval_overlap(a: float, b: float, t) -> np.ndarray:
    # longitud de [-a, a] ∩ [t - b, t + b]
    return np.clip(np.minimum(a, t + b) - np.maximum(-a, t - b), 0.0, None)


def _square_pair(a: float, b: float, dx, dy) -> np.ndarray:
    return _interval_overlap(a, b, dx) * _interval_overlap(a, b, dy)


def overlap_kernel(a: Annulus, displacement) -> np.ndarray:
    """
    |A(0) ∩ A(δ)| para desplazamientos δ de forma (..., 2), por inclusión–exclusión
    de los cuatro pares de discos (o cuadrados) con radios {r, r(1-ε)}.
    """
    disp = np.asarray(displacement, dtype=float)
    o, i = a.r, a.inner
    if a.norm == Norm.ROUND:
        d = np.hypot(disp[..., 0], disp[..., 1])
        val = lens_area(d, o, o) - 2.0 * lens_area(d, o, i) + lens_area(d, i, i)
    else:
        dx, dy = np.abs(disp[..., 0]), np.abs(disp[..., 1])
        val = (
            _square_pair(o, o, dx, dy)
            - _square_pair(o, i, dx, dy)
            - _square_pair(i, o, dx, dy)
            + _square_pair(i, i, dx, dy)
        )
    return np.clip(val, 0.0, area(a))


def _as_displacement(d) -> np.ndarray:
    v = np.asarray(d, dtype=float)
    if v.ndim == 0:
        return np.array([float(v), 0.0])
    if v.shape != (2,):
        raise InvalidParameterError(f"desplazamiento inválido: {d}")
    return v


def intersection_area(a: Annulus, d: Union[float, Sequence[float]]) -> OverlapReport:
    """
    Área exacta de A_ε(x, r) ∩ A_ε(y, r).

    Args:
        a: Anillo
        d: Separación escalar (se interpreta como (d, 0)) o vector de desplazamiento

    Returns:
        OverlapReport con método exacto
    """
    disp = _as_displacement(d)
    if not np.all(np.isfinite(disp)) or (np.ndim(d) == 0 and float(d) < 0):
        raise InvalidParameterError(f"separación inválida: {d}")
    value = float(overlap_kernel(a, disp))
    return OverlapReport(d=float(np.hypot(*disp)), area=value, method=OverlapMethod.EXACT)


def overlap_mc(a: Annulus, d, samples: int, rng: np.random.Generator) -> OverlapReport:
    """Oráculo hit-or-miss: muestras uniformes en A, pertenencia al anillo trasladado"""
    disp = _as_displacement(d)
    hits = 0
    done = 0
    while done < samples:
        m = min(_MC_CHUNK, samples - done)
        pts = sample_annulus(a, m, rng)
        hits += int(np.count_nonzero(contains(a, pts - disp)))
        done += m
    p = hits / samples
    full = area(a)
    return OverlapReport(
        d=float(np.hypot(*disp)),
        area=full * p,
        method=OverlapMethod.MONTE_CARLO,
        mc_stderr=full * math.sqrt(p * (1.0 - p) / samples),
    )


# === BARRIDOS EN d ===

def _refine(fn, grid: np.ndarray, values: np.ndarray, best: int):
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    if hi <= lo:
        return grid[best], values[best]
    res = optimize.minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    if res.fun < values[best]:
        return float(res.x), float(res.fun)
    return grid[best], values[best]


def min_overlap_ratio(a: Annulus, grid_steps: int = 512) -> OverlapExtremum:
    """
    Mínimo de |A(x) ∩ A(y)|/|A| con ‖x-y‖ en una rejilla uniforme de [r(1-ε), r],
    más un refinamiento acotado alrededor del mejor punto.
    """
    if grid_steps < 2:
        raise InvalidParameterError("grid_steps debe ser >= 2")
    full = area(a)
    grid = np.linspace(a.inner, a.r, grid_steps)
    disp = np.column_stack((grid, np.zeros_like(grid)))
    values = overlap_kernel(a, disp) / full
    best = int(np.argmin(values))
    d, ratio = _refine(lambda t: float(overlap_kernel(a, (t, 0.0))) / full, grid, values, best)
    return OverlapExtremum(ratio=float(ratio), d=float(d), grid_steps=grid_steps)


def sup_overlap_scaled(a: Annulus, d_min: Optional[float] = None, grid_steps: int = 2048) -> OverlapExtremum:
    """
    sup sobre d en [d_min, 2r] de |A(x) ∩ A(y)| / (|A|·√ε).

    Para el anillo cuadrado el desplazamiento es axial, (d, 0).
    """
    if d_min is None:
        d_min = a.ball_radius
    if d_min < a.ball_radius * (1.0 - 1e-12):
        raise PreconditionError(f"d_min={d_min} < r√ε={a.ball_radius}")
    if d_min >= 2.0 * a.r:
        return OverlapExtremum(ratio=0.0, d=float(d_min), grid_steps=grid_steps)

    scale = area(a) * math.sqrt(a.eps)
    grid = np.linspace(d_min, 2.0 * a.r, grid_steps)
    disp = np.column_stack((grid, np.zeros_like(grid)))
    values = -overlap_kernel(a, disp) / scale
    best = int(np.argmin(values))
    d, neg = _refine(lambda t: -float(overlap_kernel(a, (t, 0.0))) / scale, grid, values, best)
    return OverlapExtremum(ratio=float(-neg), d=float(d), grid_steps=grid_steps)


# === LEMA 11: CÚMULOS DE ANILLOS Y BOLAS ===

def _min_pairwise_distance(points: np.ndarray) -> float:
    if len(points) < 2:
        return math.inf
    diff = points[:, None, :] - points[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, math.inf)
    return float(dist.min())


def cluster_overlap_area(
    a: Annulus,
    centers,
    i: int,
    mc_samples: int,
    rng: np.random.Generator,
) -> OverlapReport:
    """
    Estimación Monte Carlo de |A_i ∩ ⋃_{j≠i} (A_j ∪ B_j)|, con B_j la bola de radio r√ε.

    Rechaza conjuntos de centros con dos puntos a distancia menor que r√ε.
    """
    pts = np.asarray(centers, dtype=float).reshape(-1, 2)
    if not 0 <= i < len(pts):
        raise InvalidParameterError(f"índice {i} fuera de rango")
    rho = a.ball_radius
    if _min_pairwise_distance(pts) < rho * (1.0 - 1e-12):
        raise PreconditionError("dos centros están a distancia menor que r√ε")

    others = np.delete(pts, i, axis=0)
    if len(others):
        gap = np.hypot(*(others - pts[i]).T)
        nearest = float(gap.min())
        # solo importan los centros cuyo soporte puede tocar A_i
        others = others[gap <= 2.0 * a.r + rho]
    else:
        nearest = None
    if len(others) == 0:
        return OverlapReport(d=nearest, area=0.0, method=OverlapMethod.EXACT)

    hits = 0
    done = 0
    while done < mc_samples:
        m = min(_MC_CHUNK // max(1, len(others)) + 1, mc_samples - done)
        p = pts[i] + sample_annulus(a, m, rng)
        rel = p[:, None, :] - others[None, :, :]
        covered = contains(a, rel) | (np.hypot(rel[..., 0], rel[..., 1]) <= rho)
        hits += int(np.count_nonzero(covered.any(axis=1)))
        done += m
    frac = hits / mc_samples
    full = area(a)
    return OverlapReport(
        d=nearest,
        area=full * frac,
        method=OverlapMethod.MONTE_CARLO,
        mc_stderr=full * math.sqrt(frac * (1.0 - frac) / mc_samples),
    )


# === LEMAS 3 Y 4, TEOREMA 5 ===

def interval_overlap_integral(c: float) -> IntervalIntegral:
    """∫_{I×I} |(x+I) ∩ (y+I)| dx dy = (2/3)|I|³, forma cerrada contra cuadratura 2-D"""
    if c <= 0:
        raise InvalidParameterError(f"c debe ser > 0, recibido {c}")
    closed = 2.0 * c ** 3 / 3.0

    def overlap(y, x):
        return float(_interval_overlap(c / 2.0, c / 2.0, x - y))

    # se parte en la diagonal, donde el integrando tiene el pliegue
    lower, _ = integrate.dblquad(overlap, 0.0, c, lambda x: 0.0, lambda x: x, epsabs=0.0, epsrel=1e-11)
    upper, _ = integrate.dblquad(overlap, 0.0, c, lambda x: x, lambda x: c, epsabs=0.0, epsrel=1e-11)
    quad = lower + upper
    rel = abs(quad - closed) / closed if closed > 0 else abs(quad)
    return IntervalIntegral(c=c, closed_form=closed, quadrature=quad, rel_error=rel)


def _mean_pair_overlap(a: Annulus, samples: int, rng: np.random.Generator):
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(_MC_CHUNK, samples - done)
        x = sample_annulus(a, m, rng)
        y = sample_annulus(a, m, rng)
        k = overlap_kernel(a, x - y)
        total += float(k.sum())
        total_sq += float(np.dot(k, k))
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return mean, math.sqrt(var / samples)


def lemma3_functional(a: Annulus, mc_samples: int, rng: np.random.Generator) -> FunctionalEstimate:
    """
    Estimación de |A|³ - ∫_{A×A} |(x+A) ∩ (y+A)| dx dy.

    x, y uniformes en A; el integrando se evalúa con el núcleo exacto en x - y.
    Un valor < 1 certifica ausencia de percolación.
    """
    full = area(a)
    mean, se = _mean_pair_overlap(a, mc_samples, rng)
    return FunctionalEstimate(
        value=full ** 3 - full ** 2 * mean,
        stderr=full ** 2 * se,
        annulus_area=full,
        mean_overlap=mean,
        samples=mc_samples,
    )


def square_overlap_integral(a: Annulus, mc_samples: int, rng: np.random.Generator) -> FunctionalEstimate:
    """Estimación de ∫_{A×A} |(x+A) ∩ (y+A)| (el término que se resta en el funcional)"""
    full = area(a)
    mean, se = _mean_pair_overlap(a, mc_samples, rng)
    return FunctionalEstimate(
        value=full ** 2 * mean,
        stderr=full ** 2 * se,
        annulus_area=full,
        mean_overlap=mean,
        samples=mc_samples,
    )


def square_six_term_bound(a: Annulus) -> float:
    """6·(2/3)|I|³·(2/3)|J|³ con I = [r(1-ε), r], J = [-r, r]"""
    if a.norm != Norm.SQUARE:
        raise InvalidParameterError("la cota de seis términos es para el anillo cuadrado")
    width_i = a.r * a.eps
    width_j = 2.0 * a.r
    return 6.0 * (2.0 / 3.0 * width_i ** 3) * (2.0 / 3.0 * width_j ** 3)


def theorem5_rigorous(annulus_area: Union[str, float, Fraction] = "1.014"):
    """
    Comprobación en aritmética exacta de |A|³(1 - 1/24) < 1.

    Returns:
        (verdict, valor exacto como Fraction)
    """
    value = Fraction(str(annulus_area)) if not isinstance(annulus_area, Fraction) else annulus_area
    lhs = value ** 3 * Fraction(23, 24)
    return lhs < 1, lhs


def theorem5_threshold() -> float:
    # mayor |A| certificado por la cadena: (24/23)^(1/3)
    return (24.0 / 23.0) ** (1.0 / 3.0)
