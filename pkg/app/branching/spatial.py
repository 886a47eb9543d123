"""
Paseo aleatorio ramificado T_A: cada nodo tiene descendencia Poisson(1+η) y cada hijo se
desplaza por un vector uniforme en el anillo. Con tope K por generación aplicado al azar,
independientemente de las posiciones.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from app.branching.galton_watson import GWConfig, gw_batch
from app.core.errors import PreconditionError
from app.core.rng import SeedLike, as_generator
from app.core.stats import binomial_stderr
from app.geometry.annulus import Annulus, area, sample_annulus

logger = logging.getLogger(__name__)

_WALK_CHUNK = 4_000_000  # pasos por bloque vectorizado


class BranchingMode(str, Enum):
    ANCESTRAL = "ancestral"
    FULL_TREE = "full_tree"


@dataclass(frozen=True)
class SpatialNode:
    position: Tuple[float, float]
    parent: Optional[int]
    birth_time: int


class SpatialRun(BaseModel):
    survived: bool
    event_E: bool
    final_count: int
    position: Optional[Tuple[float, float]] = None


class SpatialEventEstimate(BaseModel):
    runs: int
    survived: int
    events: int
    conditional_frequency: float
    stderr: float
    T: int
    R_over_r: float


def horizon(R: float, r: float, factor: float = 1.0) -> int:
    """T = τ(R/r)²; τ = 1 es el horizonte literal"""
    return int(math.ceil(factor * (R / r) ** 2))


def target_square(R: float) -> Tuple[float, float, float, float]:
    """(0, 6R) + [-R, R]² como (x0, x1, y0, y1)"""
    return -R, R, 5.0 * R, 7.0 * R


def safe_rectangle(R: float, r: float) -> Tuple[float, float, float, float]:
    return -3.0 * R + r, 3.0 * R - r, -3.0 * R + r, 9.0 * R - r


def _inside(points: np.ndarray, rect) -> np.ndarray:
    x0, x1, y0, y1 = rect
    return (points[..., 0] >= x0) & (points[..., 0] <= x1) & (points[..., 1] >= y0) & (points[..., 1] <= y1)


def _check_start(z0, R: float) -> np.ndarray:
    z = np.asarray(z0, dtype=float)
    if np.any(np.abs(z) > 2.0 * R):
        raise PreconditionError(f"z0={tuple(z)} fuera de [-2R, 2R]²")
    return z


def ancestral_walk_event(a: Annulus, T: int, z0, R: float, walks: int, rng: SeedLike) -> np.ndarray:
    """
    Evento E sobre `walks` paseos independientes de T pasos uniformes en el anillo.

    El linaje de un superviviente elegido al azar es un paseo de este tipo,
    independiente de la genealogía. E: posición final en el cuadrado objetivo y
    todos los antepasados (tiempos 0..T-1) dentro del rectángulo seguro.
    """
    gen = as_generator(rng)
    z = _check_start(z0, R)
    target, safe = target_square(R), safe_rectangle(R, a.r)
    out = np.zeros(walks, dtype=bool)
    if T == 0:
        out[:] = bool(_inside(z, target))
        return out
    per_chunk = max(1, _WALK_CHUNK // T)
    done = 0
    while done < walks:
        m = min(per_chunk, walks - done)
        steps = sample_annulus(a, m * T, gen).reshape(m, T, 2)
        pos = z + np.cumsum(steps, axis=1)
        ancestors_ok = _inside(pos[:, :-1, :], safe).all(axis=1) & bool(_inside(z, safe))
        out[done : done + m] = ancestors_ok & _inside(pos[:, -1, :], target)
        done += m
    return out


def _full_tree(a: Annulus, eta: float, K: int, T: int, z: np.ndarray, R: float, gen, record_path: bool):
    safe, target = safe_rectangle(R, a.r), target_square(R)
    pos = z.reshape(1, 2)
    ok = np.array([True])
    parents: List[np.ndarray] = []
    layers: List[np.ndarray] = [pos]
    for _ in range(T):
        if len(pos) == 0:
            break
        offspring = gen.poisson(1.0 + eta, size=len(pos))
        idx = np.repeat(np.arange(len(pos)), offspring)
        if idx.size > K:
            idx = idx[np.sort(gen.choice(idx.size, size=K, replace=False))]
        ok = (ok & _inside(pos, safe))[idx]
        pos = pos[idx] + sample_annulus(a, idx.size, gen)
        if record_path:
            parents.append(idx)
            layers.append(pos)
    if len(pos) == 0:
        return SpatialRun(survived=False, event_E=False, final_count=0), []
    pick = int(gen.integers(len(pos)))
    event = bool(ok[pick] and _inside(pos[pick], target))
    path: List[SpatialNode] = []
    if record_path:
        node = pick
        for t in range(len(parents), 0, -1):
            parent = int(parents[t - 1][node])
            path.append(SpatialNode(position=tuple(layers[t][node]), parent=parent, birth_time=t))
            node = parent
        path.append(SpatialNode(position=tuple(layers[0][0]), parent=None, birth_time=0))
        path.reverse()
    run = SpatialRun(survived=True, event_E=event, final_count=int(len(pos)), position=tuple(pos[pick]))
    return run, path


def spatial_branching_run(
    a: Annulus,
    K: int,
    T: int,
    z0,
    R: float,
    rng: SeedLike,
    eta: Optional[float] = None,
    mode: BranchingMode = BranchingMode.ANCESTRAL,
    record_path: bool = False,
):
    """
    Una realización de T_A con tope K.

    Args:
        a: Anillo de los pasos
        K: Tope por generación (K = 0 nunca sobrevive)
        T: Horizonte en pasos
        z0: Posición de la raíz, en [-2R, 2R]²
        R: Escala de bloque
        rng: Semilla o Generator
        eta: Supercriticidad; por defecto |A| - 1 (campo de intensidad 1)
        mode: ANCESTRAL simula solo conteos más el linaje elegido; FULL_TREE simula cada nodo
        record_path: En FULL_TREE, devuelve también el linaje como lista de SpatialNode

    Returns:
        SpatialRun, o (SpatialRun, linaje) si record_path
    """
    gen = as_generator(rng)
    z = _check_start(z0, R)
    eta = area(a) - 1.0 if eta is None else eta
    if K <= 0 and T > 0:
        run = SpatialRun(survived=False, event_E=False, final_count=0)
        return (run, []) if record_path else run

    if BranchingMode(mode) == BranchingMode.FULL_TREE or record_path:
        run, path = _full_tree(a, eta, K, T, z, R, gen, record_path)
        return (run, path) if record_path else run

    final = int(gw_batch(GWConfig(eta=eta, K=K, T=T), 1, gen, record=False)[0])
    if final == 0:
        return SpatialRun(survived=False, event_E=False, final_count=0)
    event = bool(ancestral_walk_event(a, T, z, R, 1, gen)[0])
    return SpatialRun(survived=True, event_E=event, final_count=final)


def spatial_event_frequency(
    a: Annulus,
    K: int,
    T: int,
    z0,
    R: float,
    runs: int,
    rng: SeedLike,
    eta: Optional[float] = None,
) -> SpatialEventEstimate:
    """P(E | supervivencia) sobre `runs` realizaciones, supervivencia vectorizada"""
    gen = as_generator(rng)
    eta = area(a) - 1.0 if eta is None else eta
    if K <= 0:
        survivors = 0
    else:
        final = gw_batch(GWConfig(eta=eta, K=K, T=T), runs, gen, record=False)
        survivors = int(np.count_nonzero(final))
    events = int(ancestral_walk_event(a, T, z0, R, survivors, gen).sum()) if survivors else 0
    freq = events / survivors if survivors else 0.0
    logger.info(f"T_A: {survivors}/{runs} supervivientes, P(E|sup) = {freq:.4f} (R/r={R / a.r:g}, T={T})")
    return SpatialEventEstimate(
        runs=runs,
        survived=survivors,
        events=events,
        conditional_frequency=freq,
        stderr=binomial_stderr(events, survivors),
        T=T,
        R_over_r=R / a.r,
    )
