"""
Estimación del área crítica n_c(ε) por bisección sobre la probabilidad de cruce.

El criterio es el punto de cruce 0.5 a L/r fijo: una convención de tamaño finito,
no la constante de volumen infinito. Se trabaja con r = 1 y se varía la intensidad
(λ = |A|/|A_1|), que por escalado equivale a intensidad 1 y r variable.
Un mismo campo marcado sirve para todas las sondas (acoplamiento por adelgazamiento),
así que la curva de sondas es monótona en cada ensayo.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from app.core.config import settings
from app.core.errors import InvalidParameterError, PreconditionError
from app.core.parallel import run_trials
from app.core.rng import SeedLike, as_generator, child_seed
from app.core.stats import binomial_stderr, crossing_point, wilson_interval
from app.geometry.annulus import Annulus, Norm, area, lower_bound_nc
from app.graph.percgraph import ClusterStats, build_graph, cluster_stats
from app.pointfield.field import Box, sample_poisson

logger = logging.getLogger(__name__)

MIN_SIDE = 10.0


class CrossingEstimate(BaseModel):
    annulus_area: float
    eps: float
    norm: Norm
    L: float
    trials: int
    crossings: int
    frequency: float
    stderr: float
    wilson: Tuple[float, float]


class Probe(BaseModel):
    area: float
    crossings: int
    trials: int

    @property
    def frequency(self) -> float:
        return self.crossings / self.trials if self.trials else 0.0


class ThresholdEstimate(BaseModel):
    eps: float
    norm: Norm
    L: float
    trials: int
    nc_hat: float
    ci: Tuple[float, float]
    bracket: Tuple[float, float]
    probes: List[Probe]
    lower_bound: float
    convention: str = "0.5-crossing at fixed L/r (finite-size)"

    def curve(self) -> List[Tuple[float, float]]:
        return [(p.area, p.frequency) for p in sorted(self.probes, key=lambda p: p.area)]


def _crossing_trial(task) -> dict:
    """Un campo de intensidad 1 en una caja de lado L·r (ejecutable en otro proceso)"""
    seed, norm, r, eps, L = task
    a = Annulus(norm=norm, r=r, eps=eps)
    box = Box.square(L * r)
    stats: ClusterStats = cluster_stats(build_graph(sample_poisson(box, 1.0, seed, annulus=a), a))
    return {"seed": seed, **stats.dict()}


def crossing_probability(
    a: Annulus,
    L: float,
    trials: int,
    rng: SeedLike,
    workers: int = 1,
    rows: Optional[list] = None,
) -> CrossingEstimate:
    """
    Fracción de campos independientes con cruce izquierda-derecha de G_A.

    Args:
        a: Anillo
        L: Lado de la caja en unidades de r (>= 10)
        trials: Número de campos
        rng: Semilla o Generator
        workers: Procesos paralelos
        rows: Si se da, recibe una fila por ensayo (para CSV)
    """
    if L < MIN_SIDE:
        raise PreconditionError(f"L={L} < {MIN_SIDE}: la caja debe medir al menos 10r")
    gen = as_generator(rng)
    tasks = [(child_seed(gen), a.norm.value, a.r, a.eps, L) for _ in range(trials)]
    results = run_trials(_crossing_trial, tasks, workers=workers, desc="cruces")
    k = sum(int(row["crossing_lr"]) for row in results)
    if rows is not None:
        for row in results:
            rows.append({"area": area(a), "eps": a.eps, "norm": a.norm.value, "L": L, **row})
    return CrossingEstimate(
        annulus_area=area(a),
        eps=a.eps,
        norm=a.norm,
        L=L,
        trials=trials,
        crossings=k,
        frequency=k / trials if trials else 0.0,
        stderr=binomial_stderr(k, trials),
        wilson=wilson_interval(k, trials),
    )


def _probe_trial(task) -> bool:
    """Regenera el campo marcado de la semilla y lo adelgaza a la intensidad de la sonda"""
    seed, norm, eps, L, top_area, probe_area = task
    unit = Annulus(norm=norm, r=1.0, eps=eps)
    gen = np.random.default_rng(seed)
    field = sample_poisson(Box.square(L), top_area / area(unit), gen, cell_size=1.0)
    marks = gen.random(len(field))
    thinned = field.subset(marks < probe_area / top_area)
    return cluster_stats(build_graph(thinned, unit)).crossing_lr


class _Prober:
    def __init__(self, eps: float, norm: Norm, L: float, seeds: List[int], top_area: float, workers: int):
        self.eps, self.norm, self.L = eps, Norm(norm), L
        self.seeds, self.top_area, self.workers = seeds, top_area, workers
        self.probes: List[Probe] = []

    def __call__(self, probe_area: float) -> float:
        tasks = [(s, self.norm.value, self.eps, self.L, self.top_area, probe_area) for s in self.seeds]
        k = sum(run_trials(_probe_trial, tasks, workers=self.workers, desc=f"|A|={probe_area:.4f}"))
        probe = Probe(area=probe_area, crossings=int(k), trials=len(self.seeds))
        self.probes.append(probe)
        logger.info(f"Sonda ε={self.eps} {self.norm.value} L={self.L}: |A|={probe_area:.5f} -> {probe.frequency:.3f}")
        return probe.frequency


def _bootstrap_ci(probes: List[Probe], resamples: int, gen: np.random.Generator, level: float = 0.95):
    ordered = sorted(probes, key=lambda p: p.area)
    xs = np.array([p.area for p in ordered])
    n = np.array([p.trials for p in ordered])
    freq = np.array([p.frequency for p in ordered])
    draws = gen.binomial(n, freq, size=(resamples, len(ordered))) / n
    points = np.array([crossing_point(xs, row) for row in draws])
    tail = (1.0 - level) / 2.0
    return float(np.quantile(points, tail)), float(np.quantile(points, 1.0 - tail))


def estimate_nc(
    eps: float,
    norm: Norm,
    L: float,
    trials: int,
    bracket: Tuple[float, float],
    tol: float,
    rng: SeedLike,
    bootstrap: Optional[int] = None,
    workers: int = 1,
) -> ThresholdEstimate:
    """
    Bisección en |A| hasta el cruce 0.5, con tolerancia `tol`.

    Args:
        eps: Grosor relativo del anillo
        norm: Redondo o cuadrado
        L: Lado de la caja en unidades de r
        trials: Campos por sonda (los mismos campos en todas las sondas)
        bracket: (a_lo, a_hi) con frecuencia < 0.5 en a_lo y > 0.5 en a_hi
        tol: Anchura final del intervalo de bisección
        rng: Semilla o Generator
        bootstrap: Remuestreos para el intervalo de confianza (por defecto PERC_BOOTSTRAP)
        workers: Procesos paralelos

    Returns:
        ThresholdEstimate con la curva de sondas
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise InvalidParameterError(f"intervalo inválido {bracket}")
    if L < MIN_SIDE:
        raise PreconditionError(f"L={L} < {MIN_SIDE}")
    gen = as_generator(rng)
    seeds = [child_seed(gen) for _ in range(trials)]
    probe = _Prober(eps, norm, L, seeds, hi, workers)

    f_lo, f_hi = probe(lo), probe(hi)
    if not (f_lo < 0.5 < f_hi):
        raise InvalidParameterError(
            f"intervalo inválido: frecuencia {f_lo:.3f} en {lo} y {f_hi:.3f} en {hi}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid) < 0.5:
            lo = mid
        else:
            hi = mid

    curve = sorted(probe.probes, key=lambda p: p.area)
    nc_hat = crossing_point([p.area for p in curve], [p.frequency for p in curve])
    resamples = settings.bootstrap_resamples if bootstrap is None else bootstrap
    ci = _bootstrap_ci(curve, resamples, gen)
    logger.info(f"✅ n_c(ε={eps}, {Norm(norm).value}, L={L}) ≈ {nc_hat:.4f} IC95 [{ci[0]:.4f}, {ci[1]:.4f}]")
    return ThresholdEstimate(
        eps=eps,
        norm=norm,
        L=L,
        trials=trials,
        nc_hat=nc_hat,
        ci=ci,
        bracket=(float(bracket[0]), float(bracket[1])),
        probes=curve,
        lower_bound=lower_bound_nc(eps),
    )


def finite_size_report(
    eps: float,
    norm: Norm,
    L: float,
    trials: int,
    bracket: Tuple[float, float],
    tol: float,
    rng: SeedLike,
    bootstrap: Optional[int] = None,
    workers: int = 1,
) -> dict:
    """Estimaciones a L y 2L para exponer la deriva de tamaño finito"""
    gen = as_generator(rng)
    small = estimate_nc(eps, norm, L, trials, bracket, tol, gen, bootstrap, workers)
    large = estimate_nc(eps, norm, 2 * L, trials, bracket, tol, gen, bootstrap, workers)
    return {
        "eps": eps,
        "norm": Norm(norm).value,
        "L": small.dict(),
        "2L": large.dict(),
        "drift": large.nc_hat - small.nc_hat,
    }
