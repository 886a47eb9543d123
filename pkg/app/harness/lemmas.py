"""
Registro de comprobaciones de los resultados teóricos.

Cada comprobación recibe un multiplicador de presupuesto (escala los tamaños de muestra)
y un generador, y devuelve uno o más LemmaReport legibles por máquina.
"""
import logging
import math
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel

from app.branching.galton_watson import GWConfig, gw_batch, martingale_check, solve_lambda, truncated_survival
from app.branching.spatial import horizon, spatial_event_frequency
from app.core.errors import UnknownLemmaError
from app.core.rng import SeedLike, as_generator
from app.core.stats import mean_stderr
from app.geometry.annulus import Annulus, Norm, area, area_to_radius
from app.geometry.overlap import (
    cluster_overlap_area,
    interval_overlap_integral,
    lemma3_functional,
    min_overlap_ratio,
    square_overlap_integral,
    square_six_term_bound,
    sup_overlap_scaled,
    theorem5_rigorous,
)
from app.renorm.oriented import oriented_bond_percolation
from app.renorm.params import cap_from_horizon, derive_params, minimal_n, minimal_ratio, n_bound

logger = logging.getLogger(__name__)


class LemmaReport(BaseModel):
    lemma: str
    statistic: float
    bound: float
    slack: float
    verdict: bool
    details: Dict[str, Any] = {}


Check = Callable[[float, np.random.Generator], List[LemmaReport]]
REGISTRY: Dict[str, Tuple[str, Check]] = {}


def register(lemma_id: str, description: str):
    def decorator(fn: Check) -> Check:
        REGISTRY[lemma_id] = (description, fn)
        return fn

    return decorator


def _n(base: int, budget: float, floor: int = 10) -> int:
    return max(floor, int(round(base * budget)))


def _report(lemma: str, statistic: float, bound: float, upper: bool, **details) -> LemmaReport:
    """upper=True: se exige statistic <= bound; si no, statistic >= bound"""
    slack = bound - statistic if upper else statistic - bound
    return LemmaReport(lemma=lemma, statistic=statistic, bound=bound, slack=slack, verdict=slack >= 0, details=details)


# === GEOMETRÍA ===

@register("lemma2", "mínimo de |A(x)∩A(y)|/|A| sobre d en [r(1-ε), r] >= ε/(π√3)")
def _lemma2(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    reports = []
    for eps in (0.05, 0.1, 0.2, 0.4):
        ext = min_overlap_ratio(Annulus(r=1.0, eps=eps), grid_steps=512)
        bound = eps / (math.pi * math.sqrt(3.0)) - 1e-9
        reports.append(_report("lemma2", ext.ratio, bound, upper=False, eps=eps, d=ext.d))
    return reports


@register("lemma3", "funcional |A|³ - ∫∫|(x+A)∩(y+A)| < 1 para el anillo cuadrado con |A| = 1.014")
def _lemma3(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    eps = 0.25
    a = Annulus(norm=Norm.SQUARE, r=area_to_radius(1.014, eps, Norm.SQUARE), eps=eps)
    est = lemma3_functional(a, _n(1_000_000, budget, 1000), gen)
    return [_report("lemma3", est.value + 3 * est.stderr, 1.0, upper=True, value=est.value, stderr=est.stderr, eps=eps)]


@register("lemma4", "∫_{I×I}|(x+I)∩(y+I)| = (2/3)|I|³ por cuadratura")
def _lemma4(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    reports = []
    for c in (0.25, 1.0, 2.0):
        res = interval_overlap_integral(c)
        reports.append(_report("lemma4", res.rel_error, 1e-6, upper=True, c=c, closed_form=res.closed_form, quadrature=res.quadrature))
    return reports


@register("lemma10", "sup escalado acotado (redondo) y exponente -1/2 en ε (cuadrado)")
def _lemma10(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    eps_grid = (0.04, 0.01, 0.0025)
    rounds = [sup_overlap_scaled(Annulus(r=1.0, eps=e)).ratio for e in eps_grid]
    squares = [sup_overlap_scaled(Annulus(norm=Norm.SQUARE, r=1.0, eps=e)).ratio for e in eps_grid]
    spread = max(rounds) / min(rounds)
    slope = float(np.polyfit(np.log(eps_grid), np.log(squares), 1)[0])
    return [
        _report("lemma10", spread, 2.0, upper=True, norm="round", ratios=rounds),
        _report("lemma10", abs(slope + 0.5), 0.1, upper=True, norm="square", slope=slope, ratios=squares),
    ]


def _admissible_centers(a: Annulus, k: int, gen: np.random.Generator) -> np.ndarray:
    rho = a.ball_radius
    reach = 2.0 * a.r + rho
    centers = [np.zeros(2)]
    while len(centers) < k + 1:
        p = gen.uniform(-reach, reach, size=2)
        if np.hypot(*p) <= reach and all(np.hypot(*(p - c)) >= rho for c in centers):
            centers.append(p)
    return np.array(centers)


# ĉ₂ fijo; el paso "fit" comprueba que el máximo observado no lo supera
LEMMA11_C2 = 2.0


@register("lemma11", "|A_i ∩ ⋃(A_j ∪ B_j)| <= ĉ₂·k·|A|·√ε en configuraciones admisibles (ε = 0.05, k = 10)")
def _lemma11(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    eps, k = 0.05, 10
    a = Annulus(r=1.0, eps=eps)
    scale = k * area(a) * math.sqrt(eps)
    configs = _n(100, budget, 5)
    fit_samples = _n(100_000, budget, 2000)
    fitted = 0.0
    for _ in range(configs):
        rep = cluster_overlap_area(a, _admissible_centers(a, k, gen), 0, fit_samples, gen)
        fitted = max(fitted, (rep.area + 3 * rep.mc_stderr) / scale)
    samples = _n(1_000_000, budget, 10_000)
    held_out = cluster_overlap_area(a, _admissible_centers(a, k, gen), 0, samples, gen)
    return [
        _report("lemma11", fitted, LEMMA11_C2, upper=True, step="fit", configs=configs, samples=fit_samples),
        _report(
            "lemma11", held_out.area, LEMMA11_C2 * scale, upper=True, step="held-out",
            samples=samples, stderr=held_out.mc_stderr, c2_hat=fitted,
        ),
    ]


@register("thm5-rigorous", "1.014³·(23/24) < 1 en aritmética exacta")
def _thm5_rigorous(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    ok, value = theorem5_rigorous("1.014")
    return [LemmaReport(lemma="thm5-rigorous", statistic=float(value), bound=1.0, slack=float(1 - value), verdict=ok, details={"exact": str(value)})]


@register("thm5-chain", "∫∫|(x+A)∩(y+A)| >= seis términos >= |A|³/24 (anillo cuadrado, ε ∈ {0.1, 0.3})")
def _thm5_chain(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    reports = []
    for eps in (0.1, 0.3):
        a = Annulus(norm=Norm.SQUARE, r=area_to_radius(1.014, eps, Norm.SQUARE), eps=eps)
        six = square_six_term_bound(a)
        est = square_overlap_integral(a, _n(200_000, budget, 1000), gen)
        reports.append(_report("thm5-chain", six, area(a) ** 3 / 24.0, upper=False, eps=eps, step="six-term >= |A|^3/24"))
        reports.append(
            _report(
                "thm5-chain", est.value + 3 * est.stderr, six, upper=False, eps=eps,
                step="integral >= six-term", value=est.value, stderr=est.stderr,
            )
        )
    return reports


# === RAMIFICACIÓN ===

@register("lemma7", "Galton–Watson Poisson(1+η): media, varianza y P(N_t >= (1+η)^t)")
def _lemma7(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    eta, t = 0.1, 20
    runs = _n(100_000, budget, 1000)
    final = gw_batch(GWConfig(eta=eta, T=t), runs, gen, record=False).astype(float)
    mean, se = mean_stderr(final)
    expected_mean = (1 + eta) ** t
    expected_var = expected_mean * (expected_mean - 1) / eta
    var = float(final.var(ddof=1))
    hit = float(np.mean(final >= expected_mean))
    hit_se = math.sqrt(hit * (1 - hit) / runs)
    return [
        _report("lemma7", abs(mean - expected_mean), 3 * se, upper=True, quantity="mean", mean=mean),
        _report("lemma7", abs(var - expected_var) / expected_var, 0.05, upper=True, quantity="variance", variance=var),
        _report("lemma7", hit + 3 * hit_se, eta * math.exp(-2 * (1 + eta)), upper=False, quantity="hit", frequency=hit),
    ]


@register("lemma8", "supervivencia del proceso truncado >= η/3 y cota de extinción")
def _lemma8(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    eta, K = 0.1, 100
    T = int(math.floor(math.exp(eta * K) * eta / 3.0))
    est = truncated_survival(eta, K, T, _n(10_000, budget, 200), gen)
    lam = solve_lambda(eta)
    residual = abs((1 - math.exp(-lam)) * (1 + eta) - lam)
    mart = martingale_check(eta, 5, _n(100_000, budget, 1000), gen)
    return [
        _report("lemma8", est.frequency + 3 * est.stderr, est.bound, upper=False, quantity="survival", T=T, frequency=est.frequency),
        _report("lemma8", 1 - est.frequency - 3 * est.stderr, est.extinction_bound, upper=True, quantity="extinction"),
        _report("lemma8", residual, 1e-12, upper=True, quantity="lambda residual", lam=lam),
        _report("lemma8", abs(mart.estimate - mart.expected), 3 * mart.stderr + 1e-12, upper=True, quantity="martingale"),
    ]


@register("lemma9", "P(E | supervivencia) > 0 y estable entre R/r = 20 y 40")
def _lemma9(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    a = Annulus(r=1.0, eps=0.5)
    eta, K, tau = 0.1, 100, 16.0
    survivors = _n(10_000, budget, 100)
    runs = int(math.ceil(survivors / 0.15))
    estimates = []
    for ratio in (20.0, 40.0):
        R = ratio * a.r
        estimates.append(spatial_event_frequency(a, K, horizon(R, a.r, tau), (0.0, 2.0 * R), R, runs, gen, eta=eta))
    low, high = estimates
    sigma = math.hypot(low.stderr, high.stderr)
    gap = abs(low.conditional_frequency - high.conditional_frequency)
    details = {e.R_over_r: {"p": e.conditional_frequency, "stderr": e.stderr, "survived": e.survived} for e in estimates}
    return [
        _report("lemma9", min(low.conditional_frequency, high.conditional_frequency), 0.0, upper=False, quantity="positive", estimates=details),
        _report("lemma9", gap, 2 * sigma, upper=True, quantity="stability", estimates=details),
    ]


# === PARÁMETROS Y PERCOLACIÓN ORIENTADA ===

@register("eq1-consistency", "e^{ηK}η/3 = (R/r)² con K = (1/η)log(3R²/(ηr²))")
def _eq1(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    worst = 0.0
    for _ in range(20):
        eta = float(gen.uniform(0.01, 1.0))
        ratio = float(gen.uniform(2.0, 500.0))
        worst = max(worst, derive_params(eta, R_over_r=ratio).eq1_residual())
    return [_report("eq1-consistency", worst, 1e-9, upper=True)]


@register("eq-worked-example", "c0 = 0.1, η = 0.1: n >= 276310.2 y R/r >= 257")
def _worked(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    bound = n_bound(0.1, 0.1)
    n = minimal_n(0.1, 0.1)
    ratio = minimal_ratio(n, 0.1)
    ok = int(bound) == 276310 and n == 276311 and ratio == 257
    example = derive_params(0.1, R_over_r=10)
    k_ok = abs(example.K - 10 * math.log(3000)) < 1e-9 and abs(cap_from_horizon(0.1, 10) - example.K) == 0
    return [
        LemmaReport(
            lemma="eq-worked-example", statistic=float(n), bound=bound, slack=n - bound, verdict=ok,
            details={"n_bound": bound, "n": n, "R_over_r": ratio},
        ),
        LemmaReport(
            lemma="eq-worked-example", statistic=example.K, bound=10 * math.log(3000), slack=0.0, verdict=k_ok,
            details={"eta": 0.1, "R_over_r": 10},
        ),
    ]


@register("oriented-0.9", "percolación orientada p = 0.9, profundidad 100: supervivencia >= 0.5")
def _oriented(budget: float, gen: np.random.Generator) -> List[LemmaReport]:
    est = oriented_bond_percolation(0.9, 100, _n(1000, budget, 50), gen)
    return [_report("oriented-0.9", est.frequency, 0.5, upper=False, trials=est.trials)]


def available_lemmas() -> Dict[str, str]:
    return {key: description for key, (description, _) in REGISTRY.items()}


def lemma_check(which: str, budget: float = 1.0, rng: SeedLike = None) -> List[LemmaReport]:
    """
    Ejecuta una comprobación del registro, o todas con which="all".

    Raises:
        UnknownLemmaError: si el identificador no está registrado
    """
    gen = as_generator(rng)
    if which == "all":
        ids = list(REGISTRY)
    elif which in REGISTRY:
        ids = [which]
    else:
        raise UnknownLemmaError(f"comprobación desconocida '{which}'; disponibles: {sorted(REGISTRY)}")
    reports: List[LemmaReport] = []
    for lemma_id in ids:
        _, fn = REGISTRY[lemma_id]
        results = fn(budget, gen)
        for rep in results:
            icon = "✅" if rep.verdict else "❌"
            logger.info(f"{icon} {lemma_id}: estadístico={rep.statistic:.6g} cota={rep.bound:.6g} holgura={rep.slack:.3g}")
        reports.extend(results)
    return reports
