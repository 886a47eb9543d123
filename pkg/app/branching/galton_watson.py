import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, validator
from scipy.optimize import bisect

from app.core.errors import InvalidParameterError, PreconditionError
from app.core.rng import SeedLike, as_generator
from app.core.stats import binomial_stderr, mean_stderr
from app.geometry.annulus import Annulus, Norm

logger = logging.getLogger(__name__)


class GWConfig(BaseModel):
    """Proceso de Galton–Watson con descendencia Poisson(1+η), truncado a K por generación"""

    eta: float = Field(..., gt=-1)
    K: Optional[int] = Field(None, description="Tope por generación; None = sin tope, 0 = extinción en t = 1")
    T: int = Field(..., ge=0)
    count_only: bool = True
    initial: int = Field(1, ge=0)

    class Config:
        frozen = True

    @validator("K")
    def _cap_non_negative(cls, value):
        if value is not None and value < 0:
            raise ValueError("K debe ser >= 0 cuando es finito")
        return value

    @property
    def mean(self) -> float:
        return 1.0 + self.eta


class GWTrace(BaseModel):
    N: List[int]
    survived: bool
    hit_target: bool


class SurvivalEstimate(BaseModel):
    eta: float
    K: int
    T: int
    runs: int
    frequency: float
    stderr: float
    bound: float
    lam: float
    extinction_bound: float
    precondition_ok: bool


class MartingaleReport(BaseModel):
    n_t: int
    lam: float
    estimate: float
    stderr: float
    expected: float


def _cap(counts, K: Optional[int]):
    return counts if K is None else np.minimum(counts, K)


def _trace(cfg: GWConfig, history: List[int]) -> GWTrace:
    final = history[-1]
    return GWTrace(N=history, survived=final > 0, hit_target=final >= cfg.mean ** cfg.T)


def gw_run(cfg: GWConfig, rng: SeedLike) -> GWTrace:
    """
    Una realización del proceso.

    En modo count_only la descendencia total de N_t nodos es un único Poisson(N_t(1+η))
    seguido de min(·, K). En modo nodo a nodo cada nodo sortea su descendencia y, si la
    generación supera K, se conservan K nodos elegidos al azar.
    """
    gen = as_generator(rng)
    history = [cfg.initial]
    n = cfg.initial
    for _ in range(cfg.T):
        if n == 0:
            history.append(0)
            continue
        if cfg.count_only:
            n = int(_cap(gen.poisson(n * cfg.mean), cfg.K))
        else:
            offspring = gen.poisson(cfg.mean, size=n)
            children = np.repeat(np.arange(n), offspring)
            if cfg.K is not None and children.size > cfg.K:
                children = children[np.sort(gen.choice(children.size, size=cfg.K, replace=False))]
            n = int(children.size)
        history.append(n)
    return _trace(cfg, history)


def gw_batch(cfg: GWConfig, runs: int, rng: SeedLike, record: bool = True) -> np.ndarray:
    """
    `runs` realizaciones en modo count_only, vectorizadas.

    Devuelve la matriz (runs, T+1) de poblaciones, o solo la última columna si record=False.
    """
    gen = as_generator(rng)
    n = np.full(runs, cfg.initial, dtype=np.int64)
    if not record:
        for _ in range(cfg.T):
            n = _cap(gen.poisson(n * cfg.mean), cfg.K).astype(np.int64)
        return n
    out = np.empty((runs, cfg.T + 1), dtype=np.int64)
    out[:, 0] = n
    for t in range(cfg.T):
        n = _cap(gen.poisson(n * cfg.mean), cfg.K).astype(np.int64)
        out[:, t + 1] = n
    return out


def _lambda_equation(lam: float, eta: float) -> float:
    return (1.0 - math.exp(-lam)) * (1.0 + eta) - lam


def solve_lambda(eta: float) -> float:
    """Raíz positiva de (1 - e^{-λ})(1 + η) = λ por bisección; siempre λ > η"""
    if eta <= 0:
        raise InvalidParameterError(f"eta debe ser > 0, recibido {eta}")
    # f(η) > 0 porque e^{η} > 1 + η, y f(1 + η) < 0
    if _lambda_equation(eta, eta) <= 0:
        raise InvalidParameterError(f"eta={eta} demasiado pequeño para la precisión de coma flotante")
    lam = bisect(_lambda_equation, eta, 1.0 + eta, args=(eta,), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(lam)


def survival_horizon_limit(eta: float, K: int) -> float:
    return math.exp(eta * K) * eta / 3.0


def truncated_survival(
    eta: float,
    K: int,
    T: int,
    runs: int,
    rng: SeedLike,
    allow_violation: bool = False,
) -> SurvivalEstimate:
    """
    Frecuencia de supervivencia hasta T del proceso truncado a K.

    Args:
        eta: Supercriticidad (> 0)
        K: Tope por generación
        T: Horizonte; debe cumplir T <= e^{ηK}η/3
        runs: Número de realizaciones
        rng: Semilla o Generator
        allow_violation: Si es True, una violación del horizonte solo genera un aviso

    Returns:
        SurvivalEstimate con la cota η/3 y la cota de extinción e^{-λ} + Te^{-λK}
    """
    limit = survival_horizon_limit(eta, K)
    ok = T <= limit
    if not ok:
        message = f"T={T} supera e^(ηK)η/3={limit:.3f}"
        if not allow_violation:
            raise PreconditionError(message)
        logger.warning(f"⚠️ {message}; se continúa en modo exploratorio")
    lam = solve_lambda(eta)
    cfg = GWConfig(eta=eta, K=K, T=T)
    final = gw_batch(cfg, runs, rng, record=False)
    alive = int(np.count_nonzero(final))
    freq = alive / runs
    return SurvivalEstimate(
        eta=eta,
        K=K,
        T=T,
        runs=runs,
        frequency=freq,
        stderr=binomial_stderr(alive, runs),
        bound=eta / 3.0,
        lam=lam,
        extinction_bound=math.exp(-lam) + T * math.exp(-lam * K),
        precondition_ok=ok,
    )


def martingale_check(eta: float, n_t: int, samples: int, rng: SeedLike) -> MartingaleReport:
    """Monte Carlo de E[e^{-λN_{t+1}} | N_t = n_t] frente a e^{-λ n_t}"""
    gen = as_generator(rng)
    lam = solve_lambda(eta)
    nxt = gen.poisson(n_t * (1.0 + eta), size=samples)
    mean, err = mean_stderr(np.exp(-lam * nxt))
    return MartingaleReport(n_t=n_t, lam=lam, estimate=mean, stderr=err, expected=math.exp(-lam * n_t))


def step_variance(a: Annulus) -> float:
    """
    Varianza por coordenada de un paso uniforme en el anillo redondo: r²(1 + (1-ε)²)/4.

    Integral polar de ρ² cos²θ con densidad ∝ ρ sobre [r(1-ε), r].
    """
    if a.norm != Norm.ROUND:
        raise InvalidParameterError("step_variance solo está definida para el anillo redondo")
    return a.r * a.r * (1.0 + (1.0 - a.eps) ** 2) / 4.0
