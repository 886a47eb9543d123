"""
Cálculo de parámetros de la renormalización por bloques.

K, T y N se derivan de (η, R/r, n) y de la escala de horizonte τ (T = ⌊τ(R/r)²⌋);
las cuatro desigualdades restantes se evalúan como banderas porque a escala de
simulación no pueden cumplirse todas a la vez.
"""
import logging
import math
from typing import Dict, Optional

from pydantic import BaseModel, Field

from app.core.errors import InvalidParameterError
from app.geometry.annulus import Annulus, Norm, area

logger = logging.getLogger(__name__)

EQ6_TARGET = -math.log(0.1)


class RenormParams(BaseModel):
    eta: float = Field(..., gt=0)
    r: float = Field(..., gt=0)
    eps: float = Field(..., gt=0, le=1)
    R: float = Field(..., gt=0, description="Semilado de bloque; los cuadrados miden 6R")
    n: int = Field(..., ge=1)
    K: float = Field(..., gt=0)
    N: float = Field(..., gt=0)
    T: int = Field(..., ge=0)
    horizon_scale: float = Field(1.0, gt=0, description="τ: T = ⌊τ(R/r)²⌋")
    c0: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    K_overridden: bool = False

    class Config:
        frozen = True

    @property
    def ratio(self) -> float:
        return self.R / self.r

    @property
    def horizon(self) -> float:
        """τ(R/r)², el horizonte de la fase 1 sin redondear"""
        return self.horizon_scale * self.ratio ** 2

    @property
    def annulus(self) -> Annulus:
        return Annulus(norm=Norm.ROUND, r=self.r, eps=self.eps)

    @property
    def intensity(self) -> float:
        """Intensidad del campo que da |A| = 1 + η vecinos esperados"""
        return (1.0 + self.eta) / area(self.annulus)

    @property
    def cap(self) -> int:
        return max(1, int(math.floor(self.K + 1e-9)))

    @property
    def budget(self) -> int:
        return int(math.floor(self.N + 1e-9))

    @property
    def steps(self) -> int:
        """Pasos de crecimiento de la segunda fase: ⌊R/r⌋"""
        return int(math.floor(self.ratio + 1e-9))

    @property
    def separation(self) -> float:
        return separation_radius(self.r, self.eps)

    # === BANDERAS ===

    def eq1_residual(self) -> float:
        target = self.horizon
        return abs(math.exp(self.eta * self.K) * self.eta / 3.0 - target) / target

    def flags(self) -> Dict[str, bool]:
        horizon = self.horizon
        root = math.sqrt(self.eps)
        spread = 3 * self.N + self.n + self.n * self.K * horizon
        return {
            "eq1": self.eq1_residual() < 1e-9,
            "eq2": horizon * self.c2 * spread * root <= self.c0 / 2.0,
            "eq3": self.c2 * (spread + self.n * self.ratio) * root <= self.eta / 2.0,
            "eq4": abs(self.N - (self.n * self.K * horizon + self.n * self.ratio)) <= 1e-9 * self.N,
            "eq5": math.log(self.n) <= self.ratio * math.log1p(self.eta / 2.0),
            "eq6": self.c0 * self.n * self.eta ** 2 / 120.0 >= EQ6_TARGET,
        }

    def all_constraints_hold(self) -> bool:
        return all(self.flags().values())


def separation_radius(r: float, eps: float) -> float:
    """
    Separación mínima entre puntos probados: r·min(√ε, 1-ε).

    Coincide con r√ε para ε <= (3-√5)/2; por encima, r√ε excedería el radio interior
    y la bola de un nodo taparía su propio anillo.
    """
    return r * min(math.sqrt(eps), 1.0 - eps)


def cap_from_horizon(eta: float, ratio: float, horizon_scale: float = 1.0) -> float:
    """K = (1/η)·log(3τR²/(ηr²)), de modo que e^{ηK}η/3 = τ(R/r)²"""
    return math.log(3.0 * horizon_scale * ratio * ratio / eta) / eta


def minimal_n(c0: float, eta: float) -> int:
    """Menor n entero con c0·n·η²/120 >= -log(0.1)"""
    return int(math.ceil(n_bound(c0, eta) - 1e-9))


def n_bound(c0: float, eta: float) -> float:
    return 120.0 * EQ6_TARGET / (c0 * eta * eta)


def minimal_ratio(n: int, eta: float) -> int:
    """Menor R/r entero con n <= (1 + η/2)^{R/r}"""
    return int(math.ceil(math.log(n) / math.log1p(eta / 2.0) - 1e-9))


def derive_params(
    eta: float,
    r: float = 1.0,
    eps: float = 1.0,
    c0: Optional[float] = None,
    c2: Optional[float] = None,
    c3: Optional[float] = None,
    c4: Optional[float] = None,
    n: Optional[int] = None,
    R_over_r: Optional[float] = None,
    K: Optional[float] = None,
    horizon_scale: Optional[float] = None,
) -> RenormParams:
    """
    Rellena K, T y N y evalúa las banderas de restricción.

    Args:
        eta: Exceso de área, |A| = 1 + η
        r: Radio exterior del anillo
        eps: Grosor relativo
        c0, c2, c3, c4: Constantes (por defecto 1, arbitrarias)
        n: Tamaño de P; por defecto ⌈c3·η⁻²⌉
        R_over_r: Escala de bloque; por defecto ⌈c4·η⁻¹|log η|⌉
        K: Tope de ramificación; por defecto el que fija el horizonte T
        horizon_scale: τ, con T = ⌊τ(R/r)²⌋; por defecto 1

    Returns:
        RenormParams
    """
    if eta <= 0:
        raise InvalidParameterError(f"eta debe ser > 0, recibido {eta}")
    if not 0 < eps <= 1:
        raise InvalidParameterError(f"eps debe estar en (0, 1], recibido {eps}")
    c0 = 1.0 if c0 is None else c0
    c2 = 1.0 if c2 is None else c2
    c3 = 1.0 if c3 is None else c3
    c4 = 1.0 if c4 is None else c4
    tau = 1.0 if horizon_scale is None else horizon_scale
    if tau <= 0:
        raise InvalidParameterError(f"la escala de horizonte debe ser > 0, recibido {tau}")

    if n is None:
        n = max(1, int(math.ceil(c3 / (eta * eta) - 1e-9)))
    if R_over_r is None:
        R_over_r = max(1, int(math.ceil(c4 * abs(math.log(eta)) / eta - 1e-9)))
    if R_over_r <= 0:
        raise InvalidParameterError("R/r debe ser > 0")
    overridden = K is not None
    if K is None:
        K = cap_from_horizon(eta, R_over_r, tau)
    if K <= 0:
        raise InvalidParameterError(f"K={K} no es positivo; aumente R/r")

    T = int(math.floor(tau * R_over_r ** 2 + 1e-9))
    N = n * K * tau * R_over_r ** 2 + n * R_over_r
    params = RenormParams(
        eta=eta, r=r, eps=eps, R=R_over_r * r, n=n, K=K, N=N, T=T, horizon_scale=tau,
        c0=c0, c2=c2, c3=c3, c4=c4, K_overridden=overridden,
    )
    logger.debug(f"Parámetros: n={n}, R/r={R_over_r}, K={K:.3f}, N={N:.1f}, banderas={params.flags()}")
    return params
