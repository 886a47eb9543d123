import logging
from typing import Any, Dict, List, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from app.branching.galton_watson import GWConfig, gw_batch, truncated_survival
from app.core.config import settings
from app.core.errors import PercolationError, UnknownLemmaError
from app.core.rng import stream
from app.geometry.annulus import Annulus, Norm, area_to_radius, lower_bound_nc
from app.harness.lemmas import LemmaReport, available_lemmas, lemma_check
from app.harness.threshold import CrossingEstimate, crossing_probability
from app.renorm.oriented import OrientedEstimate, oriented_bond_percolation
from app.renorm.params import derive_params

logger = logging.getLogger(__name__)

router = APIRouter()

SERVICE = "Percolation Toolkit"
VERSION = "1.0.0"

# === MODELOS DE REQUEST/RESPONSE ===


class LemmaCheckRequest(BaseModel):
    lemma: str = Field(..., min_length=1, description="Identificador de la comprobación o 'all'")
    budget: float = Field(default=0.05, gt=0, le=1.0, description="Multiplicador de los tamaños de muestra")
    seed: Optional[int] = Field(default=None, description="Semilla maestra; por defecto PERC_SEED")


class LemmaCheckResponse(BaseModel):
    lemma: str
    passed: bool
    reports: List[LemmaReport]


class CrossingRequest(BaseModel):
    eps: float = Field(..., gt=0, le=1)
    area: float = Field(..., gt=0, le=20, description="Área |A| del anillo")
    norm: Norm = Norm.ROUND
    L: float = Field(default=30.0, ge=10, le=200, description="Lado de la caja en unidades de r")
    trials: int = Field(default=50, ge=1, le=1000)
    seed: Optional[int] = None


class CrossingResponse(BaseModel):
    estimate: CrossingEstimate
    lower_bound_nc: float


class GWRequest(BaseModel):
    eta: float = Field(..., gt=-1)
    K: Optional[int] = Field(default=None, ge=1)
    T: int = Field(default=20, ge=0, le=5000)
    runs: int = Field(default=10_000, ge=1, le=200_000)
    allow_violation: bool = Field(default=True, description="Avisar en lugar de fallar si T > e^(ηK)η/3")
    seed: Optional[int] = None


class GWResponse(BaseModel):
    mean: List[float]
    extinct: List[float]
    survival: Optional[Dict[str, Any]] = None


class ParamsRequest(BaseModel):
    eta: float = Field(..., gt=0)
    r: float = Field(default=1.0, gt=0)
    eps: float = Field(default=1.0, gt=0, le=1)
    c0: Optional[float] = Field(default=None, gt=0)
    c2: Optional[float] = Field(default=None, gt=0)
    c3: Optional[float] = Field(default=None, gt=0)
    c4: Optional[float] = Field(default=None, gt=0)
    n: Optional[int] = Field(default=None, ge=1)
    R_over_r: Optional[float] = Field(default=None, gt=0)
    K: Optional[float] = Field(default=None, gt=0)
    horizon_scale: Optional[float] = Field(default=None, gt=0)


class ParamsResponse(BaseModel):
    params: Dict[str, Any]
    flags: Dict[str, bool]
    intensity: float


class OrientedRequest(BaseModel):
    p: float = Field(..., ge=0, le=1)
    depth: int = Field(default=100, ge=0, le=1000)
    trials: int = Field(default=1000, ge=1, le=20_000)
    seed: Optional[int] = None


def _seed(value: Optional[int]) -> int:
    return settings.seed if value is None else value


# === ENDPOINTS PRINCIPALES ===


@router.get("/health", response_model=Dict[str, str])
async def health_check():
    """Health check para verificar que el servicio está funcionando"""
    return {"status": "healthy", "service": SERVICE}


@router.get("/status")
async def get_service_status():
    """Estado del servicio con la configuración efectiva"""
    return {
        "status": "operational",
        "service": SERVICE,
        "version": VERSION,
        "settings": {
            "seed": settings.seed,
            "workers": settings.workers,
            "mc_samples": settings.mc_samples,
            "bootstrap_resamples": settings.bootstrap_resamples,
            "strict": settings.strict,
        },
        "lemmas": len(available_lemmas()),
    }


@router.get("/lemmas", response_model=Dict[str, str])
async def list_lemmas():
    """Comprobaciones registradas con su descripción"""
    return available_lemmas()


@router.post("/lemma-check", response_model=LemmaCheckResponse)
def run_lemma_check(request: LemmaCheckRequest):
    """
    Ejecuta una comprobación (o todas) con un presupuesto reducido
    """
    try:
        logger.info(f"Comprobación '{request.lemma}' con presupuesto {request.budget}")
        reports = lemma_check(request.lemma, request.budget, stream(_seed(request.seed), f"api/{request.lemma}"))
        return LemmaCheckResponse(lemma=request.lemma, passed=all(r.verdict for r in reports), reports=reports)
    except UnknownLemmaError as e:
        raise HTTPException(status_code=404, detail=str(e))
    except PercolationError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/crossing", response_model=CrossingResponse)
def crossing(request: CrossingRequest):
    """Probabilidad de cruce izquierda-derecha con intervalo de Wilson"""
    try:
        r = area_to_radius(request.area, request.eps, request.norm)
        a = Annulus(norm=request.norm, r=r, eps=request.eps)
        est = crossing_probability(a, request.L, request.trials, stream(_seed(request.seed), "api/crossing"))
        return CrossingResponse(estimate=est, lower_bound_nc=lower_bound_nc(request.eps))
    except PercolationError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/branching/gw", response_model=GWResponse)
def branching_gw(request: GWRequest):
    """Curvas de media y extinción de Galton–Watson; supervivencia truncada si hay K"""
    try:
        rng = stream(_seed(request.seed), "api/gw")
        paths = gw_batch(GWConfig(eta=request.eta, K=request.K, T=request.T), request.runs, rng)
        survival = None
        if request.K is not None and request.eta > 0:
            survival = truncated_survival(
                request.eta, request.K, request.T, request.runs, rng, allow_violation=request.allow_violation
            ).dict()
        return GWResponse(
            mean=paths.mean(axis=0).tolist(),
            extinct=(paths == 0).mean(axis=0).tolist(),
            survival=survival,
        )
    except PercolationError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/renorm/params", response_model=ParamsResponse)
def renorm_params(request: ParamsRequest):
    """Deriva K, T y N y evalúa las restricciones"""
    try:
        params = derive_params(**request.dict())
        return ParamsResponse(params=params.dict(), flags=params.flags(), intensity=params.intensity)
    except PercolationError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/oriented", response_model=OrientedEstimate)
def oriented(request: OrientedRequest):
    """Percolación orientada de enlaces independiente"""
    return oriented_bond_percolation(request.p, request.depth, request.trials, stream(_seed(request.seed), "api/oriented"))
