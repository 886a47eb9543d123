import logging
import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.middleware.gzip import GZipMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from app.api import SERVICE, VERSION, router
from app.core.config import configure_logging, settings
from app.core.errors import PercolationError, UnknownLemmaError
from app.harness.lemmas import available_lemmas

configure_logging()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Gestión del ciclo de vida de la aplicación"""
    logger.info(f"🚀 Iniciando {SERVICE}")
    logger.info(f"🎲 Semilla maestra: {settings.seed} | workers: {settings.workers}")
    logger.info(f"📋 Comprobaciones registradas: {len(available_lemmas())}")
    yield
    logger.info(f"🛑 Cerrando {SERVICE}")


app = FastAPI(
    title=SERVICE,
    description="Simulación de percolación continua con anillos: umbrales, ramificación y renormalización",
    version=VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
    openapi_url="/openapi.json",
    lifespan=lifespan,
)

# === MIDDLEWARE ===

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

app.add_middleware(GZipMiddleware, minimum_size=1000)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    start_time = time.time()
    client = request.client.host if request.client else "-"
    logger.info(f"📥 {request.method} {request.url.path} - Client: {client}")

    try:
        response = await call_next(request)
        process_time = time.time() - start_time
        logger.info(
            f"📤 {request.method} {request.url.path} - "
            f"Status: {response.status_code} - "
            f"Time: {process_time:.3f}s"
        )
        response.headers["X-Process-Time"] = str(process_time)
        return response

    except Exception as e:
        process_time = time.time() - start_time
        logger.error(f"❌ {request.method} {request.url.path} - Error: {str(e)} - Time: {process_time:.3f}s")
        raise


# === MANEJADORES DE ERRORES ===


def _error(status: int, message, kind: str, request: Request, **extra) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "error": {"code": status, "message": message, "type": kind, **extra},
            "request_id": getattr(request.state, "request_id", None),
        },
    )


@app.exception_handler(StarletteHTTPException)
async def http_exception_handler(request: Request, exc: StarletteHTTPException):
    """Manejador para errores HTTP"""
    logger.warning(f"HTTP Error {exc.status_code}: {exc.detail}")
    return _error(exc.status_code, exc.detail, "http_error", request)


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    """Manejador para errores de validación de datos"""
    logger.warning(f"Validation Error: {exc.errors()}")
    return _error(422, "Error de validación en los datos enviados", "validation_error", request, details=exc.errors())


@app.exception_handler(PercolationError)
async def percolation_exception_handler(request: Request, exc: PercolationError):
    """Errores de dominio que escapan a los endpoints"""
    status = 404 if isinstance(exc, UnknownLemmaError) else 400
    logger.warning(f"Domain Error {status}: {exc}")
    return _error(status, str(exc), type(exc).__name__, request)


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    """Manejador general para errores no controlados"""
    logger.error(f"Unhandled Error: {str(exc)}", exc_info=True)
    return _error(500, "Error interno del servidor", "internal_error", request)


# === ENDPOINTS RAÍZ ===


@app.get("/")
async def root():
    """Endpoint raíz con información del servicio"""
    return {
        "service": SERVICE,
        "version": VERSION,
        "docs": "/docs",
        "health": "/health",
        "status": "/status",
        "endpoints": {
            "lemmas": "GET /lemmas",
            "lemma_check": "POST /lemma-check",
            "crossing": "POST /crossing",
            "branching": "POST /branching/gw",
            "renorm_params": "POST /renorm/params",
            "oriented": "POST /oriented",
        },
    }


# === INCLUIR RUTAS ===

app.include_router(router, prefix="/api/v1", tags=["Percolation API"])
app.include_router(router)


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("app.main:app", host="0.0.0.0", port=8000, reload=True, log_level="info", access_log=True)
