import os
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, validator

from app.core.errors import ConfigError

BASE_DIR = Path(__file__).resolve().parent.parent.parent
env_path = BASE_DIR / ".env"
if env_path.exists():
    load_dotenv(env_path)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def get_env(key, default=None):
    return os.getenv(key, default)


def _env_flag(key, default="false"):
    return str(get_env(key, default)).strip().lower() in ("1", "true", "yes", "on")


# Contenedor simple de configuración global
class Settings:
    def __init__(self):
        self.seed = int(get_env("PERC_SEED", 20040101))
        self.workers = int(get_env("PERC_WORKERS", 1))
        self.output_dir = Path(get_env("PERC_OUTPUT_DIR", "results"))
        self.mc_samples = int(get_env("PERC_MC_SAMPLES", 1_000_000))
        self.bootstrap_resamples = int(get_env("PERC_BOOTSTRAP", 1000))
        self.log_level = get_env("LOG_LEVEL", "INFO").upper()
        self.strict = _env_flag("PERC_STRICT")
        self.show_progress = _env_flag("PERC_PROGRESS")


settings = Settings()


def configure_logging(level: Optional[str] = None):
    """Configura logging para los puntos de entrada (CLI y servicio HTTP)"""
    logging.basicConfig(level=(level or settings.log_level), format=LOG_FORMAT)


MODES = ("simulate", "nc-sweep", "lemma-check", "branching", "renorm")


class RenormOverrides(BaseModel):
    c0: Optional[float] = Field(None, gt=0)
    c2: Optional[float] = Field(None, gt=0)
    c3: Optional[float] = Field(None, gt=0)
    c4: Optional[float] = Field(None, gt=0)
    n: Optional[int] = Field(None, ge=1)
    R_over_r: Optional[float] = Field(None, gt=0)
    K: Optional[int] = Field(None, ge=1)
    horizon_scale: Optional[float] = Field(None, gt=0)


class ExperimentConfig(BaseModel):
    """Configuración completa de un experimento: determina todos los flujos aleatorios"""

    mode: str = Field("simulate", description="simulate | nc-sweep | lemma-check | branching | renorm")
    seed: int = Field(default_factory=lambda: settings.seed)
    trials: int = Field(200, ge=1)
    workers: int = Field(default_factory=lambda: settings.workers, ge=1)
    eps: List[float] = Field(default_factory=lambda: [1.0])
    norm: str = Field("round")
    L: float = Field(30.0, gt=0, description="Lado de la caja en unidades de r")
    areas: List[float] = Field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0])
    bracket: Optional[List[float]] = None
    tol: float = Field(0.02, gt=0)
    output_dir: Path = Field(default_factory=lambda: settings.output_dir)
    finite_size: bool = Field(False, description="Repite nc-sweep a 2L")
    lemmas: List[str] = Field(default_factory=lambda: ["all"])
    budget: float = Field(1.0, gt=0)
    # branching
    eta: float = Field(0.1, gt=-1)
    K: Optional[int] = Field(None, ge=0)
    T: int = Field(20, ge=0)
    runs: int = Field(10_000, ge=1)
    # renorm
    area: float = Field(10.0, gt=0)
    depth: int = Field(3, ge=0)
    strict: bool = Field(default_factory=lambda: settings.strict)
    renorm: RenormOverrides = Field(default_factory=RenormOverrides)

    @validator("mode")
    def _mode_known(cls, value):
        if value not in MODES:
            raise ValueError(f"modo desconocido: {value}")
        return value

    @validator("norm")
    def _norm_known(cls, value):
        value = value.lower()
        if value not in ("round", "square"):
            raise ValueError(f"norma desconocida: {value}")
        return value

    @validator("eps", each_item=True)
    def _eps_range(cls, value):
        if not 0 < value <= 1:
            raise ValueError(f"eps debe estar en (0, 1], recibido {value}")
        return value

    @validator("bracket")
    def _bracket_pair(cls, value):
        if value is not None and (len(value) != 2 or not 0 < value[0] < value[1]):
            raise ValueError("bracket debe ser [a_lo, a_hi] con 0 < a_lo < a_hi")
        return value


def load_experiment_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Carga la configuración desde un archivo JSON (o YAML) y aplica los flags de la CLI

    Args:
        path: Ruta al archivo de configuración (opcional)
        overrides: Valores explícitos que tienen prioridad sobre el archivo

    Returns:
        ExperimentConfig validado
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            loaded = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"No se pudo leer la configuración {path}: {e}")
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"La configuración {path} debe ser un objeto JSON")
        data.update(loaded or {})

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **{k: v for k, v in value.items() if v is not None}}
        else:
            data[key] = value
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"Configuración inválida: {e}")
