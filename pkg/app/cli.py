"""
Interfaz de línea de comandos.

    python -m app.cli simulate --eps 1.0 --areas 3 4 5 --L 30 --trials 100
    python -m app.cli nc-sweep --eps 1.0 0.5 0.25 --L 60 --output-dir results/nc
    python -m app.cli lemma-check --lemma lemma4 thm5-rigorous
    python -m app.cli branching --eta 0.1 --K 100 --T 734 --runs 10000
    python -m app.cli renorm --eps 1.0 --area 10 --n 3 --R-over-r 6 --depth 3
    python -m app.cli serve --port 8000

Códigos de salida: 0 si todas las comprobaciones pasan, 1 si alguna falla,
2 ante errores de configuración o de precondiciones.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.core.config import configure_logging, load_experiment_config
from app.core.errors import PercolationError

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, default=None, help="Archivo JSON (o YAML) con la configuración")
    parser.add_argument("--seed", type=int, default=None, help="Semilla maestra")
    parser.add_argument("--trials", type=int, default=None, help="Ensayos por punto")
    parser.add_argument("--workers", type=int, default=None, help="Procesos paralelos")
    parser.add_argument("--output-dir", type=Path, default=None, help="Directorio de salida")
    parser.add_argument("--log-level", default=None, help="Nivel de logging (DEBUG, INFO, ...)")


def _field_args(parser: argparse.ArgumentParser):
    parser.add_argument("--eps", type=float, nargs="+", default=None, help="Lista de grosores relativos ε")
    parser.add_argument("--norm", choices=["round", "square"], default=None)
    parser.add_argument("--L", type=float, default=None, help="Lado de la caja en unidades de r")
    parser.add_argument("--areas", type=float, nargs="+", default=None, help="Áreas |A| a simular")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="percolation", description="Percolación continua con anillos")
    sub = parser.add_subparsers(dest="mode", required=True)

    simulate = sub.add_parser("simulate", help="Probabilidades de cruce para una rejilla (ε, |A|)")
    _common(simulate)
    _field_args(simulate)

    sweep = sub.add_parser("nc-sweep", help="Estimación de n_c(ε) por bisección")
    _common(sweep)
    _field_args(sweep)
    sweep.add_argument("--bracket", type=float, nargs=2, default=None, metavar=("A_LO", "A_HI"))
    sweep.add_argument("--tol", type=float, default=None)
    sweep.add_argument("--finite-size", action="store_true", default=None, help="Repite la estimación a 2L")

    lemmas = sub.add_parser("lemma-check", help="Comprobaciones numéricas de los resultados")
    _common(lemmas)
    lemmas.add_argument("--lemma", nargs="+", default=None, help="Identificadores o 'all'")
    lemmas.add_argument("--budget", type=float, default=None, help="Multiplicador de los tamaños de muestra")
    lemmas.add_argument("--list", action="store_true", help="Lista las comprobaciones registradas y sale")
    lemmas.add_argument("--quick", action="store_true", help="Presupuesto 0.1 salvo que se indique --budget")

    branching = sub.add_parser("branching", help="Galton–Watson Poisson(1+η), con o sin tope K")
    _common(branching)
    branching.add_argument("--eta", type=float, default=None)
    branching.add_argument("--K", type=int, default=None, help="Tope de nodos por generación (omitido = sin tope; 0 = se extingue)")
    branching.add_argument("--T", type=int, default=None, help="Generaciones")
    branching.add_argument("--runs", type=int, default=None)
    branching.add_argument("--strict", action="store_true", default=None, help="Falla si T excede e^(ηK)η/3")

    renorm = sub.add_parser("renorm", help="Renormalización sobre la red orientada")
    _common(renorm)
    renorm.add_argument("--eps", type=float, nargs=1, default=None)
    renorm.add_argument("--area", type=float, default=None, help="|A| = 1 + η")
    renorm.add_argument("--depth", type=int, default=None)
    renorm.add_argument("--n", type=int, default=None)
    renorm.add_argument("--R-over-r", dest="R_over_r", type=float, default=None)
    renorm.add_argument("--K", type=int, default=None)
    renorm.add_argument(
        "--horizon-scale", dest="horizon_scale", type=float, default=None,
        help="τ: la fase 1 dura T = ⌊τ(R/r)²⌋ generaciones",
    )
    renorm.add_argument("--strict", action="store_true", default=None, help="Exige las restricciones (1)–(6)")

    serve = sub.add_parser("serve", help="Arranca el servicio HTTP")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--log-level", default=None)
    return parser


_RENORM_KEYS = ("n", "R_over_r", "K", "horizon_scale")
QUICK_BUDGET = 0.1


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"config", "log_level", "list", "lemma", "quick"}
    values = {k: v for k, v in vars(args).items() if k not in skip}
    if args.mode == "renorm":
        values["renorm"] = {k: values.pop(k) for k in _RENORM_KEYS}
    if getattr(args, "lemma", None):
        values["lemmas"] = args.lemma
    if getattr(args, "quick", False) and values.get("budget") is None:
        values["budget"] = QUICK_BUDGET
    return values


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port, log_level=(args.log_level or "info").lower())
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level.upper() if args.log_level else None)

    if args.mode == "serve":
        return _serve(args)

    if args.mode == "lemma-check" and args.list:
        from app.harness.lemmas import available_lemmas

        for lemma_id, description in available_lemmas().items():
            print(f"{lemma_id}\t{description}")
        return EXIT_OK

    from app.harness.runner import run_experiment

    try:
        cfg = load_experiment_config(args.config, _overrides(args))
        result = run_experiment(cfg)
    except PercolationError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_ERROR

    for path in result.outputs:
        logger.info(f"📄 {path}")
    return EXIT_OK if result.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
