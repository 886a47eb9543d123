"""
Orquestación de experimentos: cada modo escribe CSV (curvas y filas por ensayo) y un
resumen JSON en el directorio de salida. Las salidas no llevan marcas de tiempo, de modo
que una misma configuración produce ficheros idénticos byte a byte.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.branching.galton_watson import GWConfig, gw_batch, truncated_survival
from app.core.config import ExperimentConfig
from app.core.rng import stream
from app.core.stats import isotonic_violation
from app.geometry.annulus import Annulus, Norm, area_to_radius
from app.harness.lemmas import lemma_check
from app.harness.threshold import crossing_probability, estimate_nc, finite_size_report
from app.renorm.driver import lattice_run
from app.renorm.params import derive_params

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


class ExperimentResult(BaseModel):
    mode: str
    passed: bool
    outputs: List[str]
    summary: Dict[str, Any]


def _write_json(path: Path, payload) -> str:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")
    return str(path)


def _write_csv(path: Path, rows: List[dict]) -> str:
    pd.DataFrame(rows).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return str(path)


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (Path, Norm)):
        return str(value.value if isinstance(value, Norm) else value)
    raise TypeError(f"no serializable: {type(value)}")


def run_simulate(cfg: ExperimentConfig) -> ExperimentResult:
    out = cfg.output_dir
    rows: List[dict] = []
    summary = []
    for i, eps in enumerate(cfg.eps):
        for j, target in enumerate(cfg.areas):
            a = Annulus(norm=cfg.norm, r=area_to_radius(target, eps, Norm(cfg.norm)), eps=eps)
            est = crossing_probability(a, cfg.L, cfg.trials, stream(cfg.seed, f"simulate/{i}/{j}"), cfg.workers, rows)
            summary.append(est.dict())
    outputs = [
        _write_csv(out / "simulate_trials.csv", rows),
        _write_json(out / "simulate_summary.json", summary),
    ]
    return ExperimentResult(mode="simulate", passed=True, outputs=outputs, summary={"estimates": summary})


def run_nc_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    out = cfg.output_dir
    bracket = tuple(cfg.bracket or (min(cfg.areas), max(cfg.areas)))
    curve_rows: List[dict] = []
    estimates = []
    passed = True
    for i, eps in enumerate(cfg.eps):
        rng = stream(cfg.seed, f"nc-sweep/{i}")
        if cfg.finite_size:
            report = finite_size_report(eps, cfg.norm, cfg.L, cfg.trials, bracket, cfg.tol, rng, workers=cfg.workers)
            estimates.append(report)
            parts = [report["L"], report["2L"]]
        else:
            parts = [estimate_nc(eps, cfg.norm, cfg.L, cfg.trials, bracket, cfg.tol, rng, workers=cfg.workers).dict()]
            estimates.append(parts[0])
        for est in parts:
            freqs = [p["crossings"] / p["trials"] for p in est["probes"]]
            sigmas = [np.sqrt(max(f * (1 - f), 1e-12) / p["trials"]) for f, p in zip(freqs, est["probes"])]
            monotone = isotonic_violation(freqs, sigmas) <= 3.0
            width = est["ci"][1] - est["ci"][0]
            above_bound = est["nc_hat"] >= est["lower_bound"] - width
            passed &= monotone and above_bound
            for p, f in zip(est["probes"], freqs):
                curve_rows.append({"eps": eps, "norm": cfg.norm, "L": est["L"], "area": p["area"], "crossings": p["crossings"], "trials": p["trials"], "frequency": f})
    outputs = [
        _write_csv(out / "nc_curve.csv", curve_rows),
        _write_json(out / "nc_summary.json", estimates),
    ]
    return ExperimentResult(mode="nc-sweep", passed=passed, outputs=outputs, summary={"estimates": estimates})


def run_lemma_check(cfg: ExperimentConfig) -> ExperimentResult:
    reports = []
    for i, lemma_id in enumerate(cfg.lemmas):
        reports.extend(r.dict() for r in lemma_check(lemma_id, cfg.budget, stream(cfg.seed, f"lemma-check/{lemma_id}", i)))
    passed = all(r["verdict"] for r in reports)
    outputs = [_write_json(cfg.output_dir / "lemma_report.json", reports)]
    return ExperimentResult(mode="lemma-check", passed=passed, outputs=outputs, summary={"reports": reports})


def run_branching(cfg: ExperimentConfig) -> ExperimentResult:
    out = cfg.output_dir
    rng = stream(cfg.seed, "branching")
    paths = gw_batch(GWConfig(eta=cfg.eta, K=cfg.K, T=cfg.T), cfg.runs, rng)
    rows = [
        {
            "t": t,
            "mean": float(paths[:, t].mean()),
            "variance": float(paths[:, t].var(ddof=1)) if cfg.runs > 1 else 0.0,
            "extinct": float(np.mean(paths[:, t] == 0)),
            "hit_target": float(np.mean(paths[:, t] >= (1 + cfg.eta) ** t)),
        }
        for t in range(cfg.T + 1)
    ]
    summary: Dict[str, Any] = {"eta": cfg.eta, "K": cfg.K, "T": cfg.T, "runs": cfg.runs}
    passed = True
    if cfg.K and cfg.eta > 0:
        est = truncated_survival(cfg.eta, cfg.K, cfg.T, cfg.runs, rng, allow_violation=not cfg.strict)
        summary["truncated"] = est.dict()
        passed = est.frequency + 3 * est.stderr >= est.bound if est.precondition_ok else True
    outputs = [
        _write_csv(out / "branching_curve.csv", rows),
        _write_json(out / "branching_summary.json", summary),
    ]
    return ExperimentResult(mode="branching", passed=bool(passed), outputs=outputs, summary=summary)


def run_renorm(cfg: ExperimentConfig) -> ExperimentResult:
    out = cfg.output_dir
    over = cfg.renorm
    params = derive_params(
        cfg.area - 1.0,
        r=1.0,
        eps=cfg.eps[0],
        c0=over.c0, c2=over.c2, c3=over.c3, c4=over.c4,
        n=over.n, R_over_r=over.R_over_r, K=over.K, horizon_scale=over.horizon_scale,
    )
    trace_path = out / "renorm_trace.jsonl"
    trace = lattice_run(None, cfg.depth, params, stream(cfg.seed, "renorm"), strict=cfg.strict, trace_path=trace_path)
    summary = {"params": params.dict(), **trace.summary()}
    passed = trace.violations == 0 and trace.budget_ok and trace.coupling_ok is not False
    outputs = [_write_json(out / "renorm_summary.json", summary)]
    if trace_path.exists():
        outputs.insert(0, str(trace_path))
    return ExperimentResult(mode="renorm", passed=passed, outputs=outputs, summary=summary)


RUNNERS = {
    "simulate": run_simulate,
    "nc-sweep": run_nc_sweep,
    "lemma-check": run_lemma_check,
    "branching": run_branching,
    "renorm": run_renorm,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"🚀 Experimento '{cfg.mode}' (seed={cfg.seed}) -> {cfg.output_dir}")
    result = RUNNERS[cfg.mode](cfg)
    _write_json(cfg.output_dir / f"{cfg.mode}_config.json", json.loads(cfg.json()))
    icon = "✅" if result.passed else "❌"
    logger.info(f"{icon} Experimento '{cfg.mode}' terminado: {len(result.outputs)} ficheros")
    return result
