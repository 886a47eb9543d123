import numpy as np
import pytest

from app.core.config import ExperimentConfig
from app.core.errors import InvalidParameterError, PreconditionError, UnknownLemmaError
from app.geometry.annulus import Annulus, Norm, area_to_radius, lower_bound_nc
from app.harness import available_lemmas, crossing_probability, estimate_nc, lemma_check, run_experiment


# === CRUCES ===


def test_crossing_requires_large_box():
    with pytest.raises(PreconditionError):
        crossing_probability(Annulus(r=1.0, eps=1.0), 5.0, 3, 0)


def test_sparse_field_never_crosses():
    a = Annulus(r=area_to_radius(0.05, 1.0), eps=1.0)
    rows = []
    est = crossing_probability(a, 10.0, 5, 0, rows=rows)
    assert est.crossings == 0
    assert est.frequency == 0.0
    assert len(rows) == 5
    assert est.annulus_area == pytest.approx(0.05)


def test_crossing_is_reproducible():
    a = Annulus(r=area_to_radius(4.0, 0.5), eps=0.5)
    first = crossing_probability(a, 10.0, 8, 3)
    second = crossing_probability(a, 10.0, 8, 3)
    assert first.crossings == second.crossings


# === UMBRAL ===


def test_estimate_nc_rejects_bad_bracket():
    with pytest.raises(InvalidParameterError):
        estimate_nc(1.0, Norm.ROUND, 10.0, 4, (3.0, 1.0), 0.1, 0)
    # ninguna sonda cruza: el intervalo no encierra el 0.5
    with pytest.raises(InvalidParameterError):
        estimate_nc(1.0, Norm.ROUND, 10.0, 4, (0.01, 0.02), 0.1, 0, bootstrap=10)


def test_estimate_nc_monotone_curve():
    est = estimate_nc(1.0, Norm.ROUND, 10.0, 20, (0.5, 20.0), 0.5, 4, bootstrap=50)
    assert 0.5 <= est.nc_hat <= 20.0
    assert est.ci[0] <= est.ci[1]
    freqs = [f for _, f in est.curve()]
    # mismo campo marcado en todas las sondas
    assert all(b >= a for a, b in zip(freqs, freqs[1:]))
    assert est.lower_bound == pytest.approx(lower_bound_nc(1.0))
    assert est.probes[0].area == 0.5 and est.probes[-1].area == 20.0


@pytest.mark.slow
def test_threshold_decreases_with_thickness():
    estimates = [estimate_nc(eps, Norm.ROUND, 40.0, 100, (1.0, 8.0), 0.05, 2026, bootstrap=200) for eps in (1.0, 0.5, 0.25)]
    values = [e.nc_hat for e in estimates]
    assert values[0] > values[1] > values[2]
    for est in estimates:
        assert est.nc_hat >= est.lower_bound - (est.ci[1] - est.ci[0])


@pytest.mark.slow
def test_threshold_does_not_depend_on_seed():
    first = estimate_nc(1.0, Norm.ROUND, 20.0, 60, (1.0, 8.0), 0.1, 11, bootstrap=200)
    second = estimate_nc(1.0, Norm.ROUND, 20.0, 60, (1.0, 8.0), 0.1, 12, bootstrap=200)
    assert first.ci[0] <= second.ci[1]
    assert second.ci[0] <= first.ci[1]


# === COMPROBACIONES ===


def test_registry_lists_checks():
    ids = set(available_lemmas())
    assert {"lemma2", "lemma3", "lemma4", "lemma7", "lemma8", "lemma9", "thm5-rigorous", "eq-worked-example"} <= ids


def test_unknown_lemma():
    with pytest.raises(UnknownLemmaError):
        lemma_check("lemma99")


@pytest.mark.parametrize("lemma_id", ["lemma4", "thm5-rigorous", "eq1-consistency", "eq-worked-example"])
def test_deterministic_checks_pass(lemma_id):
    reports = lemma_check(lemma_id, rng=1)
    assert reports
    assert all(r.verdict for r in reports)
    assert all(r.lemma == lemma_id for r in reports)


@pytest.mark.slow
@pytest.mark.parametrize("lemma_id", ["lemma2", "lemma3", "lemma7", "lemma8", "lemma11", "thm5-chain", "oriented-0.9"])
def test_statistical_checks_pass(lemma_id):
    assert all(r.verdict for r in lemma_check(lemma_id, rng=2026))


def test_reduced_budget_checks_run_their_parameters():
    reports = lemma_check("lemma11", budget=0.05, rng=1)
    assert [r.details["step"] for r in reports] == ["fit", "held-out"]
    assert reports[0].details["configs"] == 5
    assert reports[1].details["samples"] == 50_000
    assert all(r.verdict for r in reports)
    chain = lemma_check("thm5-chain", budget=0.05, rng=1)
    assert sorted({r.details["eps"] for r in chain}) == [0.1, 0.3]
    assert all(r.verdict for r in chain[::2])


# === EXPERIMENTOS ===


def _simulate_config(out):
    return ExperimentConfig(mode="simulate", seed=7, trials=3, L=10.0, eps=[1.0], areas=[1.0, 3.0], workers=1, output_dir=out)


def test_outputs_are_byte_identical(tmp_path):
    first = run_experiment(_simulate_config(tmp_path / "a"))
    second = run_experiment(_simulate_config(tmp_path / "b"))
    assert first.passed and second.passed
    for name in ("simulate_trials.csv", "simulate_summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "simulate_config.json").exists()


def test_branching_experiment_writes_curve(tmp_path):
    cfg = ExperimentConfig(mode="branching", eta=1.0, T=3, runs=500, seed=1, output_dir=tmp_path)
    result = run_experiment(cfg)
    curve = (tmp_path / "branching_curve.csv").read_text().splitlines()
    assert curve[0].split(",") == ["t", "mean", "variance", "extinct", "hit_target"]
    assert len(curve) == 5
    assert result.passed
    assert "truncated" not in result.summary


def test_zero_cap_branching_goes_extinct(tmp_path):
    cfg = ExperimentConfig(mode="branching", eta=1.0, K=0, T=3, runs=200, seed=1, output_dir=tmp_path)
    result = run_experiment(cfg)
    rows = (tmp_path / "branching_curve.csv").read_text().splitlines()[1:]
    extinct = [float(row.split(",")[3]) for row in rows]
    assert extinct == [0.0, 1.0, 1.0, 1.0]
    assert result.summary["K"] == 0


def test_lemma_experiment_report(tmp_path):
    cfg = ExperimentConfig(mode="lemma-check", lemmas=["lemma4"], seed=1, output_dir=tmp_path)
    result = run_experiment(cfg)
    assert result.passed
    assert np.isclose(result.summary["reports"][0]["bound"], 1e-6)
