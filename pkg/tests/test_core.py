import json
import math

import numpy as np
import pytest

from app.core.config import ExperimentConfig, Settings, load_experiment_config
from app.core.errors import ConfigError, PercolationError
from app.core.parallel import run_trials
from app.core.rng import derive_seed, stream
from app.core.stats import crossing_point, isotonic_violation, mean_stderr, ratio_stderr, wilson_interval


# === CONFIGURACIÓN ===


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("PERC_SEED", "99")
    monkeypatch.setenv("PERC_WORKERS", "3")
    monkeypatch.setenv("PERC_STRICT", "yes")
    s = Settings()
    assert s.seed == 99
    assert s.workers == 3
    assert s.strict is True


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"mode": "nc-sweep", "trials": 40, "eps": [0.5], "renorm": {"n": 4}}))
    cfg = load_experiment_config(path, {"trials": 10, "seed": 5, "renorm": {"R_over_r": 6.0, "K": None}})
    assert cfg.mode == "nc-sweep"
    assert cfg.trials == 10
    assert cfg.seed == 5
    assert cfg.eps == [0.5]
    assert cfg.renorm.n == 4
    assert cfg.renorm.R_over_r == 6.0


def test_config_accepts_yaml(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text("mode: branching\neta: 0.2\nT: 5\n")
    cfg = load_experiment_config(path)
    assert (cfg.mode, cfg.eta, cfg.T) == ("branching", 0.2, 5)


@pytest.mark.parametrize(
    "payload",
    [{"mode": "plot"}, {"eps": [0.0]}, {"norm": "hex"}, {"bracket": [3.0, 1.0]}, {"trials": 0}],
)
def test_invalid_config_raises_config_error(payload):
    with pytest.raises(ConfigError):
        load_experiment_config(None, payload)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "missing.json")


def test_config_error_is_domain_error():
    assert issubclass(ConfigError, PercolationError)
    assert issubclass(PercolationError, ValueError)


def test_config_normalizes_norm():
    assert ExperimentConfig(norm="SQUARE").norm == "square"


# === SEMILLAS ===


def test_derive_seed_is_deterministic_and_label_sensitive():
    assert derive_seed(1, "a", 0) == derive_seed(1, "a", 0)
    seeds = {derive_seed(1, "a", 0), derive_seed(1, "b", 0), derive_seed(1, "a", 1), derive_seed(2, "a", 0)}
    assert len(seeds) == 4
    assert 0 <= derive_seed(1, "a") < 2**63


def test_stream_reproduces_sequence():
    assert np.array_equal(stream(7, "x").random(5), stream(7, "x").random(5))


# === ESTADÍSTICA ===


def test_wilson_interval_contains_frequency():
    lo, hi = wilson_interval(30, 100)
    assert lo < 0.3 < hi
    assert wilson_interval(0, 10)[0] == pytest.approx(0.0, abs=1e-12)
    assert wilson_interval(10, 10)[1] == pytest.approx(1.0)
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_mean_stderr():
    mean, se = mean_stderr([1.0, 2.0, 3.0])
    assert mean == 2.0
    assert se == pytest.approx(1.0 / math.sqrt(3.0))
    assert mean_stderr([]) == (0.0, 0.0)


def test_ratio_stderr_exact_ratio():
    ratio, se = ratio_stderr([2.0, 4.0, 6.0], [1.0, 2.0, 3.0])
    assert ratio == pytest.approx(2.0)
    assert se == pytest.approx(0.0, abs=1e-12)


def test_isotonic_violation():
    assert isotonic_violation([0.1, 0.2, 0.9], [0.1, 0.1, 0.1]) == 0.0
    assert isotonic_violation([0.6, 0.1], [0.1, 0.1]) == pytest.approx(0.5 / math.sqrt(0.02))


def test_crossing_point_interpolates():
    assert crossing_point([1.0, 2.0, 3.0], [0.0, 0.4, 0.8]) == pytest.approx(2.25)
    assert crossing_point([1.0, 2.0], [0.7, 0.9]) == 1.0
    assert crossing_point([1.0, 2.0], [0.1, 0.2]) == 2.0


# === PARALELISMO ===


def test_run_trials_keeps_task_order():
    assert run_trials(abs, [-3, -1, -2]) == [3, 1, 2]
    assert run_trials(abs, [-3, -1, -2, -4], workers=2) == [3, 1, 2, 4]
