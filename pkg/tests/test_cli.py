import json

import pytest

from app.cli import EXIT_ERROR, EXIT_OK, build_parser, main


def test_list_lemmas(capsys):
    assert main(["lemma-check", "--list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "lemma4" in out
    assert "thm5-rigorous" in out


def test_lemma_check_writes_report(tmp_path):
    code = main(["lemma-check", "--lemma", "lemma4", "thm5-rigorous", "--seed", "3", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    reports = json.loads((tmp_path / "lemma_report.json").read_text())
    assert {r["lemma"] for r in reports} == {"lemma4", "thm5-rigorous"}


def test_unknown_lemma_is_an_error(tmp_path):
    assert main(["lemma-check", "--lemma", "lemma99", "--output-dir", str(tmp_path)]) == EXIT_ERROR


def test_invalid_config_is_an_error(tmp_path):
    assert main(["simulate", "--eps", "0", "--output-dir", str(tmp_path)]) == EXIT_ERROR
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_ERROR


def test_strict_branching_horizon(tmp_path):
    argv = ["branching", "--eta", "0.1", "--K", "10", "--T", "5", "--runs", "100", "--output-dir", str(tmp_path)]
    assert main(argv + ["--strict"]) == EXIT_ERROR
    assert main(argv) == EXIT_OK
    summary = json.loads((tmp_path / "branching_summary.json").read_text())
    assert summary["truncated"]["precondition_ok"] is False


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"mode": "branching", "eta": 0.5, "T": 4, "runs": 50}))
    out = tmp_path / "out"
    assert main(["branching", "--config", str(config), "--T", "2", "--output-dir", str(out)]) == EXIT_OK
    saved = json.loads((out / "branching_config.json").read_text())
    assert saved["T"] == 2
    assert saved["eta"] == 0.5


def test_renorm_flags_are_nested():
    args = build_parser().parse_args(["renorm", "--n", "3", "--R-over-r", "6", "--eps", "0.5"])
    assert args.R_over_r == 6.0
    assert args.eps == [0.5]


def test_mode_is_required():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_quick_lowers_the_budget(tmp_path):
    assert main(["lemma-check", "--lemma", "lemma4", "--quick", "--output-dir", str(tmp_path)]) == EXIT_OK
    saved = json.loads((tmp_path / "lemma-check_config.json").read_text())
    assert saved["budget"] == 0.1
    explicit = tmp_path / "explicit"
    assert main(["lemma-check", "--lemma", "lemma4", "--quick", "--budget", "2", "--output-dir", str(explicit)]) == EXIT_OK
    assert json.loads((explicit / "lemma-check_config.json").read_text())["budget"] == 2.0


def test_renorm_horizon_scale_flag():
    args = build_parser().parse_args(["renorm", "--horizon-scale", "2.25"])
    assert args.horizon_scale == 2.25


def test_branching_cap_help(capsys):
    with pytest.raises(SystemExit):
        main(["branching", "--help"])
    assert "Tope de nodos por generación" in capsys.readouterr().out
