"""
Tests for the ddos5g command line.
"""

import json

import pytest

from ddos5g.config import OUTPUT_DIR_ENV
from ddos5g.main import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, build_parser, main


@pytest.fixture(autouse=True)
def _no_output_env(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


@pytest.fixture
def config_file(small_config_dict, tmp_path):
    """Small pipeline config written to disk."""
    path = tmp_path / "config.json"
    path.write_text(json.dumps(small_config_dict), encoding="utf-8")
    return path


def test_generate_is_reproducible(tmp_path, capsys):
    """Test that generating twice with one seed writes identical files."""
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["generate", "--out", str(a), "--divisor", "1000", "--seed", "3"]) == EXIT_OK
    assert main(["generate", "--out", str(b), "--divisor", "1000", "--seed", "3"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert "Generated" in capsys.readouterr().out


def test_generate_per_label(tmp_path):
    """Test one CSV per label."""
    out = tmp_path / "flows"
    code = main(
        ["generate", "--out", str(out), "--rows-per-class", "5", "--labels", "Syn", "TFTP", "--per-label"]
    )
    assert code == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["Syn.csv", "TFTP.csv"]


def test_inspect_prints_every_label(tmp_path, capsys):
    """Test the label table of a reference-shaped file."""
    path = tmp_path / "flows.csv"
    main(["generate", "--out", str(path), "--divisor", "1000"])
    capsys.readouterr()
    assert main(["inspect", str(path), "--ports"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "13 labels" in out
    assert "WebDDoS" in out
    assert "Source Port histogram" in out


def test_inspect_missing_file(tmp_path, capsys):
    """Test that a missing input is a runtime failure."""
    assert main(["inspect", str(tmp_path / "nope.csv")]) == EXIT_RUNTIME
    assert "No such CSV file" in capsys.readouterr().err


def test_run_without_config_is_usage_error(capsys):
    """Test that run requires a config file."""
    assert main(["run"]) == EXIT_USAGE
    assert "needs a config file" in capsys.readouterr().err


def test_no_command_is_usage_error():
    """Test that a bare invocation prints usage."""
    assert main([]) == EXIT_USAGE


def test_bad_option_exits_with_usage_code():
    """Test that argparse errors use exit code 1."""
    with pytest.raises(SystemExit) as excinfo:
        main(["generate"])
    assert excinfo.value.code == EXIT_USAGE


def test_bad_override_is_usage_error(config_file, capsys):
    """Test that an invalid --set value is reported as a configuration error."""
    code = main(["run", "--config", str(config_file), "--set", "featsel.k_best=abc"])
    assert code == EXIT_USAGE
    assert "featsel.k_best" in capsys.readouterr().err


def test_missing_config_file_is_usage_error(tmp_path, capsys):
    """Test that a missing config file is a configuration error."""
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert "config file not found" in capsys.readouterr().err


def test_oversized_k_best_is_usage_error(config_file, tmp_path, capsys):
    """Test that k_best beyond the available features exits with the usage code."""
    code = main(
        [
            "run",
            "--config",
            str(config_file),
            "--set",
            "featsel.k_best=500",
            "--output-dir",
            str(tmp_path / "out"),
        ]
    )
    assert code == EXIT_USAGE
    assert "featsel.k_best" in capsys.readouterr().err


def test_run_then_score(config_file, tmp_path, capsys):
    """Test a full run followed by a matching rescore."""
    out = tmp_path / "cli_run"
    assert main(["run", "--config", str(config_file), "--output-dir", str(out)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "Task: ddos" in printed
    assert "Task: latency" in printed
    assert (out / "results.json").exists()

    assert main(["score", str(out)]) == EXIT_OK
    assert "All scores match" in capsys.readouterr().out


def test_score_detects_tampered_results(config_file, tmp_path, capsys):
    """Test that a rescore disagreeing with results.json fails."""
    out = tmp_path / "cli_run"
    main(["run", "--config", str(config_file), "--output-dir", str(out)])
    results = json.loads((out / "results.json").read_text(encoding="utf-8"))
    results["results"][0]["scores"]["accuracy"] = -1.0
    (out / "results.json").write_text(json.dumps(results), encoding="utf-8")
    capsys.readouterr()

    assert main(["score", str(out)]) == EXIT_RUNTIME
    assert "scores differ" in capsys.readouterr().out


def test_replication_flag(config_file, tmp_path, capsys):
    """Test that --replication runs the leaky order and prints its warning."""
    out = tmp_path / "rep"
    with pytest.warns(UserWarning, match="replication mode"):
        code = main(["run", "--config", str(config_file), "--replication", "--output-dir", str(out)])
    assert code == EXIT_OK
    assert json.loads((out / "results.json").read_text(encoding="utf-8"))["mode"] == "replication"
    assert "⚠️" in capsys.readouterr().out


def test_verbose_flag_parses():
    """Test that -v sits on the top-level parser."""
    args = build_parser().parse_args(["-v", "score", "somewhere"])
    assert args.verbose is True
    assert args.run_dir == "somewhere"


def test_run_disk_failure_is_runtime_error(config_file, tmp_path, mocker, capsys):
    """Test that an OSError while running maps to the runtime exit code."""
    mocker.patch("ddos5g.pipeline.execute", side_effect=OSError("disk full"))
    code = main(["run", "--config", str(config_file), "--output-dir", str(tmp_path / "out")])
    assert code == EXIT_RUNTIME
    assert "disk full" in capsys.readouterr().err


def test_stage_config_failure_is_usage_error(config_file, tmp_path, mocker):
    """Test that a stage failing on a configuration problem exits with the usage code."""
    from ddos5g.exceptions import ConfigError, StageError

    cause = ConfigError("featsel.k_best", "must be positive")
    mocker.patch("ddos5g.pipeline.execute", side_effect=StageError("featsel:ddos", cause))
    code = main(["run", "--config", str(config_file), "--output-dir", str(tmp_path / "out")])
    assert code == EXIT_USAGE
