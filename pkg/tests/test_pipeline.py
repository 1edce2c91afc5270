"""
End-to-end tests of both pipeline modes on small generated data.
"""

import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

from ddos5g.analysis.report import METRICS, RESULTS_FILE
from ddos5g.config import Mode, default_config_dict, from_dict
from ddos5g.data.synthgen import FAULT_COLUMNS, generate_detailed
from ddos5g.exceptions import ConfigError, StageError
from ddos5g.pipeline import (
    CONFIG_FILE,
    LEAKAGE_WARNING,
    MODELS_DIR,
    TASK_LABELS,
    build_gen_spec,
    check_feature_counts,
    execute,
    run_pipeline,
    score_saved,
    stage_seeds,
    task_feature_columns,
)
from ddos5g.utils.seeding import STAGES, derive_seed

from .conftest import SMALL_LABELS


def test_default_mode_run(small_config, tmp_path):
    """Test a complete default-mode run and what it writes."""
    out = tmp_path / "run"
    run = execute(small_config, out)
    manifest = run.manifest

    assert manifest.mode == Mode.DEFAULT
    assert len(manifest.results) == 16
    assert {(r.model, r.task) for r in manifest.results} == {
        (kind, task) for kind in small_config.models.kinds for task in TASK_LABELS
    }
    assert manifest.class_labels["ddos"] == sorted(SMALL_LABELS)
    assert manifest.class_labels["latency"] == ["bad", "good"]
    for task in TASK_LABELS:
        assert len(manifest.selected_features[task]) == 5
        assert len(manifest.extra["k_best"][task]) == 10
    assert "5G_Latency" not in manifest.selected_features["latency"]
    assert LEAKAGE_WARNING not in manifest.warnings

    for name in (RESULTS_FILE, "plot_data.csv", CONFIG_FILE, "transforms.json", "test_ddos.csv"):
        assert (out / name).exists(), name
    assert (out / MODELS_DIR / "latency__knn.npz").exists()


def test_default_mode_balances_training_only(small_config, tmp_path):
    """Test that SMOTE equalizes training classes and the test split is untouched."""
    run = execute(small_config, tmp_path / "run")
    rows = run.manifest.extra["rows"]
    assert rows["train"] + rows["test"] == rows["clean"]
    hist = run.manifest.extra["class_histograms"]["ddos"]
    assert len(set(hist["after_smote"].values())) == 1
    assert sum(hist["before_smote"].values()) == rows["train"]
    assert run.tasks["ddos"].test_table.n_rows == rows["test"]


def test_scores_are_valid_fractions(small_config, tmp_path):
    """Test that every metric lies in [0, 1]."""
    manifest = run_pipeline(small_config, tmp_path / "run")
    for result in manifest.results:
        for metric in METRICS:
            assert 0.0 <= getattr(result.scores, metric) <= 1.0
        assert result.substituted == (result.model in ("gaussian_nb", "logistic_regression", "extra_trees"))


def test_replication_mode_warns_and_records(small_config_dict, tmp_path):
    """Test the leakage warning in replication mode."""
    small_config_dict["mode"] = Mode.REPLICATION
    cfg = from_dict(small_config_dict)
    with pytest.warns(UserWarning, match="replication mode"):
        run = execute(cfg, tmp_path / "run")
    assert LEAKAGE_WARNING in run.manifest.warnings
    assert len(run.manifest.results) == 16
    rows = run.manifest.extra["rows"]
    hist = run.manifest.extra["class_histograms"]["ddos"]["after_smote"]
    assert rows["train_ddos"] + rows["test_ddos"] == sum(hist.values())


def test_runs_are_byte_identical(small_config, tmp_path):
    """Test that two runs with one seed write identical results."""
    run_pipeline(small_config, tmp_path / "a")
    run_pipeline(small_config, tmp_path / "b")
    for name in (RESULTS_FILE, "plot_data.csv", CONFIG_FILE, "test_latency.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_results(small_config_dict, tmp_path):
    """Test that a different master seed changes the data and digest."""
    a = run_pipeline(from_dict(small_config_dict), tmp_path / "a")
    small_config_dict["seed"] = 1
    b = run_pipeline(from_dict(small_config_dict), tmp_path / "b")
    assert a.config_digest != b.config_digest
    assert a.seeds != b.seeds


@pytest.mark.parametrize("mode", [Mode.DEFAULT, Mode.REPLICATION])
def test_saved_run_rescores_identically(mode, small_config_dict, tmp_path):
    """Test that reloaded models on the saved test set reproduce every score."""
    small_config_dict["mode"] = mode
    out = tmp_path / "run"
    manifest = run_pipeline(from_dict(small_config_dict), out)
    rescored = score_saved(out)
    assert [(r.model, r.task) for r in rescored] == [(r.model, r.task) for r in manifest.results]
    for before, after in zip(manifest.results, rescored):
        assert after.scores == before.scores
        assert after.confusion.to_list() == before.confusion.to_list()


def test_k_best_beyond_available_features_fails_before_training(small_config_dict, tmp_path):
    """Test that an oversized k_best is a configuration error naming the field."""
    small_config_dict["featsel"] = {"k_best": 500, "rfe_final": 5}
    with pytest.raises(ConfigError, match="k_best=500") as excinfo:
        run_pipeline(from_dict(small_config_dict), tmp_path / "run")
    assert excinfo.value.field == "featsel.k_best"
    assert not (tmp_path / "run" / RESULTS_FILE).exists()


def test_check_feature_counts_uses_task_columns(small_config_dict, flow_table):
    """Test that the latency task's excluded column counts against k_best."""
    table = flow_table.with_numeric("5G_Latency", [10.0] * flow_table.n_rows)
    small_config_dict["featsel"] = {"k_best": len(table.columns), "rfe_final": 5}
    cfg = from_dict(small_config_dict)
    with pytest.raises(ConfigError, match="latency task"):
        check_feature_counts(table, cfg)
    small_config_dict["featsel"] = {"k_best": len(table.columns) - 1, "rfe_final": 5}
    check_feature_counts(table, from_dict(small_config_dict))


def test_default_generation_plants_half_percent_faults():
    """Test that the default config plants ceil(0.005 n) non-finite cells per fault column."""
    cfg = from_dict(default_config_dict())
    data = generate_detailed(build_gen_spec(cfg, seed=0))
    n = data.table.n_rows
    assert sorted(data.injected_columns) == sorted(FAULT_COLUMNS)
    for column in FAULT_COLUMNS:
        nonfinite = int((~np.isfinite(data.table.numeric(column))).sum())
        assert nonfinite == math.ceil(0.005 * n)


def test_missing_input_file_fails_in_data_stage(tmp_path):
    """Test that an unreadable input file fails the data stage."""
    raw = default_config_dict()
    raw["generate"] = None
    raw["ingest"] = {"files": [{"path": str(tmp_path / "missing.csv"), "expected_label": "Syn"}]}
    with pytest.raises(StageError) as excinfo:
        run_pipeline(from_dict(raw), tmp_path / "run")
    assert excinfo.value.stage == "data"
    assert isinstance(excinfo.value.cause, FileNotFoundError)


def test_stage_seeds():
    """Test explicit stage seeds and derived defaults."""
    raw = default_config_dict()
    raw["seed"] = 7
    raw["seeds"] = {"smote": 99}
    seeds = stage_seeds(from_dict(raw))
    assert list(seeds) == list(STAGES)
    assert seeds["smote"] == 99
    assert seeds["split"] == derive_seed(7, "split")


def test_task_feature_columns(small_config, flow_table):
    """Test that the latency task never sees the raw latency column."""
    table = flow_table.with_numeric("5G_Latency", [10.0] * flow_table.n_rows)
    assert "5G_Latency" in task_feature_columns(table, "ddos", small_config)
    assert "5G_Latency" not in task_feature_columns(table, "latency", small_config)


def test_config_snapshot_written(small_config, tmp_path):
    """Test that config.json holds the run snapshot without execution settings."""
    out = tmp_path / "run"
    run_pipeline(small_config, out)
    written = json.loads((out / CONFIG_FILE).read_text(encoding="utf-8"))
    assert written == small_config.snapshot()
    assert "output_dir" not in written


@pytest.mark.slow
def test_default_configuration_full_suite(tmp_path):
    """Test the default desk-scale run twice: 8 models x 2 tasks x 4 metrics, identical bytes."""
    raw = default_config_dict()
    raw["output"] = {"formats": ["json", "csv"], "save_models": False}
    cfg = from_dict(raw)
    manifest = run_pipeline(cfg, tmp_path / "a")
    run_pipeline(cfg, tmp_path / "b")
    assert len(manifest.plot_rows()) == 64
    assert manifest.extra["rows"]["input"] == 5493
    assert (tmp_path / "a" / RESULTS_FILE).read_bytes() == (tmp_path / "b" / RESULTS_FILE).read_bytes()


@pytest.mark.full_data
@pytest.mark.skipif(
    not os.environ.get("DDOS5G_CICDDOS2019_DIR"), reason="DDOS5G_CICDDOS2019_DIR is not set"
)
def test_cicddos2019_replication_accuracy(tmp_path):
    """Test replication-mode random-forest accuracy on a label-table-sized extract."""
    directory = Path(os.environ["DDOS5G_CICDDOS2019_DIR"])
    files = [{"path": str(p), "expected_label": p.stem} for p in sorted(directory.glob("*.csv"))]
    raw = default_config_dict()
    raw["mode"] = Mode.REPLICATION
    raw["generate"] = None
    raw["ingest"] = {"files": files}
    raw["output"] = {"formats": ["json"], "save_models": False}
    with pytest.warns(UserWarning, match="replication mode"):
        manifest = run_pipeline(from_dict(raw), tmp_path / "run")
    assert len(manifest.plot_rows()) == 64
    assert 0.64 <= manifest.score("random_forest", "ddos").accuracy <= 0.84
