"""
Pytest configuration and fixtures for ddos5g tests.
"""

import numpy as np
import pytest

from ddos5g.config import default_config_dict, from_dict
from ddos5g.data.synthgen import balanced_spec, generate
from ddos5g.data.tabular import FeatureTable

SMALL_LABELS = ["BENIGN", "DrDoS_DNS", "Syn", "WebDDoS"]

# Small enough that the whole suite trains in seconds.
FAST_HYPERPARAMETERS = {
    "decision_tree": {"max_depth": 6},
    "random_forest": {"n_trees": 5, "max_depth": 6},
    "adaboost": {"n_rounds": 5},
    "knn": {"k": 3},
    "logistic_regression": {"n_iter": 30},
    "feedforward_net": {"hidden": 8, "epochs": 2, "batch_size": 32},
    "extra_trees": {"n_trees": 5, "max_depth": 6},
}


@pytest.fixture
def flow_table():
    """Four-class synthetic flow table with 30 rows per class."""
    return generate(balanced_spec(SMALL_LABELS, 30, seed=3))


@pytest.fixture
def numeric_table():
    """Small numeric table with one text label column."""
    return FeatureTable.from_columns(
        numeric={"a": [1.0, 2.0, 3.0, 4.0], "b": [0.5, np.nan, 1.5, np.inf]},
        strings={"Label": ["x", "y", "x", "y"]},
    )


@pytest.fixture
def small_config_dict(tmp_path):
    """Raw config for a fast end-to-end run on generated data."""
    raw = default_config_dict()
    raw["generate"] = {"rows_per_class": 30, "labels": SMALL_LABELS, "divisor": 100}
    raw["featsel"] = {"k_best": 10, "rfe_final": 5}
    raw["models"] = {"hyperparameters": FAST_HYPERPARAMETERS}
    raw["output"] = {"formats": ["json", "csv"], "save_models": True}
    raw["output_dir"] = str(tmp_path / "out")
    return raw


@pytest.fixture
def small_config(small_config_dict):
    """Validated config for a fast end-to-end run."""
    return from_dict(small_config_dict)
