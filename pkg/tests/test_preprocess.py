"""
Tests for encoding, cleaning, scaling and splitting.
"""

import numpy as np
import pytest

from ddos5g.analysis.preprocess import (
    CleanPolicy,
    LabelEncoder,
    Scaler,
    SplitSpec,
    apply_scaler,
    drop_and_clean,
    find_nonfinite_columns,
    fit_encoder,
    fit_scaler,
    stratified_split,
    stratified_split_indices,
)
from ddos5g.data.tabular import FeatureTable
from ddos5g.exceptions import ConfigError, EmptyColumnError, MissingColumnError, UnknownColumnError


def test_encoder_lexicographic_codes():
    """Test that codes follow sorted label order."""
    enc = fit_encoder(["Syn", "BENIGN", "DrDoS_DNS", "Syn"])
    assert enc.classes == ["BENIGN", "DrDoS_DNS", "Syn"]
    assert enc.encode(["Syn", "BENIGN"]).tolist() == [2, 0]
    assert enc.decode([1]) == ["DrDoS_DNS"]
    assert enc.n_classes == 3


def test_encoder_unseen_label():
    """Test that encoding an unseen label fails."""
    enc = fit_encoder(["a"])
    with pytest.raises(KeyError, match="'b'"):
        enc.encode(["b"])


def test_encoder_empty():
    """Test that an empty column cannot be encoded."""
    with pytest.raises(EmptyColumnError):
        fit_encoder([])


def test_encoder_dict_round_trip():
    """Test encoder persistence form."""
    enc = fit_encoder(["b", "a"])
    assert LabelEncoder.from_dict(enc.to_dict()) == enc


def test_drop_and_clean_drop_rows(numeric_table):
    """Test that rows with non-finite values are removed."""
    out = drop_and_clean(numeric_table, drop=[], policy=CleanPolicy.DROP_ROWS)
    assert out.n_rows == 2
    assert out.numeric("a").tolist() == [1.0, 3.0]
    assert find_nonfinite_columns(out) == []


def test_drop_and_clean_median_impute(numeric_table):
    """Test that non-finite values become their column's finite median."""
    out = drop_and_clean(numeric_table, drop=["a"], policy="median_impute")
    assert out.names == ["b", "Label"]
    assert out.numeric("b").tolist() == [0.5, 1.0, 1.5, 1.0]


def test_drop_and_clean_all_nonfinite_column_imputes_zero():
    """Test a column without finite values under median imputation."""
    table = FeatureTable.from_columns(numeric={"x": [np.nan, np.inf], "y": [1.0, 2.0]})
    with pytest.warns(UserWarning, match="no finite values"):
        out = drop_and_clean(table, drop=[], policy=CleanPolicy.MEDIAN_IMPUTE)
    assert out.numeric("x").tolist() == [0.0, 0.0]


def test_drop_and_clean_unknown_column(numeric_table):
    """Test that dropping a missing column is an error."""
    with pytest.raises(UnknownColumnError, match="Source Port"):
        drop_and_clean(numeric_table, drop=["Source Port"])


def test_drop_and_clean_default_drop(flow_table):
    """Test the default drop list on a dataset-shaped table."""
    out = drop_and_clean(flow_table)
    assert "Source Port" not in out.names
    assert "Unnamed: 0" not in out.names
    assert out.n_rows == flow_table.n_rows


def test_scaler_zero_mean_unit_std():
    """Test z-scoring with population statistics."""
    table = FeatureTable.from_columns(numeric={"x": [1.0, 2.0, 3.0, 4.0], "c": [5.0] * 4})
    scaler = fit_scaler(table)
    out = apply_scaler(scaler, table)
    x = out.numeric("x")
    assert x.mean() == pytest.approx(0.0)
    assert x.std() == pytest.approx(1.0)
    assert out.numeric("c").tolist() == [0.0] * 4
    assert scaler.std[1] == 1.0


def test_scaler_uses_training_statistics():
    """Test that test rows are scaled with training mean and std."""
    train = FeatureTable.from_columns(numeric={"x": [0.0, 2.0]})
    test = FeatureTable.from_columns(numeric={"x": [4.0]})
    out = apply_scaler(fit_scaler(train), test)
    assert out.numeric("x").tolist() == [3.0]


def test_scaler_dict_round_trip():
    """Test scaler persistence form."""
    scaler = fit_scaler(FeatureTable.from_columns(numeric={"x": [1.0, 3.0]}))
    again = Scaler.from_dict(scaler.to_dict())
    assert again.columns == ["x"]
    assert again.mean.tolist() == scaler.mean.tolist()
    assert again.std.tolist() == scaler.std.tolist()


def test_stratified_split_proportions(flow_table):
    """Test per-class test counts and partition properties."""
    train, test = stratified_split(flow_table, SplitSpec(test_fraction=0.2, seed=0))
    assert train.n_rows + test.n_rows == flow_table.n_rows
    labels = test.strings("Label")
    for label in set(labels):
        assert labels.count(label) == 6


def test_split_indices_disjoint_and_sorted():
    """Test that partitions are disjoint, sorted and cover every row."""
    strata = ["a"] * 10 + ["b"] * 5 + ["c"]
    train, test = stratified_split_indices(strata, 0.3, seed=1)
    assert np.intersect1d(train, test).size == 0
    assert sorted(np.r_[train, test].tolist()) == list(range(16))
    assert (np.diff(test) > 0).all()
    assert 15 in train.tolist()


def test_split_clamps_small_strata():
    """Test that a two-row stratum sends exactly one row each way."""
    train, test = stratified_split_indices(["a", "a"], 0.01, seed=0)
    assert train.size == 1 and test.size == 1
    train, test = stratified_split_indices(["a", "a"], 0.99, seed=0)
    assert train.size == 1 and test.size == 1


def test_split_is_deterministic(flow_table):
    """Test that the same seed gives the same partition."""
    a = stratified_split(flow_table, SplitSpec(seed=5))
    b = stratified_split(flow_table, SplitSpec(seed=5))
    assert a[1].equals(b[1])


def test_split_validation(flow_table):
    """Test split spec and column validation."""
    with pytest.raises(ConfigError, match="split.test_fraction"):
        SplitSpec(test_fraction=1.0)
    with pytest.raises(MissingColumnError):
        stratified_split(flow_table, SplitSpec(stratify_on="nope"))
