"""
Tests for the FeatureTable column store.
"""

import numpy as np
import pandas as pd
import pytest

from ddos5g.data.tabular import (
    FeatureTable,
    column_stats,
    filter_rows,
    finite_row_mask,
    select_columns,
)
from ddos5g.exceptions import DuplicateColumnError, LengthMismatchError, UnknownColumnError


def test_from_columns_orders_numeric_then_strings(numeric_table):
    """Test that numeric columns come first, then text columns."""
    assert numeric_table.names == ["a", "b", "Label"]
    assert numeric_table.columns == ["a", "b"]
    assert numeric_table.string_columns == ["Label"]
    assert numeric_table.n_rows == 4
    assert len(numeric_table) == 4


def test_from_columns_explicit_order():
    """Test an explicit column order."""
    table = FeatureTable.from_columns(
        numeric={"x": [1.0]}, strings={"Label": ["a"]}, order=["Label", "x"]
    )
    assert table.names == ["Label", "x"]


def test_from_columns_length_mismatch():
    """Test that ragged columns are rejected."""
    with pytest.raises(LengthMismatchError):
        FeatureTable.from_columns(numeric={"x": [1.0, 2.0], "y": [1.0]})


def test_duplicate_names_rejected():
    """Test that a name used as both numeric and text is rejected."""
    with pytest.raises(DuplicateColumnError):
        FeatureTable.from_columns(numeric={"x": [1.0]}, strings={"x": ["a"]})


def test_numeric_coercion_from_frame():
    """Test that unparseable cells become NaN."""
    frame = pd.DataFrame({"x": ["1.5", "oops", "3"], "Label": ["a", "b", "c"]})
    table = FeatureTable(frame, string_columns=["Label"])
    values = table.numeric("x")
    assert values[0] == 1.5
    assert np.isnan(values[1])
    assert values[2] == 3.0


def test_unknown_column_access(numeric_table):
    """Test that missing or wrongly typed columns raise UnknownColumnError."""
    with pytest.raises(UnknownColumnError, match="nope"):
        numeric_table.numeric("nope")
    with pytest.raises(UnknownColumnError):
        numeric_table.numeric("Label")
    with pytest.raises(UnknownColumnError):
        numeric_table.strings("a")


def test_unknown_column_is_key_error(numeric_table):
    """Test that lookups fail as KeyError too."""
    with pytest.raises(KeyError):
        numeric_table.matrix(["missing"])


def test_accessors_return_copies(numeric_table):
    """Test that mutating a returned column leaves the table unchanged."""
    values = numeric_table.numeric("a")
    values[0] = 99.0
    assert numeric_table.numeric("a")[0] == 1.0


def test_matrix_row_major(numeric_table):
    """Test matrix shape and ordering."""
    m = numeric_table.matrix(["b", "a"])
    assert m.shape == (4, 2)
    assert m[0].tolist() == [0.5, 1.0]
    assert numeric_table.matrix([]).shape == (4, 0)


def test_with_numeric_does_not_modify_input(numeric_table):
    """Test that derivation returns a new table."""
    out = numeric_table.with_numeric("c", [0.0, 0.0, 0.0, 0.0])
    assert "c" in out.names
    assert "c" not in numeric_table.names


def test_with_numeric_replaces_in_place(numeric_table):
    """Test that replacing a column keeps its position."""
    out = numeric_table.with_numeric("a", [9.0, 9.0, 9.0, 9.0])
    assert out.names == numeric_table.names
    assert out.numeric("a").tolist() == [9.0] * 4


def test_with_strings_length_checked(numeric_table):
    """Test that a short text column is rejected."""
    with pytest.raises(LengthMismatchError):
        numeric_table.with_strings("tag", ["a"])


def test_with_matrix(numeric_table):
    """Test replacing several numeric columns at once."""
    out = numeric_table.with_matrix(["a", "b"], np.zeros((4, 2)))
    assert out.matrix().sum() == 0.0
    assert out.strings("Label") == numeric_table.strings("Label")


def test_select_columns_order(numeric_table):
    """Test that projection uses the requested order."""
    out = select_columns(numeric_table, ["Label", "b"])
    assert out.names == ["Label", "b"]
    assert out.string_columns == ["Label"]


def test_filter_rows_keeps_order(numeric_table):
    """Test that filtering preserves relative row order."""
    out = filter_rows(numeric_table, [False, True, False, True])
    assert out.numeric("a").tolist() == [2.0, 4.0]
    with pytest.raises(LengthMismatchError):
        filter_rows(numeric_table, [True])


def test_take_and_drop(numeric_table):
    """Test row selection and column removal."""
    out = numeric_table.take([3, 0]).drop(["b"])
    assert out.names == ["a", "Label"]
    assert out.numeric("a").tolist() == [4.0, 1.0]
    assert out.strings("Label") == ["y", "x"]


def test_column_stats_ignores_nonfinite(numeric_table):
    """Test that stats cover finite entries only, with population std."""
    stats = column_stats(numeric_table, "b")
    assert stats.n_nonfinite == 2
    assert stats.mean == pytest.approx(1.0)
    assert stats.std_dev == pytest.approx(0.5)
    assert stats.min == 0.5
    assert stats.max == 1.5


def test_column_stats_all_nonfinite():
    """Test that a column without finite values reports NaN."""
    table = FeatureTable.from_columns(numeric={"x": [np.nan, np.inf]})
    stats = column_stats(table, "x")
    assert np.isnan(stats.mean)
    assert stats.n_nonfinite == 2


def test_finite_row_mask(numeric_table):
    """Test the per-row finiteness mask."""
    assert finite_row_mask(numeric_table).tolist() == [True, False, True, False]
    assert finite_row_mask(numeric_table, ["a"]).all()


def test_equals_treats_nan_as_equal(numeric_table):
    """Test value equality with NaN cells."""
    assert numeric_table.equals(numeric_table.take([0, 1, 2, 3]))
    assert not numeric_table.equals(numeric_table.take([1, 0, 2, 3]))
