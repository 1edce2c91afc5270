"""
Columnar table used at every pipeline stage.

A ``FeatureTable`` holds named 64-bit numeric columns plus named text columns
(labels, identifiers) in one stable column order. Tables are immutable: every
operation returns a new table and never modifies its input.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ..exceptions import DuplicateColumnError, LengthMismatchError, UnknownColumnError


@dataclass(frozen=True)
class ColumnStats:
    """Summary statistics of one numeric column, over its finite entries."""

    name: str
    mean: float
    std_dev: float
    min: float
    max: float
    n_nonfinite: int


class FeatureTable:
    """
    Immutable table of numeric and text columns.

    Numeric columns are stored as ``float64``; text columns as Python strings.
    Column names are unique across both kinds and their order never changes
    except through an explicit projection.
    """

    def __init__(self, frame: pd.DataFrame, string_columns: Iterable[str] = ()):
        """
        Build a table from a DataFrame.

        Args:
            frame: Source data; copied, never referenced.
            string_columns: Names of the columns to keep as text. Every other
                column is coerced to float64 (unparseable values become NaN).
        """
        names = [str(c) for c in frame.columns]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise DuplicateColumnError(f"Duplicate column names: {duplicates}")

        text = [str(c) for c in string_columns]
        for name in text:
            if name not in names:
                raise UnknownColumnError(name)
        text_set = set(text)

        data: Dict[str, pd.Series] = {}
        for name, column in zip(names, frame.columns):
            series = frame[column]
            if name in text_set:
                data[name] = series.astype(str).reset_index(drop=True)
            else:
                data[name] = pd.to_numeric(series, errors="coerce").astype(
                    np.float64
                ).reset_index(drop=True)

        self._frame = pd.DataFrame(data, columns=names)
        self._frame.index = pd.RangeIndex(len(frame))
        self._string_names = tuple(n for n in names if n in text_set)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_columns(
        cls,
        numeric: Optional[Mapping[str, Sequence[float]]] = None,
        strings: Optional[Mapping[str, Sequence[str]]] = None,
        order: Optional[Sequence[str]] = None,
    ) -> "FeatureTable":
        """
        Build a table from plain column mappings.

        Args:
            numeric: Numeric columns, in order.
            strings: Text columns, appended after the numeric ones unless
                ``order`` says otherwise.
            order: Optional explicit column order covering every column.
        """
        numeric = dict(numeric or {})
        strings = dict(strings or {})
        overlap = set(numeric) & set(strings)
        if overlap:
            raise DuplicateColumnError(f"Duplicate column names: {sorted(overlap)}")

        lengths = {len(v) for v in numeric.values()} | {
            len(v) for v in strings.values()
        }
        if len(lengths) > 1:
            raise LengthMismatchError(f"Columns have differing lengths: {sorted(lengths)}")

        data: Dict[str, object] = {}
        for name, values in numeric.items():
            data[name] = np.asarray(values, dtype=np.float64)
        for name, values in strings.items():
            data[name] = pd.Series(list(values), dtype=object)

        names = list(order) if order is not None else list(data)
        missing = set(data) - set(names)
        if missing:
            raise UnknownColumnError(sorted(missing)[0])
        frame = pd.DataFrame({n: data[n] for n in names}, columns=names)
        return cls(frame, string_columns=list(strings))

    @classmethod
    def _wrap(cls, frame: pd.DataFrame, string_columns: Sequence[str]) -> "FeatureTable":
        # Internal fast path: frame is already typed and owned by the new table.
        table = cls.__new__(cls)
        frame = frame.reset_index(drop=True)
        table._frame = frame
        table._string_names = tuple(n for n in frame.columns if n in set(string_columns))
        return table

    # -- shape and schema ---------------------------------------------------

    @property
    def n_rows(self) -> int:
        return len(self._frame)

    @property
    def names(self) -> List[str]:
        """All column names in table order."""
        return list(self._frame.columns)

    @property
    def columns(self) -> List[str]:
        """Numeric column names in table order."""
        text = set(self._string_names)
        return [n for n in self._frame.columns if n not in text]

    @property
    def string_columns(self) -> List[str]:
        """Text column names in table order."""
        return list(self._string_names)

    def has_column(self, name: str) -> bool:
        return name in self._frame.columns

    def is_string(self, name: str) -> bool:
        self._require(name)
        return name in self._string_names

    def _require(self, name: str) -> None:
        if name not in self._frame.columns:
            raise UnknownColumnError(name)

    # -- access -------------------------------------------------------------

    def numeric(self, name: str) -> np.ndarray:
        """Return a copy of a numeric column as a float64 vector."""
        self._require(name)
        if name in self._string_names:
            raise UnknownColumnError(name)
        return self._frame[name].to_numpy(dtype=np.float64, copy=True)

    def strings(self, name: str) -> List[str]:
        """Return a copy of a text column."""
        self._require(name)
        if name not in self._string_names:
            raise UnknownColumnError(name)
        return [str(v) for v in self._frame[name].tolist()]

    def matrix(self, names: Optional[Sequence[str]] = None) -> np.ndarray:
        """
        Return numeric columns as a row-major ``(n_rows, len(names))`` matrix.

        Args:
            names: Columns to stack; defaults to every numeric column.
        """
        names = self.columns if names is None else list(names)
        for name in names:
            if name not in self._frame.columns or name in self._string_names:
                raise UnknownColumnError(name)
        if not names:
            return np.empty((self.n_rows, 0), dtype=np.float64)
        return self._frame[names].to_numpy(dtype=np.float64, copy=True)

    def to_frame(self) -> pd.DataFrame:
        """Return a copy of the underlying DataFrame."""
        return self._frame.copy()

    # -- derivation ---------------------------------------------------------

    def with_numeric(self, name: str, values: Sequence[float]) -> "FeatureTable":
        """Append (or replace in place) a numeric column."""
        return self._with_column(name, np.asarray(values, dtype=np.float64), False)

    def with_strings(self, name: str, values: Sequence[str]) -> "FeatureTable":
        """Append (or replace in place) a text column."""
        return self._with_column(name, pd.Series([str(v) for v in values], dtype=object), True)

    def _with_column(self, name: str, values: object, is_text: bool) -> "FeatureTable":
        if len(values) != self.n_rows:  # type: ignore[arg-type]
            raise LengthMismatchError(
                f"Column {name!r} has {len(values)} values, table has {self.n_rows} rows"  # type: ignore[arg-type]
            )
        frame = self._frame.copy()
        frame[name] = values
        text = [n for n in self._string_names if n != name]
        if is_text:
            text.append(name)
        return FeatureTable._wrap(frame, text)

    def with_matrix(self, names: Sequence[str], values: np.ndarray) -> "FeatureTable":
        """Replace several numeric columns at once with the columns of ``values``."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.n_rows, len(names)):
            raise LengthMismatchError(
                f"Matrix shape {values.shape} does not match ({self.n_rows}, {len(names)})"
            )
        frame = self._frame.copy()
        for j, name in enumerate(names):
            if name in self._string_names:
                raise UnknownColumnError(name)
            frame[name] = values[:, j]
        return FeatureTable._wrap(frame, self._string_names)

    def drop(self, names: Iterable[str]) -> "FeatureTable":
        """Return a table without the named columns."""
        names = list(names)
        for name in names:
            self._require(name)
        frame = self._frame.drop(columns=names)
        return FeatureTable._wrap(frame, [n for n in self._string_names if n not in names])

    def take(self, indices: Sequence[int]) -> "FeatureTable":
        """Return the rows at ``indices`` in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureTable._wrap(self._frame.iloc[idx], self._string_names)

    # -- comparison -----------------------------------------------------------

    def equals(self, other: "FeatureTable") -> bool:
        """Value equality, treating NaN at the same position as equal."""
        return (
            self.names == other.names
            and self.string_columns == other.string_columns
            and self._frame.equals(other._frame)
        )

    def __len__(self) -> int:
        return self.n_rows

    def __repr__(self) -> str:
        return (
            f"FeatureTable(n_rows={self.n_rows}, numeric={len(self.columns)}, "
            f"strings={self.string_columns})"
        )


def select_columns(table: FeatureTable, names: Sequence[str]) -> FeatureTable:
    """
    Project a table onto the named columns, in the given order.

    Args:
        table: Source table
        names: Columns to keep; every name must exist

    Returns:
        Table with exactly ``names`` as columns and the same rows
    """
    names = list(names)
    for name in names:
        table._require(name)
    frame = table._frame[names].copy()
    return FeatureTable._wrap(frame, [n for n in table.string_columns if n in names])


def filter_rows(table: FeatureTable, mask: Sequence[bool]) -> FeatureTable:
    """
    Keep the rows where ``mask`` is true, preserving their relative order.

    Args:
        table: Source table
        mask: One boolean per row

    Returns:
        Filtered table with the same columns
    """
    mask_arr = np.asarray(mask, dtype=bool)
    if mask_arr.shape != (table.n_rows,):
        raise LengthMismatchError(
            f"Mask has {mask_arr.size} entries, table has {table.n_rows} rows"
        )
    return FeatureTable._wrap(table._frame.loc[mask_arr], table.string_columns)


def column_stats(table: FeatureTable, name: str) -> ColumnStats:
    """
    Summarize a numeric column over its finite entries.

    The standard deviation is the population one (divide by n). A column with
    no finite entry reports NaN for mean, std, min and max.
    """
    values = table.numeric(name)
    finite = np.isfinite(values)
    n_nonfinite = int((~finite).sum())
    good = values[finite]
    if good.size == 0:
        nan = float("nan")
        return ColumnStats(name, nan, nan, nan, nan, n_nonfinite)
    return ColumnStats(
        name=name,
        mean=float(good.mean()),
        std_dev=float(good.std(ddof=0)),
        min=float(good.min()),
        max=float(good.max()),
        n_nonfinite=n_nonfinite,
    )


def finite_row_mask(table: FeatureTable, names: Optional[Sequence[str]] = None) -> np.ndarray:
    """Return a per-row mask that is true where every named numeric value is finite."""
    matrix = table.matrix(names)
    if matrix.shape[1] == 0:
        return np.ones(table.n_rows, dtype=bool)
    return np.isfinite(matrix).all(axis=1)
