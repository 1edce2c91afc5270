"""
Preprocessing: label encoding, non-finite handling, scaling and splitting.
"""

import enum
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..data.tabular import FeatureTable, filter_rows, finite_row_mask
from ..exceptions import ConfigError, EmptyColumnError, MissingColumnError, UnknownColumnError
from ..utils.seeding import make_rng

logger = logging.getLogger(__name__)

DEFAULT_DROP_COLUMNS = ("Unnamed: 0", "Source Port", "Destination Port")


class CleanPolicy(str, enum.Enum):
    """How ``drop_and_clean`` handles NaN and infinite values."""

    DROP_ROWS = "drop_rows"
    MEDIAN_IMPUTE = "median_impute"


class LabelEncoder:
    """
    Bijection between class strings and integer codes.

    Codes are ``0..k-1`` in lexicographic order of the class strings.
    """

    def __init__(self, classes: Sequence[str]):
        self.classes: List[str] = sorted({str(c) for c in classes})
        self.code_of: Dict[str, int] = {c: i for i, c in enumerate(self.classes)}
        self.label_of: Dict[int, str] = dict(enumerate(self.classes))

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def encode(self, labels: Sequence[str]) -> np.ndarray:
        """Map labels to codes; unseen labels raise ``KeyError``."""
        try:
            return np.fromiter((self.code_of[str(v)] for v in labels), dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"Label {exc.args[0]!r} not seen when fitting the encoder") from exc

    def decode(self, codes: Sequence[int]) -> List[str]:
        return [self.label_of[int(c)] for c in codes]

    def to_dict(self) -> Dict[str, Any]:
        return {"classes": list(self.classes)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LabelEncoder":
        return cls(data["classes"])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelEncoder) and self.classes == other.classes

    def __repr__(self) -> str:
        return f"LabelEncoder(classes={self.classes})"


def fit_encoder(labels: Sequence[str]) -> LabelEncoder:
    """
    Fit a label encoder.

    Args:
        labels: Label column values

    Raises:
        EmptyColumnError: If ``labels`` is empty
    """
    if len(labels) == 0:
        raise EmptyColumnError("Cannot fit an encoder on an empty column")
    return LabelEncoder(labels)


def find_nonfinite_columns(table: FeatureTable) -> List[str]:
    """Names of numeric columns holding any NaN or infinite value, in table order."""
    names = table.columns
    if not names:
        return []
    bad = ~np.isfinite(table.matrix(names)).all(axis=0)
    return [name for name, flag in zip(names, bad) if flag]


def drop_and_clean(
    table: FeatureTable,
    drop: Sequence[str] = DEFAULT_DROP_COLUMNS,
    policy: CleanPolicy = CleanPolicy.DROP_ROWS,
) -> FeatureTable:
    """
    Remove unwanted columns, then handle non-finite numeric values.

    Args:
        table: Input table
        drop: Columns to remove (numeric or text)
        policy: ``drop_rows`` removes every row with a non-finite value;
            ``median_impute`` replaces each one with its column's finite median

    Returns:
        Cleaned table

    Raises:
        UnknownColumnError: If a column in ``drop`` does not exist
    """
    policy = CleanPolicy(policy)
    for name in drop:
        if not table.has_column(name):
            raise UnknownColumnError(name)
    out = table.drop(drop)

    bad_columns = find_nonfinite_columns(out)
    if not bad_columns:
        return out

    if policy is CleanPolicy.DROP_ROWS:
        mask = finite_row_mask(out, bad_columns)
        logger.info(
            "Dropping %d rows with non-finite values in %s", int((~mask).sum()), bad_columns
        )
        return filter_rows(out, mask)

    matrix = out.matrix(bad_columns)
    for j, name in enumerate(bad_columns):
        column = matrix[:, j]
        finite = np.isfinite(column)
        if finite.any():
            fill = float(np.median(column[finite]))
        else:
            fill = 0.0
            warnings.warn(
                f"Column {name!r} has no finite values; imputing 0.0",
                UserWarning,
                stacklevel=2,
            )
        column[~finite] = fill
    logger.info("Median-imputed non-finite values in %s", bad_columns)
    return out.with_matrix(bad_columns, matrix)


@dataclass
class Scaler:
    """
    Per-column z-score transform fitted on training rows.

    A column whose standard deviation is 0 is divided by 1 instead.
    """

    columns: List[str]
    mean: np.ndarray
    std: np.ndarray

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        return (np.asarray(matrix, dtype=np.float64) - self.mean) / self.std

    def inverse(self, matrix: np.ndarray) -> np.ndarray:
        return np.asarray(matrix, dtype=np.float64) * self.std + self.mean

    def to_dict(self) -> Dict[str, Any]:
        return {
            "columns": list(self.columns),
            "mean": [float(v) for v in self.mean],
            "std": [float(v) for v in self.std],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scaler":
        return cls(
            columns=list(data["columns"]),
            mean=np.asarray(data["mean"], dtype=np.float64),
            std=np.asarray(data["std"], dtype=np.float64),
        )


def fit_scaler(train: FeatureTable, columns: Optional[Sequence[str]] = None) -> Scaler:
    """
    Fit z-score statistics (population std) on a training table.

    Args:
        train: Training partition
        columns: Numeric columns to scale; defaults to all numeric columns
    """
    columns = train.columns if columns is None else list(columns)
    matrix = train.matrix(columns)
    if matrix.shape[0] == 0:
        mean = np.zeros(len(columns))
        std = np.ones(len(columns))
    else:
        mean = matrix.mean(axis=0)
        std = matrix.std(axis=0, ddof=0)
    std = np.where(std == 0, 1.0, std)
    return Scaler(columns=list(columns), mean=mean, std=std)


def apply_scaler(scaler: Scaler, table: FeatureTable) -> FeatureTable:
    """Return ``table`` with the scaler's columns z-scored using training statistics."""
    return table.with_matrix(scaler.columns, scaler.transform(table.matrix(scaler.columns)))


@dataclass
class SplitSpec:
    """
    Stratified train/test split settings.

    Attributes:
        test_fraction: Share of each class sent to the test partition
        stratify_on: Column whose values define the strata
        seed: Shuffle seed
    """

    test_fraction: float = 0.2
    stratify_on: str = "Label"
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("split.test_fraction", "must lie in (0, 1)")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split_indices(
    strata: Sequence[Any], test_fraction: float, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split row indices per stratum.

    Each stratum of size ``n`` sends ``round(n * test_fraction)`` rows to the
    test side, clamped to ``[1, n-1]`` when ``n >= 2``; a single-row stratum
    stays in training. Returned indices are in ascending row order.
    """
    keys = np.asarray([str(s) for s in strata], dtype=object)
    rng = make_rng(seed)
    test_parts: List[np.ndarray] = []
    for key in sorted(set(keys.tolist())):
        rows = np.flatnonzero(keys == key)
        n = rows.size
        if n < 2:
            continue
        n_test = min(max(_round_half_up(n * test_fraction), 1), n - 1)
        test_parts.append(rows[rng.permutation(n)[:n_test]])

    test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, np.int64)
    is_test = np.zeros(keys.size, dtype=bool)
    is_test[test_idx] = True
    return np.flatnonzero(~is_test), np.flatnonzero(is_test)


def stratified_split(table: FeatureTable, spec: SplitSpec) -> Tuple[FeatureTable, FeatureTable]:
    """
    Split a table into train and test partitions, stratified on one column.

    Partitions are disjoint and together hold every row; rows keep their
    original relative order.

    Raises:
        MissingColumnError: If the stratification column does not exist
    """
    if not table.has_column(spec.stratify_on):
        raise MissingColumnError(spec.stratify_on)
    if table.is_string(spec.stratify_on):
        strata: Sequence[Any] = table.strings(spec.stratify_on)
    else:
        strata = table.numeric(spec.stratify_on).tolist()

    train_idx, test_idx = stratified_split_indices(strata, spec.test_fraction, spec.seed)
    logger.info(
        "Stratified split on %r: %d train / %d test rows",
        spec.stratify_on,
        train_idx.size,
        test_idx.size,
    )
    return table.take(train_idx), table.take(test_idx)
