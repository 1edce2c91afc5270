"""
CSV ingestion of per-attack flow files.

The public DDoS flow dataset ships one CSV per attack type. This module loads
each file (optionally capped to its first rows), normalizes headers, keeps the
label and identifier columns as text, and merges the files into one table.
"""

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..exceptions import (
    ConfigError,
    MissingHeaderError,
    MissingLabelColumnError,
    SchemaMismatchError,
)
from .tabular import FeatureTable

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEFAULT_LABEL_COLUMN = "Label"

# Identifier columns of the public dataset that are text, not measurements.
DEFAULT_TEXT_COLUMNS = (
    "Flow ID",
    "Source IP",
    "Destination IP",
    "Timestamp",
    "SimillarHTTP",
)


@dataclass
class IngestSpec:
    """
    Which files to load and how.

    Attributes:
        files: ``(path, expected_label)`` pairs, one per attack-type file
        per_file_cap: Maximum data rows taken from the head of each file
        label_column: Name of the attack label column
        text_columns: Columns kept as text when present
    """

    files: List[Tuple[str, str]]
    per_file_cap: int = 2_200_000
    label_column: str = DEFAULT_LABEL_COLUMN
    text_columns: List[str] = field(default_factory=lambda: list(DEFAULT_TEXT_COLUMNS))

    def __post_init__(self) -> None:
        if not self.files:
            raise ConfigError("ingest.files", "at least one file is required")
        if int(self.per_file_cap) < 1:
            raise ConfigError("ingest.per_file_cap", "must be >= 1")
        self.files = [(str(p), str(label)) for p, label in self.files]


def load_csv(
    path: PathLike,
    cap: Optional[int] = None,
    label_column: str = DEFAULT_LABEL_COLUMN,
    text_columns: Sequence[str] = DEFAULT_TEXT_COLUMNS,
) -> FeatureTable:
    """
    Load one flow CSV into a FeatureTable.

    Args:
        path: CSV file with a header row
        cap: Keep at most this many data rows from the head of the file
            (``None`` keeps all)
        label_column: Label column name (after header trimming)
        text_columns: Further columns to keep as text if present

    Returns:
        Table with numeric columns as float64 (``Infinity`` -> inf,
        unparseable or empty -> NaN) and the label/text columns as strings

    Raises:
        FileNotFoundError: If the file does not exist
        MissingHeaderError: If the file is empty
        MissingLabelColumnError: If the label column is absent
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"No such CSV file: {path}")

    try:
        header = pd.read_csv(path, nrows=0, encoding="utf-8")
    except pd.errors.EmptyDataError as exc:
        raise MissingHeaderError(f"{path} has no header row") from exc

    raw_names = [str(c) for c in header.columns]
    trimmed = [name.strip() for name in raw_names]
    if label_column not in trimmed:
        raise MissingLabelColumnError(label_column)

    wanted_text = {label_column, *text_columns}
    text_raw = [raw for raw, name in zip(raw_names, trimmed) if name in wanted_text]

    frame = pd.read_csv(
        path,
        nrows=cap,
        encoding="utf-8",
        dtype={raw: str for raw in text_raw},
        float_precision="round_trip",
        low_memory=False,
    )
    frame.columns = trimmed

    text_names = [name for name in trimmed if name in wanted_text]
    for name in text_names:
        frame[name] = frame[name].fillna("").astype(str).str.strip()

    for name in trimmed:
        if name in wanted_text or frame[name].dtype.kind == "f":
            continue
        frame[name] = _coerce_numeric(frame[name])

    logger.debug("Loaded %s: %d rows, %d columns", path, len(frame), len(trimmed))
    return FeatureTable(frame, string_columns=text_names)


def _coerce_numeric(series: pd.Series) -> pd.Series:
    """Parse a column to float64; tokens that are not numbers become NaN."""
    if series.dtype.kind in "iub":
        return series.astype(np.float64)
    text = series.astype(str).str.strip()
    return pd.to_numeric(text, errors="coerce").astype(np.float64)


def merge(tables: Sequence[FeatureTable]) -> FeatureTable:
    """
    Concatenate tables row-wise, in input order.

    Args:
        tables: Tables sharing an identical column-name sequence

    Returns:
        Single table whose row count is the sum of the inputs

    Raises:
        SchemaMismatchError: If any table's columns differ from the first's
    """
    if not tables:
        raise ValueError("merge needs at least one table")

    first = tables[0]
    for other in tables[1:]:
        if other.names != first.names or other.string_columns != first.string_columns:
            differing = set(first.names) ^ set(other.names)
            differing |= {
                a for a, b in zip(first.names, other.names) if a != b
            }
            differing |= set(first.string_columns) ^ set(other.string_columns)
            raise SchemaMismatchError(differing)

    if len(tables) == 1:
        return first

    frame = pd.concat([t.to_frame() for t in tables], ignore_index=True)
    return FeatureTable._wrap(frame, first.string_columns)


def load_many(spec: IngestSpec, n_jobs: int = 1) -> FeatureTable:
    """
    Load every file of an IngestSpec and merge them in spec order.

    Files are loaded in parallel when ``n_jobs`` > 1; the merge is always in
    the order the files are listed. A file whose labels differ from its
    expected label triggers a warning, not an error.
    """
    tables = Parallel(n_jobs=n_jobs)(
        delayed(load_csv)(path, spec.per_file_cap, spec.label_column, spec.text_columns)
        for path, _ in spec.files
    )

    for (path, expected), table in zip(spec.files, tables):
        found = set(label_counts(table, spec.label_column))
        unexpected = sorted(found - {expected})
        if unexpected:
            message = (
                f"{path}: expected label {expected!r}, also found {unexpected}"
            )
            logger.warning(message)
            warnings.warn(message, UserWarning, stacklevel=2)

    merged = merge(tables)
    logger.info(
        "Merged %d files into %d rows x %d columns",
        len(tables),
        merged.n_rows,
        len(merged.names),
    )
    return merged


def write_csv(table: FeatureTable, path: PathLike) -> Path:
    """
    Write a table in the dialect ``load_csv`` reads.

    Floats use 17 significant digits, so a write/load round trip reproduces
    every numeric value bit for bit.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_frame().to_csv(
        path, index=False, float_format="%.17g", encoding="utf-8", lineterminator="\n"
    )
    return path


def label_counts(table: FeatureTable, label_column: str = DEFAULT_LABEL_COLUMN) -> Dict[str, int]:
    """
    Count rows per label.

    Returns:
        Mapping label -> count, iterated in sorted label order
    """
    if not table.has_column(label_column) or not table.is_string(label_column):
        raise MissingLabelColumnError(label_column)
    counts = pd.Series(table.strings(label_column), dtype=object).value_counts()
    return {str(label): int(counts[label]) for label in sorted(counts.index)}


def class_distribution(
    table: FeatureTable, label_column: str = DEFAULT_LABEL_COLUMN
) -> pd.DataFrame:
    """
    Build the class-share table shown by ``inspect``.

    Returns:
        DataFrame with columns Label, Count, Share (fraction of all rows),
        sorted by label
    """
    counts = label_counts(table, label_column)
    total = sum(counts.values())
    rows = [
        {"Label": label, "Count": count, "Share": count / total if total else 0.0}
        for label, count in counts.items()
    ]
    return pd.DataFrame(rows, columns=["Label", "Count", "Share"])


def port_histogram(
    table: FeatureTable,
    port_column: str = "Source Port",
    label_column: str = DEFAULT_LABEL_COLUMN,
    bins: Sequence[int] = (0, 1024, 5000, 10000, 20000, 30000, 40000, 50000, 60000, 65536),
) -> pd.DataFrame:
    """
    Count ports per class in fixed bins.

    Args:
        table: Table with a numeric port column and a label column
        port_column: Port column to histogram
        label_column: Label column to group by
        bins: Bin edges; bin ``i`` covers ``[bins[i], bins[i+1])``

    Returns:
        DataFrame indexed by label, one column per bin (``"lo-hi"``)
    """
    ports = table.numeric(port_column)
    labels = np.asarray(table.strings(label_column), dtype=object)
    edges = np.asarray(bins, dtype=np.float64)
    names = [f"{int(lo)}-{int(hi) - 1}" for lo, hi in zip(edges[:-1], edges[1:])]

    rows = {}
    for label in sorted(set(labels.tolist())):
        counts, _ = np.histogram(ports[labels == label], bins=edges)
        rows[label] = counts.astype(np.int64)
    return pd.DataFrame.from_dict(rows, orient="index", columns=names)
