"""
SMOTE oversampling of minority classes.

Every class is brought up to the size of the largest class by interpolating
between a randomly chosen class member and one of its k nearest same-class
neighbours (Euclidean distance on the given, already scaled, features).
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..data.tabular import FeatureTable
from ..exceptions import (
    ConfigError,
    DimensionMismatchError,
    EmptyClassError,
    LengthMismatchError,
    NonFiniteFeatureError,
)
from ..utils.seeding import make_rng

logger = logging.getLogger(__name__)

# Upper bound on distance-matrix entries computed per chunk.
_CHUNK_CELLS = 4_000_000


@dataclass
class SmoteConfig:
    """
    SMOTE settings.

    Attributes:
        k_neighbors: Neighbours considered per base row
        target: Balancing target; only ``match_max_class`` is supported
        seed: Sampling seed
    """

    k_neighbors: int = 5
    target: str = "match_max_class"
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.k_neighbors) < 1:
            raise ConfigError("smote.k_neighbors", "must be >= 1")
        if self.target != "match_max_class":
            raise ConfigError("smote.target", "only 'match_max_class' is supported")


def interpolate(x: Sequence[float], x_nn: Sequence[float], u: float) -> np.ndarray:
    """
    Point on the segment from ``x`` to ``x_nn``.

    Args:
        x: Base point
        x_nn: Neighbour point
        u: Position along the segment, in [0, 1]

    Returns:
        ``x + u * (x_nn - x)``; exactly ``x`` at ``u=0`` and ``x_nn`` at ``u=1``
    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(x_nn, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Dimensions differ: {a.shape} vs {b.shape}")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    return _interpolate_rows(a[None, :], b[None, :], np.array([u]))[0]


def _interpolate_rows(base: np.ndarray, neighbor: np.ndarray, gaps: np.ndarray) -> np.ndarray:
    out = base + gaps[:, None] * (neighbor - base)
    out = np.where(gaps[:, None] == 1.0, neighbor, out)
    # Rounding must not push a point outside its segment's box.
    return np.clip(out, np.minimum(base, neighbor), np.maximum(base, neighbor))


def nearest_neighbors(points: np.ndarray, queries: np.ndarray, k: int) -> np.ndarray:
    """
    Exact brute-force k nearest neighbours within ``points``.

    Args:
        points: ``(n, d)`` candidate set
        queries: Indices into ``points`` to find neighbours for; a query is
            never its own neighbour
        k: Neighbours per query, ``k <= n - 1``

    Returns:
        ``(len(queries), k)`` neighbour indices, nearest first; equal
        distances resolve to the lower index
    """
    n = points.shape[0]
    sq_norms = np.einsum("ij,ij->i", points, points)
    chunk = max(1, _CHUNK_CELLS // max(n, 1))
    result = np.empty((len(queries), k), dtype=np.int64)
    for start in range(0, len(queries), chunk):
        q = np.asarray(queries[start : start + chunk])
        block = points[q]
        dist = sq_norms[q][:, None] + sq_norms[None, :] - 2.0 * block @ points.T
        np.maximum(dist, 0.0, out=dist)
        dist[np.arange(q.size), q] = np.inf
        order = np.argsort(dist, axis=1, kind="stable")
        result[start : start + q.size] = order[:, :k]
    return result


def smote_arrays(
    X: np.ndarray,
    y: np.ndarray,
    cfg: SmoteConfig,
    n_classes: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Oversample every class of ``(X, y)`` up to the largest class count.

    Args:
        X: ``(n, d)`` finite features
        y: ``(n,)`` integer class codes
        cfg: SMOTE settings
        n_classes: If given, every code ``0..n_classes-1`` must be present

    Returns:
        ``(X_out, y_out)`` with the original rows first, unchanged, followed by
        synthetic rows grouped by ascending class code
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise LengthMismatchError(f"X has shape {X.shape}, y has {y.shape[0]} labels")
    if y.size == 0:
        raise EmptyClassError("No rows to oversample")
    if not np.isfinite(X).all():
        raise NonFiniteFeatureError("SMOTE needs finite features; clean the table first")

    codes, counts = np.unique(y, return_counts=True)
    if n_classes is not None:
        missing = sorted(set(range(n_classes)) - set(codes.tolist()))
        if missing:
            raise EmptyClassError(f"Classes without rows: {missing}")

    target = int(counts.max())
    rng = make_rng(cfg.seed)
    new_X = [X]
    new_y = [y]

    for code, count in zip(codes.tolist(), counts.tolist()):
        needed = target - count
        if needed == 0:
            continue
        members = X[y == code]
        if count == 1:
            warnings.warn(
                f"Class {code} has a single row; SMOTE duplicates it {needed} times",
                UserWarning,
                stacklevel=2,
            )
            synthetic = np.repeat(members, needed, axis=0)
        else:
            k = min(int(cfg.k_neighbors), count - 1)
            base = rng.integers(0, count, needed)
            slot = rng.integers(0, k, needed)
            gaps = rng.random(needed)

            queries = np.unique(base)
            neighbors = nearest_neighbors(members, queries, k)
            row_of = {int(q): i for i, q in enumerate(queries)}
            picked = neighbors[[row_of[int(b)] for b in base], slot]
            synthetic = _interpolate_rows(members[base], members[picked], gaps)

        logger.debug("Class %d: %d -> %d rows", code, count, target)
        new_X.append(synthetic)
        new_y.append(np.full(needed, code, dtype=np.int64))

    return np.vstack(new_X), np.concatenate(new_y)


def smote(
    features: FeatureTable,
    labels: Sequence[int],
    cfg: SmoteConfig,
    n_classes: Optional[int] = None,
) -> Tuple[FeatureTable, np.ndarray]:
    """
    Balance a feature table by SMOTE oversampling.

    Only numeric columns take part; the result holds the numeric columns of
    ``features`` in the same order.

    Args:
        features: Finite numeric features, one row per label
        labels: Integer class codes
        cfg: SMOTE settings
        n_classes: If given, every code ``0..n_classes-1`` must have a row

    Returns:
        ``(balanced_features, balanced_labels)``

    Raises:
        EmptyClassError: If a required class has no rows
        NonFiniteFeatureError: If any feature value is NaN or infinite
    """
    names = features.columns
    X_out, y_out = smote_arrays(features.matrix(names), np.asarray(labels), cfg, n_classes)
    table = FeatureTable.from_columns({name: X_out[:, j] for j, name in enumerate(names)})
    logger.info(
        "SMOTE: %d -> %d rows (%s)", features.n_rows, table.n_rows, class_histogram(y_out)
    )
    return table, y_out


def class_histogram(labels: Sequence[int]) -> Dict[int, int]:
    """Count rows per class code, in ascending code order."""
    codes, counts = np.unique(np.asarray(labels, dtype=np.int64), return_counts=True)
    return {int(c): int(n) for c, n in zip(codes, counts)}
