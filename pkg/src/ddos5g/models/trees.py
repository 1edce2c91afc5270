"""
CART decision trees for classification (Gini) and regression (squared error).

Split search sorts each candidate feature once per node and scans every
boundary between adjacent distinct values using cumulative class counts, so a
node costs ``O(m * n log n)`` for ``m`` candidate features. Thresholds are the
midpoints of adjacent sorted values and rows with ``x <= threshold`` go left.
Equal gains resolve toward the lower feature index, then the lower threshold.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..exceptions import UnfittedModelError
from ..utils.seeding import make_rng
from .base import Learner, ModelKind, register

logger = logging.getLogger(__name__)

GINI = "gini"
SQUARED_ERROR = "squared_error"

# Gains at or below this are treated as no improvement.
_MIN_GAIN = 1e-12


@dataclass
class SplitNode:
    """
    One tree node.

    Attributes:
        feature: Split feature index, ``-1`` for a leaf
        threshold: Split threshold; rows with ``x <= threshold`` go left
        left: Index of the left child, ``-1`` for a leaf
        right: Index of the right child, ``-1`` for a leaf
        value: Class distribution (sums to 1) or, for regression, ``[mean]``
        n_samples: Training rows that reached the node
        gain: Weighted impurity decrease produced by the split (0 for leaves)
    """

    feature: int
    threshold: float
    left: int
    right: int
    value: np.ndarray
    n_samples: int
    gain: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


class Tree:
    """Fitted tree stored as flat node arrays."""

    def __init__(self, nodes: List[SplitNode], n_features: int):
        if not nodes:
            raise UnfittedModelError("A tree needs at least one node")
        self.n_features = n_features
        self.feature = np.array([n.feature for n in nodes], dtype=np.int64)
        self.threshold = np.array([n.threshold for n in nodes], dtype=np.float64)
        self.left = np.array([n.left for n in nodes], dtype=np.int64)
        self.right = np.array([n.right for n in nodes], dtype=np.int64)
        self.value = np.vstack([n.value for n in nodes]).astype(np.float64)
        self.n_samples = np.array([n.n_samples for n in nodes], dtype=np.int64)
        self.gain = np.array([n.gain for n in nodes], dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    @property
    def n_splits(self) -> int:
        return int((self.feature >= 0).sum())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            at = node[active]
            go_left = X[active, self.feature[at]] <= self.threshold[at]
            node[active] = np.where(go_left, self.left[at], self.right[at])
            active = active[self.feature[node[active]] >= 0]
        return node

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        """Leaf value for every row: ``(n, n_classes)`` or ``(n, 1)``."""
        return self.value[self.apply(X)]

    def to_arrays(self, prefix: str = "") -> Dict[str, np.ndarray]:
        return {
            f"{prefix}feature": self.feature,
            f"{prefix}threshold": self.threshold,
            f"{prefix}left": self.left,
            f"{prefix}right": self.right,
            f"{prefix}value": self.value,
            f"{prefix}n_samples": self.n_samples,
            f"{prefix}gain": self.gain,
        }

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray], n_features: int, prefix: str = "") -> "Tree":
        tree = cls.__new__(cls)
        tree.n_features = n_features
        tree.feature = np.asarray(arrays[f"{prefix}feature"], dtype=np.int64)
        tree.threshold = np.asarray(arrays[f"{prefix}threshold"], dtype=np.float64)
        tree.left = np.asarray(arrays[f"{prefix}left"], dtype=np.int64)
        tree.right = np.asarray(arrays[f"{prefix}right"], dtype=np.int64)
        tree.value = np.asarray(arrays[f"{prefix}value"], dtype=np.float64)
        tree.n_samples = np.asarray(arrays[f"{prefix}n_samples"], dtype=np.int64)
        tree.gain = np.asarray(arrays[f"{prefix}gain"], dtype=np.float64)
        return tree


def _midpoint(low: float, high: float) -> float:
    mid = 0.5 * (low + high)
    # Adjacent floats can round the midpoint up onto the right-hand value.
    return low if mid >= high else mid


class TreeBuilder:
    """
    Grows one CART tree.

    Args:
        criterion: ``"gini"`` for classification, ``"squared_error"`` for regression
        max_depth: Maximum depth; the root is depth 0
        min_leaf: Minimum training rows in each child
        max_features: Candidate features drawn per node; ``None`` uses all
        random_thresholds: Draw one uniform threshold per candidate feature
            instead of scanning every boundary (extremely randomized trees)
        rng: Generator for feature subsets and random thresholds
    """

    def __init__(
        self,
        criterion: str = GINI,
        max_depth: int = 16,
        min_leaf: int = 1,
        max_features: Optional[int] = None,
        random_thresholds: bool = False,
        rng: Optional[np.random.Generator] = None,
    ):
        if criterion not in (GINI, SQUARED_ERROR):
            raise ValueError(f"Unknown criterion: {criterion}")
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_leaf = max(1, min_leaf)
        self.max_features = max_features
        self.random_thresholds = random_thresholds
        self.rng = rng if rng is not None else make_rng(0)

    def build(
        self,
        X: np.ndarray,
        y: np.ndarray,
        n_classes: int = 0,
        sample_weight: Optional[np.ndarray] = None,
    ) -> Tree:
        """
        Grow a tree on ``(X, y)``.

        Args:
            X: ``(n, p)`` finite features
            y: Integer class codes (gini) or real targets (squared error)
            n_classes: Number of classes, gini only
            sample_weight: Positive row weights, gini only; defaults to ones
        """
        X = np.asarray(X, dtype=np.float64)
        n, p = X.shape
        if self.criterion == GINI:
            w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
            # Mean weight 1 keeps gains on the same scale as unweighted fits.
            w = w * (n / w.sum())
            targets = np.zeros((n, n_classes))
            targets[np.arange(n), np.asarray(y, dtype=np.int64)] = w
        else:
            targets = np.asarray(y, dtype=np.float64).reshape(n, 1)

        nodes: List[SplitNode] = []
        self._grow(X, targets, np.arange(n), 0, nodes)
        return Tree(nodes, p)

    def _leaf_value(self, targets: np.ndarray) -> np.ndarray:
        if self.criterion == GINI:
            totals = targets.sum(axis=0)
            return totals / totals.sum()
        return np.array([targets[:, 0].mean()])

    def _grow(
        self, X: np.ndarray, targets: np.ndarray, rows: np.ndarray, depth: int, nodes: List[SplitNode]
    ) -> int:
        node_id = len(nodes)
        node_targets = targets[rows]
        nodes.append(
            SplitNode(-1, np.nan, -1, -1, self._leaf_value(node_targets), int(rows.size))
        )
        if depth >= self.max_depth or rows.size < 2 * self.min_leaf:
            return node_id

        split = self._best_split(X[rows], node_targets)
        if split is None:
            return node_id
        feature, threshold, gain = split
        go_left = X[rows, feature] <= threshold
        left = self._grow(X, targets, rows[go_left], depth + 1, nodes)
        right = self._grow(X, targets, rows[~go_left], depth + 1, nodes)
        node = nodes[node_id]
        node.feature, node.threshold, node.left, node.right, node.gain = (
            feature,
            threshold,
            left,
            right,
            gain,
        )
        return node_id

    def _candidate_features(self, p: int) -> np.ndarray:
        if self.max_features is None or self.max_features >= p:
            return np.arange(p)
        return np.sort(self.rng.choice(p, size=self.max_features, replace=False))

    def _best_split(self, X: np.ndarray, targets: np.ndarray) -> Optional[Tuple[int, float, float]]:
        best: Optional[Tuple[int, float, float]] = None
        best_gain = _MIN_GAIN
        for j in self._candidate_features(X.shape[1]):
            if self.random_thresholds:
                found = self._random_split(X[:, j], targets)
            else:
                found = self._scan_split(X[:, j], targets)
            if found is not None and found[1] > best_gain:
                best_gain = found[1]
                best = (int(j), found[0], found[1])
        return best

    def _impurity_terms(self, left: np.ndarray, total: np.ndarray, n_left: np.ndarray, n: int) -> np.ndarray:
        # Weighted child impurities for every candidate boundary: gini uses
        # W * (1 - sum p^2), squared error uses the sum of squared deviations.
        right = total - left
        if self.criterion == GINI:
            w_left = left.sum(axis=1)
            w_right = right.sum(axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                imp_left = np.where(w_left > 0, w_left - (left**2).sum(axis=1) / w_left, 0.0)
                imp_right = np.where(w_right > 0, w_right - (right**2).sum(axis=1) / w_right, 0.0)
            return imp_left + imp_right
        sum_left = left[:, 0]
        sq_left = left[:, 1]
        sum_right = total[0] - sum_left
        sq_right = total[1] - sq_left
        n_right = n - n_left
        return (sq_left - sum_left**2 / n_left) + (sq_right - sum_right**2 / n_right)

    def _node_stats(self, targets: np.ndarray) -> Tuple[np.ndarray, float]:
        if self.criterion == GINI:
            total = targets.sum(axis=0)
            weight = total.sum()
            return targets, float(weight - (total**2).sum() / weight)
        y = targets[:, 0]
        centered = y - y.mean()
        stats = np.column_stack([centered, centered**2])
        return stats, float((centered**2).sum())

    def _scan_split(self, x: np.ndarray, targets: np.ndarray) -> Optional[Tuple[float, float]]:
        n = x.size
        stats, parent = self._node_stats(targets)
        if parent <= _MIN_GAIN:
            return None
        order = np.argsort(x, kind="stable")
        xs = x[order]
        left = np.cumsum(stats[order], axis=0)[:-1]
        n_left = np.arange(1, n, dtype=np.float64)

        valid = xs[:-1] < xs[1:]
        valid &= (n_left >= self.min_leaf) & (n - n_left >= self.min_leaf)
        if not valid.any():
            return None
        gains = parent - self._impurity_terms(left, stats.sum(axis=0), n_left, n)
        gains = np.where(valid, gains, -np.inf)
        i = int(np.argmax(gains))
        return _midpoint(xs[i], xs[i + 1]), float(gains[i])

    def _random_split(self, x: np.ndarray, targets: np.ndarray) -> Optional[Tuple[float, float]]:
        low, high = float(x.min()), float(x.max())
        if low == high:
            return None
        threshold = float(self.rng.uniform(low, high))
        if threshold >= high:
            threshold = low
        stats, parent = self._node_stats(targets)
        go_left = x <= threshold
        n_left = int(go_left.sum())
        if n_left < self.min_leaf or x.size - n_left < self.min_leaf or parent <= _MIN_GAIN:
            return None
        left = stats[go_left].sum(axis=0)[None, :]
        gain = parent - self._impurity_terms(
            left, stats.sum(axis=0), np.array([float(n_left)]), x.size
        )[0]
        return threshold, float(gain)


def tree_importance(tree: Optional[Tree], n_features: int) -> np.ndarray:
    """
    Normalized impurity-decrease importance of every feature.

    Args:
        tree: Fitted tree
        n_features: Length of the returned vector

    Returns:
        Nonnegative vector summing to 1, or all zeros when the tree never splits

    Raises:
        UnfittedModelError: If ``tree`` is None
    """
    if tree is None:
        raise UnfittedModelError("Importance requires a fitted tree")
    splits = tree.feature >= 0
    importance = np.bincount(
        tree.feature[splits], weights=tree.gain[splits], minlength=n_features
    ).astype(np.float64)[:n_features]
    total = importance.sum()
    if total <= 0:
        return np.zeros(n_features)
    return importance / total


def fit_regression_tree(
    X: np.ndarray, y: np.ndarray, max_depth: int = 8, min_leaf: int = 5
) -> Tree:
    """Fit a squared-error regression tree on all features."""
    builder = TreeBuilder(SQUARED_ERROR, max_depth=max_depth, min_leaf=min_leaf)
    return builder.build(X, y)


@register(ModelKind.DECISION_TREE)
class DecisionTreeLearner(Learner):
    """Single CART classifier with Gini impurity and depth/min-leaf caps."""

    tree: Optional[Tree] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        builder = TreeBuilder(
            GINI, max_depth=int(self.params["max_depth"]), min_leaf=int(self.params["min_leaf"])
        )
        self.tree = builder.build(X, y, self.n_classes)
        logger.debug("Decision tree: %d nodes, %d splits", self.tree.n_nodes, self.tree.n_splits)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.tree is None:
            raise UnfittedModelError("decision_tree is not fitted")
        return self.tree.predict_value(X)

    def get_state(self) -> Dict[str, np.ndarray]:
        if self.tree is None:
            raise UnfittedModelError("decision_tree is not fitted")
        return {**self.tree.to_arrays(), "n_features": np.array(self.tree.n_features)}

    def set_state(self, state: Mapping[str, np.ndarray]) -> None:
        self.tree = Tree.from_arrays(dict(state), int(state["n_features"]))
