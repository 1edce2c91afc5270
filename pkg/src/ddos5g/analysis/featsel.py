"""
Two-stage feature selection.

Stage one ranks every feature by a univariate F-statistic against the
target and keeps the K best. Stage two runs recursive feature elimination:
fit a regression tree on the remaining features, drop the single least
important one, repeat until the requested number survive.

The target is the integer class code treated as a number. The ``anova``
score mode replaces the regression F with a one-way ANOVA F across the
classes (``statsmodels.stats.oneway.anova_oneway``).
"""

import enum
import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from statsmodels.stats.oneway import anova_oneway

from ..data.tabular import FeatureTable, select_columns
from ..exceptions import CountTooLargeError, KTooLargeError, LengthMismatchError, NonFiniteInputError
from ..models.trees import fit_regression_tree, tree_importance

logger = logging.getLogger(__name__)

# F reported for perfectly (anti-)correlated features.
F_CAP = 1e30
_PERFECT_R = 1.0 - 1e-12

__all__ = [
    "F_CAP",
    "ScoreMode",
    "FScore",
    "RankerSpec",
    "RfeTrace",
    "Selection",
    "f_regression_scores",
    "select_k_best",
    "rfe",
    "tree_importance",
    "select_features",
]


class ScoreMode(str, enum.Enum):
    F_REGRESSION = "f_regression"
    ANOVA = "anova"


@dataclass(frozen=True)
class FScore:
    """Univariate score of one feature."""

    feature: str
    r: float
    f_stat: float
    selected: bool = False


@dataclass(frozen=True)
class RankerSpec:
    """Regression tree used to rank features during elimination."""

    max_depth: int = 8
    min_leaf: int = 5


@dataclass
class RfeTrace:
    """
    What recursive elimination did.

    Attributes:
        iterations: ``(eliminated_feature, importance_at_elimination)`` in order
        survivors: Remaining features, in input column order
    """

    iterations: List[Tuple[str, float]] = field(default_factory=list)
    survivors: List[str] = field(default_factory=list)

    @property
    def eliminated(self) -> List[str]:
        return [name for name, _ in self.iterations]


def _validated(features: FeatureTable, target: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    X = features.matrix(features.columns)
    y = np.asarray(target, dtype=np.float64)
    if y.shape[0] != X.shape[0]:
        raise LengthMismatchError(f"{X.shape[0]} rows but target has {y.shape[0]} values")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NonFiniteInputError("Feature selection needs finite features and target")
    return X, y


def _pearson(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    x_norm = np.sqrt((xc**2).sum(axis=0))
    y_norm = float(np.sqrt((yc**2).sum()))
    denom = x_norm * y_norm
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(denom > 0, (xc.T @ yc) / denom, 0.0)
    return np.clip(r, -1.0, 1.0)


def _f_from_r(r: np.ndarray, n: int) -> np.ndarray:
    r2 = r**2
    perfect = np.abs(r) >= _PERFECT_R
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(perfect, F_CAP, r2 / (1.0 - r2) * max(n - 2, 0))
    return np.minimum(f, F_CAP)


def _anova_f(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros(X.shape[1])
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore")
        for j in range(X.shape[1]):
            stat = float(anova_oneway(X[:, j], groups=y, use_var="equal", welch_correction=False).statistic)
            if np.isnan(stat):
                stat = 0.0
            out[j] = min(stat, F_CAP)
    return out


def f_regression_scores(
    features: FeatureTable,
    target: Sequence[float],
    mode: ScoreMode = ScoreMode.F_REGRESSION,
) -> List[FScore]:
    """
    Univariate F-statistic of every numeric column against the target.

    In ``f_regression`` mode ``F = r^2 / (1 - r^2) * (n - 2)`` from the
    Pearson correlation ``r``; a constant column (or target) has ``r = 0``
    and ``F = 0``, and ``|r| = 1`` reports ``F_CAP``.

    Args:
        features: Finite numeric features
        target: One finite value per row
        mode: ``f_regression`` or ``anova``

    Returns:
        One ``FScore`` per column, in column order

    Raises:
        NonFiniteInputError: If features or target contain NaN or infinity
    """
    mode = ScoreMode(mode)
    X, y = _validated(features, target)
    r = _pearson(X, y)
    f = _f_from_r(r, X.shape[0]) if mode is ScoreMode.F_REGRESSION else _anova_f(X, y)
    return [
        FScore(name, float(r_j), float(f_j)) for name, r_j, f_j in zip(features.columns, r, f)
    ]


def select_k_best(scores: Sequence[FScore], k: int) -> List[str]:
    """
    Names of the ``k`` highest-F features, best first.

    Equal scores keep their original column order.

    Raises:
        KTooLargeError: If ``k`` exceeds the number of scored features
    """
    if k > len(scores):
        raise KTooLargeError(f"k={k} exceeds the {len(scores)} available features")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    ranked = sorted(range(len(scores)), key=lambda i: (-scores[i].f_stat, i))
    return [scores[i].feature for i in ranked[:k]]


def rfe(
    features: FeatureTable,
    target: Sequence[float],
    final_count: int,
    ranker: RankerSpec = RankerSpec(),
    priority: Optional[Sequence[float]] = None,
) -> RfeTrace:
    """
    Recursive feature elimination with a regression-tree ranker, step 1.

    Args:
        features: Finite numeric candidate features
        target: Regression target, one value per row
        final_count: Number of features to keep
        ranker: Depth and leaf-size caps of the ranking tree
        priority: Per-column score; among equally unimportant features the
            lowest-priority one is eliminated first

    Returns:
        Elimination trace; remaining ties eliminate the earlier column

    Raises:
        CountTooLargeError: If ``final_count`` exceeds the number of features
        LengthMismatchError: If ``priority`` does not have one value per column
    """
    names = features.columns
    if final_count > len(names):
        raise CountTooLargeError(f"Cannot keep {final_count} of {len(names)} features")
    if final_count < 1:
        raise ValueError(f"final_count must be >= 1, got {final_count}")
    X, y = _validated(features, target)
    if priority is None:
        rank = np.zeros(len(names))
    else:
        rank = np.asarray(priority, dtype=np.float64)
        if rank.shape != (len(names),):
            raise LengthMismatchError(f"{len(names)} features but {rank.size} priorities")

    remaining = list(range(len(names)))
    trace = RfeTrace()
    while len(remaining) > final_count:
        tree = fit_regression_tree(X[:, remaining], y, ranker.max_depth, ranker.min_leaf)
        importance = tree_importance(tree, len(remaining))
        tied = np.flatnonzero(importance == importance.min())
        drop = int(tied[np.argmin(rank[np.asarray(remaining)[tied]])])
        trace.iterations.append((names[remaining[drop]], float(importance[drop])))
        logger.debug(
            "RFE: dropped %r (importance %.6f), %d left",
            names[remaining[drop]],
            importance[drop],
            len(remaining) - 1,
        )
        del remaining[drop]
    trace.survivors = [names[j] for j in remaining]
    return trace


@dataclass
class Selection:
    """Outcome of both stages for one prediction task."""

    mode: ScoreMode
    scores: List[FScore]
    k_best: List[str]
    trace: RfeTrace

    @property
    def features(self) -> List[str]:
        return list(self.trace.survivors)


def select_features(
    features: FeatureTable,
    target: Sequence[float],
    k_best: int = 40,
    rfe_final: int = 20,
    mode: ScoreMode = ScoreMode.F_REGRESSION,
    ranker: RankerSpec = RankerSpec(),
) -> Selection:
    """
    K-best univariate filtering followed by RFE.

    Survivors are reported in the K-best stage's order (best F first). Features
    the ranking tree finds equally unimportant are eliminated lowest F first.
    """
    mode = ScoreMode(mode)
    scores = f_regression_scores(features, target, mode)
    best = select_k_best(scores, k_best)
    chosen = set(best)
    scores = [replace(s, selected=s.feature in chosen) for s in scores]
    f_by_name = {s.feature: s.f_stat for s in scores}
    trace = rfe(
        select_columns(features, best),
        target,
        rfe_final,
        ranker,
        priority=[f_by_name[name] for name in best],
    )
    logger.info(
        "Feature selection (%s): %d -> %d -> %d features",
        mode.value,
        len(scores),
        len(best),
        len(trace.survivors),
    )
    return Selection(mode=mode, scores=scores, k_best=best, trace=trace)
