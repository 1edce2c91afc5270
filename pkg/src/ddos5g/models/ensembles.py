"""
Tree ensembles: random forest, extremely randomized trees and SAMME AdaBoost.
"""

import logging
import math
from typing import Any, ClassVar, Dict, List, Mapping, Optional

import numpy as np
from joblib import Parallel, delayed

from ..exceptions import UnfittedModelError
from ..utils.seeding import derive_seed, make_rng
from .base import Learner, ModelKind, register
from .trees import GINI, Tree, TreeBuilder

logger = logging.getLogger(__name__)


def resolve_max_features(value: Any, n_features: int) -> int:
    """Number of candidate features per split for ``"sqrt"``, ``"all"`` or an integer."""
    if value == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if value == "all":
        return n_features
    return min(int(value), n_features)


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    seed: int,
    bootstrap: bool,
    max_features: int,
    max_depth: int,
    min_leaf: int,
    random_thresholds: bool,
) -> Tree:
    rng = make_rng(seed)
    n = X.shape[0]
    rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
    builder = TreeBuilder(
        GINI,
        max_depth=max_depth,
        min_leaf=min_leaf,
        max_features=max_features,
        random_thresholds=random_thresholds,
        rng=rng,
    )
    return builder.build(X[rows], y[rows], n_classes)


def _trees_to_state(trees: List[Tree]) -> Dict[str, np.ndarray]:
    state: Dict[str, np.ndarray] = {"n_trees": np.array(len(trees))}
    for i, tree in enumerate(trees):
        state.update(tree.to_arrays(prefix=f"tree{i:04d}_"))
    state["n_features"] = np.array(trees[0].n_features if trees else 0)
    return state


def _trees_from_state(state: Mapping[str, np.ndarray]) -> List[Tree]:
    arrays = dict(state)
    n_features = int(arrays["n_features"])
    return [
        Tree.from_arrays(arrays, n_features, prefix=f"tree{i:04d}_")
        for i in range(int(arrays["n_trees"]))
    ]


class _Forest(Learner):
    """Bagged CART trees combined by majority vote."""

    random_thresholds: ClassVar[bool] = False
    trees: Optional[List[Tree]] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        p = self.params
        max_features = resolve_max_features(p["max_features"], X.shape[1])
        seeds = [derive_seed(self.seed, "tree", i) for i in range(int(p["n_trees"]))]
        self.trees = Parallel(n_jobs=self.n_jobs)(
            delayed(_grow_tree)(
                X,
                y,
                self.n_classes,
                seed,
                bool(p["bootstrap"]),
                max_features,
                int(p["max_depth"]),
                int(p["min_leaf"]),
                self.random_thresholds,
            )
            for seed in seeds
        )
        logger.debug(
            "%s: %d trees, %d candidate features per split",
            self.kind.value,
            len(self.trees),
            max_features,
        )

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Vote fractions; the top fraction is the majority vote."""
        if self.trees is None:
            raise UnfittedModelError(f"{self.kind.value} is not fitted")
        votes = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            votes[rows, np.argmax(tree.predict_value(X), axis=1)] += 1.0
        return votes / len(self.trees)

    def get_state(self) -> Dict[str, np.ndarray]:
        if self.trees is None:
            raise UnfittedModelError(f"{self.kind.value} is not fitted")
        return _trees_to_state(self.trees)

    def set_state(self, state: Mapping[str, np.ndarray]) -> None:
        self.trees = _trees_from_state(state)


@register(ModelKind.RANDOM_FOREST)
class RandomForestLearner(_Forest):
    """Bootstrap trees with a random feature subset at every split."""


@register(ModelKind.EXTRA_TREES)
class ExtraTreesLearner(_Forest):
    """Forest whose split thresholds are drawn uniformly within the node's range."""

    random_thresholds = True


@register(ModelKind.ADABOOST)
class AdaBoostLearner(Learner):
    """
    Multiclass AdaBoost (SAMME) over depth-1 Gini stumps.

    Each round fits a stump on the current row weights, then
    ``alpha = lr * (ln((1 - err) / err) + ln(K - 1))`` and misclassified rows
    are up-weighted by ``exp(alpha)``. Boosting stops early on a perfect
    stump or once a stump is no better than chance (``err >= 1 - 1/K``).
    """

    stumps: Optional[List[Tree]] = None
    alphas: Optional[np.ndarray] = None
    errors: Optional[np.ndarray] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        K = self.n_classes
        lr = float(self.params["learning_rate"])
        n = X.shape[0]
        weights = np.full(n, 1.0 / n)
        stumps: List[Tree] = []
        alphas: List[float] = []
        errors: List[float] = []

        for round_ in range(int(self.params["n_rounds"])):
            stump = TreeBuilder(GINI, max_depth=1, min_leaf=1).build(X, y, K, sample_weight=weights)
            miss = np.argmax(stump.predict_value(X), axis=1) != y
            err = float(weights[miss].sum() / weights.sum())

            if err >= 1.0 - 1.0 / K:
                if not stumps:
                    stumps.append(stump)
                    alphas.append(1.0)
                    errors.append(err)
                logger.debug("AdaBoost round %d: err=%.4f no better than chance, stopping", round_, err)
                break

            clamped = max(err, 1e-10)
            alpha = lr * (math.log((1.0 - clamped) / clamped) + math.log(K - 1))
            stumps.append(stump)
            alphas.append(alpha)
            errors.append(err)
            logger.debug("AdaBoost round %d: err=%.4f alpha=%.4f", round_, err, alpha)
            if err == 0.0:
                break

            weights = weights * np.exp(alpha * miss)
            weights /= weights.sum()

        self.stumps = stumps
        self.alphas = np.asarray(alphas)
        self.errors = np.asarray(errors)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        """Sum of stump weights voting for each class."""
        if self.stumps is None or self.alphas is None:
            raise UnfittedModelError("adaboost is not fitted")
        scores = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for stump, alpha in zip(self.stumps, self.alphas):
            scores[rows, np.argmax(stump.predict_value(X), axis=1)] += alpha
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        scores = self.decision_scores(X)
        return scores / scores.sum(axis=1, keepdims=True)

    def get_state(self) -> Dict[str, np.ndarray]:
        if self.stumps is None or self.alphas is None or self.errors is None:
            raise UnfittedModelError("adaboost is not fitted")
        return {**_trees_to_state(self.stumps), "alphas": self.alphas, "errors": self.errors}

    def set_state(self, state: Mapping[str, np.ndarray]) -> None:
        self.stumps = _trees_from_state(state)
        self.alphas = np.asarray(state["alphas"], dtype=np.float64)
        self.errors = np.asarray(state["errors"], dtype=np.float64)
