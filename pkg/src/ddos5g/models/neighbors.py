"""k-nearest-neighbour classifier with exact brute-force search."""

import logging
from typing import Dict, Mapping, Optional

import numpy as np

from ..exceptions import UnfittedModelError
from .base import Learner, ModelKind, register

logger = logging.getLogger(__name__)

_CHUNK_CELLS = 4_000_000


def squared_distances(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    """``(len(queries), len(points))`` squared Euclidean distances, clipped at 0."""
    q_norms = np.einsum("ij,ij->i", queries, queries)
    p_norms = np.einsum("ij,ij->i", points, points)
    dist = q_norms[:, None] + p_norms[None, :] - 2.0 * queries @ points.T
    return np.maximum(dist, 0.0)


@register(ModelKind.KNN)
class KNeighborsLearner(Learner):
    """
    Majority vote among the k nearest training rows.

    Probabilities are vote fractions. Equal distances resolve to the earlier
    training row and equal votes to the smaller class code.
    """

    X_train: Optional[np.ndarray] = None
    y_train: Optional[np.ndarray] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        self.X_train = np.array(X, dtype=np.float64)
        self.y_train = np.asarray(y, dtype=np.int64).copy()

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.X_train is None or self.y_train is None:
            raise UnfittedModelError("knn is not fitted")
        n_train = self.X_train.shape[0]
        k = min(int(self.params["k"]), n_train)
        chunk = max(1, _CHUNK_CELLS // max(n_train, 1))
        votes = np.zeros((X.shape[0], self.n_classes))
        for start in range(0, X.shape[0], chunk):
            block = X[start : start + chunk]
            dist = squared_distances(block, self.X_train)
            nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
            labels = self.y_train[nearest]
            for j in range(k):
                votes[np.arange(start, start + block.shape[0]), labels[:, j]] += 1.0
        return votes / k

    def get_state(self) -> Dict[str, np.ndarray]:
        if self.X_train is None or self.y_train is None:
            raise UnfittedModelError("knn is not fitted")
        return {"X_train": self.X_train, "y_train": self.y_train}

    def set_state(self, state: Mapping[str, np.ndarray]) -> None:
        self.X_train = np.asarray(state["X_train"], dtype=np.float64)
        self.y_train = np.asarray(state["y_train"], dtype=np.int64)
