"""Multinomial logistic regression trained by full-batch gradient descent."""

import logging
from typing import Dict, Mapping, Optional

import numpy as np

from ..exceptions import UnfittedModelError
from .base import Learner, ModelKind, register

logger = logging.getLogger(__name__)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row maximum for stability."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def one_hot(y: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((y.shape[0], n_classes))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def cross_entropy(proba: np.ndarray, targets: np.ndarray) -> float:
    """Mean cross-entropy of one-hot ``targets`` under ``proba``."""
    return float(-(targets * np.log(np.clip(proba, 1e-300, None))).sum(axis=1).mean())


@register(ModelKind.LOGISTIC_REGRESSION)
class LogisticRegressionLearner(Learner):
    """
    Softmax regression with an L2 penalty on the weights (not the bias).

    The step size is ``learning_rate / L`` where ``L`` bounds the curvature
    of the loss, so the default of 1.0 converges on any feature scale.
    """

    weights: Optional[np.ndarray] = None
    bias: Optional[np.ndarray] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        n, p = X.shape
        K = self.n_classes
        l2 = float(self.params["l2"])
        targets = one_hot(y, K)

        augmented = np.hstack([X, np.ones((n, 1))])
        curvature = 0.5 * float(np.linalg.eigvalsh(augmented.T @ augmented / n)[-1]) + l2
        step = float(self.params["learning_rate"]) / max(curvature, 1e-12)

        W = np.zeros((p, K))
        b = np.zeros(K)
        for it in range(int(self.params["n_iter"])):
            proba = softmax(X @ W + b)
            residual = (proba - targets) / n
            W -= step * (X.T @ residual + l2 * W)
            b -= step * residual.sum(axis=0)
            if logger.isEnabledFor(logging.DEBUG) and it % 50 == 0:
                logger.debug("logistic_regression iter %d loss=%.5f", it, cross_entropy(proba, targets))
        self.weights, self.bias = W, b

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.weights is None or self.bias is None:
            raise UnfittedModelError("logistic_regression is not fitted")
        return softmax(X @ self.weights + self.bias)

    def get_state(self) -> Dict[str, np.ndarray]:
        if self.weights is None or self.bias is None:
            raise UnfittedModelError("logistic_regression is not fitted")
        return {"weights": self.weights, "bias": self.bias}

    def set_state(self, state: Mapping[str, np.ndarray]) -> None:
        self.weights = np.asarray(state["weights"], dtype=np.float64)
        self.bias = np.asarray(state["bias"], dtype=np.float64)
