"""Gaussian naive Bayes."""

from typing import Dict, Mapping, Optional

import numpy as np

from ..exceptions import UnfittedModelError
from .base import Learner, ModelKind, register
from .linear import softmax


@register(ModelKind.GAUSSIAN_NB)
class GaussianNBLearner(Learner):
    """
    Per-class independent Gaussians with empirical class priors.

    Every variance is raised by ``var_smoothing`` times the largest feature
    variance, so constant features never divide by zero.
    """

    means: Optional[np.ndarray] = None
    variances: Optional[np.ndarray] = None
    log_priors: Optional[np.ndarray] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        K, p = self.n_classes, X.shape[1]
        floor = float(self.params["var_smoothing"]) * float(X.var(axis=0).max(initial=0.0))
        floor = max(floor, 1e-12)
        means = np.zeros((K, p))
        variances = np.zeros((K, p))
        counts = np.bincount(y, minlength=K).astype(np.float64)
        for k in range(K):
            rows = X[y == k]
            means[k] = rows.mean(axis=0)
            variances[k] = rows.var(axis=0)
        self.means = means
        self.variances = variances + floor
        self.log_priors = np.log(counts / counts.sum())

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        if self.means is None or self.variances is None or self.log_priors is None:
            raise UnfittedModelError("gaussian_nb is not fitted")
        log_norm = -0.5 * np.log(2.0 * np.pi * self.variances).sum(axis=1)
        jll = np.empty((X.shape[0], self.n_classes))
        for k in range(self.n_classes):
            z = (X - self.means[k]) ** 2 / self.variances[k]
            jll[:, k] = self.log_priors[k] + log_norm[k] - 0.5 * z.sum(axis=1)
        return jll

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(self.joint_log_likelihood(X))

    def get_state(self) -> Dict[str, np.ndarray]:
        if self.means is None or self.variances is None or self.log_priors is None:
            raise UnfittedModelError("gaussian_nb is not fitted")
        return {"means": self.means, "variances": self.variances, "log_priors": self.log_priors}

    def set_state(self, state: Mapping[str, np.ndarray]) -> None:
        self.means = np.asarray(state["means"], dtype=np.float64)
        self.variances = np.asarray(state["variances"], dtype=np.float64)
        self.log_priors = np.asarray(state["log_priors"], dtype=np.float64)
