"""
One-hidden-layer feed-forward network: ReLU hidden units, softmax output,
cross-entropy loss, trained with mini-batch Adam for a fixed number of epochs.

``forward`` and ``loss_and_gradients`` are module functions over a plain
parameter dict so the analytic gradients can be checked numerically.
"""

import logging
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from ..exceptions import UnfittedModelError
from ..utils.seeding import make_rng
from .base import Learner, ModelKind, register
from .linear import cross_entropy, one_hot, softmax

logger = logging.getLogger(__name__)

Params = Dict[str, np.ndarray]

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


def init_params(n_inputs: int, n_hidden: int, n_classes: int, rng: np.random.Generator) -> Params:
    """He-normal hidden weights, Glorot-scaled output weights, zero biases."""
    return {
        "W1": rng.standard_normal((n_inputs, n_hidden)) * np.sqrt(2.0 / n_inputs),
        "b1": np.zeros(n_hidden),
        "W2": rng.standard_normal((n_hidden, n_classes)) * np.sqrt(1.0 / n_hidden),
        "b2": np.zeros(n_classes),
    }


def forward(params: Params, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(pre_activation, hidden, logits)``."""
    pre = X @ params["W1"] + params["b1"]
    hidden = np.maximum(pre, 0.0)
    return pre, hidden, hidden @ params["W2"] + params["b2"]


def loss(params: Params, X: np.ndarray, targets: np.ndarray, l2: float = 0.0) -> float:
    """Mean cross-entropy plus ``l2/2 * (|W1|^2 + |W2|^2)``."""
    _, _, logits = forward(params, X)
    penalty = 0.5 * l2 * (np.sum(params["W1"] ** 2) + np.sum(params["W2"] ** 2))
    return cross_entropy(softmax(logits), targets) + float(penalty)


def loss_and_gradients(
    params: Params, X: np.ndarray, targets: np.ndarray, l2: float = 0.0
) -> Tuple[float, Params]:
    """
    Loss and its analytic gradient with respect to every parameter.

    Args:
        params: Network parameters
        X: ``(n, p)`` batch
        targets: ``(n, K)`` one-hot labels
        l2: Weight penalty
    """
    n = X.shape[0]
    pre, hidden, logits = forward(params, X)
    proba = softmax(logits)
    value = cross_entropy(proba, targets) + 0.5 * l2 * float(
        np.sum(params["W1"] ** 2) + np.sum(params["W2"] ** 2)
    )

    d_logits = (proba - targets) / n
    d_hidden = d_logits @ params["W2"].T
    d_pre = d_hidden * (pre > 0)
    grads = {
        "W2": hidden.T @ d_logits + l2 * params["W2"],
        "b2": d_logits.sum(axis=0),
        "W1": X.T @ d_pre + l2 * params["W1"],
        "b1": d_pre.sum(axis=0),
    }
    return value, grads


@register(ModelKind.FEEDFORWARD_NET)
class FeedForwardLearner(Learner):
    """Feed-forward classifier; shuffling and initialization follow ``seed``."""

    net: Optional[Params] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        p = self.params
        rng = make_rng(self.seed)
        params = init_params(X.shape[1], int(p["hidden"]), self.n_classes, rng)
        targets = one_hot(y, self.n_classes)
        lr, l2 = float(p["learning_rate"]), float(p["l2"])
        batch = int(p["batch_size"])

        first = {k: np.zeros_like(v) for k, v in params.items()}
        second = {k: np.zeros_like(v) for k, v in params.items()}
        step = 0
        for epoch in range(int(p["epochs"])):
            order = rng.permutation(X.shape[0])
            for start in range(0, order.size, batch):
                rows = order[start : start + batch]
                _, grads = loss_and_gradients(params, X[rows], targets[rows], l2)
                step += 1
                for key, grad in grads.items():
                    first[key] = _ADAM_BETA1 * first[key] + (1 - _ADAM_BETA1) * grad
                    second[key] = _ADAM_BETA2 * second[key] + (1 - _ADAM_BETA2) * grad**2
                    m_hat = first[key] / (1 - _ADAM_BETA1**step)
                    v_hat = second[key] / (1 - _ADAM_BETA2**step)
                    params[key] = params[key] - lr * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug("feedforward_net epoch %d loss=%.5f", epoch, loss(params, X, targets, l2))
        self.net = params

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.net is None:
            raise UnfittedModelError("feedforward_net is not fitted")
        return softmax(forward(self.net, X)[2])

    def get_state(self) -> Dict[str, np.ndarray]:
        if self.net is None:
            raise UnfittedModelError("feedforward_net is not fitted")
        return dict(self.net)

    def set_state(self, state: Mapping[str, np.ndarray]) -> None:
        self.net = {key: np.asarray(state[key], dtype=np.float64) for key in ("W1", "b1", "W2", "b2")}
