"""
Common interface of the classifier suite.

Every learner is a ``Learner`` subclass registered under a ``ModelKind``.
``fit`` validates the inputs, trains the learner on class indices ``0..K-1``
and wraps it in an immutable ``TrainedModel`` that remembers the original
class codes and the training column projection.
"""

import abc
import enum
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, ClassVar, Dict, List, Mapping, Sequence, Type, Union

import numpy as np

from ..data.tabular import FeatureTable
from ..exceptions import (
    DegenerateHyperparameterError,
    FeatureMismatchError,
    LengthMismatchError,
    NonFiniteInputError,
    SingleClassError,
)

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1


class ModelKind(str, enum.Enum):
    DECISION_TREE = "decision_tree"
    RANDOM_FOREST = "random_forest"
    ADABOOST = "adaboost"
    KNN = "knn"
    GAUSSIAN_NB = "gaussian_nb"
    LOGISTIC_REGRESSION = "logistic_regression"
    FEEDFORWARD_NET = "feedforward_net"
    EXTRA_TREES = "extra_trees"


DEFAULT_HYPERPARAMETERS: Dict[ModelKind, Dict[str, Any]] = {
    ModelKind.DECISION_TREE: {"max_depth": 16, "min_leaf": 2},
    ModelKind.RANDOM_FOREST: {
        "n_trees": 100,
        "max_depth": 16,
        "min_leaf": 2,
        "max_features": "sqrt",
        "bootstrap": True,
    },
    ModelKind.ADABOOST: {"n_rounds": 100, "learning_rate": 1.0},
    ModelKind.KNN: {"k": 5},
    ModelKind.GAUSSIAN_NB: {"var_smoothing": 1e-9},
    ModelKind.LOGISTIC_REGRESSION: {"learning_rate": 1.0, "n_iter": 300, "l2": 1e-4},
    ModelKind.FEEDFORWARD_NET: {
        "hidden": 64,
        "epochs": 20,
        "batch_size": 128,
        "learning_rate": 1e-2,
        "l2": 0.0,
    },
    ModelKind.EXTRA_TREES: {
        "n_trees": 100,
        "max_depth": 16,
        "min_leaf": 2,
        "max_features": "sqrt",
        "bootstrap": False,
    },
}

_POSITIVE_INTS = ("max_depth", "min_leaf", "n_trees", "n_rounds", "k", "hidden", "epochs", "batch_size", "n_iter")
_POSITIVE_REALS = ("learning_rate", "var_smoothing")
_NONNEGATIVE_REALS = ("l2",)


def _validate_hyperparameters(kind: ModelKind, params: Mapping[str, Any]) -> None:
    for name, value in params.items():
        path = f"{kind.value}.{name}"
        if name in _POSITIVE_INTS:
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise DegenerateHyperparameterError(f"{path} must be an integer >= 1, got {value!r}")
        elif name in _POSITIVE_REALS:
            if not float(value) > 0:
                raise DegenerateHyperparameterError(f"{path} must be > 0, got {value!r}")
        elif name in _NONNEGATIVE_REALS:
            if not float(value) >= 0:
                raise DegenerateHyperparameterError(f"{path} must be >= 0, got {value!r}")
        elif name == "max_features":
            ok = value in ("sqrt", "all") or (
                not isinstance(value, (bool, str)) and int(value) == value and value >= 1
            )
            if not ok:
                raise DegenerateHyperparameterError(
                    f"{path} must be 'sqrt', 'all' or an integer >= 1, got {value!r}"
                )
        elif name == "bootstrap":
            if not isinstance(value, bool):
                raise DegenerateHyperparameterError(f"{path} must be a boolean, got {value!r}")


@dataclass(frozen=True)
class ModelSpec:
    """
    What to train.

    Attributes:
        kind: Learner kind
        hyperparameters: Overrides of the kind's defaults
        seed: Seed for every random choice the learner makes
    """

    kind: ModelKind
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        try:
            kind = ModelKind(self.kind)
        except ValueError as exc:
            raise DegenerateHyperparameterError(f"Unknown model kind: {self.kind!r}") from exc
        object.__setattr__(self, "kind", kind)
        unknown = sorted(set(self.hyperparameters) - set(DEFAULT_HYPERPARAMETERS[kind]))
        if unknown:
            raise DegenerateHyperparameterError(
                f"Unknown hyperparameters for {kind.value}: {', '.join(unknown)}"
            )
        _validate_hyperparameters(kind, self.hyperparameters)

    def resolved(self) -> Dict[str, Any]:
        """Defaults merged with the overrides."""
        return {**DEFAULT_HYPERPARAMETERS[self.kind], **dict(self.hyperparameters)}

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "hyperparameters": self.resolved(), "seed": self.seed}


class Learner(abc.ABC):
    """
    A trainable classifier over class indices ``0..n_classes-1``.

    Subclasses set ``kind`` and register themselves with ``register``.
    """

    kind: ClassVar[ModelKind]

    def __init__(self, params: Mapping[str, Any], seed: int, n_classes: int):
        self.params = dict(params)
        self.seed = seed
        self.n_classes = n_classes
        self.n_jobs = 1

    @abc.abstractmethod
    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        """Train on finite ``X`` and class indices ``y``."""

    @abc.abstractmethod
    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Return an ``(n, n_classes)`` matrix of class scores."""

    @abc.abstractmethod
    def get_state(self) -> Dict[str, np.ndarray]:
        """Learned arrays, enough to reproduce ``predict_proba`` exactly."""

    @abc.abstractmethod
    def set_state(self, state: Mapping[str, np.ndarray]) -> None:
        """Restore arrays produced by ``get_state``."""


_REGISTRY: Dict[ModelKind, Type[Learner]] = {}


def register(kind: ModelKind) -> Callable[[Type[Learner]], Type[Learner]]:
    def decorator(cls: Type[Learner]) -> Type[Learner]:
        cls.kind = kind
        _REGISTRY[kind] = cls
        return cls

    return decorator


def learner_class(kind: ModelKind) -> Type[Learner]:
    return _REGISTRY[ModelKind(kind)]


@dataclass(frozen=True)
class TrainedModel:
    """
    A fitted learner plus what is needed to use it safely.

    Attributes:
        spec: The spec it was trained from
        classes: Original class codes; column ``i`` of ``predict_proba`` is ``classes[i]``
        feature_names: Training column projection, in order
        learner: Fitted learner
        fit_seconds: Wall-clock training time
    """

    spec: ModelSpec
    classes: List[int]
    feature_names: List[str]
    learner: Learner
    fit_seconds: float = 0.0

    @property
    def kind(self) -> ModelKind:
        return self.spec.kind


MatrixLike = Union[FeatureTable, np.ndarray]


def _as_matrix(X: MatrixLike, feature_names: Sequence[str]) -> np.ndarray:
    if isinstance(X, FeatureTable):
        if X.columns != list(feature_names):
            raise FeatureMismatchError(
                f"Expected columns {list(feature_names)}, got {X.columns}"
            )
        matrix = X.matrix(feature_names)
    else:
        matrix = np.asarray(X, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != len(feature_names):
            raise FeatureMismatchError(
                f"Expected {len(feature_names)} feature columns, got shape {matrix.shape}"
            )
    if not np.isfinite(matrix).all():
        raise NonFiniteInputError("Model input contains NaN or infinite values")
    return matrix


def fit(spec: ModelSpec, X: FeatureTable, y: Sequence[int], n_jobs: int = 1) -> TrainedModel:
    """
    Train one model.

    Args:
        spec: Kind, hyperparameters and seed
        X: Finite numeric features
        y: Integer class codes, one per row
        n_jobs: Worker cap for learners that train in parallel

    Returns:
        Trained model

    Raises:
        SingleClassError: If ``y`` holds fewer than two classes
        NonFiniteInputError: If ``X`` holds NaN or infinite values
        LengthMismatchError: If ``X`` and ``y`` differ in length
    """
    feature_names = X.columns
    matrix = _as_matrix(X, feature_names)
    codes = np.asarray(y, dtype=np.int64)
    if codes.shape[0] != matrix.shape[0]:
        raise LengthMismatchError(f"{matrix.shape[0]} rows but {codes.shape[0]} labels")
    classes = np.unique(codes)
    if classes.size < 2:
        raise SingleClassError(f"Need at least two classes, got {classes.tolist()}")

    learner = learner_class(spec.kind)(spec.resolved(), spec.seed, int(classes.size))
    learner.n_jobs = n_jobs
    started = time.perf_counter()
    learner.fit(matrix, np.searchsorted(classes, codes))
    elapsed = time.perf_counter() - started
    logger.info(
        "Fitted %s on %d rows x %d features in %.2fs",
        spec.kind.value,
        matrix.shape[0],
        matrix.shape[1],
        elapsed,
    )
    return TrainedModel(spec, [int(c) for c in classes], list(feature_names), learner, elapsed)


def predict_proba(model: TrainedModel, X: MatrixLike) -> np.ndarray:
    """
    Class probabilities, one column per entry of ``model.classes``.

    Rows sum to 1 and their argmax equals ``predict``.

    Raises:
        FeatureMismatchError: If ``X`` does not match the training projection
    """
    matrix = _as_matrix(X, model.feature_names)
    scores = np.asarray(model.learner.predict_proba(matrix), dtype=np.float64)
    return scores / scores.sum(axis=1, keepdims=True)


def predict(model: TrainedModel, X: MatrixLike) -> np.ndarray:
    """
    Predicted class code per row; equal top scores resolve to the smallest code.

    Raises:
        FeatureMismatchError: If ``X`` does not match the training projection
    """
    proba = predict_proba(model, X)
    return np.asarray(model.classes, dtype=np.int64)[np.argmax(proba, axis=1)]


def save_model(model: TrainedModel, directory: Union[str, Path], name: str) -> Path:
    """
    Write ``<name>.npz`` (learned arrays) and ``<name>.json`` (header).

    Returns:
        Path of the JSON header
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    state = model.learner.get_state()
    np.savez(directory / f"{name}.npz", **{k: state[k] for k in sorted(state)})
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        **model.spec.to_dict(),
        "classes": model.classes,
        "feature_names": model.feature_names,
    }
    path = directory / f"{name}.json"
    path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_model(directory: Union[str, Path], name: str) -> TrainedModel:
    """Load a model written by ``save_model``."""
    directory = Path(directory)
    header = json.loads((directory / f"{name}.json").read_text(encoding="utf-8"))
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"Unsupported model format version: {header.get('format_version')}")
    spec = ModelSpec(ModelKind(header["kind"]), header["hyperparameters"], int(header["seed"]))
    classes = [int(c) for c in header["classes"]]
    learner = learner_class(spec.kind)(spec.resolved(), spec.seed, len(classes))
    with np.load(directory / f"{name}.npz") as arrays:
        learner.set_state({key: arrays[key] for key in arrays.files})
    return TrainedModel(spec, classes, list(header["feature_names"]), learner)
