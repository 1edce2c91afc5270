"""
Classifier suite. Importing the package registers every learner kind.
"""

from . import ensembles, linear, naive_bayes, neighbors, neural, trees
from .base import (
    DEFAULT_HYPERPARAMETERS,
    ModelKind,
    ModelSpec,
    TrainedModel,
    fit,
    load_model,
    predict,
    predict_proba,
    save_model,
)
from .suite import SUBSTITUTED_BASELINES, SUITE_ORDER, default_suite, fit_suite

__all__ = [
    "DEFAULT_HYPERPARAMETERS",
    "ModelKind",
    "ModelSpec",
    "TrainedModel",
    "fit",
    "predict",
    "predict_proba",
    "save_model",
    "load_model",
    "default_suite",
    "fit_suite",
    "SUITE_ORDER",
    "SUBSTITUTED_BASELINES",
]
