"""
The eight-model comparison suite.
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence

from joblib import Parallel, delayed

from ..data.tabular import FeatureTable
from ..utils.seeding import derive_seed
from .base import ModelKind, ModelSpec, TrainedModel, fit

logger = logging.getLogger(__name__)

SUITE_ORDER = (
    ModelKind.DECISION_TREE,
    ModelKind.RANDOM_FOREST,
    ModelKind.ADABOOST,
    ModelKind.KNN,
    ModelKind.GAUSSIAN_NB,
    ModelKind.LOGISTIC_REGRESSION,
    ModelKind.FEEDFORWARD_NET,
    ModelKind.EXTRA_TREES,
)

# Kinds that stand in for the comparison models not identified by name.
SUBSTITUTED_BASELINES = (
    ModelKind.GAUSSIAN_NB,
    ModelKind.LOGISTIC_REGRESSION,
    ModelKind.EXTRA_TREES,
)


def default_suite(
    models_seed: int,
    kinds: Optional[Sequence[str]] = None,
    hyperparameters: Optional[Mapping[str, Mapping[str, Any]]] = None,
) -> List[ModelSpec]:
    """
    Build model specs with per-kind seeds derived from the ``models`` stage seed.

    Args:
        models_seed: Seed of the model-training stage
        kinds: Kinds to include, in order; defaults to all eight
        hyperparameters: Per-kind overrides keyed by kind name
    """
    hyperparameters = hyperparameters or {}
    selected = [ModelKind(k) for k in kinds] if kinds is not None else list(SUITE_ORDER)
    return [
        ModelSpec(kind, dict(hyperparameters.get(kind.value, {})), derive_seed(models_seed, kind.value))
        for kind in selected
    ]


def fit_suite(
    specs: Sequence[ModelSpec], X: FeatureTable, y: Sequence[int], n_jobs: int = 1
) -> Dict[str, TrainedModel]:
    """
    Train every spec on the same data.

    Models train concurrently when ``n_jobs > 1``; results do not depend on
    ``n_jobs`` because each model has its own seed.

    Returns:
        Trained models keyed by kind name, in spec order
    """
    trained = Parallel(n_jobs=n_jobs)(delayed(fit)(spec, X, y) for spec in specs)
    return {spec.kind.value: model for spec, model in zip(specs, trained)}
