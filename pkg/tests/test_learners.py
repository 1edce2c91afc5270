"""
Tests for the from-scratch classifier suite.
"""

import math

import numpy as np
import pytest

from ddos5g.analysis.preprocess import apply_scaler, fit_encoder, fit_scaler, stratified_split_indices
from ddos5g.data.synthgen import balanced_spec, generate, reference_distribution_spec
from ddos5g.data.tabular import FeatureTable, select_columns
from ddos5g.exceptions import (
    DegenerateHyperparameterError,
    FeatureMismatchError,
    NonFiniteInputError,
    SingleClassError,
    UnfittedModelError,
)
from ddos5g.models import (
    SUITE_ORDER,
    ModelKind,
    ModelSpec,
    default_suite,
    fit,
    fit_suite,
    load_model,
    predict,
    predict_proba,
    save_model,
)
from ddos5g.models.ensembles import AdaBoostLearner, resolve_max_features
from ddos5g.models.linear import one_hot
from ddos5g.models.neural import init_params, loss, loss_and_gradients

from .conftest import FAST_HYPERPARAMETERS, SMALL_LABELS


def _dataset(labels, rows, seed=0, separability=1.0, n_features=10):
    spec = balanced_spec(labels, rows, seed=seed, separability=separability)
    table = generate(spec)
    features = select_columns(table, spec.feature_columns[:n_features])
    features = apply_scaler(fit_scaler(features), features)
    encoder = fit_encoder(table.strings("Label"))
    return features, encoder.encode(table.strings("Label"))


@pytest.fixture
def train_data():
    """Scaled four-class features and their codes."""
    return _dataset(SMALL_LABELS, 30, seed=1)


@pytest.mark.parametrize("kind", [k.value for k in SUITE_ORDER])
def test_every_kind_fits_and_predicts(kind, train_data):
    """Test the common contract: proba rows sum to 1 and argmax equals predict."""
    X, y = train_data
    model = fit(ModelSpec(kind, FAST_HYPERPARAMETERS.get(kind, {}), seed=4), X, y)
    proba = predict_proba(model, X)
    assert proba.shape == (X.n_rows, 4)
    assert np.allclose(proba.sum(axis=1), 1.0)
    assert np.array_equal(predict(model, X), np.asarray(model.classes)[np.argmax(proba, axis=1)])
    assert model.feature_names == X.columns


@pytest.mark.parametrize("kind", [k.value for k in SUITE_ORDER])
def test_save_load_reproduces_predictions(kind, train_data, tmp_path):
    """Test that a reloaded model scores exactly like the original."""
    X, y = train_data
    model = fit(ModelSpec(kind, FAST_HYPERPARAMETERS.get(kind, {}), seed=2), X, y)
    save_model(model, tmp_path, f"ddos__{kind}")
    again = load_model(tmp_path, f"ddos__{kind}")
    assert again.classes == model.classes
    assert again.spec == model.spec
    assert np.array_equal(predict_proba(again, X), predict_proba(model, X))


def test_fit_is_deterministic(train_data):
    """Test that the same seed reproduces a randomized learner."""
    X, y = train_data
    spec = ModelSpec(ModelKind.EXTRA_TREES, FAST_HYPERPARAMETERS["extra_trees"], seed=9)
    assert np.array_equal(predict_proba(fit(spec, X, y), X), predict_proba(fit(spec, X, y), X))


def test_forest_parallel_matches_serial(train_data):
    """Test that worker count does not change a forest."""
    X, y = train_data
    spec = ModelSpec(ModelKind.RANDOM_FOREST, FAST_HYPERPARAMETERS["random_forest"], seed=3)
    serial = predict_proba(fit(spec, X, y, n_jobs=1), X)
    parallel = predict_proba(fit(spec, X, y, n_jobs=2), X)
    assert np.array_equal(serial, parallel)


def test_single_tree_forest_equals_decision_tree(train_data):
    """Test that one unbootstrapped tree over all features is plain CART."""
    X, y = train_data
    tree = fit(ModelSpec(ModelKind.DECISION_TREE, {"max_depth": 6, "min_leaf": 2}), X, y)
    forest = fit(
        ModelSpec(
            ModelKind.RANDOM_FOREST,
            {"n_trees": 1, "max_depth": 6, "min_leaf": 2, "max_features": "all", "bootstrap": False},
            seed=11,
        ),
        X,
        y,
    )
    assert np.array_equal(predict(tree, X), predict(forest, X))


def test_resolve_max_features():
    """Test the candidate feature count per split."""
    assert resolve_max_features("sqrt", 20) == 4
    assert resolve_max_features("sqrt", 1) == 1
    assert resolve_max_features("all", 7) == 7
    assert resolve_max_features(50, 7) == 7


def test_adaboost_rounds_by_hand():
    """Test stump errors and weights of two hand-computed SAMME rounds."""
    X = np.arange(5.0)[:, None]
    y = np.array([0, 0, 1, 1, 0])
    learner = AdaBoostLearner({"n_rounds": 2, "learning_rate": 1.0}, seed=0, n_classes=2)
    learner.fit(X, y)
    # Round one splits at 1.5 and misses the last row; round two sees it at weight 1/2.
    assert learner.errors.tolist() == pytest.approx([0.2, 0.25])
    assert learner.alphas.tolist() == pytest.approx([math.log(4.0), math.log(3.0)])
    assert learner.stumps[0].threshold[0] == 1.5


def test_adaboost_stops_on_perfect_stump():
    """Test that a zero-error stump ends boosting."""
    X = np.arange(6.0)[:, None]
    learner = AdaBoostLearner({"n_rounds": 10, "learning_rate": 1.0}, seed=0, n_classes=2)
    learner.fit(X, np.array([0, 0, 0, 1, 1, 1]))
    assert len(learner.stumps) == 1
    assert learner.errors.tolist() == [0.0]


def test_knn_vote_ties_take_smaller_code():
    """Test that a split vote predicts the smaller class code."""
    X = FeatureTable.from_columns(numeric={"x": [-1.0, 1.0]})
    model = fit(ModelSpec(ModelKind.KNN, {"k": 2}), X, [7, 5])
    assert predict(model, np.array([[0.0]])).tolist() == [5]
    assert predict_proba(model, np.array([[0.0]])).tolist() == [[0.5, 0.5]]


def test_gaussian_nb_constant_feature(train_data):
    """Test that a constant column does not break naive Bayes."""
    X, y = train_data
    X = X.with_numeric("flat", np.ones(X.n_rows))
    model = fit(ModelSpec(ModelKind.GAUSSIAN_NB), X, y)
    assert np.isfinite(predict_proba(model, X)).all()


def test_network_gradients_match_finite_differences():
    """Test analytic backprop gradients against central differences."""
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 4))
    targets = one_hot(rng.integers(0, 3, 5), 3)
    params = init_params(4, 5, 3, rng)
    _, grads = loss_and_gradients(params, X, targets, l2=0.01)
    eps = 1e-6
    for key, value in params.items():
        numeric = np.zeros_like(value)
        for index in np.ndindex(value.shape):
            plus = {k: v.copy() for k, v in params.items()}
            minus = {k: v.copy() for k, v in params.items()}
            plus[key][index] += eps
            minus[key][index] -= eps
            numeric[index] = (loss(plus, X, targets, 0.01) - loss(minus, X, targets, 0.01)) / (2 * eps)
        assert np.allclose(grads[key], numeric, rtol=1e-4, atol=1e-8), key


def test_fit_errors(train_data):
    """Test input validation shared by every learner."""
    X, y = train_data
    spec = ModelSpec(ModelKind.DECISION_TREE)
    with pytest.raises(SingleClassError):
        fit(spec, X, np.zeros(X.n_rows, dtype=int))
    bad = X.with_numeric(X.columns[0], np.full(X.n_rows, np.nan))
    with pytest.raises(NonFiniteInputError):
        fit(spec, bad, y)
    model = fit(spec, X, y)
    with pytest.raises(FeatureMismatchError):
        predict(model, select_columns(X, X.columns[:3]))
    with pytest.raises(FeatureMismatchError):
        predict(model, np.zeros((2, 3)))


@pytest.mark.parametrize(
    "kind, params",
    [
        ("knn", {"k": 0}),
        ("random_forest", {"n_trees": 0}),
        ("random_forest", {"max_features": "half"}),
        ("extra_trees", {"bootstrap": "yes"}),
        ("logistic_regression", {"learning_rate": 0.0}),
        ("feedforward_net", {"l2": -1.0}),
        ("decision_tree", {"depth": 3}),
    ],
)
def test_degenerate_hyperparameters(kind, params):
    """Test that invalid hyperparameters are rejected at spec time."""
    with pytest.raises(DegenerateHyperparameterError):
        ModelSpec(kind, params)


def test_unknown_kind():
    """Test that an unknown kind is rejected."""
    with pytest.raises(DegenerateHyperparameterError, match="svm"):
        ModelSpec("svm")


def test_unfitted_learner_state():
    """Test that saving an unfitted learner fails."""
    with pytest.raises(UnfittedModelError):
        AdaBoostLearner({"n_rounds": 1, "learning_rate": 1.0}, seed=0, n_classes=2).get_state()


def test_default_suite_order_and_seeds():
    """Test suite order, per-kind seeds and overrides."""
    specs = default_suite(123, hyperparameters={"knn": {"k": 7}})
    assert [s.kind for s in specs] == list(SUITE_ORDER)
    assert len({s.seed for s in specs}) == 8
    assert specs[3].resolved()["k"] == 7
    assert default_suite(123)[0].seed == specs[0].seed
    assert [s.kind.value for s in default_suite(1, kinds=["knn", "adaboost"])] == ["knn", "adaboost"]


def test_fit_suite_keys(train_data):
    """Test that fit_suite returns models keyed by kind in spec order."""
    X, y = train_data
    specs = default_suite(5, kinds=["decision_tree", "gaussian_nb"], hyperparameters=FAST_HYPERPARAMETERS)
    models = fit_suite(specs, X, y)
    assert list(models) == ["decision_tree", "gaussian_nb"]


def _suite_accuracies(separability):
    labels = sorted(reference_distribution_spec().rows_per_class)
    X, y = _dataset(labels, 200, seed=7, separability=separability, n_features=None)
    train, test = stratified_split_indices(y, 0.2, seed=0)
    models = fit_suite(default_suite(17), X.take(train), y[train])
    X_test = X.take(test)
    return {kind: float((predict(m, X_test) == y[test]).mean()) for kind, m in models.items()}


@pytest.mark.slow
def test_every_model_separates_separable_classes():
    """Test that all eight models reach 0.95 accuracy on 13 well-separated classes."""
    for kind, accuracy in _suite_accuracies(1.0).items():
        assert accuracy >= 0.95, kind


@pytest.mark.slow
def test_every_model_near_chance_without_signal():
    """Test that all eight models stay within 0.10 of 1/13 when classes coincide."""
    for kind, accuracy in _suite_accuracies(0.0).items():
        assert abs(accuracy - 1 / 13) <= 0.10, kind
