"""
Tests for confusion matrices, macro scores and result emission.
"""

import pytest

from ddos5g.analysis.report import (
    METRICS,
    ConfusionMatrix,
    RunManifest,
    ScoreSet,
    confusion,
    emit,
    evaluate,
    load_manifest,
    load_plot_data,
    manifest_json,
    per_class_scores,
    plot_data_frame,
    scores,
)
from ddos5g.exceptions import CodeOutOfRangeError, EmptyManifestError, EmptyMatrixError, LengthMismatchError

# (y_true, y_pred, k, accuracy, precision_macro, recall_macro, f1_macro)
FIXTURES = {
    "perfect": ([0, 1, 2], [0, 1, 2], 3, 1.0, 1.0, 1.0, 1.0),
    "binary": ([0, 0, 1, 1], [0, 1, 1, 1], 2, 0.75, 5 / 6, 0.75, 11 / 15),
    "never_predicted": ([0, 1, 2, 2], [0, 1, 1, 1], 3, 0.5, 4 / 9, 2 / 3, 0.5),
    "never_occurs": ([0, 1], [0, 2], 3, 0.5, 1 / 3, 1 / 3, 1 / 3),
    "all_wrong": ([0, 1], [1, 0], 2, 0.0, 0.0, 0.0, 0.0),
}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_scores_on_fixed_cases(name):
    """Test macro scores against hand-computed values."""
    y_true, y_pred, k, *expected = FIXTURES[name]
    result = scores(confusion(y_true, y_pred, k))
    assert [getattr(result, m) for m in METRICS] == pytest.approx(expected)


def test_confusion_layout():
    """Test that rows are true classes and columns predictions."""
    cm = confusion([0, 1, 2, 2], [0, 1, 1, 1], 3)
    assert cm.to_list() == [[1, 0, 0], [0, 1, 0], [0, 2, 0]]
    assert cm.total == 4
    assert ConfusionMatrix.from_list(cm.to_list()).to_list() == cm.to_list()


def test_never_predicted_class_scores_zero():
    """Test zero precision for a class that is never predicted."""
    per_class = per_class_scores(confusion([0, 1, 2, 2], [0, 1, 1, 1], 3))
    assert per_class.precision[2] == 0.0
    assert per_class.f1[2] == 0.0
    assert per_class.support == [1, 1, 2]


def test_confusion_errors():
    """Test length and code range validation."""
    with pytest.raises(LengthMismatchError):
        confusion([0, 1], [0], 2)
    with pytest.raises(CodeOutOfRangeError, match="y_pred"):
        confusion([0, 1], [0, 2], 2)
    with pytest.raises(CodeOutOfRangeError, match="y_true"):
        confusion([-1], [0], 2)
    with pytest.raises(EmptyMatrixError):
        scores(confusion([], [], 2))


def _manifest():
    results = [
        evaluate("decision_tree", "ddos", [0, 0, 1, 1], [0, 1, 1, 1], 2, {"max_depth": 16}, seed=5),
        evaluate("gaussian_nb", "ddos", [0, 0, 1, 1], [0, 0, 1, 1], 2, substituted=True),
        evaluate("decision_tree", "latency", [0, 1, 2, 2], [0, 1, 1, 1], 3),
    ]
    return RunManifest(
        config={"seed": 42},
        config_digest="abc",
        seeds={"models": 1},
        class_labels={"ddos": ["BENIGN", "Syn"], "latency": ["a", "b", "c"]},
        results=results,
        warnings=["careful"],
    )


def test_manifest_dict_round_trip():
    """Test that results.json reloads into an equal manifest."""
    manifest = _manifest()
    again = RunManifest.from_dict(manifest.to_dict())
    assert manifest_json(again) == manifest_json(manifest)
    assert again.results[1].substituted is True
    assert again.score("decision_tree", "ddos") == manifest.score("decision_tree", "ddos")


def test_manifest_missing_score():
    """Test lookup of an absent (model, task) pair."""
    with pytest.raises(KeyError, match="knn"):
        _manifest().score("knn", "ddos")


def test_plot_rows_cover_every_metric():
    """Test one row per (model, task, metric)."""
    frame = plot_data_frame(_manifest())
    assert list(frame.columns) == ["model", "task", "metric", "value"]
    assert len(frame) == 3 * len(METRICS)


def test_emit_json_and_csv(tmp_path):
    """Test written files and that both reload to the same scores."""
    manifest = _manifest()
    written = emit(manifest, tmp_path / "run", formats=["json", "csv"])
    assert sorted(written) == ["plot_data", "results"]

    loaded = load_manifest(written["results"])
    assert manifest_json(loaded) == manifest_json(manifest)
    plot = load_plot_data(written["plot_data"])
    for result in manifest.results:
        assert plot[(result.model, result.task)] == result.scores


def test_emit_is_byte_stable(tmp_path):
    """Test that emitting the same manifest twice gives identical bytes."""
    a = emit(_manifest(), tmp_path / "a", formats=["json", "csv"])
    b = emit(_manifest(), tmp_path / "b", formats=["json", "csv"])
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()


def test_emit_svg(tmp_path):
    """Test one comparison chart per task."""
    pytest.importorskip("matplotlib")
    written = emit(_manifest(), tmp_path, formats=["svg"])
    assert sorted(written) == ["chart_ddos", "chart_latency"]
    assert written["chart_ddos"].read_text(encoding="utf-8").lstrip().startswith("<?xml")


def test_emit_empty_manifest(tmp_path):
    """Test that a manifest without results cannot be emitted."""
    with pytest.raises(EmptyManifestError):
        emit(RunManifest(), tmp_path)


def test_unsupported_schema():
    """Test that an unknown results schema is rejected."""
    with pytest.raises(ValueError, match="schema"):
        RunManifest.from_dict({"schema_version": 99})


def test_scoreset_dict():
    """Test ScoreSet persistence form."""
    s = ScoreSet(0.5, 0.25, 0.75, 1 / 3)
    assert ScoreSet.from_dict(s.to_dict()) == s
