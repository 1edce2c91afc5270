"""
Evaluation: confusion matrices, macro-averaged scores and result emission.

Precision of a class that was never predicted, and recall of a class that
never occurs, count as 0 in the macro mean (``ZERO_DIVISION``).
"""

import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import CodeOutOfRangeError, EmptyManifestError, EmptyMatrixError, LengthMismatchError

logger = logging.getLogger(__name__)

RESULTS_SCHEMA_VERSION = 1
AVERAGING = "macro"
ZERO_DIVISION = 0.0
METRICS = ("accuracy", "precision_macro", "recall_macro", "f1_macro")
TASKS = ("ddos", "latency")

RESULTS_FILE = "results.json"
PLOT_DATA_FILE = "plot_data.csv"

PathLike = Union[str, Path]


@dataclass(frozen=True)
class ConfusionMatrix:
    """``k x k`` counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray

    @property
    def k(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_list(self) -> List[List[int]]:
        return [[int(v) for v in row] for row in self.counts]

    @classmethod
    def from_list(cls, rows: Sequence[Sequence[int]]) -> "ConfusionMatrix":
        return cls(np.asarray(rows, dtype=np.int64))


@dataclass(frozen=True)
class ScoreSet:
    accuracy: float
    precision_macro: float
    recall_macro: float
    f1_macro: float

    def to_dict(self) -> Dict[str, float]:
        return {metric: float(getattr(self, metric)) for metric in METRICS}

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "ScoreSet":
        return cls(**{metric: float(data[metric]) for metric in METRICS})


@dataclass(frozen=True)
class ClassScores:
    """Per-class precision, recall, F1 and support, indexed by class code."""

    precision: List[float]
    recall: List[float]
    f1: List[float]
    support: List[int]

    def to_dict(self) -> Dict[str, List[Any]]:
        return {
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "support": list(self.support),
        }


def confusion(y_true: Sequence[int], y_pred: Sequence[int], k: int) -> ConfusionMatrix:
    """
    Count (true, predicted) pairs.

    Raises:
        LengthMismatchError: If the two sequences differ in length
        CodeOutOfRangeError: If a code lies outside ``0..k-1``
    """
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise LengthMismatchError(f"y_true has {t.size} entries, y_pred has {p.size}")
    for name, codes in (("y_true", t), ("y_pred", p)):
        if codes.size and (codes.min() < 0 or codes.max() >= k):
            raise CodeOutOfRangeError(f"{name} holds codes outside 0..{k - 1}")
    counts = np.bincount(t * k + p, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts.astype(np.int64))


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.full(num.shape, ZERO_DIVISION, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


def per_class_scores(cm: ConfusionMatrix) -> ClassScores:
    """Precision, recall and F1 of every class."""
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    precision = _safe_ratio(tp, counts.sum(axis=0))
    recall = _safe_ratio(tp, counts.sum(axis=1))
    f1 = _safe_ratio(2.0 * precision * recall, precision + recall)
    return ClassScores(
        precision=precision.tolist(),
        recall=recall.tolist(),
        f1=f1.tolist(),
        support=[int(v) for v in cm.counts.sum(axis=1)],
    )


def scores(cm: ConfusionMatrix) -> ScoreSet:
    """
    Accuracy and macro-averaged precision, recall and F1.

    Raises:
        EmptyMatrixError: If the matrix holds no observations
    """
    total = cm.total
    if total == 0:
        raise EmptyMatrixError("Cannot score an empty confusion matrix")
    per_class = per_class_scores(cm)
    return ScoreSet(
        accuracy=int(np.trace(cm.counts)) / total,
        precision_macro=float(np.mean(per_class.precision)),
        recall_macro=float(np.mean(per_class.recall)),
        f1_macro=float(np.mean(per_class.f1)),
    )


@dataclass
class ModelResult:
    """Evaluation of one model on one task."""

    model: str
    task: str
    scores: ScoreSet
    confusion: ConfusionMatrix
    per_class: ClassScores
    hyperparameters: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    substituted: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "task": self.task,
            "scores": self.scores.to_dict(),
            "confusion": self.confusion.to_list(),
            "per_class": self.per_class.to_dict(),
            "hyperparameters": dict(self.hyperparameters),
            "seed": self.seed,
            "substituted_baseline": self.substituted,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelResult":
        per_class = data["per_class"]
        return cls(
            model=data["model"],
            task=data["task"],
            scores=ScoreSet.from_dict(data["scores"]),
            confusion=ConfusionMatrix.from_list(data["confusion"]),
            per_class=ClassScores(
                per_class["precision"], per_class["recall"], per_class["f1"], per_class["support"]
            ),
            hyperparameters=dict(data.get("hyperparameters", {})),
            seed=int(data.get("seed", 0)),
            substituted=bool(data.get("substituted_baseline", False)),
        )


def evaluate(
    model: str,
    task: str,
    y_true: Sequence[int],
    y_pred: Sequence[int],
    k: int,
    hyperparameters: Optional[Mapping[str, Any]] = None,
    seed: int = 0,
    substituted: bool = False,
) -> ModelResult:
    """Confusion matrix, macro scores and per-class scores for one model."""
    cm = confusion(y_true, y_pred, k)
    return ModelResult(
        model=model,
        task=task,
        scores=scores(cm),
        confusion=cm,
        per_class=per_class_scores(cm),
        hyperparameters=dict(hyperparameters or {}),
        seed=seed,
        substituted=substituted,
    )


@dataclass
class RunManifest:
    """
    Everything a run produced, traceable to its configuration and seeds.

    Attributes:
        config: Resolved configuration snapshot
        config_digest: md5 of the canonical configuration JSON
        seeds: Effective seed of every stage
        mode: ``default`` or ``replication``
        score_mode: Univariate scoring mode used in feature selection
        class_labels: Label strings per task, indexed by class code
        selected_features: Final feature list per task
        results: One entry per (model, task)
        warnings: Methodological warnings raised during the run
        extra: Stage summaries (row counts, class histograms, latency counts)
    """

    config: Dict[str, Any] = field(default_factory=dict)
    config_digest: str = ""
    seeds: Dict[str, int] = field(default_factory=dict)
    mode: str = "default"
    score_mode: str = "f_regression"
    class_labels: Dict[str, List[str]] = field(default_factory=dict)
    selected_features: Dict[str, List[str]] = field(default_factory=dict)
    results: List[ModelResult] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": RESULTS_SCHEMA_VERSION,
            "averaging": AVERAGING,
            "zero_division": ZERO_DIVISION,
            "mode": self.mode,
            "score_mode": self.score_mode,
            "config_digest": self.config_digest,
            "config": self.config,
            "seeds": dict(self.seeds),
            "class_labels": self.class_labels,
            "selected_features": self.selected_features,
            "results": [r.to_dict() for r in self.results],
            "warnings": list(self.warnings),
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunManifest":
        if data.get("schema_version") != RESULTS_SCHEMA_VERSION:
            raise ValueError(f"Unsupported results schema: {data.get('schema_version')}")
        return cls(
            config=dict(data.get("config", {})),
            config_digest=data.get("config_digest", ""),
            seeds={k: int(v) for k, v in data.get("seeds", {}).items()},
            mode=data.get("mode", "default"),
            score_mode=data.get("score_mode", "f_regression"),
            class_labels={k: list(v) for k, v in data.get("class_labels", {}).items()},
            selected_features={k: list(v) for k, v in data.get("selected_features", {}).items()},
            results=[ModelResult.from_dict(r) for r in data.get("results", [])],
            warnings=list(data.get("warnings", [])),
            extra=dict(data.get("extra", {})),
        )

    def plot_rows(self) -> List[Tuple[str, str, str, float]]:
        """``(model, task, metric, value)`` rows in result order."""
        return [
            (r.model, r.task, metric, float(getattr(r.scores, metric)))
            for r in self.results
            for metric in METRICS
        ]

    def score(self, model: str, task: str) -> ScoreSet:
        for result in self.results:
            if result.model == model and result.task == task:
                return result.scores
        raise KeyError(f"No result for model {model!r} on task {task!r}")


def manifest_json(manifest: RunManifest) -> str:
    """Canonical JSON text of a manifest (sorted keys, trailing newline)."""
    return json.dumps(manifest.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_manifest(path: PathLike) -> RunManifest:
    return RunManifest.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def plot_data_frame(manifest: RunManifest) -> pd.DataFrame:
    return pd.DataFrame(manifest.plot_rows(), columns=["model", "task", "metric", "value"])


def load_plot_data(path: PathLike) -> Dict[Tuple[str, str], ScoreSet]:
    """Read a plot-data CSV back into one ScoreSet per (model, task)."""
    frame = pd.read_csv(path, float_precision="round_trip")
    out: Dict[Tuple[str, str], ScoreSet] = {}
    for (model, task), group in frame.groupby(["model", "task"], sort=False):
        values = dict(zip(group["metric"], group["value"].astype(float)))
        out[(str(model), str(task))] = ScoreSet.from_dict(values)
    return out


def emit(
    manifest: RunManifest,
    out_dir: PathLike,
    formats: Sequence[str] = ("json", "csv", "svg"),
) -> Dict[str, Path]:
    """
    Write the run's outputs.

    ``json`` writes ``results.json`` (every score, confusion matrices,
    per-class tables, provenance); ``csv`` writes ``plot_data.csv`` with
    ``model,task,metric,value`` rows; ``svg`` writes one comparison chart per
    task. Output bytes depend only on the manifest.

    Args:
        manifest: Completed run manifest
        out_dir: Output directory (created if missing)
        formats: Any of ``json``, ``csv``, ``svg``

    Returns:
        Written paths keyed by a short name

    Raises:
        EmptyManifestError: If the manifest holds no model results
        OSError: If a file cannot be written
    """
    if not manifest.results:
        raise EmptyManifestError("Manifest has no model results to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    if "json" in formats:
        path = out / RESULTS_FILE
        path.write_text(manifest_json(manifest), encoding="utf-8")
        written["results"] = path

    if "csv" in formats:
        path = out / PLOT_DATA_FILE
        plot_data_frame(manifest).to_csv(path, index=False, lineterminator="\n")
        written["plot_data"] = path

    if "svg" in formats:
        from ..utils import plotting

        if not plotting.MATPLOTLIB_AVAILABLE:
            warnings.warn("matplotlib not installed; skipping SVG charts", UserWarning, stacklevel=2)
        else:
            frame = plot_data_frame(manifest)
            for task in sorted(frame["task"].unique()):
                path = out / f"model_comparison_{task}.svg"
                plotting.plot_model_comparison(frame, task, save_path=path)
                written[f"chart_{task}"] = path

    logger.info("Wrote %s to %s", sorted(written), out)
    return written
