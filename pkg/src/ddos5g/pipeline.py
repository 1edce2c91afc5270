"""
End-to-end pipeline: data, 5G augmentation, preprocessing, oversampling,
feature selection, the model suite and scoring, for both prediction tasks.

Two stage orders are supported. ``default`` splits first and fits every
transform on the training partition only. ``replication`` oversamples and
scales the whole table before splitting, which leaks test information into
training; the run manifest records that.
"""

import json
import logging
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .analysis.balance import SmoteConfig, smote
from .analysis.featsel import RankerSpec, ScoreMode, Selection, select_features
from .analysis.preprocess import (
    CleanPolicy,
    LabelEncoder,
    Scaler,
    SplitSpec,
    apply_scaler,
    drop_and_clean,
    fit_encoder,
    fit_scaler,
    stratified_split,
    stratified_split_indices,
)
from .analysis.report import ModelResult, RunManifest, emit, evaluate, load_manifest
from .config import Mode, PipelineConfig, config_digest
from .data.augment5g import QUALITY_COLUMN, AugmentConfig, augment, quality_counts
from .data.ingest import IngestSpec, load_csv, load_many, write_csv
from .data.synthgen import GenSpec, balanced_spec, generate, reference_distribution_spec
from .data.tabular import FeatureTable, select_columns
from .exceptions import ConfigError, StageError
from .models import (
    SUBSTITUTED_BASELINES,
    ModelKind,
    TrainedModel,
    default_suite,
    fit_suite,
    load_model,
    predict,
    save_model,
)
from .utils.seeding import STAGES, derive_seed
from .utils.serialization import TaskTransforms, Transforms, load_transforms, save_transforms

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Task name -> label column.
TASK_LABELS: Dict[str, str] = {"ddos": "Label", "latency": QUALITY_COLUMN}
MODELS_DIR = "models"
CONFIG_FILE = "config.json"

LEAKAGE_WARNING = (
    "replication mode: SMOTE and scaling were fitted on all rows before the "
    "train/test split, so test rows influenced training and scores are optimistic"
)


@dataclass
class TaskRun:
    """Everything one task produced."""

    task: str
    encoder: LabelEncoder
    scaler: Scaler
    selection: Selection
    models: Dict[str, TrainedModel]
    results: List[ModelResult]
    test_table: FeatureTable
    before_smote: Dict[str, int]
    after_smote: Dict[str, int]


@dataclass
class PipelineRun:
    manifest: RunManifest
    tasks: Dict[str, TaskRun] = field(default_factory=dict)
    written: Dict[str, Path] = field(default_factory=dict)


def stage_seeds(cfg: PipelineConfig) -> Dict[str, int]:
    """Effective seed per stage: explicit overrides win, the rest derive from ``cfg.seed``."""
    return {stage: int(cfg.seeds.get(stage, derive_seed(cfg.seed, stage))) for stage in STAGES}


@contextmanager
def _stage(name: str) -> Iterator[None]:
    logger.info("Stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def build_gen_spec(cfg: PipelineConfig, seed: int) -> GenSpec:
    gen = cfg.generate
    assert gen is not None
    if gen.rows_per_class is not None:
        labels = gen.labels or sorted(reference_distribution_spec().rows_per_class)
        spec = balanced_spec(labels, gen.rows_per_class, seed=seed, separability=gen.separability)
        spec.fault_fraction = gen.fault_fraction
        return spec
    spec = reference_distribution_spec(gen.divisor, seed, gen.separability, gen.fault_fraction)
    if gen.labels is not None:
        keep = set(gen.labels)
        spec.rows_per_class = {k: v for k, v in spec.rows_per_class.items() if k in keep}
    return spec


def load_data(cfg: PipelineConfig, seeds: Dict[str, int]) -> FeatureTable:
    """Ingest the configured files or generate a synthetic table."""
    if cfg.ingest is not None:
        spec = IngestSpec(
            files=[(f["path"], f.get("expected_label", "")) for f in cfg.ingest.files],
            per_file_cap=cfg.ingest.per_file_cap,
            label_column=cfg.ingest.label_column,
            text_columns=list(cfg.ingest.text_columns),
        )
        return load_many(spec, n_jobs=cfg.n_jobs)
    return generate(build_gen_spec(cfg, seeds["generate"]), n_jobs=cfg.n_jobs)


def augment_config(cfg: PipelineConfig, seed: int) -> AugmentConfig:
    section = cfg.augment
    return AugmentConfig(
        threshold_ms=section.threshold_ms,
        benign_latency=tuple(section.benign_latency),  # type: ignore[arg-type]
        attack_latency=tuple(section.attack_latency),  # type: ignore[arg-type]
        seed=seed,
        coupled=section.coupled,
        coupling_ms=section.coupling_ms,
        label_column=TASK_LABELS["ddos"],
    )


def task_feature_columns(table: FeatureTable, task: str, cfg: PipelineConfig) -> List[str]:
    """Numeric columns offered to ``task``'s feature selection."""
    excluded = set(cfg.tasks.latency_exclude if task == "latency" else cfg.tasks.ddos_exclude)
    return [name for name in table.columns if name not in excluded]


def check_feature_counts(table: FeatureTable, cfg: PipelineConfig) -> None:
    """
    Check ``k_best`` against the columns each task will actually see.

    Raises:
        ConfigError: If ``featsel.k_best`` exceeds a task's feature count
    """
    for task in TASK_LABELS:
        available = len(task_feature_columns(table, task, cfg))
        if cfg.featsel.k_best > available:
            raise ConfigError(
                "featsel.k_best",
                f"k_best={cfg.featsel.k_best} exceeds the {available} features of the {task} task",
            )


def _histogram(codes: np.ndarray, encoder: LabelEncoder) -> Dict[str, int]:
    counts = np.bincount(codes, minlength=encoder.n_classes)
    return {label: int(counts[i]) for i, label in enumerate(encoder.classes) if counts[i] > 0}


def _with_labels(features: FeatureTable, column: str, labels: Sequence[str]) -> FeatureTable:
    return features.with_strings(column, list(labels))


def _train_and_score(
    task: str,
    cfg: PipelineConfig,
    seeds: Dict[str, int],
    encoder: LabelEncoder,
    X_train: FeatureTable,
    y_train: np.ndarray,
    X_test: FeatureTable,
    y_test: np.ndarray,
) -> Tuple[Selection, Dict[str, TrainedModel], List[ModelResult]]:
    with _stage(f"featsel:{task}"):
        selection = select_features(
            X_train,
            y_train,
            k_best=cfg.featsel.k_best,
            rfe_final=cfg.featsel.rfe_final,
            mode=ScoreMode(cfg.featsel.score_mode),
            ranker=RankerSpec(cfg.featsel.ranker_max_depth, cfg.featsel.ranker_min_leaf),
        )

    with _stage(f"models:{task}"):
        specs = default_suite(
            derive_seed(seeds["models"], task),
            kinds=cfg.models.kinds,
            hyperparameters=cfg.models.hyperparameters,
        )
        models = fit_suite(specs, select_columns(X_train, selection.features), y_train, cfg.n_jobs)

    with _stage(f"score:{task}"):
        X_eval = select_columns(X_test, selection.features)
        results = []
        for spec in specs:
            model = models[spec.kind.value]
            results.append(
                evaluate(
                    spec.kind.value,
                    task,
                    y_test,
                    predict(model, X_eval),
                    encoder.n_classes,
                    hyperparameters=spec.resolved(),
                    seed=spec.seed,
                    substituted=spec.kind in SUBSTITUTED_BASELINES,
                )
            )
    return selection, models, results


def _run_default(
    table: FeatureTable,
    cfg: PipelineConfig,
    seeds: Dict[str, int],
    encoders: Dict[str, LabelEncoder],
    extra: Dict[str, Any],
) -> Dict[str, TaskRun]:
    with _stage("split"):
        train, test = stratified_split(
            table,
            SplitSpec(cfg.split.test_fraction, stratify_on=TASK_LABELS["ddos"], seed=seeds["split"]),
        )
        extra["rows"]["train"] = train.n_rows
        extra["rows"]["test"] = test.n_rows

    with _stage("scale"):
        scaler = fit_scaler(train)
        train_s = apply_scaler(scaler, train)
        test_s = apply_scaler(scaler, test)

    runs: Dict[str, TaskRun] = {}
    for task, label_column in TASK_LABELS.items():
        encoder = encoders[task]
        columns = task_feature_columns(train_s, task, cfg)
        y_train = encoder.encode(train_s.strings(label_column))
        y_test = encoder.encode(test_s.strings(label_column))

        with _stage(f"smote:{task}"):
            X_bal, y_bal = smote(
                select_columns(train_s, columns),
                y_train,
                SmoteConfig(cfg.smote.k_neighbors, seed=derive_seed(seeds["smote"], task)),
            )

        selection, models, results = _train_and_score(
            task, cfg, seeds, encoder, X_bal, y_bal, select_columns(test_s, columns), y_test
        )
        runs[task] = TaskRun(
            task=task,
            encoder=encoder,
            scaler=scaler,
            selection=selection,
            models=models,
            results=results,
            test_table=select_columns(test, scaler.columns + [label_column]),
            before_smote=_histogram(y_train, encoder),
            after_smote=_histogram(y_bal, encoder),
        )
    return runs


def _run_replication(
    table: FeatureTable,
    cfg: PipelineConfig,
    seeds: Dict[str, int],
    encoders: Dict[str, LabelEncoder],
    extra: Dict[str, Any],
) -> Dict[str, TaskRun]:
    runs: Dict[str, TaskRun] = {}
    for task, label_column in TASK_LABELS.items():
        encoder = encoders[task]
        y_all = encoder.encode(table.strings(label_column))

        with _stage(f"smote:{task}"):
            X_bal, y_bal = smote(
                select_columns(table, task_feature_columns(table, task, cfg)),
                y_all,
                SmoteConfig(cfg.smote.k_neighbors, seed=derive_seed(seeds["smote"], task)),
            )

        with _stage(f"scale:{task}"):
            scaler = fit_scaler(X_bal)
            X_scaled = apply_scaler(scaler, X_bal)

        with _stage(f"split:{task}"):
            train_idx, test_idx = stratified_split_indices(
                y_bal.tolist(), cfg.split.test_fraction, derive_seed(seeds["split"], task)
            )
            extra["rows"][f"train_{task}"] = int(train_idx.size)
            extra["rows"][f"test_{task}"] = int(test_idx.size)

        selection, models, results = _train_and_score(
            task,
            cfg,
            seeds,
            encoder,
            X_scaled.take(train_idx),
            y_bal[train_idx],
            X_scaled.take(test_idx),
            y_bal[test_idx],
        )
        test_labels = encoder.decode(y_bal[test_idx])
        runs[task] = TaskRun(
            task=task,
            encoder=encoder,
            scaler=scaler,
            selection=selection,
            models=models,
            results=results,
            test_table=_with_labels(X_bal.take(test_idx), label_column, test_labels),
            before_smote=_histogram(y_all, encoder),
            after_smote=_histogram(y_bal, encoder),
        )
    return runs


def _record_warnings(caught: Sequence[warnings.WarningMessage], into: List[str]) -> None:
    for item in caught:
        message = str(item.message)
        if message not in into:
            into.append(message)
        warnings.warn(message, item.category, stacklevel=3)


def execute(cfg: PipelineConfig, out_dir: Optional[PathLike] = None) -> PipelineRun:
    """
    Run the pipeline and write its outputs.

    Args:
        cfg: Validated configuration
        out_dir: Output directory; defaults to ``cfg.output_dir``

    Returns:
        The manifest plus the fitted per-task state

    Raises:
        StageError: If any stage fails; ``stage`` names it
        ConfigError: If ``featsel.k_best`` exceeds the features left after cleaning
    """
    seeds = stage_seeds(cfg)
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    manifest = RunManifest(
        config=cfg.snapshot(),
        config_digest=config_digest(cfg),
        seeds=seeds,
        mode=cfg.mode,
        score_mode=ScoreMode(cfg.featsel.score_mode).value,
    )
    extra: Dict[str, Any] = {"rows": {}}

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UserWarning)

        with _stage("data"):
            table = load_data(cfg, seeds)
            extra["rows"]["input"] = table.n_rows

        with _stage("augment"):
            table = augment(table, augment_config(cfg, seeds["augment"]))
            extra["latency_counts"] = quality_counts(table)

        with _stage("encode"):
            encoders = {task: fit_encoder(table.strings(col)) for task, col in TASK_LABELS.items()}

        with _stage("clean"):
            table = drop_and_clean(
                table, cfg.preprocess.drop, CleanPolicy(cfg.preprocess.clean_policy)
            )
            extra["rows"]["clean"] = table.n_rows
        check_feature_counts(table, cfg)

        if cfg.mode == Mode.REPLICATION:
            runs = _run_replication(table, cfg, seeds, encoders, extra)
        else:
            runs = _run_default(table, cfg, seeds, encoders, extra)

    if cfg.mode == Mode.REPLICATION:
        manifest.warnings.append(LEAKAGE_WARNING)
        warnings.warn(LEAKAGE_WARNING, UserWarning, stacklevel=2)
    _record_warnings(caught, manifest.warnings)

    for task, run in runs.items():
        manifest.class_labels[task] = list(run.encoder.classes)
        manifest.selected_features[task] = run.selection.features
        manifest.results.extend(run.results)
    extra["class_histograms"] = {
        task: {"before_smote": run.before_smote, "after_smote": run.after_smote}
        for task, run in runs.items()
    }
    extra["k_best"] = {task: run.selection.k_best for task, run in runs.items()}
    extra["rfe_eliminated"] = {task: run.selection.trace.eliminated for task, run in runs.items()}
    manifest.extra = extra

    pipeline_run = PipelineRun(manifest=manifest, tasks=runs)
    with _stage("emit"):
        pipeline_run.written = write_outputs(pipeline_run, cfg, out)
    return pipeline_run


def run_pipeline(cfg: PipelineConfig, out_dir: Optional[PathLike] = None) -> RunManifest:
    """Run every stage for both tasks and return the manifest (outputs are written too)."""
    return execute(cfg, out_dir).manifest


def write_outputs(run: PipelineRun, cfg: PipelineConfig, out: Path) -> Dict[str, Path]:
    """Results, charts, resolved config, transforms, test sets and models."""
    written = emit(run.manifest, out, cfg.output.formats)

    config_path = out / CONFIG_FILE
    config_path.write_text(json.dumps(cfg.snapshot(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written["config"] = config_path

    if "svg" in cfg.output.formats:
        written.update(_write_charts(run, out))

    transforms = Transforms(drop_columns=list(cfg.preprocess.drop))
    for task, task_run in run.tasks.items():
        transforms.tasks[task] = TaskTransforms(
            label_column=TASK_LABELS[task],
            encoder=task_run.encoder,
            scaler=task_run.scaler,
            features=task_run.selection.features,
        )
        written[f"test_{task}"] = write_csv(task_run.test_table, out / f"test_{task}.csv")
        if cfg.output.save_models:
            for kind, model in task_run.models.items():
                written[f"model_{task}_{kind}"] = save_model(
                    model, out / MODELS_DIR, model_file_name(task, kind)
                )
    written["transforms"] = save_transforms(transforms, out)
    return written


def _write_charts(run: PipelineRun, out: Path) -> Dict[str, Path]:
    from .utils import plotting

    if not plotting.MATPLOTLIB_AVAILABLE:
        return {}
    written: Dict[str, Path] = {}
    for task, task_run in run.tasks.items():
        path = out / f"class_distribution_{task}.svg"
        plotting.plot_class_distribution(
            task_run.before_smote, task_run.after_smote, save_path=path
        )
        written[f"class_distribution_{task}"] = path
    counts = run.manifest.extra.get("latency_counts")
    if counts:
        path = out / "latency_counts.svg"
        plotting.plot_latency_counts(counts, save_path=path)
        written["latency_counts"] = path
    return written


def model_file_name(task: str, kind: str) -> str:
    return f"{task}__{ModelKind(kind).value}"


def score_saved(out_dir: PathLike) -> List[ModelResult]:
    """
    Reload transforms, models and test sets from a finished run and rescore.

    Returns:
        One result per saved model, in the order of the run's results file

    Raises:
        FileNotFoundError: If a required artifact is missing
    """
    out = Path(out_dir)
    manifest = load_manifest(out / "results.json")
    transforms = load_transforms(out)
    results: List[ModelResult] = []
    prepared: Dict[str, Tuple[FeatureTable, np.ndarray]] = {}

    for previous in manifest.results:
        task = previous.task
        if task not in prepared:
            tt = transforms.tasks[task]
            table = load_csv(out / f"test_{task}.csv", label_column=tt.label_column, text_columns=())
            scaled = apply_scaler(tt.scaler, table)
            prepared[task] = (
                select_columns(scaled, tt.features),
                tt.encoder.encode(table.strings(tt.label_column)),
            )
        X_test, y_test = prepared[task]
        model = load_model(out / MODELS_DIR, model_file_name(task, previous.model))
        results.append(
            evaluate(
                previous.model,
                task,
                y_test,
                predict(model, X_test),
                transforms.tasks[task].encoder.n_classes,
                hyperparameters=previous.hyperparameters,
                seed=previous.seed,
                substituted=previous.substituted,
            )
        )
    return results
