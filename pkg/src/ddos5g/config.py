"""
Pipeline configuration.

A run is described by one JSON document (``schema_version`` 1). Missing
sections take their defaults; ``--set a.b=value`` overrides are applied to
the raw document before validation, and validation errors name the dotted
field at fault.
"""

import copy
import hashlib
import json
import os
from dataclasses import MISSING, asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .analysis.featsel import ScoreMode
from .analysis.preprocess import DEFAULT_DROP_COLUMNS, CleanPolicy
from .data.ingest import DEFAULT_LABEL_COLUMN, DEFAULT_TEXT_COLUMNS
from .data.augment5g import LATENCY_COLUMN
from .exceptions import ConfigError
from .models.base import DEFAULT_HYPERPARAMETERS, ModelKind
from .models.suite import SUITE_ORDER
from .utils.seeding import STAGES

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "DDOS5G_OUTPUT_DIR"

PathLike = Union[str, Path]


class Mode:
    DEFAULT = "default"
    REPLICATION = "replication"


@dataclass
class IngestConfig:
    files: List[Dict[str, Any]] = field(default_factory=list)
    per_file_cap: int = 2_200_000
    label_column: str = DEFAULT_LABEL_COLUMN
    text_columns: List[str] = field(default_factory=lambda: list(DEFAULT_TEXT_COLUMNS))


@dataclass
class GenerateConfig:
    divisor: int = 100
    separability: float = 1.0
    fault_fraction: float = 0.005
    rows_per_class: Optional[int] = None
    labels: Optional[List[str]] = None


@dataclass
class AugmentSection:
    threshold_ms: float = 30.0
    benign_latency: Tuple[float, float] = (5.0, 25.0)
    attack_latency: Tuple[float, float] = (20.0, 120.0)
    coupled: bool = False
    coupling_ms: float = 60.0


@dataclass
class PreprocessConfig:
    drop: List[str] = field(default_factory=lambda: list(DEFAULT_DROP_COLUMNS))
    clean_policy: str = CleanPolicy.DROP_ROWS.value


@dataclass
class SplitConfig:
    test_fraction: float = 0.2


@dataclass
class SmoteSection:
    k_neighbors: int = 5


@dataclass
class FeatselConfig:
    k_best: int = 40
    rfe_final: int = 20
    score_mode: str = ScoreMode.F_REGRESSION.value
    ranker_max_depth: int = 8
    ranker_min_leaf: int = 5


@dataclass
class TasksConfig:
    # Columns withheld from each task's candidate features.
    ddos_exclude: List[str] = field(default_factory=list)
    latency_exclude: List[str] = field(default_factory=lambda: [LATENCY_COLUMN])


@dataclass
class ModelsConfig:
    kinds: List[str] = field(default_factory=lambda: [k.value for k in SUITE_ORDER])
    hyperparameters: Dict[str, Dict[str, Any]] = field(default_factory=dict)


@dataclass
class OutputConfig:
    formats: List[str] = field(default_factory=lambda: ["json", "csv", "svg"])
    save_models: bool = True


@dataclass
class PipelineConfig:
    """
    Every tunable of a run.

    Exactly one of ``ingest`` and ``generate`` is set. ``output_dir`` and
    ``n_jobs`` are execution settings: they are excluded from the snapshot and
    digest recorded in the results, so reruns elsewhere compare equal.
    """

    seed: int = 0
    mode: str = Mode.DEFAULT
    ingest: Optional[IngestConfig] = None
    generate: Optional[GenerateConfig] = field(default_factory=GenerateConfig)
    augment: AugmentSection = field(default_factory=AugmentSection)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    smote: SmoteSection = field(default_factory=SmoteSection)
    featsel: FeatselConfig = field(default_factory=FeatselConfig)
    tasks: TasksConfig = field(default_factory=TasksConfig)
    models: ModelsConfig = field(default_factory=ModelsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seeds: Dict[str, int] = field(default_factory=dict)
    output_dir: str = "results"
    n_jobs: int = 1

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["schema_version"] = SCHEMA_VERSION
        data["augment"]["benign_latency"] = list(self.augment.benign_latency)
        data["augment"]["attack_latency"] = list(self.augment.attack_latency)
        return data

    def snapshot(self) -> Dict[str, Any]:
        """Experiment settings only (no output location or worker count)."""
        data = self.to_dict()
        data.pop("output_dir")
        data.pop("n_jobs")
        return data


def default_config() -> PipelineConfig:
    """Generated data at the reference distribution / 100, default mode."""
    return PipelineConfig()


def default_config_dict() -> Dict[str, Any]:
    return default_config().to_dict()


def config_digest(cfg: PipelineConfig) -> str:
    """md5 of the canonical snapshot JSON."""
    text = json.dumps(cfg.snapshot(), sort_keys=True, separators=(",", ":"))
    return hashlib.md5(text.encode("utf-8")).hexdigest()


def parse_override(text: str) -> Tuple[str, Any]:
    """
    Split ``a.b=value``; the value is parsed as JSON, falling back to a string.

    Raises:
        ConfigError: If there is no ``=`` or the key is empty
    """
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(key or text, "override must look like section.field=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_overrides(raw: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Return a copy of ``raw`` with every dotted override applied."""
    out = copy.deepcopy(raw)
    for text in overrides:
        key, value = parse_override(text)
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = {}
                node[part] = child
            if not isinstance(child, dict):
                raise ConfigError(key, f"{part!r} is not a section")
            node = child
        node[parts[-1]] = value
    return out


def _section(cls: Any, data: Any, path: str) -> Any:
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(path, "must be an object")
    known = set(cls.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", "unknown field")
    try:
        section = cls(**data)
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from exc
    _check_scalar_types(section, path)
    return section


def _check_scalar_types(section: Any, path: str) -> None:
    # Scalar fields must keep the type of their default; ints are accepted for floats.
    for f in fields(section):
        if f.default is MISSING or f.default is None:
            continue
        value = getattr(section, f.name)
        where = f"{path}.{f.name}"
        if isinstance(f.default, bool):
            if not isinstance(value, bool):
                raise ConfigError(where, f"must be a boolean, got {value!r}")
        elif isinstance(f.default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(where, f"must be an integer, got {value!r}")
        elif isinstance(f.default, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(where, f"must be a number, got {value!r}")
            setattr(section, f.name, float(value))
        elif isinstance(f.default, str) and not isinstance(value, str):
            raise ConfigError(where, f"must be a string, got {value!r}")


def from_dict(raw: Dict[str, Any]) -> PipelineConfig:
    """Build and validate a config from its JSON document."""
    data = dict(raw)
    version = data.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}")

    known = set(PipelineConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")

    has_ingest = data.get("ingest") is not None
    has_generate = data.get("generate") is not None
    cfg = PipelineConfig(
        seed=data.get("seed", 0),
        mode=data.get("mode", Mode.DEFAULT),
        ingest=_section(IngestConfig, data["ingest"], "ingest") if has_ingest else None,
        generate=(
            _section(GenerateConfig, data["generate"], "generate")
            if has_generate
            else (None if has_ingest else GenerateConfig())
        ),
        augment=_section(AugmentSection, data.get("augment"), "augment"),
        preprocess=_section(PreprocessConfig, data.get("preprocess"), "preprocess"),
        split=_section(SplitConfig, data.get("split"), "split"),
        smote=_section(SmoteSection, data.get("smote"), "smote"),
        featsel=_section(FeatselConfig, data.get("featsel"), "featsel"),
        tasks=_section(TasksConfig, data.get("tasks"), "tasks"),
        models=_section(ModelsConfig, data.get("models"), "models"),
        output=_section(OutputConfig, data.get("output"), "output"),
        seeds=dict(data.get("seeds") or {}),
        output_dir=data.get("output_dir", "results"),
        n_jobs=data.get("n_jobs", 1),
    )
    cfg.augment.benign_latency = tuple(cfg.augment.benign_latency)  # type: ignore[assignment]
    cfg.augment.attack_latency = tuple(cfg.augment.attack_latency)  # type: ignore[assignment]
    validate(cfg)
    return cfg


def validate(cfg: PipelineConfig) -> None:
    """
    Check cross-field rules.

    Raises:
        ConfigError: Naming the first offending field
    """
    if (cfg.ingest is None) == (cfg.generate is None):
        raise ConfigError("ingest", "exactly one of 'ingest' and 'generate' must be set")
    if cfg.mode not in (Mode.DEFAULT, Mode.REPLICATION):
        raise ConfigError("mode", f"must be '{Mode.DEFAULT}' or '{Mode.REPLICATION}'")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError("seed", "must be a non-negative integer")

    if cfg.ingest is not None:
        if not cfg.ingest.files:
            raise ConfigError("ingest.files", "must list at least one file")
        for i, entry in enumerate(cfg.ingest.files):
            if not isinstance(entry, dict) or "path" not in entry:
                raise ConfigError(f"ingest.files.{i}", "must be an object with a 'path'")
        if cfg.ingest.per_file_cap < 1:
            raise ConfigError("ingest.per_file_cap", "must be >= 1")
    if cfg.generate is not None:
        if cfg.generate.divisor < 1:
            raise ConfigError("generate.divisor", "must be >= 1")
        if not 0.0 <= cfg.generate.separability <= 1.0:
            raise ConfigError("generate.separability", "must lie in [0, 1]")
        if not 0.0 <= cfg.generate.fault_fraction < 1.0:
            raise ConfigError("generate.fault_fraction", "must lie in [0, 1)")
        if cfg.generate.rows_per_class is not None and cfg.generate.rows_per_class < 1:
            raise ConfigError("generate.rows_per_class", "must be >= 1")

    if cfg.augment.threshold_ms <= 0:
        raise ConfigError("augment.threshold_ms", "must be positive")
    for name in ("benign_latency", "attack_latency"):
        low, high = getattr(cfg.augment, name)
        if not 0 < low < high:
            raise ConfigError(f"augment.{name}", "must satisfy 0 < low < high")
    try:
        CleanPolicy(cfg.preprocess.clean_policy)
    except ValueError as exc:
        raise ConfigError("preprocess.clean_policy", "must be 'drop_rows' or 'median_impute'") from exc
    if not 0.0 < cfg.split.test_fraction < 1.0:
        raise ConfigError("split.test_fraction", "must lie in (0, 1)")
    if cfg.smote.k_neighbors < 1:
        raise ConfigError("smote.k_neighbors", "must be >= 1")

    if cfg.featsel.rfe_final < 1:
        raise ConfigError("featsel.rfe_final", "must be >= 1")
    if cfg.featsel.k_best < 1:
        raise ConfigError("featsel.k_best", "must be >= 1")
    if cfg.featsel.rfe_final > cfg.featsel.k_best:
        raise ConfigError("featsel.rfe_final", "must not exceed featsel.k_best")
    try:
        ScoreMode(cfg.featsel.score_mode)
    except ValueError as exc:
        raise ConfigError("featsel.score_mode", "must be 'f_regression' or 'anova'") from exc

    if not cfg.models.kinds:
        raise ConfigError("models.kinds", "must name at least one model")
    for i, kind in enumerate(cfg.models.kinds):
        try:
            ModelKind(kind)
        except ValueError as exc:
            raise ConfigError(f"models.kinds.{i}", f"unknown model kind {kind!r}") from exc
    for kind, params in cfg.models.hyperparameters.items():
        try:
            allowed = DEFAULT_HYPERPARAMETERS[ModelKind(kind)]
        except ValueError as exc:
            raise ConfigError(f"models.hyperparameters.{kind}", "unknown model kind") from exc
        for name in params:
            if name not in allowed:
                raise ConfigError(f"models.hyperparameters.{kind}.{name}", "unknown hyperparameter")

    for stage, value in cfg.seeds.items():
        if stage not in STAGES:
            raise ConfigError(f"seeds.{stage}", f"unknown stage; expected one of {', '.join(STAGES)}")
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ConfigError(f"seeds.{stage}", "must be a non-negative integer")
    for fmt in cfg.output.formats:
        if fmt not in ("json", "csv", "svg"):
            raise ConfigError("output.formats", f"unknown format {fmt!r}")
    if isinstance(cfg.n_jobs, bool) or not isinstance(cfg.n_jobs, int) or cfg.n_jobs < 1:
        raise ConfigError("n_jobs", "must be >= 1")


def load_config(
    path: Optional[PathLike] = None,
    overrides: Sequence[str] = (),
    env: Optional[Dict[str, str]] = None,
) -> PipelineConfig:
    """
    Load, override and validate a configuration.

    Args:
        path: JSON config file; ``None`` starts from the defaults
        overrides: ``section.field=value`` strings
        env: Environment to read ``DDOS5G_OUTPUT_DIR`` from (defaults to ``os.environ``)

    Raises:
        ConfigError: If the file is missing, is not valid JSON or fails validation
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError("<file>", f"config file not found: {path}")
        text = Path(path).read_text(encoding="utf-8")
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("<file>", "top level must be an object")
    raw = apply_overrides(raw, overrides)
    env = os.environ if env is None else env
    if env.get(OUTPUT_DIR_ENV):
        raw["output_dir"] = env[OUTPUT_DIR_ENV]
    return from_dict(raw)


def save_config(cfg: PipelineConfig, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
