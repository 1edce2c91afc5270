"""
Synthetic 5G radio telemetry for flow tables.

Appends reference-signal power (RSRP), reference-signal quality (RSRQ) and
latency columns to every flow row, then derives the binary latency-quality
label that forms the second prediction target.
"""

import enum
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..exceptions import ConfigError, MissingLabelColumnError, NonPositiveLatencyError
from ..utils.seeding import make_rng
from .tabular import FeatureTable

logger = logging.getLogger(__name__)

RSRP_COLUMN = "5G_RSRP"
RSRQ_COLUMN = "5G_RSRQ"
LATENCY_COLUMN = "5G_Latency"
QUALITY_COLUMN = "5G_Latency_Label"

RSRP_RANGE_DBM = (-140.0, -44.0)
RSRQ_RANGE_DB = (-19.5, -3.0)

BENIGN_LABEL = "BENIGN"
COUPLING_RATE_COLUMN = "Flow Packets/s"


class LatencyQuality(str, enum.Enum):
    """Latency quality class; ``good`` means strictly below the threshold."""

    GOOD = "good"
    BAD = "bad"


@dataclass(frozen=True)
class FiveGTelemetry:
    """One row of radio telemetry."""

    rsrp_dbm: float
    rsrq_db: float
    latency_ms: float

    def __post_init__(self) -> None:
        if not RSRP_RANGE_DBM[0] <= self.rsrp_dbm <= RSRP_RANGE_DBM[1]:
            raise ValueError(f"RSRP {self.rsrp_dbm} dBm outside {RSRP_RANGE_DBM}")
        if not RSRQ_RANGE_DB[0] <= self.rsrq_db <= RSRQ_RANGE_DB[1]:
            raise ValueError(f"RSRQ {self.rsrq_db} dB outside {RSRQ_RANGE_DB}")
        if not self.latency_ms > 0:
            raise NonPositiveLatencyError(f"latency must be > 0, got {self.latency_ms}")


@dataclass
class AugmentConfig:
    """
    Telemetry synthesis settings.

    Attributes:
        threshold_ms: Latencies strictly below this are ``good``
        benign_latency: Uniform latency range for benign rows, in ms
        attack_latency: Uniform latency range for attack rows, in ms
        seed: Sampling seed
        coupled: When true, latency also grows with the row's packet-rate
            percentile, so the latency label is learnable from flow features
        coupling_ms: Extra latency at the 100th packet-rate percentile
        label_column: Attack label column
    """

    threshold_ms: float = 30.0
    benign_latency: Tuple[float, float] = (5.0, 25.0)
    attack_latency: Tuple[float, float] = (20.0, 120.0)
    seed: int = 0
    coupled: bool = False
    coupling_ms: float = 60.0
    label_column: str = "Label"

    def __post_init__(self) -> None:
        for name in ("benign_latency", "attack_latency"):
            low, high = getattr(self, name)
            if not 0 < low < high:
                raise ConfigError(f"augment.{name}", "must satisfy 0 < low < high")
            setattr(self, name, (float(low), float(high)))
        if self.threshold_ms <= 0:
            raise ConfigError("augment.threshold_ms", "must be positive")
        if self.coupling_ms < 0:
            raise ConfigError("augment.coupling_ms", "must be non-negative")


def quality_label(latency_ms: float, threshold_ms: float = 30.0) -> LatencyQuality:
    """
    Classify one latency value.

    Args:
        latency_ms: Latency in milliseconds, must be positive
        threshold_ms: Boundary; the boundary value itself is ``bad``

    Returns:
        ``LatencyQuality.GOOD`` iff ``latency_ms < threshold_ms``
    """
    if not latency_ms > 0:
        raise NonPositiveLatencyError(f"latency must be > 0, got {latency_ms}")
    return LatencyQuality.GOOD if latency_ms < threshold_ms else LatencyQuality.BAD


def _rate_percentiles(values: np.ndarray) -> np.ndarray:
    # Rank-based percentile in [0, 1]; non-finite rates rank as the median.
    clean = np.where(np.isfinite(values), values, np.nan)
    fill = np.nanmedian(clean) if np.isfinite(clean).any() else 0.0
    clean = np.where(np.isnan(clean), fill, clean)
    if clean.size <= 1:
        return np.zeros_like(clean)
    order = np.argsort(clean, kind="stable")
    ranks = np.empty(clean.size, dtype=np.float64)
    ranks[order] = np.arange(clean.size, dtype=np.float64)
    return ranks / (clean.size - 1)


def augment(table: FeatureTable, cfg: AugmentConfig) -> FeatureTable:
    """
    Append 5G telemetry and the latency-quality label to a flow table.

    Adds numeric columns ``5G_RSRP``, ``5G_RSRQ``, ``5G_Latency`` and the text
    column ``5G_Latency_Label``; nothing else changes.

    Args:
        table: Flow table with the attack label column
        cfg: Synthesis settings

    Returns:
        Augmented table

    Raises:
        MissingLabelColumnError: If the attack label column is absent
    """
    if not table.has_column(cfg.label_column) or not table.is_string(cfg.label_column):
        raise MissingLabelColumnError(cfg.label_column)

    labels = np.asarray(table.strings(cfg.label_column), dtype=object)
    benign = labels == BENIGN_LABEL
    n = table.n_rows
    rng = make_rng(cfg.seed)

    rsrp = rng.uniform(RSRP_RANGE_DBM[0], RSRP_RANGE_DBM[1], n)
    rsrq = rng.uniform(RSRQ_RANGE_DB[0], RSRQ_RANGE_DB[1], n)
    benign_draw = rng.uniform(cfg.benign_latency[0], cfg.benign_latency[1], n)
    attack_draw = rng.uniform(cfg.attack_latency[0], cfg.attack_latency[1], n)
    latency = np.where(benign, benign_draw, attack_draw)

    if cfg.coupled and table.has_column(COUPLING_RATE_COLUMN):
        latency = latency + cfg.coupling_ms * _rate_percentiles(
            table.numeric(COUPLING_RATE_COLUMN)
        )

    quality = np.where(
        latency < cfg.threshold_ms, LatencyQuality.GOOD.value, LatencyQuality.BAD.value
    )

    out = (
        table.with_numeric(RSRP_COLUMN, rsrp)
        .with_numeric(RSRQ_COLUMN, rsrq)
        .with_numeric(LATENCY_COLUMN, latency)
        .with_strings(QUALITY_COLUMN, quality.tolist())
    )
    counts = quality_counts(out)
    logger.info(
        "Augmented %d rows with 5G telemetry (good=%d, bad=%d, coupled=%s)",
        n,
        counts[LatencyQuality.GOOD.value],
        counts[LatencyQuality.BAD.value],
        cfg.coupled,
    )
    return out


def quality_counts(table: FeatureTable) -> Dict[str, int]:
    """Return ``{"bad": n_bad, "good": n_good}`` for an augmented table."""
    if not table.has_column(QUALITY_COLUMN):
        raise MissingLabelColumnError(QUALITY_COLUMN)
    values = np.asarray(table.strings(QUALITY_COLUMN), dtype=object)
    return {
        LatencyQuality.BAD.value: int((values == LatencyQuality.BAD.value).sum()),
        LatencyQuality.GOOD.value: int((values == LatencyQuality.GOOD.value).sum()),
    }
