"""
Synthetic flow-record generator.

Produces class-conditional flow tables with the same 88 columns as the public
DDoS flow dataset, so every pipeline stage can run without the multi-gigabyte
download. Fidelity targets are schema compatibility and controllable class
separability, not traffic realism.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..exceptions import ConfigError, UnknownLabelProfileError
from ..utils.seeding import derive_seed, make_rng
from .tabular import FeatureTable

logger = logging.getLogger(__name__)

TCP = 6
UDP = 17

BENIGN_LABEL = "BENIGN"
BENIGN_PORTS = (80, 443)

# Flow measurements, in dataset order.
FLOW_FEATURE_COLUMNS: Tuple[str, ...] = (
    "Flow Duration",
    "Total Fwd Packets",
    "Total Backward Packets",
    "Total Length of Fwd Packets",
    "Total Length of Bwd Packets",
    "Fwd Packet Length Max",
    "Fwd Packet Length Min",
    "Fwd Packet Length Mean",
    "Fwd Packet Length Std",
    "Bwd Packet Length Max",
    "Bwd Packet Length Min",
    "Bwd Packet Length Mean",
    "Bwd Packet Length Std",
    "Flow Bytes/s",
    "Flow Packets/s",
    "Flow IAT Mean",
    "Flow IAT Std",
    "Flow IAT Max",
    "Flow IAT Min",
    "Fwd IAT Total",
    "Fwd IAT Mean",
    "Fwd IAT Std",
    "Fwd IAT Max",
    "Fwd IAT Min",
    "Bwd IAT Total",
    "Bwd IAT Mean",
    "Bwd IAT Std",
    "Bwd IAT Max",
    "Bwd IAT Min",
    "Fwd PSH Flags",
    "Bwd PSH Flags",
    "Fwd URG Flags",
    "Bwd URG Flags",
    "Fwd Header Length",
    "Bwd Header Length",
    "Fwd Packets/s",
    "Bwd Packets/s",
    "Min Packet Length",
    "Max Packet Length",
    "Packet Length Mean",
    "Packet Length Std",
    "Packet Length Variance",
    "FIN Flag Count",
    "SYN Flag Count",
    "RST Flag Count",
    "PSH Flag Count",
    "ACK Flag Count",
    "URG Flag Count",
    "CWE Flag Count",
    "ECE Flag Count",
    "Down/Up Ratio",
    "Average Packet Size",
    "Avg Fwd Segment Size",
    "Avg Bwd Segment Size",
    "Fwd Header Length.1",
    "Fwd Avg Bytes/Bulk",
    "Fwd Avg Packets/Bulk",
    "Fwd Avg Bulk Rate",
    "Bwd Avg Bytes/Bulk",
    "Bwd Avg Packets/Bulk",
    "Bwd Avg Bulk Rate",
    "Subflow Fwd Packets",
    "Subflow Fwd Bytes",
    "Subflow Bwd Packets",
    "Subflow Bwd Bytes",
    "Init_Win_bytes_forward",
    "Init_Win_bytes_backward",
    "act_data_pkt_fwd",
    "min_seg_size_forward",
    "Active Mean",
    "Active Std",
    "Active Max",
    "Active Min",
    "Idle Mean",
    "Idle Std",
    "Idle Max",
    "Idle Min",
)

RATE_COLUMNS = ("Flow Bytes/s", "Flow Packets/s", "Fwd Packets/s", "Bwd Packets/s")
FAULT_COLUMNS = ("Flow Bytes/s", "Flow Packets/s")

LABEL_COLUMN = "Label"

# Full 88-column layout of the public dataset's CSV files.
DATASET_COLUMNS: Tuple[str, ...] = (
    ("Unnamed: 0", "Flow ID", "Source IP", "Source Port", "Destination IP")
    + ("Destination Port", "Protocol", "Timestamp")
    + FLOW_FEATURE_COLUMNS
    + ("SimillarHTTP", "Inbound", LABEL_COLUMN)
)
TEXT_COLUMNS = ("Flow ID", "Source IP", "Destination IP", "Timestamp", "SimillarHTTP", LABEL_COLUMN)

# Label counts of the merged reference extract (550,000 rows).
REFERENCE_LABEL_COUNTS: Dict[str, int] = {
    "DrDoS_SSDP": 49989,
    "Syn": 49983,
    "DrDoS_SNMP": 49975,
    "TFTP": 49970,
    "DrDoS_NetBIOS": 49969,
    "DrDoS_UDP": 49964,
    "DrDoS_MSSQL": 49964,
    "DrDoS_LDAP": 49961,
    "DrDoS_DNS": 49958,
    "UDP-lag": 49454,
    "DrDoS_NTP": 49409,
    "BENIGN": 1350,
    "WebDDoS": 54,
}

# Class-mean offset per unit of separability, in noise standard deviations.
MEAN_SHIFT = 3.0
# Per-feature baseline mean, in noise standard deviations.
BASE_LEVEL = 4.0


@dataclass(frozen=True)
class ClassProfile:
    """
    Generation profile of one traffic class.

    Attributes:
        label: Class label written to the Label column
        protocol_code: IP protocol number the class rides on
        src_port_range: Inclusive source-port range for non-benign rows
        dst_port_range: Inclusive destination-port range for non-benign rows
        rate_scale: Multiplier on the per-second rate columns
        separability: How far the class mean sits from the shared baseline, in [0, 1]
    """

    label: str
    protocol_code: int = UDP
    src_port_range: Tuple[int, int] = (5000, 65535)
    dst_port_range: Tuple[int, int] = (1, 65535)
    rate_scale: float = 1.0
    separability: float = 1.0

    def __post_init__(self) -> None:
        for name in ("src_port_range", "dst_port_range"):
            low, high = getattr(self, name)
            if not 0 <= low <= high <= 65535:
                raise ConfigError(f"profiles.{self.label}.{name}", "must lie within [0, 65535]")
        if not 0.0 <= self.separability <= 1.0:
            raise ConfigError(f"profiles.{self.label}.separability", "must lie in [0, 1]")
        if self.rate_scale <= 0:
            raise ConfigError(f"profiles.{self.label}.rate_scale", "must be positive")

    def with_separability(self, separability: float) -> "ClassProfile":
        return ClassProfile(
            self.label,
            self.protocol_code,
            self.src_port_range,
            self.dst_port_range,
            self.rate_scale,
            separability,
        )


ATTACK_PROFILES: Dict[str, ClassProfile] = {
    "BENIGN": ClassProfile("BENIGN", TCP, (80, 443), (80, 443), 0.2),
    "DrDoS_DNS": ClassProfile("DrDoS_DNS", UDP, (5000, 65535), (1, 65535), 4.0),
    "DrDoS_LDAP": ClassProfile("DrDoS_LDAP", UDP, (5000, 65535), (1, 65535), 3.5),
    "DrDoS_MSSQL": ClassProfile("DrDoS_MSSQL", UDP, (5000, 65535), (1, 65535), 3.0),
    "DrDoS_NTP": ClassProfile("DrDoS_NTP", UDP, (5000, 65535), (1, 65535), 5.0),
    "DrDoS_NetBIOS": ClassProfile("DrDoS_NetBIOS", UDP, (5000, 65535), (1, 65535), 2.5),
    "DrDoS_SNMP": ClassProfile("DrDoS_SNMP", UDP, (5000, 65535), (1, 65535), 4.5),
    "DrDoS_SSDP": ClassProfile("DrDoS_SSDP", UDP, (5000, 65535), (1, 65535), 3.0),
    "DrDoS_UDP": ClassProfile("DrDoS_UDP", UDP, (5000, 65535), (1, 65535), 6.0),
    "Syn": ClassProfile("Syn", TCP, (5000, 65535), (1, 65535), 2.0),
    "TFTP": ClassProfile("TFTP", UDP, (1024, 65535), (1, 65535), 3.5),
    "UDP-lag": ClassProfile("UDP-lag", UDP, (5000, 65535), (1, 65535), 1.5),
    "WebDDoS": ClassProfile("WebDDoS", TCP, (5000, 65535), (80, 80), 0.8),
}


@dataclass
class GenSpec:
    """
    What to generate.

    Attributes:
        profiles: One profile per label that may be generated
        rows_per_class: Rows to generate per label
        n_features: Number of flow-measurement columns (dataset has 77);
            extra columns beyond the dataset's are named ``Extra Feature i``
        seed: Generation seed
        fault_fraction: Fraction of rows that get a planted NaN/inf in each
            fault column (0 disables fault injection)
        fault_columns: Columns that receive planted non-finite values
    """

    profiles: List[ClassProfile]
    rows_per_class: Dict[str, int]
    n_features: int = len(FLOW_FEATURE_COLUMNS)
    seed: int = 0
    fault_fraction: float = 0.0
    fault_columns: Tuple[str, ...] = FAULT_COLUMNS

    def __post_init__(self) -> None:
        for label, count in self.rows_per_class.items():
            if int(count) < 1:
                raise ConfigError(f"generate.rows_per_class.{label}", "must be >= 1")
        if self.n_features < 1:
            raise ConfigError("generate.n_features", "must be >= 1")
        if not 0.0 <= self.fault_fraction < 1.0:
            raise ConfigError("generate.fault_fraction", "must lie in [0, 1)")

    @property
    def feature_columns(self) -> List[str]:
        base = list(FLOW_FEATURE_COLUMNS[: self.n_features])
        extra = [f"Extra Feature {i}" for i in range(self.n_features - len(base))]
        return base + extra

    def profile_for(self, label: str) -> ClassProfile:
        for profile in self.profiles:
            if profile.label == label:
                return profile
        raise UnknownLabelProfileError(f"No generation profile for label {label!r}")


@dataclass
class GeneratedData:
    """Generated table plus the cells where non-finite values were planted."""

    table: FeatureTable
    fault_cells: Dict[str, List[int]] = field(default_factory=dict)

    @property
    def injected_columns(self) -> List[str]:
        return [name for name, rows in self.fault_cells.items() if rows]


def reference_distribution_spec(
    divisor: int = 1,
    seed: int = 0,
    separability: float = 1.0,
    fault_fraction: float = 0.0,
) -> GenSpec:
    """
    GenSpec reproducing the reference extract's 13 label counts.

    Args:
        divisor: Scale every count down by this factor (floor, minimum 1);
            ``divisor=100`` gives the ~5,500-row desk-scale variant
        seed: Generation seed
        separability: Separability applied to every profile
        fault_fraction: Fault-injection rate (0 disables)
    """
    if divisor < 1:
        raise ConfigError("generate.divisor", "must be >= 1")
    rows = {label: max(1, count // divisor) for label, count in REFERENCE_LABEL_COUNTS.items()}
    profiles = [ATTACK_PROFILES[label].with_separability(separability) for label in rows]
    return GenSpec(profiles=profiles, rows_per_class=rows, seed=seed, fault_fraction=fault_fraction)


def balanced_spec(
    labels: Sequence[str],
    rows_per_class: int,
    seed: int = 0,
    separability: float = 1.0,
    n_features: int = len(FLOW_FEATURE_COLUMNS),
) -> GenSpec:
    """GenSpec with the same row count for every label (unknown labels get a UDP profile)."""
    profiles = [
        ATTACK_PROFILES.get(label, ClassProfile(label)).with_separability(separability)
        for label in labels
    ]
    return GenSpec(
        profiles=profiles,
        rows_per_class={label: rows_per_class for label in labels},
        n_features=n_features,
        seed=seed,
    )


def _class_offsets(label: str, n_features: int) -> np.ndarray:
    # Class-mean directions depend on the label only, so every seed of a
    # generator run shares the same class geometry.
    rng = make_rng(derive_seed(0, "profile", label))
    return rng.standard_normal(n_features)


def _feature_scales(n_features: int) -> np.ndarray:
    rng = make_rng(derive_seed(0, "feature-scales"))
    return np.exp(rng.uniform(0.0, 8.0, n_features))


def _generate_class(
    profile: ClassProfile,
    n_rows: int,
    feature_columns: Sequence[str],
    seed: int,
) -> pd.DataFrame:
    rng = make_rng(seed)
    n_features = len(feature_columns)
    sep = profile.separability

    center = BASE_LEVEL + sep * MEAN_SHIFT * _class_offsets(profile.label, n_features)
    noise = rng.standard_normal((n_rows, n_features))
    values = (center + noise) * _feature_scales(n_features)

    rate_factor = 1.0 + sep * (profile.rate_scale - 1.0)
    for j, name in enumerate(feature_columns):
        if name in RATE_COLUMNS:
            values[:, j] *= rate_factor

    if profile.label == BENIGN_LABEL:
        src_ports = rng.choice(BENIGN_PORTS, size=n_rows)
        dst_ports = rng.choice(BENIGN_PORTS, size=n_rows)
    else:
        src_ports = rng.integers(profile.src_port_range[0], profile.src_port_range[1], n_rows, endpoint=True)
        dst_ports = rng.integers(profile.dst_port_range[0], profile.dst_port_range[1], n_rows, endpoint=True)

    # The protocol is only as informative as the profile's separability.
    keep_protocol = rng.random(n_rows) < sep
    protocol = np.where(keep_protocol, profile.protocol_code, rng.choice((TCP, UDP), size=n_rows))
    inbound = rng.integers(0, 2, n_rows)

    if profile.label == BENIGN_LABEL:
        src_hosts = rng.integers(2, 255, n_rows)
        src_ip = [f"192.168.50.{h}" for h in src_hosts]
        dst_ip = ["172.217.10.46"] * n_rows
    else:
        src_ip = ["172.16.0.5"] * n_rows
        dst_ip = ["192.168.50.1"] * n_rows

    base_ts = pd.Timestamp("2018-12-01 10:51:39")
    offsets_ms = np.sort(rng.integers(0, 3_600_000, n_rows))
    timestamps = [
        (base_ts + pd.Timedelta(milliseconds=int(ms))).strftime("%Y-%m-%d %H:%M:%S.%f")
        for ms in offsets_ms
    ]

    frame = pd.DataFrame(values, columns=list(feature_columns))
    frame.insert(0, "Unnamed: 0", np.arange(n_rows, dtype=np.float64))
    frame.insert(1, "Flow ID", [
        f"{d}-{s}-{dp}-{sp}-{p}"
        for d, s, dp, sp, p in zip(dst_ip, src_ip, dst_ports, src_ports, protocol)
    ])
    frame.insert(2, "Source IP", src_ip)
    frame.insert(3, "Source Port", src_ports.astype(np.float64))
    frame.insert(4, "Destination IP", dst_ip)
    frame.insert(5, "Destination Port", dst_ports.astype(np.float64))
    frame.insert(6, "Protocol", protocol.astype(np.float64))
    frame.insert(7, "Timestamp", timestamps)
    frame["SimillarHTTP"] = "0"
    frame["Inbound"] = inbound.astype(np.float64)
    frame[LABEL_COLUMN] = profile.label
    return frame


def generate_detailed(spec: GenSpec, n_jobs: int = 1) -> GeneratedData:
    """
    Generate a table and report where faults were planted.

    Classes are generated independently from per-class seed streams and
    concatenated in sorted label order, so the output does not depend on
    ``n_jobs``.
    """
    labels = sorted(spec.rows_per_class)
    profiles = [spec.profile_for(label) for label in labels]
    feature_columns = spec.feature_columns

    frames = Parallel(n_jobs=n_jobs)(
        delayed(_generate_class)(
            profile,
            int(spec.rows_per_class[profile.label]),
            feature_columns,
            derive_seed(spec.seed, "class", profile.label),
        )
        for profile in profiles
    )
    frame = pd.concat(frames, ignore_index=True)

    fault_cells: Dict[str, List[int]] = {}
    if spec.fault_fraction > 0:
        rng = make_rng(derive_seed(spec.seed, "faults"))
        n_faults = max(1, int(np.ceil(spec.fault_fraction * len(frame))))
        for name in spec.fault_columns:
            if name not in frame.columns:
                continue
            rows = np.sort(rng.choice(len(frame), size=n_faults, replace=False))
            planted = rng.choice(np.array([np.inf, -np.inf, np.nan]), size=n_faults)
            frame.loc[rows, name] = planted
            fault_cells[name] = rows.tolist()

    text = [c for c in frame.columns if c in TEXT_COLUMNS]
    table = FeatureTable(frame, string_columns=text)
    logger.info(
        "Generated %d rows over %d classes (seed=%d)", table.n_rows, len(labels), spec.seed
    )
    return GeneratedData(table=table, fault_cells=fault_cells)


def generate(spec: GenSpec, n_jobs: int = 1) -> FeatureTable:
    """
    Generate a synthetic flow table.

    Args:
        spec: Generation spec; every label in ``rows_per_class`` needs a profile
        n_jobs: Worker count for per-class generation

    Returns:
        Table with the dataset's column names, rows sorted by class then
        generation index

    Raises:
        UnknownLabelProfileError: If a label has no profile
    """
    return generate_detailed(spec, n_jobs=n_jobs).table

