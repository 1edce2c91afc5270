"""
Data module for ddos5g.

Flow tables, CSV ingestion, the synthetic flow generator and 5G telemetry
augmentation.
"""

from .augment5g import AugmentConfig, augment, quality_counts, quality_label
from .ingest import IngestSpec, class_distribution, label_counts, load_csv, load_many, write_csv
from .synthgen import GenSpec, balanced_spec, generate, reference_distribution_spec
from .tabular import FeatureTable, select_columns

__all__ = [
    "FeatureTable",
    "select_columns",
    "IngestSpec",
    "load_csv",
    "load_many",
    "write_csv",
    "label_counts",
    "class_distribution",
    "GenSpec",
    "generate",
    "reference_distribution_spec",
    "balanced_spec",
    "AugmentConfig",
    "augment",
    "quality_label",
    "quality_counts",
]
