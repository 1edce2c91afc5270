"""
ddos5g - DDoS attack-type and 5G latency-quality classification

Ingests (or synthesizes) network-flow records, appends synthetic 5G radio
telemetry, balances classes with SMOTE, selects features with univariate
F-scores and recursive elimination, and compares eight classifiers.
"""

__version__ = "0.1.0"
__author__ = "Kyle Steinhauer"
__email__ = "your.email@example.com"

from .config import PipelineConfig, load_config
from .data.tabular import FeatureTable
from .exceptions import Ddos5gError
from .pipeline import run_pipeline

__all__ = [
    "Ddos5gError",
    "FeatureTable",
    "PipelineConfig",
    "load_config",
    "run_pipeline",
]
