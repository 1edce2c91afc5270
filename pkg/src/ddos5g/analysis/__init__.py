"""
Analysis module for ddos5g.

Preprocessing, SMOTE balancing, feature selection and result reporting.
"""

from .balance import SmoteConfig, smote
from .featsel import ScoreMode, select_features
from .preprocess import CleanPolicy, drop_and_clean, fit_encoder, fit_scaler, stratified_split
from .report import RunManifest, confusion, emit, scores

__all__ = [
    "CleanPolicy",
    "drop_and_clean",
    "fit_encoder",
    "fit_scaler",
    "stratified_split",
    "SmoteConfig",
    "smote",
    "ScoreMode",
    "select_features",
    "RunManifest",
    "confusion",
    "scores",
    "emit",
]
