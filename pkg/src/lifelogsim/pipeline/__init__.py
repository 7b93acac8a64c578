"""Lifelog generation: log -> windows -> features -> labels."""

from .dataset import FeatureTable, features_from_log, read_features, simulate_users, write_features
from .evaluation import (
    EvalReport,
    Scheme,
    cross_validate,
    majority_vote,
    map_labels,
    weighted_f_measure,
)
from .features import FEATURE_NAMES, burg_ar, channel_features, extract_features
from .models import KINDS, Model, predict, train
from .signals import CHANNELS, make_windows, preprocess, resample_linear

__all__ = [
    "CHANNELS",
    "EvalReport",
    "FEATURE_NAMES",
    "FeatureTable",
    "KINDS",
    "Model",
    "Scheme",
    "burg_ar",
    "channel_features",
    "cross_validate",
    "extract_features",
    "features_from_log",
    "make_windows",
    "majority_vote",
    "map_labels",
    "predict",
    "preprocess",
    "read_features",
    "resample_linear",
    "simulate_users",
    "train",
    "weighted_f_measure",
    "write_features",
]
