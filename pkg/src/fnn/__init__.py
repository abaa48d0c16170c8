"""Regularized fuzzy neural network for SQL-injection detection."""

from .dataset import Dataset, DataError, load_csv, standardize, stratified_split
from .evaluation import benchmark, compute_metrics, evaluate_model, grid_search, repeated_runs
from .fuzzification import FuzzyPartition, GaussianMF, build_partition, fuzzify
from .logic import BoundaryMode, LogicNeuron, NeuronKind, Uninorm
from .network import (
    ModelConfig,
    TrainedModel,
    TrainingError,
    load_model,
    predict,
    predict_batch,
    score,
    score_batch,
    train,
)
from .rules import FuzzyRule, extract_rules, render_rule
from .selection import bolasso_select, lars_lasso_path

__all__ = [
    "BoundaryMode",
    "DataError",
    "Dataset",
    "FuzzyPartition",
    "FuzzyRule",
    "GaussianMF",
    "LogicNeuron",
    "ModelConfig",
    "NeuronKind",
    "TrainedModel",
    "TrainingError",
    "Uninorm",
    "benchmark",
    "bolasso_select",
    "build_partition",
    "compute_metrics",
    "evaluate_model",
    "extract_rules",
    "fuzzify",
    "grid_search",
    "lars_lasso_path",
    "load_csv",
    "load_model",
    "predict",
    "predict_batch",
    "render_rule",
    "repeated_runs",
    "score",
    "score_batch",
    "standardize",
    "stratified_split",
    "train",
]
