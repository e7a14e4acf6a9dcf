"""Supervised learning: CART trees, random forests, SMOTE, cross-validated grid search."""

from .metrics import MANAGEMENT, REGULAR, flatten_labels, macro_f1, random_baseline
from .model_selection import (
    GridResult,
    fit_model,
    grid_points,
    grid_search,
    holdout_evaluate,
    naive_grid_search,
    full_grid,
    stratified_kfold,
)
from .smote import smote
from .trees import NotFittedError, TrainedForest, TrainedTree, train_forest, train_tree

__all__ = [
    "MANAGEMENT", "REGULAR", "flatten_labels", "macro_f1", "random_baseline",
    "GridResult", "fit_model", "grid_points", "grid_search", "holdout_evaluate",
    "naive_grid_search", "full_grid", "stratified_kfold", "smote",
    "NotFittedError", "TrainedForest", "TrainedTree", "train_forest", "train_tree",
]
