"""Formation-top depth recommender.

Predicts the subsea depth of unpicked formation tops from the tops already
picked in a field, by low-rank factorization of the sparse well x top
depth matrix, and ships the evaluation harness used to measure it: depth
normalization, random and spatially blocked cross-validation, a
Green's-function spline baseline, hyperparameter grid search, a
train-fraction sweep, and MAE/RMSE reporting.
"""

from .als import AlsConfig, LatentModel, fit, init_model, loss, predict, predict_many
from .dataset import (
    SparsePicks,
    TopPick,
    TopsDataset,
    WellHeader,
    build_dataset,
    denormalize,
    ingest,
    load_dataset,
    to_tvd,
    to_tvdss,
)
from .hyperopt import GridResult, GridSpec, enumerate_grid, grid_search
from .metrics import ErrorReport, ErrorRow, PredictionSet, build_report, mae, method_difference, per_well_report, rmse
from .spline import SplineModel, greens_fn, spline_cv, spline_fit, spline_predict
from .validation import FoldPlan, random_folds, spatial_folds, split_fraction, train_fraction_schedule

__version__ = "0.1.0"

__all__ = [
    "AlsConfig",
    "ErrorReport",
    "ErrorRow",
    "FoldPlan",
    "GridResult",
    "GridSpec",
    "LatentModel",
    "PredictionSet",
    "SparsePicks",
    "SplineModel",
    "TopPick",
    "TopsDataset",
    "WellHeader",
    "build_dataset",
    "build_report",
    "denormalize",
    "enumerate_grid",
    "fit",
    "greens_fn",
    "grid_search",
    "ingest",
    "init_model",
    "load_dataset",
    "loss",
    "mae",
    "method_difference",
    "per_well_report",
    "predict",
    "predict_many",
    "random_folds",
    "rmse",
    "spatial_folds",
    "spline_cv",
    "spline_fit",
    "spline_predict",
    "split_fraction",
    "to_tvd",
    "to_tvdss",
    "train_fraction_schedule",
]
