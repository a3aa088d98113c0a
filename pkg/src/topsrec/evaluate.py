"""Runs the factorization under fold plans and train-fraction sweeps.

Everything here returns predictions or error rows in subsea-depth meters;
report shaping lives in metrics.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .als import AlsConfig, LatentModel, fit, predict_many
from .dataset import TopsDataset
from .metrics import PredictionSet, mae, rmse
from .seeding import derive_seed
from .validation import FoldPlan, split_fraction, train_fraction_schedule


def fit_fold(ds: TopsDataset, plan: FoldPlan, fold: int, cfg: AlsConfig) -> LatentModel:
    """Fit on one fold's training picks (seed used exactly as given)."""
    return fit(ds.pick_subset(plan.train_indices(fold)), cfg)


def recommender_cv(ds: TopsDataset, plan: FoldPlan, cfg: AlsConfig) -> PredictionSet:
    """Fit per fold and predict its held-out picks, in subsea meters.

    Fold k trains with seed derive_seed("cv", cfg.seed, k) so folds are
    independent and individually reproducible.
    """
    idx_out = []
    fold_out = []
    pred_out = []
    for fold in range(plan.n_folds):
        model = fit_fold(ds, plan, fold, replace(cfg, seed=derive_seed("cv", cfg.seed, fold)))
        val_idx = plan.validation_indices(fold)
        raw = predict_many(model, ds.pick_wells[val_idx], ds.pick_tops[val_idx])
        idx_out.append(val_idx)
        fold_out.append(np.full(val_idx.size, fold, dtype=np.int32))
        pred_out.append(ds.denormalize(raw))
    pick_index = np.concatenate(idx_out) if idx_out else np.empty(0, dtype=np.intp)
    return PredictionSet(
        method="recommender",
        pick_index=pick_index,
        fold=np.concatenate(fold_out) if fold_out else np.empty(0, dtype=np.int32),
        predicted=np.concatenate(pred_out) if pred_out else np.empty(0, dtype=float),
        actual=ds.tvdss()[pick_index],
    )


def sweep(
    ds: TopsDataset,
    cfg: AlsConfig,
    fractions=None,
    restarts: int = 100,
    base_seed: int = 0,
) -> list[tuple[float, int, float, float]]:
    """Train-fraction sweep: rows of (fraction, restart, mae_m, rmse_m).

    Each schedule entry resamples its train/test split and re-initializes
    the model from its own derived seeds.
    """
    schedule = train_fraction_schedule(fractions, restarts, base_seed)
    tvdss = ds.tvdss()
    rows = []
    for idx, (fraction, entry_seed) in enumerate(schedule):
        restart = idx % restarts
        train_idx, test_idx = split_fraction(ds.n_picks, fraction, derive_seed(entry_seed, "split"))
        model = fit(ds.pick_subset(train_idx), replace(cfg, seed=derive_seed(entry_seed, "fit")))
        pred = ds.denormalize(predict_many(model, ds.pick_wells[test_idx], ds.pick_tops[test_idx]))
        truth = tvdss[test_idx]
        rows.append((fraction, restart, mae(pred, truth), rmse(pred, truth)))
    return rows
