"""Exhaustive hyperparameter grid search with k-fold scoring.

Every (config, fold) cell is pure and independent: its seed is a stated
hash of (base seed, config ordinal, fold ordinal), so single cells can be
re-run in isolation and the runner may evaluate any number of them
concurrently without changing results.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ._io import atomic_writer
from .als import AlsConfig, fit, predict_many
from .dataset import TopsDataset
from .errors import EmptyInputError
from .metrics import mae, rmse
from .seeding import derive_seed
from .validation import FoldPlan

RANKING_RULE = "min fold-averaged MAE; ties: fewer factors, then fewer iterations, then smaller lambda"


@dataclass(frozen=True)
class GridSpec:
    """Axes of the exhaustive search; defaults span 2,200 combinations."""

    factors: tuple[int, ...] = tuple(range(1, 11))
    iterations: tuple[int, ...] = tuple(range(10, 441, 10))
    lambdas: tuple[float, ...] = (0.001, 0.01, 0.1, 1.0, 10.0)

    def __post_init__(self) -> None:
        if not (self.factors and self.iterations and self.lambdas):
            raise ValueError("grid axes must be non-empty")

    def size(self) -> int:
        return len(self.factors) * len(self.iterations) * len(self.lambdas)


def enumerate_grid(spec: GridSpec) -> list[AlsConfig]:
    """Cartesian product in factors-major, then iterations, then lambda order."""
    return [
        AlsConfig(factors=f, iterations=it, lam=lam, seed=0)
        for f in spec.factors
        for it in spec.iterations
        for lam in spec.lambdas
    ]


@dataclass(frozen=True)
class GridCell:
    """Fold scores for one hyperparameter combination."""

    config: AlsConfig
    fold_mae: tuple[float | None, ...]
    fold_rmse: tuple[float | None, ...]
    avg_mae: float | None
    avg_rmse: float | None


@dataclass(frozen=True)
class GridResult:
    cells: tuple[GridCell, ...]
    best: AlsConfig
    ranking_rule: str = RANKING_RULE


def _rank_key(cell: GridCell) -> tuple:
    cfg = cell.config
    return (cell.avg_mae, cfg.factors, cfg.iterations, cfg.lam)


def select_best(cells: Sequence[GridCell]) -> GridCell:
    scored = [c for c in cells if c.avg_mae is not None]
    if not scored:
        raise EmptyInputError("no grid cell produced any validation predictions")
    return min(scored, key=_rank_key)


def _eval_config(
    ds: TopsDataset, plan: FoldPlan, cfg: AlsConfig, ordinal: int, base_seed: int
) -> GridCell:
    tvdss = ds.tvdss()
    fold_mae: list[float | None] = []
    fold_rmse: list[float | None] = []
    for fold in range(plan.n_folds):
        val_idx = plan.validation_indices(fold)
        if val_idx.size == 0:
            fold_mae.append(None)
            fold_rmse.append(None)
            continue
        cell_cfg = replace(cfg, seed=derive_seed("grid", base_seed, ordinal, fold))
        model = fit(ds.pick_subset(plan.train_indices(fold)), cell_cfg)
        pred = ds.denormalize(predict_many(model, ds.pick_wells[val_idx], ds.pick_tops[val_idx]))
        truth = tvdss[val_idx]
        fold_mae.append(mae(pred, truth))
        fold_rmse.append(rmse(pred, truth))
    scored = [m for m in fold_mae if m is not None]
    return GridCell(
        config=cfg,
        fold_mae=tuple(fold_mae),
        fold_rmse=tuple(fold_rmse),
        avg_mae=float(np.mean(scored)) if scored else None,
        avg_rmse=float(np.mean([r for r in fold_rmse if r is not None])) if scored else None,
    )


_POOL_STATE: dict = {}


def _pool_init(ds: TopsDataset, plan: FoldPlan, configs: list[AlsConfig], base_seed: int) -> None:
    _POOL_STATE["args"] = (ds, plan, configs, base_seed)


def _pool_eval(ordinal: int) -> GridCell:
    ds, plan, configs, base_seed = _POOL_STATE["args"]
    return _eval_config(ds, plan, configs[ordinal], ordinal, base_seed)


def grid_search(
    ds: TopsDataset,
    plan: FoldPlan,
    spec: GridSpec,
    base_seed: int = 0,
    threads: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> GridResult:
    """Score every combination under the plan and pick the best by MAE.

    threads > 1 fans cells out to worker processes; results land in a
    pre-sized table keyed by config ordinal, so concurrency never affects
    the outcome.
    """
    configs = enumerate_grid(spec)
    cells: list[GridCell | None] = [None] * len(configs)
    if threads <= 1:
        for ordinal, cfg in enumerate(configs):
            cells[ordinal] = _eval_config(ds, plan, cfg, ordinal, base_seed)
            if progress:
                progress(ordinal + 1, len(configs))
    else:
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_pool_init, initargs=(ds, plan, configs, base_seed)
        ) as pool:
            done = 0
            for ordinal, cell in zip(range(len(configs)), pool.map(_pool_eval, range(len(configs)))):
                cells[ordinal] = cell
                done += 1
                if progress:
                    progress(done, len(configs))
    filled = [c for c in cells if c is not None]
    return GridResult(cells=tuple(filled), best=select_best(filled).config)


def default_threads() -> int:
    return os.cpu_count() or 1


def write_grid_csv(result: GridResult, path: str | Path) -> None:
    """Full-precision grid table, one row per combination."""
    n_folds = len(result.cells[0].fold_mae) if result.cells else 0
    header = ["factors", "iterations", "lambda", "avg_mae_m", "avg_rmse_m"]
    for k in range(n_folds):
        header += [f"fold{k + 1}_mae", f"fold{k + 1}_rmse"]
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for cell in result.cells:
            row = [
                cell.config.factors,
                cell.config.iterations,
                repr(float(cell.config.lam)),
                "" if cell.avg_mae is None else repr(float(cell.avg_mae)),
                "" if cell.avg_rmse is None else repr(float(cell.avg_rmse)),
            ]
            for m, r in zip(cell.fold_mae, cell.fold_rmse):
                row.append("" if m is None else repr(float(m)))
                row.append("" if r is None else repr(float(r)))
            writer.writerow(row)


def read_grid_csv(path: str | Path) -> list[dict]:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                {
                    "factors": int(rec["factors"]),
                    "iterations": int(rec["iterations"]),
                    "lambda": float(rec["lambda"]),
                    "avg_mae_m": float(rec["avg_mae_m"]) if rec["avg_mae_m"] else None,
                    "avg_rmse_m": float(rec["avg_rmse_m"]) if rec["avg_rmse_m"] else None,
                }
            )
    return rows
