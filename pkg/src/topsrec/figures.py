"""Matplotlib rendering of the report CSV contents.

Each figure mirrors one emitted report: the error map (per-well errors on
the field map plus error vs picks-per-well), per-top error vs pick count,
the train-fraction sweep curve, and the grid-search heat map. The CSVs
stay the primary interface; these are written next to them for a quick
look.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dataset import TopsDataset
from .hyperopt import GridResult
from .metrics import ErrorReport


def plot_error_map(report: ErrorReport, ds: TopsDataset, path: str | Path) -> None:
    """Per-well MAE on the field map, plus MAE against picks per well."""
    rows = report.scope_rows("well")
    if not rows:
        return
    xs, ys, maes, npicks = [], [], [], []
    counts = ds.picks_per_well()
    for row in rows:
        u = ds.well_index[row.scope_id]
        xs.append(ds.wells[u].x)
        ys.append(ds.wells[u].y)
        maes.append(row.mae)
        npicks.append(counts[u])

    fig, (ax_map, ax_scatter) = plt.subplots(1, 2, figsize=(11, 5))
    sc = ax_map.scatter(xs, ys, c=maes, s=18, cmap="viridis")
    fig.colorbar(sc, ax=ax_map, label="MAE (m)")
    ax_map.set_xlabel("easting (m)")
    ax_map.set_ylabel("northing (m)")
    ax_map.set_title(f"{report.method}: per-well MAE")
    ax_map.set_aspect("equal", adjustable="datalim")

    ax_scatter.scatter(npicks, maes, s=14, alpha=0.6)
    ax_scatter.set_xlabel("picks per well")
    ax_scatter.set_ylabel("MAE (m)")
    ax_scatter.set_yscale("log")
    ax_scatter.set_title("error vs well pick count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_per_top(report: ErrorReport, ds: TopsDataset, path: str | Path) -> None:
    """Cross-fold average error against the number of picks per top."""
    avg_rows = [r for r in report.scope_rows("top") if r.fold is None and r.mae is not None]
    if not avg_rows:
        return
    counts = ds.picks_per_top()
    n = [counts[ds.top_index[r.scope_id]] for r in avg_rows]
    fig, ax = plt.subplots(figsize=(6.5, 5))
    ax.scatter(n, [r.mae for r in avg_rows], s=22, label="MAE", alpha=0.8)
    ax.scatter(n, [r.rmse for r in avg_rows], s=22, label="RMSE", alpha=0.8, marker="^")
    ax.set_xlabel("picks per top")
    ax.set_ylabel("cross-fold average error (m)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title(f"{report.method}: error by top")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows, path: str | Path) -> None:
    """Test MAE against the fraction of picks used in training."""
    if not rows:
        return
    fracs = np.array([r[0] for r in rows])
    maes = np.array([r[2] for r in rows])
    fig, ax = plt.subplots(figsize=(6.5, 5))
    ax.scatter(fracs, maes, s=10, alpha=0.35, label="restarts")
    uniq = np.unique(fracs)
    med = [np.median(maes[fracs == f]) for f in uniq]
    ax.plot(uniq, med, color="C1", marker="o", label="median")
    ax.set_xlabel("fraction of picks used in training")
    ax.set_ylabel("test MAE (m)")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("error vs train fraction")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_grid(result: GridResult, path: str | Path) -> None:
    """Grid-search heat map: fold-averaged MAE at the best lambda."""
    best = result.best
    cells = [c for c in result.cells if c.config.lam == best.lam and c.avg_mae is not None]
    if not cells:
        return
    factors = sorted({c.config.factors for c in cells})
    iters = sorted({c.config.iterations for c in cells})
    grid = np.full((len(factors), len(iters)), np.nan)
    for c in cells:
        grid[factors.index(c.config.factors), iters.index(c.config.iterations)] = c.avg_mae
    fig, ax = plt.subplots(figsize=(8, 4.5))
    im = ax.imshow(grid, aspect="auto", origin="lower", cmap="viridis")
    ax.set_xticks(range(len(iters)))
    ax.set_xticklabels(iters, rotation=90, fontsize=6)
    ax.set_yticks(range(len(factors)))
    ax.set_yticklabels(factors)
    ax.set_xlabel("iterations")
    ax.set_ylabel("latent factors")
    fig.colorbar(im, ax=ax, label="fold-averaged MAE (m)")
    ax.set_title(f"grid at lambda={best.lam:g} (best: f={best.factors}, iters={best.iterations})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
