"""Alternating least squares factorization of the sparse depth matrix.

A well u and a top i each get a rank-f latent vector; the predicted
normalized depth is their dot product. Fitting alternates exact ridge
solves: holding the top vectors fixed, every observed well's vector is the
minimizer of the squared residuals over that well's picks plus an L2
penalty, and then the tops are updated symmetrically. Because each
half-step minimizes a convex quadratic exactly, the regularized loss is
non-increasing after every half-step.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import atomic_writer
from .dataset import SparsePicks, TopsDataset
from .errors import EmptyInputError, IndexOutOfRangeError, SingularSystemWarning

# Relative eigenvalue cutoff for rank-deficient unregularized solves.
RANK_RCOND = 1e-10


@dataclass(frozen=True)
class AlsConfig:
    """Hyperparameters of one factorization run.

    lam is the L2 penalty weight applied once per active well/top vector.
    """

    factors: int
    iterations: int
    lam: float
    seed: int

    def __post_init__(self) -> None:
        if self.factors < 1:
            raise ValueError(f"factors must be >= 1, got {self.factors}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")


@dataclass(frozen=True)
class LatentModel:
    """Fitted (or freshly initialized) latent vectors.

    P rows are per-well vectors, Q rows are per-top vectors. Rows for wells
    or tops never seen in training keep their random initialization.
    loss_trace, when requested at fit time, holds the regularized loss
    after every half-step (two entries per iteration).
    """

    P: np.ndarray
    Q: np.ndarray
    config: AlsConfig
    final_loss: float
    loss_trace: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        self.P.flags.writeable = False
        self.Q.flags.writeable = False

    @property
    def n_wells(self) -> int:
        return self.P.shape[0]

    @property
    def n_tops(self) -> int:
        return self.Q.shape[0]


def init_model(ds_shape: tuple[int, int], cfg: AlsConfig) -> LatentModel:
    """Seeded uniform [0, 1) initialization of both factor matrices.

    The well matrix is drawn before the top matrix from a single PCG64
    stream, so a given (shape, seed) pair always yields bit-identical
    factors.
    """
    n_wells, n_tops = ds_shape
    if n_wells < 1 or n_tops < 1:
        raise ValueError(f"dataset shape must be at least 1x1, got {ds_shape}")
    rng = np.random.default_rng(cfg.seed)
    P = rng.random((n_wells, cfg.factors))
    Q = rng.random((n_tops, cfg.factors))
    return LatentModel(P=P, Q=Q, config=cfg, final_loss=math.nan)


def predict(model: LatentModel, u: int, i: int) -> float:
    """Predicted normalized depth for one (well, top) cell."""
    if not (0 <= u < model.n_wells):
        raise IndexOutOfRangeError(f"well index {u} outside [0, {model.n_wells})")
    if not (0 <= i < model.n_tops):
        raise IndexOutOfRangeError(f"top index {i} outside [0, {model.n_tops})")
    return float(model.P[u] @ model.Q[i])


def predict_many(model: LatentModel, wells: np.ndarray, tops: np.ndarray) -> np.ndarray:
    """Vectorized predict over parallel index arrays."""
    wells = np.asarray(wells)
    tops = np.asarray(tops)
    if wells.size and (wells.min() < 0 or wells.max() >= model.n_wells):
        raise IndexOutOfRangeError("well index outside registry")
    if tops.size and (tops.min() < 0 or tops.max() >= model.n_tops):
        raise IndexOutOfRangeError("top index outside registry")
    return np.einsum("kf,kf->k", model.P[wells], model.Q[tops])


def _loss_arrays(P: np.ndarray, Q: np.ndarray, train: SparsePicks, lam: float) -> float:
    resid = train.depths - np.einsum("kf,kf->k", P[train.wells], Q[train.tops])
    penalty = 0.0
    if lam > 0:
        active_wells = np.unique(train.wells)
        active_tops = np.unique(train.tops)
        penalty = lam * (float(np.sum(P[active_wells] ** 2)) + float(np.sum(Q[active_tops] ** 2)))
    return float(resid @ resid) + penalty


def loss(model: LatentModel, train: SparsePicks) -> float:
    """Regularized squared-error loss over the training picks.

    The L2 penalty counts each active (observed-in-train) well and top
    vector exactly once.
    """
    return _loss_arrays(model.P, model.Q, train, model.config.lam)


class _BlockSolver:
    """Precomputed segment structure for one side's ridge updates.

    Picks are sorted by entity index once; each half-step then gathers the
    other side's rows, accumulates per-entity normal matrices with a single
    segmented reduction, and batch-solves the f x f systems.
    """

    def __init__(self, entity_idx: np.ndarray, other_idx: np.ndarray, depths: np.ndarray):
        order = np.argsort(entity_idx, kind="stable")
        sorted_entities = entity_idx[order]
        self.active, seg_starts = np.unique(sorted_entities, return_index=True)
        self.seg_starts = seg_starts
        self.other = other_idx[order]
        self.depths = depths[order]

    def update(self, target: np.ndarray, other: np.ndarray, lam: float) -> None:
        f = other.shape[1]
        rows = other[self.other]
        gram = rows[:, :, None] * rows[:, None, :]
        A = np.add.reduceat(gram.reshape(-1, f * f), self.seg_starts, axis=0).reshape(-1, f, f)
        b = np.add.reduceat(rows * self.depths[:, None], self.seg_starts, axis=0)
        if lam > 0:
            # ridge shift makes every system symmetric positive definite
            A[:, np.arange(f), np.arange(f)] += lam
            solved = np.linalg.solve(A, b[:, :, None])[:, :, 0]
        else:
            # lam = 0: systems can be rank deficient (entity with fewer
            # picks than factors); the truncated-eigenvalue minimum-norm
            # solution is still an exact minimizer of the half-step, so
            # the loss stays non-increasing.
            eigvals, eigvecs = np.linalg.eigh(A)
            cutoff = RANK_RCOND * np.maximum(eigvals[:, -1:], 0.0)
            keep = eigvals > cutoff
            if not np.all(keep):
                warnings.warn(
                    "rank-deficient normal equations at lam=0; using the "
                    "minimum-norm least-squares solution",
                    SingularSystemWarning,
                    stacklevel=3,
                )
            inv = np.where(keep, 1.0 / np.where(keep, eigvals, 1.0), 0.0)
            proj = np.einsum("nfj,nf->nj", eigvecs, b)
            solved = np.einsum("nfj,nj->nf", eigvecs, inv * proj)
        target[self.active] = solved


def fit(ds_train: SparsePicks, cfg: AlsConfig, track_loss: bool = False) -> LatentModel:
    """Run exactly cfg.iterations alternation cycles on the training picks.

    Each cycle updates all observed wells first (tops held fixed), then all
    observed tops. Deterministic for a fixed seed.
    """
    if len(ds_train) == 0:
        raise EmptyInputError("fit requires at least one training pick")

    init = init_model((ds_train.n_wells, ds_train.n_tops), cfg)
    P = init.P.copy()
    Q = init.Q.copy()

    well_solver = _BlockSolver(ds_train.wells, ds_train.tops, ds_train.depths)
    top_solver = _BlockSolver(ds_train.tops, ds_train.wells, ds_train.depths)

    trace: list[float] = []
    for _ in range(cfg.iterations):
        well_solver.update(P, Q, cfg.lam)
        if track_loss:
            trace.append(_loss_arrays(P, Q, ds_train, cfg.lam))
        top_solver.update(Q, P, cfg.lam)
        if track_loss:
            trace.append(_loss_arrays(P, Q, ds_train, cfg.lam))

    final = trace[-1] if track_loss else _loss_arrays(P, Q, ds_train, cfg.lam)
    return LatentModel(
        P=P,
        Q=Q,
        config=cfg,
        final_loss=final,
        loss_trace=tuple(trace) if track_loss else None,
    )


def write_model_csv(model: LatentModel, ds: TopsDataset, path: str | Path) -> None:
    """Dump latent factors for inspection: one row per well and per top."""
    cols = ["entity_kind", "entity_id"] + [f"f{j}" for j in range(model.config.factors)]
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for u, well in enumerate(ds.wells):
            writer.writerow(["well", well.well_id] + [repr(float(v)) for v in model.P[u]])
        for i, top_id in enumerate(ds.top_ids):
            writer.writerow(["top", top_id] + [repr(float(v)) for v in model.Q[i]])
