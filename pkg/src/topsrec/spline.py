"""Biharmonic Green's-function spline baseline.

Each formation top gets its own surface: a weighted sum of the 2-D
biharmonic kernel r^2 (ln r - 1) centered on that top's training picks,
plus the training-depth mean as a constant offset. Coordinates are
standardized per axis before kernel evaluation for conditioning, which
also makes predictions exactly translation invariant.

Damping is a ridge penalty on the kernel weights, solved in the
eigenbasis of the (symmetric) Green's matrix: w = V diag(s/(s^2+damping))
V^T d. This keeps the damping=0 limit an exact interpolator and makes the
training residual norm provably non-decreasing in the damping.

Unlike the factorization, a top's surface sees only that top's picks;
a fold where a top has no training picks yields no predictions for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import TopsDataset
from .errors import DuplicateLocationError, EmptyInputError, SingularSystemError
from .metrics import ErrorReport, PredictionSet, build_report
from .validation import FoldPlan

DEFAULT_DAMPING = 1e-10

# Relative eigenvalue threshold below which an undamped system counts as
# singular.
_SINGULAR_RTOL = 1e-12


def greens_fn(r):
    """2-D biharmonic Green's function r^2 (ln r - 1), zero at r = 0."""
    scalar = np.isscalar(r)
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    nz = r > 0
    rv = r[nz]
    out[nz] = rv * rv * (np.log(rv) - 1.0)
    return float(out) if scalar else out


@dataclass(frozen=True)
class SplineModel:
    """Fitted surface for one top: scaled source points and kernel weights."""

    sources: np.ndarray
    weights: np.ndarray
    damping: float
    top_id: str
    center: np.ndarray
    scale: np.ndarray
    mean_depth: float

    def __post_init__(self) -> None:
        for arr in (self.sources, self.weights, self.center, self.scale):
            arr.flags.writeable = False


def _standardize(xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    center = xy.mean(axis=0)
    scale = xy.std(axis=0)
    scale[scale == 0] = 1.0
    return center, scale


def spline_fit(points, damping: float = DEFAULT_DAMPING, top_id: str = "") -> SplineModel:
    """Fit kernel weights to (x, y, depth) triples.

    Exactly coincident locations with equal depths collapse to one source;
    with different depths they are rejected. damping=0 demands a
    non-singular Green's matrix (distinct points) and then interpolates
    the training depths exactly.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] == 0:
        raise EmptyInputError("spline_fit needs a non-empty (n, 3) array of (x, y, depth)")
    if not np.all(np.isfinite(pts)):
        raise ValueError("spline_fit: non-finite coordinate or depth")
    if damping < 0:
        raise ValueError(f"damping must be >= 0, got {damping}")

    seen: dict[tuple[float, float], float] = {}
    keep: list[int] = []
    for k, (x, y, d) in enumerate(pts):
        key = (x, y)
        if key in seen:
            if seen[key] != d:
                raise DuplicateLocationError(
                    f"top {top_id or '?'}: two depths ({seen[key]}, {d}) at location {key}"
                )
            continue
        seen[key] = d
        keep.append(k)
    pts = pts[keep]

    xy = pts[:, :2]
    depths = pts[:, 2]
    center, scale = _standardize(xy)
    sources = (xy - center) / scale

    mean_depth = float(depths.mean())
    resid = depths - mean_depth

    diff = sources[:, None, :] - sources[None, :, :]
    G = greens_fn(np.hypot(diff[..., 0], diff[..., 1]))

    if np.max(np.abs(resid)) == 0.0:
        weights = np.zeros(len(resid))
    else:
        eigvals, eigvecs = np.linalg.eigh(G)
        if damping == 0.0 and np.min(np.abs(eigvals)) <= _SINGULAR_RTOL * np.max(np.abs(eigvals)):
            raise SingularSystemError(
                f"top {top_id or '?'}: singular Green's matrix at damping=0"
            )
        shrink = eigvals / (eigvals**2 + damping)
        weights = eigvecs @ (shrink * (eigvecs.T @ resid))

    return SplineModel(
        sources=sources,
        weights=weights,
        damping=float(damping),
        top_id=top_id,
        center=center,
        scale=scale,
        mean_depth=mean_depth,
    )


def spline_predict(model: SplineModel, x, y):
    """Evaluate the surface at query location(s), in depth meters."""
    scalar = np.isscalar(x) and np.isscalar(y)
    qx = (np.atleast_1d(np.asarray(x, dtype=float)) - model.center[0]) / model.scale[0]
    qy = (np.atleast_1d(np.asarray(y, dtype=float)) - model.center[1]) / model.scale[1]
    dx = qx[:, None] - model.sources[None, :, 0]
    dy = qy[:, None] - model.sources[None, :, 1]
    K = greens_fn(np.hypot(dx, dy))
    pred = model.mean_depth + K @ model.weights
    return float(pred[0]) if scalar else pred


def training_residual(model: SplineModel, points) -> float:
    """Euclidean norm of the fitted surface's error at its training points."""
    pts = np.asarray(points, dtype=float)
    pred = spline_predict(model, pts[:, 0], pts[:, 1])
    return float(np.linalg.norm(pred - pts[:, 2]))


def spline_cv_predictions(ds: TopsDataset, plan: FoldPlan, damping: float = DEFAULT_DAMPING) -> PredictionSet:
    """Per-top, per-fold fit/predict under an existing fold plan.

    Fits on subsea depths at well locations; a top with no training picks
    in a fold contributes no predictions there.
    """
    xy = ds.well_xy()
    tvdss = ds.tvdss()

    idx_out: list[np.ndarray] = []
    fold_out: list[np.ndarray] = []
    pred_out: list[np.ndarray] = []
    for fold in range(plan.n_folds):
        train_idx = plan.train_indices(fold)
        val_idx = plan.validation_indices(fold)
        train_tops = ds.pick_tops[train_idx]
        val_tops = ds.pick_tops[val_idx]
        for i in np.unique(val_tops):
            top_train = train_idx[train_tops == i]
            if top_train.size == 0:
                continue
            top_val = val_idx[val_tops == i]
            wells_train = ds.pick_wells[top_train]
            pts = np.column_stack([xy[wells_train], tvdss[top_train]])
            model = spline_fit(pts, damping=damping, top_id=ds.top_ids[i])
            wells_val = ds.pick_wells[top_val]
            pred = spline_predict(model, xy[wells_val, 0], xy[wells_val, 1])
            idx_out.append(top_val)
            fold_out.append(np.full(top_val.size, fold, dtype=np.int32))
            pred_out.append(np.atleast_1d(pred))

    if idx_out:
        pick_index = np.concatenate(idx_out)
        folds = np.concatenate(fold_out)
        predicted = np.concatenate(pred_out)
    else:
        pick_index = np.empty(0, dtype=np.intp)
        folds = np.empty(0, dtype=np.int32)
        predicted = np.empty(0, dtype=float)
    return PredictionSet(
        method="spline",
        pick_index=pick_index,
        fold=folds,
        predicted=predicted,
        actual=tvdss[pick_index],
    )


def spline_cv(ds: TopsDataset, plan: FoldPlan, damping: float = DEFAULT_DAMPING) -> ErrorReport:
    """Full error report for the spline baseline under a fold plan."""
    return build_report(spline_cv_predictions(ds, plan, damping), ds, plan)
