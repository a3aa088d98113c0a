"""Cross-validation fold plans and the train-fraction sweep schedule.

Two plan kinds exist. Random plans shuffle picks and deal them round-robin
into validation folds. Spatially blocked plans tile the well map with
square blocks and deal whole blocks into folds, so validation wells are
geographically separated from training wells. In both kinds a pick whose
top has only one pick in the whole dataset is never held out: it joins
every fold's training set, because a factorization cannot predict a top it
has never seen.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import atomic_writer
from .dataset import TopsDataset
from .errors import DegenerateExtentError, InvalidPlanError
from .seeding import derive_seed

DEFAULT_FOLDS = 4
DEFAULT_FRACTIONS = (0.01, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.99)
DEFAULT_RESTARTS = 100


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every pick to exactly one validation fold.

    assignment[k] is the fold whose validation set holds pick k, or -1 for
    singleton-top picks, which instead appear in every fold's training set.
    """

    n_folds: int
    assignment: np.ndarray
    singleton: np.ndarray
    kind: str
    seed: int
    block_size: float | None = None

    def __post_init__(self) -> None:
        self.assignment.flags.writeable = False
        self.singleton.flags.writeable = False

    @property
    def n_picks(self) -> int:
        return int(self.assignment.shape[0])

    @property
    def singleton_picks(self) -> np.ndarray:
        return np.flatnonzero(self.singleton)

    def validation_indices(self, fold: int) -> np.ndarray:
        self._check_fold(fold)
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        self._check_fold(fold)
        return np.flatnonzero(self.assignment != fold)

    def _check_fold(self, fold: int) -> None:
        if not (0 <= fold < self.n_folds):
            raise InvalidPlanError(f"fold {fold} outside [0, {self.n_folds})")


def _singleton_mask(ds: TopsDataset) -> np.ndarray:
    return ds.picks_per_top()[ds.pick_tops] == 1


def random_folds(ds: TopsDataset, n_folds: int = DEFAULT_FOLDS, seed: int = 0) -> FoldPlan:
    """Uniform plan: eligible picks shuffled and dealt round-robin.

    Validation set sizes differ by at most one.
    """
    if n_folds < 2:
        raise InvalidPlanError(f"need at least 2 folds, got {n_folds}")
    singleton = _singleton_mask(ds)
    eligible = np.flatnonzero(~singleton)
    rng = np.random.default_rng(seed)
    order = rng.permutation(eligible)
    assignment = np.full(ds.n_picks, -1, dtype=np.int32)
    assignment[order] = np.arange(order.size, dtype=np.int32) % n_folds
    return FoldPlan(n_folds=n_folds, assignment=assignment, singleton=singleton, kind="random", seed=seed)


def auto_block_size(ds: TopsDataset) -> float:
    """Default block side: a quarter of the shorter bounding-box side.

    Falls back to the longer side when wells are collinear.
    """
    xy = ds.well_xy()
    extent = xy.max(axis=0) - xy.min(axis=0)
    sides = extent[extent > 0]
    if sides.size == 0:
        raise DegenerateExtentError("all wells share one location; no spatial extent to block")
    return float(sides.min()) / 4.0


def spatial_folds(
    ds: TopsDataset,
    n_folds: int = DEFAULT_FOLDS,
    block_size: float | None = None,
    seed: int = 0,
) -> FoldPlan:
    """Blocked plan: square tiles of wells dealt round-robin into folds.

    Every pick of a well follows its well's block, so no well straddles
    folds. Raises InvalidPlanError when a fold would end up with an empty
    training set (e.g. a single occupied block).
    """
    if n_folds < 2:
        raise InvalidPlanError(f"need at least 2 folds, got {n_folds}")
    xy = ds.well_xy()
    if np.all(xy == xy[0]):
        raise DegenerateExtentError("all wells share one location; no spatial extent to block")
    if block_size is None:
        block_size = auto_block_size(ds)
    if not block_size > 0:
        raise InvalidPlanError(f"block_size must be positive, got {block_size}")

    origin = xy.min(axis=0)
    blocks = np.floor((xy - origin) / block_size).astype(np.int64)
    keys = [tuple(b) for b in blocks]
    occupied = sorted(set(keys))

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(occupied))
    block_fold = {occupied[j]: int(order[j] % n_folds) for j in range(len(occupied))}
    well_fold = np.array([block_fold[k] for k in keys], dtype=np.int32)

    singleton = _singleton_mask(ds)
    assignment = well_fold[ds.pick_wells].astype(np.int32)
    assignment[singleton] = -1

    plan = FoldPlan(
        n_folds=n_folds,
        assignment=assignment,
        singleton=singleton,
        kind="spatial_block",
        seed=seed,
        block_size=float(block_size),
    )
    for fold in range(n_folds):
        if plan.train_indices(fold).size == 0:
            raise InvalidPlanError(
                f"fold {fold} would have an empty training set; use a smaller block_size"
            )
    return plan


def train_fraction_schedule(
    fractions: Sequence[float] | None = None,
    restarts: int = DEFAULT_RESTARTS,
    base_seed: int = 0,
) -> list[tuple[float, int]]:
    """Cross product of train fractions and restart seeds.

    Each (fraction, restart) entry carries its own derived seed so any
    single run can be reproduced in isolation.
    """
    if fractions is None:
        fractions = DEFAULT_FRACTIONS
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    for f in fractions:
        if not (0.0 < f < 1.0):
            raise ValueError(f"fractions must lie in (0, 1), got {f}")
    return [
        (float(f), derive_seed("sweep", base_seed, fi, ri))
        for fi, f in enumerate(fractions)
        for ri in range(restarts)
    ]


def split_fraction(n_picks: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform train/test split of pick indices at the given train fraction.

    Both sides are kept non-empty; the singleton-top rule deliberately does
    not apply here (the sweep is a plain split, not a fold plan).
    """
    if n_picks < 2:
        raise InvalidPlanError("need at least 2 picks to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_picks)
    n_train = int(round(fraction * n_picks))
    n_train = min(max(n_train, 1), n_picks - 1)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def write_plan_csv(plan: FoldPlan, ds: TopsDataset, path: str | Path) -> None:
    """Dump pick-level fold membership: one row per (pick, fold) pair."""
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(["well_id", "top_id", "fold", "role"])
        for fold in range(plan.n_folds):
            validate = plan.assignment == fold
            for k in range(plan.n_picks):
                if plan.singleton[k]:
                    role = "singleton_train_all"
                elif validate[k]:
                    role = "validate"
                else:
                    role = "train"
                writer.writerow(
                    [
                        ds.wells[ds.pick_wells[k]].well_id,
                        ds.top_ids[ds.pick_tops[k]],
                        fold + 1,
                        role,
                    ]
                )
