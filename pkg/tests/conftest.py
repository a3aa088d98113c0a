"""Shared fixtures: synthetic datasets and the optional real datasets.

The reproduction tests need the public Teapot Dome / Mannville tops data
converted to this package's CSV schema. Point TOPSREC_TEAPOT_WELLS /
TOPSREC_TEAPOT_PICKS (and the MANNVILLE pair) at those files, or drop
them under tests/data/; without them those tests skip.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np
import pytest

from topsrec.dataset import TopsDataset, WellHeader, build_dataset, load_dataset, TopPick

DATA_DIR = Path(__file__).parent / "data"


def synth_dataset(
    n_wells: int = 30,
    n_tops: int = 8,
    fill: float = 0.6,
    seed: int = 0,
    singleton_top: bool = False,
    noise: float = 0.0,
) -> TopsDataset:
    """Rank-2 synthetic field: plausible depths, distinct well locations.

    Every top is guaranteed at least two picks unless singleton_top asks
    for one extra top with exactly one pick.
    """
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.5, 1.5, (n_wells, 2))
    B = rng.uniform(0.5, 1.5, (n_tops, 2))
    tvdss = 800.0 * (A @ B.T)
    if noise:
        tvdss = tvdss + rng.normal(0, noise, tvdss.shape)

    headers = []
    for u in range(n_wells):
        ground = float(rng.uniform(1400, 1600))
        headers.append(
            WellHeader(
                well_id=f"W{u:03d}",
                datum_elev=ground + float(rng.uniform(3, 12)),
                ground_elev=ground,
                x=float(rng.uniform(0, 10_000)),
                y=float(rng.uniform(0, 8_000)),
            )
        )

    picks: list[TopPick] = []
    mask = rng.random((n_wells, n_tops)) < fill
    for i in range(n_tops):  # ensure >= 2 picks per top
        present = np.flatnonzero(mask[:, i])
        if present.size < 2:
            mask[rng.choice(n_wells, size=2, replace=False), i] = True
    for u in range(n_wells):
        if not mask[u].any():
            mask[u, int(rng.integers(n_tops))] = True
        for i in np.flatnonzero(mask[u]):
            md = tvdss[u, i] + headers[u].datum_elev
            picks.append(TopPick(f"W{u:03d}", f"T{i:02d}", float(md)))
    if singleton_top:
        picks.append(TopPick("W000", "T_SINGLE", float(tvdss[0].mean() + headers[0].datum_elev)))
    return build_dataset(headers, picks)


def write_dataset_csvs(ds: TopsDataset, out_dir: Path) -> tuple[Path, Path]:
    """Emit a dataset back out as schema CSVs (for CLI tests)."""
    wells_csv = out_dir / "wells.csv"
    picks_csv = out_dir / "picks.csv"
    with wells_csv.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["well_id", "datum_elev_m", "ground_elev_m", "x_m", "y_m"])
        for well in ds.wells:
            w.writerow([well.well_id, well.datum_elev, well.ground_elev, well.x, well.y])
    tvdss = ds.tvdss()
    with picks_csv.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["well_id", "top_id", "md_m"])
        for k in range(ds.n_picks):
            well = ds.wells[ds.pick_wells[k]]
            w.writerow([well.well_id, ds.top_ids[ds.pick_tops[k]], tvdss[k] + well.datum_elev])
    return wells_csv, picks_csv


@pytest.fixture()
def small_ds() -> TopsDataset:
    return synth_dataset(n_wells=30, n_tops=8, fill=0.6, seed=0)


@pytest.fixture()
def small_csvs(tmp_path) -> tuple[Path, Path]:
    return write_dataset_csvs(synth_dataset(n_wells=30, n_tops=8, fill=0.6, seed=0), tmp_path)


def _real_dataset(prefix: str) -> TopsDataset:
    wells = os.environ.get(f"TOPSREC_{prefix}_WELLS", str(DATA_DIR / f"{prefix.lower()}_wells.csv"))
    picks = os.environ.get(f"TOPSREC_{prefix}_PICKS", str(DATA_DIR / f"{prefix.lower()}_picks.csv"))
    if not (os.path.exists(wells) and os.path.exists(picks)):
        pytest.skip(
            f"{prefix.title()} dataset not available; set TOPSREC_{prefix}_WELLS / "
            f"TOPSREC_{prefix}_PICKS or place files under tests/data/"
        )
    return load_dataset(wells, picks)


@pytest.fixture(scope="session")
def teapot_ds() -> TopsDataset:
    return _real_dataset("TEAPOT")


@pytest.fixture(scope="session")
def mannville_ds() -> TopsDataset:
    return _real_dataset("MANNVILLE")
