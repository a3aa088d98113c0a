"""Ingestion and normalization of formation-top pick data.

Input is two CSV files: a well-header table (datum elevation, ground
elevation, surface location per well) and a pick table (measured depth to a
named top in a named well). Measured depths are converted to true vertical
depth below ground, then to depth below sea level, and finally min-shifted
so every stored depth is non-negative. The result is an immutable sparse
well x top matrix plus the registries needed to map indices back to ids.
"""

from __future__ import annotations

import csv
import hashlib
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DataQualityWarning,
    DataValidationError,
    DuplicatePickError,
    DuplicateWellError,
    EmptyDatasetError,
    MissingColumnError,
    NonFiniteValueError,
    UnknownWellError,
)

WELLS_COLUMNS = ("well_id", "datum_elev_m", "ground_elev_m", "x_m", "y_m")
PICKS_COLUMNS = ("well_id", "top_id", "md_m")

# Datum normally sits at or slightly above ground; allow modest inversions
# (e.g. rigs on cut pads) before flagging.
DATUM_SANITY_MARGIN_M = 50.0


@dataclass(frozen=True)
class WellHeader:
    """One well: its id, elevations in meters, and surface location."""

    well_id: str
    datum_elev: float
    ground_elev: float
    x: float
    y: float


@dataclass(frozen=True)
class TopPick:
    """One pick: measured depth in meters to a top in a well."""

    well_id: str
    top_id: str
    md: float


def to_tvd(md: float, datum_elev: float, ground_elev: float) -> float:
    """True vertical depth below ground from measured depth.

    The rig datum height above ground (datum_elev - ground_elev) is
    subtracted from the along-hole depth; wells are assumed vertical.
    """
    return md - (datum_elev - ground_elev)


def to_tvdss(tvd: float, ground_elev: float) -> float:
    """Depth below sea level from depth below ground.

    Negative values are above sea level.
    """
    return tvd - ground_elev


def _read_csv_rows(path: str | Path, required: Sequence[str]) -> list[dict[str, str]]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise MissingColumnError(f"{path}: file is empty, expected header {','.join(required)}")
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumnError(f"{path}: missing required column(s) {', '.join(missing)}")
        extra = [c for c in header if c not in required]
        if extra:
            warnings.warn(
                f"{path}: ignoring extra column(s) {', '.join(extra)}",
                DataQualityWarning,
                stacklevel=3,
            )
        return list(reader)


def _parse_float(raw: str, path: str | Path, row: int, column: str) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise NonFiniteValueError(f"{path}: row {row}, column {column}: not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise NonFiniteValueError(f"{path}: row {row}, column {column}: non-finite value {raw!r}")
    return value


def ingest(wells_csv: str | Path, picks_csv: str | Path) -> tuple[list[WellHeader], list[TopPick]]:
    """Load and validate the raw header and pick tables.

    Row numbers in error messages are 1-based and count the header line, so
    the first data row is row 2. Pick rows naming a well absent from the
    header table, duplicate (well, top) pairs, and non-finite numbers are
    all rejected with the offending row identified.
    """
    headers: list[WellHeader] = []
    seen_wells: set[str] = set()
    for n, rec in enumerate(_read_csv_rows(wells_csv, WELLS_COLUMNS), start=2):
        well_id = (rec["well_id"] or "").strip()
        if not well_id:
            raise DataValidationError(f"{wells_csv}: row {n}: empty well_id")
        if well_id in seen_wells:
            raise DuplicateWellError(f"{wells_csv}: row {n}: duplicate well_id {well_id!r}")
        seen_wells.add(well_id)
        datum = _parse_float(rec["datum_elev_m"], wells_csv, n, "datum_elev_m")
        ground = _parse_float(rec["ground_elev_m"], wells_csv, n, "ground_elev_m")
        x = _parse_float(rec["x_m"], wells_csv, n, "x_m")
        y = _parse_float(rec["y_m"], wells_csv, n, "y_m")
        if datum < ground - DATUM_SANITY_MARGIN_M:
            warnings.warn(
                f"{wells_csv}: row {n}: well {well_id!r} datum_elev_m {datum} sits more than "
                f"{DATUM_SANITY_MARGIN_M:g} m below ground_elev_m {ground}",
                DataQualityWarning,
                stacklevel=2,
            )
        headers.append(WellHeader(well_id, datum, ground, x, y))

    picks: list[TopPick] = []
    seen_pairs: set[tuple[str, str]] = set()
    for n, rec in enumerate(_read_csv_rows(picks_csv, PICKS_COLUMNS), start=2):
        well_id = (rec["well_id"] or "").strip()
        top_id = (rec["top_id"] or "").strip()
        if not well_id or not top_id:
            raise DataValidationError(f"{picks_csv}: row {n}: empty well_id or top_id")
        if well_id not in seen_wells:
            raise UnknownWellError(f"{picks_csv}: row {n}: unknown well {well_id!r}")
        pair = (well_id, top_id)
        if pair in seen_pairs:
            raise DuplicatePickError(f"{picks_csv}: row {n}: duplicate pick ({well_id!r}, {top_id!r})")
        seen_pairs.add(pair)
        md = _parse_float(rec["md_m"], picks_csv, n, "md_m")
        if md < 0:
            raise DataValidationError(f"{picks_csv}: row {n}: negative measured depth {md}")
        picks.append(TopPick(well_id, top_id, md))

    return headers, picks


@dataclass(frozen=True)
class SparsePicks:
    """A set of observed (well, top, depth) triples against a fixed shape.

    Depths are in the dataset's normalized (min-shifted) frame unless noted
    otherwise by the producer.
    """

    wells: np.ndarray
    tops: np.ndarray
    depths: np.ndarray
    n_wells: int
    n_tops: int

    def __post_init__(self) -> None:
        for arr in (self.wells, self.tops, self.depths):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return int(self.wells.shape[0])


@dataclass(frozen=True)
class TopsDataset:
    """Immutable sparse depth matrix with well/top registries.

    ``pick_wells[k]``, ``pick_tops[k]`` and ``depths[k]`` describe the k-th
    observed pick in ingestion order; ``depths`` holds normalized values
    (subsea depth minus ``tvdss_min``), all >= 0.
    """

    wells: tuple[WellHeader, ...]
    top_ids: tuple[str, ...]
    pick_wells: np.ndarray
    pick_tops: np.ndarray
    depths: np.ndarray
    tvdss_min: float
    well_index: dict[str, int] = field(repr=False)
    top_index: dict[str, int] = field(repr=False)

    def __post_init__(self) -> None:
        for arr in (self.pick_wells, self.pick_tops, self.depths):
            arr.flags.writeable = False

    @property
    def n_wells(self) -> int:
        return len(self.wells)

    @property
    def n_tops(self) -> int:
        return len(self.top_ids)

    @property
    def n_picks(self) -> int:
        return int(self.depths.shape[0])

    def denormalize(self, d):
        """Map normalized depth(s) back to subsea depth (TVDSS meters)."""
        return d + self.tvdss_min

    def tvdss(self) -> np.ndarray:
        """Subsea depths of all picks, in ingestion order."""
        return self.depths + self.tvdss_min

    def well_xy(self) -> np.ndarray:
        """(n_wells, 2) array of surface locations."""
        return np.array([(w.x, w.y) for w in self.wells], dtype=float)

    def picks_per_top(self) -> np.ndarray:
        return np.bincount(self.pick_tops, minlength=self.n_tops)

    def picks_per_well(self) -> np.ndarray:
        return np.bincount(self.pick_wells, minlength=self.n_wells)

    def unconstrained_tops(self) -> tuple[str, ...]:
        """Tops present in the registry but with zero picks."""
        counts = self.picks_per_top()
        return tuple(t for t, c in zip(self.top_ids, counts) if c == 0)

    def all_picks(self) -> SparsePicks:
        return self.pick_subset(np.arange(self.n_picks))

    def pick_subset(self, indices: np.ndarray) -> SparsePicks:
        """View of the chosen picks (normalized depths) as a SparsePicks."""
        idx = np.asarray(indices, dtype=np.intp)
        return SparsePicks(
            wells=self.pick_wells[idx].copy(),
            tops=self.pick_tops[idx].copy(),
            depths=self.depths[idx].copy(),
            n_wells=self.n_wells,
            n_tops=self.n_tops,
        )

    def fingerprint(self) -> str:
        """Content hash of registries and picks, for run manifests."""
        h = hashlib.blake2b(digest_size=16)
        for w in self.wells:
            h.update(f"{w.well_id},{w.datum_elev!r},{w.ground_elev!r},{w.x!r},{w.y!r};".encode())
        h.update("|".join(self.top_ids).encode())
        h.update(self.pick_wells.tobytes())
        h.update(self.pick_tops.tobytes())
        h.update(self.depths.tobytes())
        return h.hexdigest()


def build_dataset(
    headers: Sequence[WellHeader],
    picks: Sequence[TopPick],
    extra_tops: Iterable[str] = (),
) -> TopsDataset:
    """Assemble the normalized sparse matrix from validated tables.

    Registry order is deterministic: wells in header-table order, tops in
    order of first appearance in the pick table. ``extra_tops`` appends
    registry entries for tops known to exist but absent from the picks
    (they stay unconstrained and are never used in fitting).
    """
    if not picks:
        raise EmptyDatasetError("no picks: cannot build a dataset")

    well_index = {w.well_id: u for u, w in enumerate(headers)}
    top_index: dict[str, int] = {}
    for p in picks:
        if p.top_id not in top_index:
            top_index[p.top_id] = len(top_index)
    for t in extra_tops:
        if t not in top_index:
            top_index[t] = len(top_index)

    u_idx = np.empty(len(picks), dtype=np.int32)
    i_idx = np.empty(len(picks), dtype=np.int32)
    tvdss = np.empty(len(picks), dtype=np.float64)
    for k, p in enumerate(picks):
        w = headers[well_index[p.well_id]]
        u_idx[k] = well_index[p.well_id]
        i_idx[k] = top_index[p.top_id]
        tvdss[k] = to_tvdss(to_tvd(p.md, w.datum_elev, w.ground_elev), w.ground_elev)

    tvdss_min = float(tvdss.min())
    return TopsDataset(
        wells=tuple(headers),
        top_ids=tuple(top_index),
        pick_wells=u_idx,
        pick_tops=i_idx,
        depths=tvdss - tvdss_min,
        tvdss_min=tvdss_min,
        well_index=well_index,
        top_index=top_index,
    )


def denormalize(d, ds: TopsDataset):
    """Module-level counterpart of TopsDataset.denormalize."""
    return ds.denormalize(d)


def load_dataset(
    wells_csv: str | Path,
    picks_csv: str | Path,
    tops_csv: str | Path | None = None,
) -> TopsDataset:
    """ingest + build in one step; ``tops_csv`` optionally seeds extra tops.

    ``tops_csv`` is a one-column CSV (header ``top_id``) naming registry
    entries to keep even when they have no picks.
    """
    headers, picks = ingest(wells_csv, picks_csv)
    extra: list[str] = []
    if tops_csv is not None:
        for rec in _read_csv_rows(tops_csv, ("top_id",)):
            name = (rec["top_id"] or "").strip()
            if name:
                extra.append(name)
    return build_dataset(headers, picks, extra_tops=extra)
