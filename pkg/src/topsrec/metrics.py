"""Error metrics and the report shapes the experiments emit.

All errors are computed in subsea-depth meters (after denormalization).
Reports carry three row scopes: per-top rows (with per-fold and cross-fold
average values), per-well rows (the error-map source), and per-fold
summaries. Rendered CSV columns are rounded to one decimal for readable
reports; full-precision companion columns make the files round-trippable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._io import atomic_writer
from .dataset import TopsDataset
from .errors import EmptyInputError, KeyMismatchError
from .validation import FoldPlan

AVERAGE = "average"


def mae(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Mean absolute error in meters."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.size == 0:
        raise EmptyInputError("mae over zero predictions")
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    return float(np.mean(np.abs(p - t)))


def rmse(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Root mean squared error in meters."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.size == 0:
        raise EmptyInputError("rmse over zero predictions")
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    return float(np.sqrt(np.mean((p - t) ** 2)))


@dataclass(frozen=True)
class PredictionSet:
    """Held-out predictions from one method, in subsea-depth meters."""

    method: str
    pick_index: np.ndarray
    fold: np.ndarray
    predicted: np.ndarray
    actual: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.pick_index, self.fold, self.predicted, self.actual):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return int(self.pick_index.shape[0])

    def abs_errors(self) -> np.ndarray:
        return np.abs(self.predicted - self.actual)


@dataclass(frozen=True)
class ErrorRow:
    """One report line. fold is None on cross-fold average rows.

    mae/rmse are None when the cell has no predictions (rendered as the
    missing marker, never zero).
    """

    scope: str
    scope_id: str
    fold: int | None
    n_train: int | None
    n_test: int | None
    mae: float | None
    rmse: float | None
    mae_diff: float | None = None
    rmse_diff: float | None = None

    @property
    def key(self) -> tuple[str, str, int | None]:
        return (self.scope, self.scope_id, self.fold)


@dataclass(frozen=True)
class ErrorReport:
    """All rows for one method (or one method-difference join)."""

    method: str
    n_folds: int
    rows: tuple[ErrorRow, ...]

    def by_key(self) -> dict[tuple[str, str, int | None], ErrorRow]:
        return {r.key: r for r in self.rows}

    def scope_rows(self, scope: str) -> list[ErrorRow]:
        return [r for r in self.rows if r.scope == scope]

    def fold_average(self) -> ErrorRow:
        """The cross-fold summary row of the fold summaries."""
        for r in self.rows:
            if r.scope == "fold_summary" and r.fold is None:
                return r
        raise KeyError("report has no fold_summary average row")


def _mean_or_none(values: list[float]) -> float | None:
    return float(np.mean(values)) if values else None


def build_report(preds: PredictionSet, ds: TopsDataset, plan: FoldPlan) -> ErrorReport:
    """Aggregate a prediction set into top, well, and fold-summary rows.

    Fold summaries are pick-weighted over every prediction in the fold; the
    cross-fold average row is the plain mean of the per-fold values. Cells
    with held-out picks but no predictions stay missing.
    """
    errs = preds.abs_errors()
    pick_top = ds.pick_tops
    pick_well = ds.pick_wells

    rows: list[ErrorRow] = []

    # Per-top rows, then a per-top cross-fold average row.
    for i, top_id in enumerate(ds.top_ids):
        top_pick_mask = pick_top == i
        fold_maes: list[float] = []
        fold_rmses: list[float] = []
        for fold in range(plan.n_folds):
            n_train = int(np.sum(top_pick_mask[plan.train_indices(fold)]))
            n_test = int(np.sum(top_pick_mask[plan.validation_indices(fold)]))
            sel = (preds.fold == fold) & top_pick_mask[preds.pick_index]
            if np.any(sel):
                m = mae(preds.predicted[sel], preds.actual[sel])
                r = rmse(preds.predicted[sel], preds.actual[sel])
                fold_maes.append(m)
                fold_rmses.append(r)
            else:
                m = r = None
            rows.append(ErrorRow("top", top_id, fold, n_train, n_test, m, r))
        rows.append(
            ErrorRow(
                "top",
                top_id,
                None,
                None,
                int(np.sum(top_pick_mask)),
                _mean_or_none(fold_maes),
                _mean_or_none(fold_rmses),
            )
        )

    # Per-well rows over all held-out predictions, any fold.
    pred_well = pick_well[preds.pick_index]
    for u, well in enumerate(ds.wells):
        sel = pred_well == u
        if not np.any(sel):
            continue
        rows.append(
            ErrorRow(
                "well",
                well.well_id,
                None,
                None,
                int(np.sum(sel)),
                mae(preds.predicted[sel], preds.actual[sel]),
                rmse(preds.predicted[sel], preds.actual[sel]),
            )
        )

    # Fold summaries plus the cross-fold average.
    summary_maes: list[float] = []
    summary_rmses: list[float] = []
    for fold in range(plan.n_folds):
        sel = preds.fold == fold
        n_train = int(plan.train_indices(fold).size)
        n_test = int(plan.validation_indices(fold).size)
        if np.any(sel):
            m = mae(preds.predicted[sel], preds.actual[sel])
            r = rmse(preds.predicted[sel], preds.actual[sel])
            summary_maes.append(m)
            summary_rmses.append(r)
        else:
            m = r = None
        rows.append(ErrorRow("fold_summary", f"fold{fold + 1}", fold, n_train, n_test, m, r))
    rows.append(
        ErrorRow(
            "fold_summary",
            AVERAGE,
            None,
            None,
            len(preds),
            _mean_or_none(summary_maes),
            _mean_or_none(summary_rmses),
        )
    )

    return ErrorReport(method=preds.method, n_folds=plan.n_folds, rows=tuple(rows))


def per_well_report(preds: PredictionSet, ds: TopsDataset) -> ErrorReport:
    """Well-scope rows only (the error-map source data)."""
    pred_well = ds.pick_wells[preds.pick_index]
    rows = []
    for u, well in enumerate(ds.wells):
        sel = pred_well == u
        if not np.any(sel):
            continue
        rows.append(
            ErrorRow(
                "well",
                well.well_id,
                None,
                None,
                int(np.sum(sel)),
                mae(preds.predicted[sel], preds.actual[sel]),
                rmse(preds.predicted[sel], preds.actual[sel]),
            )
        )
    return ErrorReport(method=preds.method, n_folds=0, rows=tuple(rows))


def method_difference(spline_report: ErrorReport, rec_report: ErrorReport) -> ErrorReport:
    """Annotate the baseline report with (spline - recommender) columns.

    Positive differences mean the recommender has the lower error. Rows
    where either side is missing keep a missing difference.
    """
    rec = rec_report.by_key()
    spl = spline_report.by_key()
    if set(rec) != set(spl):
        only_spl = sorted(str(k) for k in set(spl) - set(rec))[:3]
        only_rec = sorted(str(k) for k in set(rec) - set(spl))[:3]
        raise KeyMismatchError(
            f"report keys differ; e.g. only in spline: {only_spl}, only in recommender: {only_rec}"
        )
    rows = []
    for row in spline_report.rows:
        other = rec[row.key]
        mae_diff = None if (row.mae is None or other.mae is None) else row.mae - other.mae
        rmse_diff = None if (row.rmse is None or other.rmse is None) else row.rmse - other.rmse
        rows.append(replace(row, mae_diff=mae_diff, rmse_diff=rmse_diff))
    return ErrorReport(method=spline_report.method, n_folds=spline_report.n_folds, rows=tuple(rows))


# ---------------------------------------------------------------------------
# CSV emission / parsing


def _render(value: float | int | None, ndigits: int | None = 1) -> str:
    if value is None:
        return ""
    if ndigits is None:
        return repr(float(value))
    return f"{value:.{ndigits}f}"


def _render_int(value: int | None) -> str:
    return "" if value is None else str(int(value))


def _parse_opt_float(text: str) -> float | None:
    return None if text == "" else float(text)


def _parse_opt_int(text: str) -> int | None:
    return None if text == "" else int(text)


FOLD_SUMMARY_COLUMNS = ["method", "fold", "mae_m", "rmse_m", "mae_m_full", "rmse_m_full"]


def write_fold_summary_csv(reports: Iterable[ErrorReport], path: str | Path) -> None:
    """Fold summaries: one row per fold per method plus an average row."""
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(FOLD_SUMMARY_COLUMNS)
        for report in reports:
            for row in report.scope_rows("fold_summary"):
                label = AVERAGE if row.fold is None else str(row.fold + 1)
                writer.writerow(
                    [
                        report.method,
                        label,
                        _render(row.mae),
                        _render(row.rmse),
                        _render(row.mae, None),
                        _render(row.rmse, None),
                    ]
                )


PER_TOP_COLUMNS = [
    "top_id",
    "fold",
    "n_train",
    "n_test",
    "mae_m",
    "rmse_m",
    "avg_mae_m",
    "avg_rmse_m",
    "mae_diff_m",
    "rmse_diff_m",
    "mae_m_full",
    "rmse_m_full",
    "mae_diff_m_full",
    "rmse_diff_m_full",
]


def write_per_top_csv(report: ErrorReport, path: str | Path) -> None:
    """Per-top table: fold rows plus a per-top cross-fold average row.

    The avg columns repeat the top's cross-fold averages on every row of
    that top; difference columns are filled when the report was joined via
    method_difference.
    """
    top_rows = report.scope_rows("top")
    averages = {r.scope_id: r for r in top_rows if r.fold is None}
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(PER_TOP_COLUMNS)
        for row in top_rows:
            avg = averages[row.scope_id]
            writer.writerow(
                [
                    row.scope_id,
                    AVERAGE if row.fold is None else str(row.fold + 1),
                    _render_int(row.n_train),
                    _render_int(row.n_test),
                    _render(row.mae),
                    _render(row.rmse),
                    _render(avg.mae),
                    _render(avg.rmse),
                    _render(row.mae_diff),
                    _render(row.rmse_diff),
                    _render(row.mae, None),
                    _render(row.rmse, None),
                    _render(row.mae_diff, None),
                    _render(row.rmse_diff, None),
                ]
            )


def read_per_top_csv(path: str | Path) -> ErrorReport:
    """Rebuild top-scope rows from an emitted per_top.csv (full columns)."""
    rows: list[ErrorRow] = []
    n_folds = 0
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(PER_TOP_COLUMNS) <= set(reader.fieldnames):
            raise KeyMismatchError(f"{path}: not a per_top report")
        for rec in reader:
            fold = None if rec["fold"] == AVERAGE else int(rec["fold"]) - 1
            if fold is not None:
                n_folds = max(n_folds, fold + 1)
            rows.append(
                ErrorRow(
                    "top",
                    rec["top_id"],
                    fold,
                    _parse_opt_int(rec["n_train"]),
                    _parse_opt_int(rec["n_test"]),
                    _parse_opt_float(rec["mae_m_full"]),
                    _parse_opt_float(rec["rmse_m_full"]),
                    _parse_opt_float(rec["mae_diff_m_full"]),
                    _parse_opt_float(rec["rmse_diff_m_full"]),
                )
            )
    return ErrorReport(method=Path(path).stem, n_folds=n_folds, rows=tuple(rows))


ERROR_MAP_COLUMNS = ["well_id", "x_m", "y_m", "n_picks", "mae_m", "rmse_m", "mae_m_full", "rmse_m_full"]


def write_error_map_csv(report: ErrorReport, ds: TopsDataset, path: str | Path) -> None:
    """Error-map source data: per-well errors joined with well locations."""
    per_well_picks = ds.picks_per_well()
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(ERROR_MAP_COLUMNS)
        for row in report.scope_rows("well"):
            u = ds.well_index[row.scope_id]
            well = ds.wells[u]
            writer.writerow(
                [
                    well.well_id,
                    repr(float(well.x)),
                    repr(float(well.y)),
                    int(per_well_picks[u]),
                    _render(row.mae),
                    _render(row.rmse),
                    _render(row.mae, None),
                    _render(row.rmse, None),
                ]
            )


SWEEP_COLUMNS = ["fraction", "restart", "mae_m", "rmse_m", "mae_m_full", "rmse_m_full"]


def write_sweep_csv(rows: Iterable[tuple[float, int, float, float]], path: str | Path) -> None:
    """Train-fraction sweep results: one row per (fraction, restart)."""
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for fraction, restart, m, r in rows:
            writer.writerow(
                [repr(float(fraction)), int(restart), _render(m), _render(r), _render(m, None), _render(r, None)]
            )


def read_sweep_csv(path: str | Path) -> list[tuple[float, int, float, float]]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            out.append(
                (
                    float(rec["fraction"]),
                    int(rec["restart"]),
                    float(rec["mae_m_full"]),
                    float(rec["rmse_m_full"]),
                )
            )
    return out
