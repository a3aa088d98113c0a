"""Command-line surface: experiments in, CSV reports and figures out.

Every command writes its artifacts plus a run manifest into --out. Reruns
with identical flags and inputs produce byte-identical CSVs; the single
--seed flag (or TOPSREC_SEED) is the root of all randomness.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import click

from . import als, evaluate, figures, hyperopt, metrics, spline, validation
from ._io import atomic_writer
from .dataset import TopsDataset, load_dataset
from .errors import TopsRecError
from .seeding import derive_seed

EXIT_DATA_ERROR = 1


def _fail(err: Exception) -> "click.ClickException":
    exc = click.ClickException(str(err))
    exc.exit_code = EXIT_DATA_ERROR
    return exc


def dataset_options(f):
    f = click.option("--wells", "wells_csv", required=True, type=click.Path(exists=True, dir_okay=False),
                     help="Well header CSV (well_id,datum_elev_m,ground_elev_m,x_m,y_m).")(f)
    f = click.option("--picks", "picks_csv", required=True, type=click.Path(exists=True, dir_okay=False),
                     help="Pick CSV (well_id,top_id,md_m).")(f)
    f = click.option("--tops", "tops_csv", default=None, type=click.Path(exists=True, dir_okay=False),
                     help="Optional one-column CSV of top ids to keep in the registry even without picks.")(f)
    return f


def plan_options(f):
    f = click.option("--folds", default=validation.DEFAULT_FOLDS, show_default=True, type=int)(f)
    f = click.option("--spatial", is_flag=True, help="Spatially blocked folds instead of random.")(f)
    f = click.option("--block-size", default=None, type=float,
                     help="Block side in meters for --spatial (default: quarter of the shorter map side).")(f)
    return f


def run_options(f):
    f = click.option("--seed", default=0, show_default=True, type=int, envvar="TOPSREC_SEED",
                     help="Base seed; every derived RNG flows from it (env: TOPSREC_SEED).")(f)
    f = click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
                     help="Output directory for reports and the run manifest.")(f)
    f = click.option("--figures/--no-figures", "render_figures", default=True, show_default=True,
                     help="Also render the matplotlib figures next to the CSVs.")(f)
    return f


def model_options(f):
    f = click.option("--factors", default=2, show_default=True, type=int)(f)
    f = click.option("--iterations", default=290, show_default=True, type=int)(f)
    f = click.option("--lambda", "lam", default=0.1, show_default=True, type=float,
                     help="L2 regularization weight.")(f)
    return f


@click.group()
def main() -> None:
    """Formation-top depth recommender and its evaluation harness."""


def _load(wells_csv: str, picks_csv: str, tops_csv: str | None) -> TopsDataset:
    try:
        return load_dataset(wells_csv, picks_csv, tops_csv)
    except TopsRecError as err:
        raise _fail(err)


def _build_plan(ds: TopsDataset, folds: int, spatial: bool, block_size: float | None, seed: int):
    plan_seed = derive_seed("plan", seed)
    try:
        if spatial:
            return validation.spatial_folds(ds, folds, block_size, plan_seed)
        return validation.random_folds(ds, folds, plan_seed)
    except TopsRecError as err:
        raise _fail(err)


def _write_manifest(out_dir: Path, command: str, params: dict, ds: TopsDataset | None,
                    outputs: list[Path], started: float) -> None:
    manifest = {
        "command": command,
        "parameters": params,
        "seed": params.get("seed"),
        "dataset_fingerprint": ds.fingerprint() if ds is not None else None,
        "outputs": sorted(p.name for p in outputs),
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    with atomic_writer(out_dir / "manifest.json") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare_out(out_dir: str) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_int_list(text: str) -> tuple[int, ...]:
    """Accepts '1,2,3' or inclusive ranges 'start:stop[:step]'."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return tuple(range(start, stop + 1, step))
    return tuple(int(p) for p in text.split(","))


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(","))


def _join_differences(report: metrics.ErrorReport, rec_report: metrics.ErrorReport) -> metrics.ErrorReport:
    """Fill diff columns on the top-scope rows from a recommender report."""
    top_only = metrics.ErrorReport(
        method=report.method, n_folds=report.n_folds, rows=tuple(report.scope_rows("top")))
    rec_tops = metrics.ErrorReport(
        method=rec_report.method, n_folds=rec_report.n_folds, rows=tuple(rec_report.scope_rows("top")))
    diffed = metrics.method_difference(top_only, rec_tops).by_key()
    return metrics.ErrorReport(
        method=report.method, n_folds=report.n_folds,
        rows=tuple(diffed.get(r.key, r) for r in report.rows))


def _emit_cv_reports(ds, plan, preds, out: Path, render_figures: bool,
                     compare_with: metrics.ErrorReport | None = None) -> list[Path]:
    report = metrics.build_report(preds, ds, plan)
    if compare_with is not None:
        report = _join_differences(report, compare_with)
    outputs = []
    fold_summary = out / "fold_summary.csv"
    metrics.write_fold_summary_csv([report], fold_summary)
    outputs.append(fold_summary)
    per_top = out / "per_top.csv"
    metrics.write_per_top_csv(report, per_top)
    outputs.append(per_top)
    error_map = out / "error_map.csv"
    metrics.write_error_map_csv(report, ds, error_map)
    outputs.append(error_map)
    if render_figures:
        map_png = out / "error_map.png"
        figures.plot_error_map(report, ds, map_png)
        outputs.append(map_png)
        top_png = out / "per_top_error.png"
        figures.plot_per_top(report, ds, top_png)
        outputs.append(top_png)
    avg = report.fold_average()
    if avg.mae is None:
        click.echo(f"{report.method}: no validation predictions were produced")
    else:
        click.echo(f"{report.method} fold-averaged MAE: {avg.mae:.1f} m, RMSE: {avg.rmse:.1f} m")
    return outputs


@main.command("cv")
@dataset_options
@plan_options
@model_options
@run_options
def cmd_cv(wells_csv, picks_csv, tops_csv, folds, spatial, block_size,
           factors, iterations, lam, seed, out_dir, render_figures):
    """Cross-validate the recommender and write its reports."""
    started = time.monotonic()
    out = _prepare_out(out_dir)
    ds = _load(wells_csv, picks_csv, tops_csv)
    plan = _build_plan(ds, folds, spatial, block_size, seed)
    cfg = als.AlsConfig(factors=factors, iterations=iterations, lam=lam, seed=seed)
    try:
        preds = evaluate.recommender_cv(ds, plan, cfg)
        outputs = _emit_cv_reports(ds, plan, preds, out, render_figures)
    except TopsRecError as err:
        raise _fail(err)
    _write_manifest(out, "cv", {
        "wells": wells_csv, "picks": picks_csv, "tops": tops_csv,
        "folds": folds, "spatial": spatial, "block_size": block_size,
        "factors": factors, "iterations": iterations, "lambda": lam, "seed": seed,
    }, ds, outputs, started)


@main.command("spline-cv")
@dataset_options
@plan_options
@run_options
@click.option("--damping", default=spline.DEFAULT_DAMPING, show_default=True, type=float,
              help="Ridge damping on the kernel weights (0 = exact interpolation).")
@click.option("--compare", "compare_csv", default=None, type=click.Path(exists=True, dir_okay=False),
              help="per_top.csv from a recommender run; adds method-difference columns.")
def cmd_spline_cv(wells_csv, picks_csv, tops_csv, folds, spatial, block_size,
                  damping, compare_csv, seed, out_dir, render_figures):
    """Cross-validate the spline baseline under the identical fold plan."""
    started = time.monotonic()
    out = _prepare_out(out_dir)
    ds = _load(wells_csv, picks_csv, tops_csv)
    plan = _build_plan(ds, folds, spatial, block_size, seed)
    try:
        preds = spline.spline_cv_predictions(ds, plan, damping)
        compare_report = metrics.read_per_top_csv(compare_csv) if compare_csv else None
        outputs = _emit_cv_reports(ds, plan, preds, out, render_figures, compare_with=compare_report)
    except TopsRecError as err:
        raise _fail(err)
    _write_manifest(out, "spline-cv", {
        "wells": wells_csv, "picks": picks_csv, "tops": tops_csv,
        "folds": folds, "spatial": spatial, "block_size": block_size,
        "damping": damping, "compare": compare_csv, "seed": seed,
    }, ds, outputs, started)


@main.command("grid")
@dataset_options
@plan_options
@run_options
@click.option("--factors", "factors_list", default="1:10", show_default=True,
              help="Factor counts: comma list or start:stop[:step] range.")
@click.option("--iterations", "iterations_list", default="10:440:10", show_default=True,
              help="Iteration counts: comma list or start:stop[:step] range.")
@click.option("--lambdas", "lambdas_list", default="0.001,0.01,0.1,1,10", show_default=True,
              help="Regularization weights, comma list.")
@click.option("--threads", default=None, type=int,
              help="Concurrent grid cells (default: machine parallelism).")
def cmd_grid(wells_csv, picks_csv, tops_csv, folds, spatial, block_size,
             factors_list, iterations_list, lambdas_list, threads,
             seed, out_dir, render_figures):
    """Exhaustive hyperparameter grid search under k-fold validation."""
    started = time.monotonic()
    out = _prepare_out(out_dir)
    ds = _load(wells_csv, picks_csv, tops_csv)
    plan = _build_plan(ds, folds, spatial, block_size, seed)
    try:
        spec = hyperopt.GridSpec(
            factors=_parse_int_list(factors_list),
            iterations=_parse_int_list(iterations_list),
            lambdas=_parse_float_list(lambdas_list),
        )
    except ValueError as err:
        raise click.UsageError(str(err))
    if threads is None:
        threads = hyperopt.default_threads()

    def progress(done: int, total: int) -> None:
        if done % 50 == 0 or done == total:
            click.echo(f"  grid: {done}/{total} configurations scored", err=True)

    try:
        result = hyperopt.grid_search(ds, plan, spec, base_seed=seed, threads=threads,
                                      progress=progress)
    except TopsRecError as err:
        raise _fail(err)
    grid_csv = out / "grid.csv"
    hyperopt.write_grid_csv(result, grid_csv)
    outputs = [grid_csv]
    if render_figures:
        grid_png = out / "grid.png"
        figures.plot_grid(result, grid_png)
        outputs.append(grid_png)
    best = result.best
    best_cell = next(c for c in result.cells if c.config == best)
    click.echo(
        f"best: factors={best.factors} iterations={best.iterations} lambda={best.lam:g} "
        f"(fold-averaged MAE {best_cell.avg_mae:.2f} m)"
    )
    _write_manifest(out, "grid", {
        "wells": wells_csv, "picks": picks_csv, "tops": tops_csv,
        "folds": folds, "spatial": spatial, "block_size": block_size,
        "factors": factors_list, "iterations": iterations_list, "lambdas": lambdas_list,
        "seed": seed, "threads": threads,
    }, ds, outputs, started)


@main.command("sweep")
@dataset_options
@model_options
@run_options
@click.option("--fractions", "fractions_text", default=None,
              help="Train fractions in (0,1), comma list (default 0.01,0.1,...,0.9,0.99).")
@click.option("--restarts", default=validation.DEFAULT_RESTARTS, show_default=True, type=int)
def cmd_sweep(wells_csv, picks_csv, tops_csv, factors, iterations, lam,
              fractions_text, restarts, seed, out_dir, render_figures):
    """Train-fraction sweep: test error against training-set size."""
    started = time.monotonic()
    out = _prepare_out(out_dir)
    ds = _load(wells_csv, picks_csv, tops_csv)
    fractions = _parse_float_list(fractions_text) if fractions_text else None
    cfg = als.AlsConfig(factors=factors, iterations=iterations, lam=lam, seed=seed)
    try:
        rows = evaluate.sweep(ds, cfg, fractions=fractions, restarts=restarts, base_seed=seed)
    except (TopsRecError, ValueError) as err:
        raise _fail(err)
    sweep_csv = out / "sweep.csv"
    metrics.write_sweep_csv(rows, sweep_csv)
    outputs = [sweep_csv]
    if render_figures:
        sweep_png = out / "sweep.png"
        figures.plot_sweep(rows, sweep_png)
        outputs.append(sweep_png)
    _write_manifest(out, "sweep", {
        "wells": wells_csv, "picks": picks_csv, "tops": tops_csv,
        "factors": factors, "iterations": iterations, "lambda": lam,
        "fractions": fractions_text, "restarts": restarts, "seed": seed,
    }, ds, outputs, started)


@main.command("dump-plan")
@dataset_options
@plan_options
@click.option("--seed", default=0, show_default=True, type=int, envvar="TOPSREC_SEED")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def cmd_dump_plan(wells_csv, picks_csv, tops_csv, folds, spatial, block_size, seed, out_dir):
    """Write the fold membership table for inspection or audit."""
    started = time.monotonic()
    out = _prepare_out(out_dir)
    ds = _load(wells_csv, picks_csv, tops_csv)
    plan = _build_plan(ds, folds, spatial, block_size, seed)
    plan_csv = out / "plan.csv"
    validation.write_plan_csv(plan, ds, plan_csv)
    _write_manifest(out, "dump-plan", {
        "wells": wells_csv, "picks": picks_csv, "tops": tops_csv,
        "folds": folds, "spatial": spatial, "block_size": block_size, "seed": seed,
    }, ds, [plan_csv], started)


@main.command("dump-model")
@dataset_options
@model_options
@click.option("--seed", default=0, show_default=True, type=int, envvar="TOPSREC_SEED")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def cmd_dump_model(wells_csv, picks_csv, tops_csv, factors, iterations, lam, seed, out_dir):
    """Fit on every pick and dump the latent factors."""
    started = time.monotonic()
    out = _prepare_out(out_dir)
    ds = _load(wells_csv, picks_csv, tops_csv)
    cfg = als.AlsConfig(factors=factors, iterations=iterations, lam=lam, seed=seed)
    try:
        model = als.fit(ds.all_picks(), cfg)
    except TopsRecError as err:
        raise _fail(err)
    model_csv = out / "model.csv"
    als.write_model_csv(model, ds, model_csv)
    unconstrained = ds.unconstrained_tops()
    if unconstrained:
        click.echo(f"unconstrained tops (registry entries with no picks): {', '.join(unconstrained)}")
    _write_manifest(out, "dump-model", {
        "wells": wells_csv, "picks": picks_csv, "tops": tops_csv,
        "factors": factors, "iterations": iterations, "lambda": lam, "seed": seed,
    }, ds, [model_csv], started)


if __name__ == "__main__":
    main()
