import json

import pytest
from click.testing import CliRunner

from topsrec.cli import main

from conftest import synth_dataset, write_dataset_csvs


@pytest.fixture()
def runner():
    return CliRunner()


def _cv_args(small_csvs, out, extra=()):
    wells, picks = small_csvs
    return [
        "cv", "--wells", str(wells), "--picks", str(picks),
        "--factors", "2", "--iterations", "30", "--lambda", "0.1",
        "--seed", "7", "--out", str(out), *extra,
    ]


class TestUsage:
    def test_missing_wells_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(main, ["cv", "--picks", "x.csv", "--out", str(tmp_path)])
        assert result.exit_code == 2

    def test_unknown_well_is_data_error(self, runner, tmp_path):
        wells = tmp_path / "w.csv"
        picks = tmp_path / "p.csv"
        wells.write_text("well_id,datum_elev_m,ground_elev_m,x_m,y_m\nW1,1510,1500,0,0\n")
        picks.write_text("well_id,top_id,md_m\nW9,A,1000\n")
        result = runner.invoke(
            main, ["cv", "--wells", str(wells), "--picks", str(picks), "--out", str(tmp_path / "out")]
        )
        assert result.exit_code == 1
        assert "W9" in result.output


class TestCv:
    def test_writes_reports_figures_manifest(self, runner, small_csvs, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(main, _cv_args(small_csvs, out))
        assert result.exit_code == 0, result.output
        for name in ("fold_summary.csv", "per_top.csv", "error_map.csv",
                     "error_map.png", "per_top_error.png", "manifest.json"):
            assert (out / name).exists(), name
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "cv"
        assert manifest["parameters"]["seed"] == 7
        assert "fold_summary.csv" in manifest["outputs"]
        assert "MAE" in result.output

    def test_no_figures_flag(self, runner, small_csvs, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(main, _cv_args(small_csvs, out, extra=["--no-figures"]))
        assert result.exit_code == 0, result.output
        assert not (out / "error_map.png").exists()
        assert (out / "fold_summary.csv").exists()

    def test_rerun_byte_identical(self, runner, small_csvs, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(main, _cv_args(small_csvs, out1, extra=["--no-figures"])).exit_code == 0
        assert runner.invoke(main, _cv_args(small_csvs, out2, extra=["--no-figures"])).exit_code == 0
        for name in ("fold_summary.csv", "per_top.csv", "error_map.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_spatial_flag(self, runner, small_csvs, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(
            main, _cv_args(small_csvs, out, extra=["--spatial", "--block-size", "2500", "--no-figures"])
        )
        assert result.exit_code == 0, result.output

    def test_env_seed_fallback(self, runner, small_csvs, tmp_path):
        wells, picks = small_csvs
        base = ["cv", "--wells", str(wells), "--picks", str(picks),
                "--factors", "2", "--iterations", "10", "--no-figures"]
        r1 = runner.invoke(main, base + ["--seed", "99", "--out", str(tmp_path / "a")])
        r2 = runner.invoke(main, base + ["--out", str(tmp_path / "b")], env={"TOPSREC_SEED": "99"})
        assert r1.exit_code == 0 and r2.exit_code == 0
        assert (tmp_path / "a" / "per_top.csv").read_bytes() == (tmp_path / "b" / "per_top.csv").read_bytes()


class TestSplineCv:
    def test_same_seed_same_plan(self, runner, small_csvs, tmp_path):
        wells, picks = small_csvs
        shared = ["--wells", str(wells), "--picks", str(picks), "--seed", "5"]
        r1 = runner.invoke(main, ["dump-plan", *shared, "--out", str(tmp_path / "p1")])
        r2 = runner.invoke(main, ["dump-plan", *shared, "--out", str(tmp_path / "p2")])
        assert r1.exit_code == 0 and r2.exit_code == 0
        assert (tmp_path / "p1" / "plan.csv").read_bytes() == (tmp_path / "p2" / "plan.csv").read_bytes()

    def test_compare_adds_differences(self, runner, small_csvs, tmp_path):
        wells, picks = small_csvs
        rec_out = tmp_path / "rec"
        args = ["cv", "--wells", str(wells), "--picks", str(picks), "--iterations", "30",
                "--seed", "5", "--out", str(rec_out), "--no-figures"]
        assert runner.invoke(main, args).exit_code == 0
        spl_out = tmp_path / "spl"
        result = runner.invoke(main, [
            "spline-cv", "--wells", str(wells), "--picks", str(picks), "--seed", "5",
            "--compare", str(rec_out / "per_top.csv"), "--out", str(spl_out), "--no-figures",
        ])
        assert result.exit_code == 0, result.output
        lines = (spl_out / "per_top.csv").read_text().strip().splitlines()
        header = lines[0].split(",")
        diff_col = header.index("mae_diff_m_full")
        diffs = [ln.split(",")[diff_col] for ln in lines[1:]]
        assert any(d != "" for d in diffs)

    def test_without_compare(self, runner, small_csvs, tmp_path):
        wells, picks = small_csvs
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "spline-cv", "--wells", str(wells), "--picks", str(picks),
            "--seed", "3", "--out", str(out), "--no-figures",
        ])
        assert result.exit_code == 0, result.output
        assert (out / "fold_summary.csv").exists()


class TestGrid:
    def test_small_grid(self, runner, small_csvs, tmp_path):
        wells, picks = small_csvs
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "grid", "--wells", str(wells), "--picks", str(picks),
            "--factors", "1,2", "--iterations", "10:20:10", "--lambdas", "0.1",
            "--threads", "1", "--seed", "0", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        lines = (out / "grid.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 4
        assert "best:" in result.output
        assert (out / "grid.png").exists()

    def test_range_syntax_inclusive(self, runner, small_csvs, tmp_path):
        wells, picks = small_csvs
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "grid", "--wells", str(wells), "--picks", str(picks),
            "--factors", "1:3", "--iterations", "10", "--lambdas", "0.1",
            "--threads", "1", "--seed", "0", "--out", str(out), "--no-figures",
        ])
        assert result.exit_code == 0, result.output
        lines = (out / "grid.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 3


class TestSweep:
    def test_row_count_and_columns(self, runner, small_csvs, tmp_path):
        wells, picks = small_csvs
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "sweep", "--wells", str(wells), "--picks", str(picks),
            "--fractions", "0.3,0.6", "--restarts", "1", "--iterations", "20",
            "--seed", "1", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "fraction,restart,mae_m,rmse_m,mae_m_full,rmse_m_full"
        assert len(lines) == 1 + 2
        assert (out / "sweep.png").exists()


class TestDumpModel:
    def test_model_rows(self, runner, small_csvs, tmp_path):
        wells, picks = small_csvs
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "dump-model", "--wells", str(wells), "--picks", str(picks),
            "--factors", "2", "--iterations", "10", "--seed", "0", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        ds = synth_dataset(n_wells=30, n_tops=8, fill=0.6, seed=0)
        lines = (out / "model.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + ds.n_wells + ds.n_tops
