import json

import pytest

from fockml.cli import main


def run_cli(args) -> int:
    return main([str(a) for a in args])


class TestGenData:
    def test_writes_dataset_and_sidecar(self, tmp_path):
        out = tmp_path / "run"
        code = run_cli(["gen-data", "--name", "moons", "--n", "80", "--seed", "3", "--out", out])
        assert code == 0
        assert (out / "dataset.csv").exists()
        assert (out / "dataset.meta.json").exists()
        assert (out / "config.json").exists()
        assert (out / "metrics.json").exists()
        header = (out / "dataset.csv").read_text().splitlines()[0]
        assert header == "x1,x2,label"
        meta = json.loads((out / "dataset.meta.json").read_text())
        assert meta["seed"] == 3

    def test_missing_name_is_config_error(self, tmp_path):
        code = run_cli(["gen-data", "--out", tmp_path / "x"])
        assert code == 2


class TestDofTable:
    def test_csv_and_metrics(self, tmp_path):
        out = tmp_path / "dof"
        code = run_cli(["dof-table", "--m-max", "3", "--n-max", "15", "--out", out])
        assert code == 0
        lines = (out / "grids" / "dof_table.csv").read_text().splitlines()
        assert lines[0] == "m,n,m_pnr,m_thr,m_min"
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["threshold_crossing_photon_number"]["3"] == 10

    def test_deterministic_across_runs(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run_cli(["dof-table", "--out", out_a]) == 0
        assert run_cli(["dof-table", "--out", out_b]) == 0
        assert (out_a / "metrics.json").read_bytes() == (out_b / "metrics.json").read_bytes()
        assert (out_a / "grids" / "dof_table.csv").read_bytes() == (
            out_b / "grids" / "dof_table.csv"
        ).read_bytes()


class TestConfigFile:
    def test_config_file_supplies_fields(self, tmp_path):
        cfg = tmp_path / "req.json"
        cfg.write_text(json.dumps({"name": "circles", "n": 40, "seed": 9}))
        out = tmp_path / "run"
        code = run_cli(["gen-data", "--config", cfg, "--out", out])
        assert code == 0
        written = json.loads((out / "config.json").read_text())
        assert written["name"] == "circles"
        assert written["seed"] == 9

    def test_flags_override_config_file(self, tmp_path):
        cfg = tmp_path / "req.json"
        cfg.write_text(json.dumps({"name": "circles", "n": 40, "seed": 9}))
        out = tmp_path / "run"
        code = run_cli(["gen-data", "--config", cfg, "--seed", "21", "--out", out])
        assert code == 0
        written = json.loads((out / "config.json").read_text())
        assert written["seed"] == 21

    def test_rerun_from_written_config_is_bit_identical(self, tmp_path):
        out_a = tmp_path / "a"
        assert run_cli(["gen-data", "--name", "moons", "--n", "60", "--seed", "7", "--out", out_a]) == 0
        out_b = tmp_path / "b"
        assert run_cli(["gen-data", "--config", out_a / "config.json", "--out", out_b]) == 0
        assert (out_a / "metrics.json").read_bytes() == (out_b / "metrics.json").read_bytes()
        assert (out_a / "dataset.csv").read_bytes() == (out_b / "dataset.csv").read_bytes()


class TestExitCodes:
    def test_numerical_failure_exits_three(self, tmp_path):
        # R > N with alpha = 0 makes the normal equations singular
        code = run_cli(
            [
                "rks",
                "--dataset",
                "moons",
                "--photons",
                "4",
                "--k",
                "2",
                "--features",
                "200",
                "--alpha",
                "0",
                "--grid-size",
                "4",
                "--out",
                tmp_path / "x",
            ]
        )
        assert code == 3

    def test_validation_error_exits_two(self, tmp_path):
        code = run_cli(
            ["fit-kernel", "--photons", "40", "--out", tmp_path / "y"]
        )
        assert code == 2

    def test_unreadable_config_exits_two(self, tmp_path):
        bad = tmp_path / "missing.json"
        with pytest.raises(SystemExit):
            run_cli(["gen-data", "--config", bad])


class TestSmallExperimentRuns:
    def test_rks_run_and_determinism(self, tmp_path):
        args = [
            "rks",
            "--dataset",
            "moons",
            "--photons",
            "6",
            "--k",
            "2",
            "--features",
            "5",
            "--seed",
            "4",
            "--grid-size",
            "6",
        ]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run_cli(args + ["--out", out_a]) == 0
        assert run_cli(args + ["--out", out_b]) == 0
        assert (out_a / "metrics.json").read_bytes() == (out_b / "metrics.json").read_bytes()
        grids_a = sorted((out_a / "grids").glob("*.csv"))
        grids_b = sorted((out_b / "grids").glob("*.csv"))
        assert [p.name for p in grids_a] == [p.name for p in grids_b]
        for pa, pb in zip(grids_a, grids_b):
            assert pa.read_bytes() == pb.read_bytes()

    def test_fit_fourier_writes_models(self, tmp_path):
        out = tmp_path / "ff"
        code = run_cli(
            [
                "fit-fourier",
                "--input-states",
                "10",
                "--n-points",
                "20",
                "--max-evals",
                "200",
                "--restarts",
                "1",
                "--seed",
                "2",
                "--out",
                out,
            ]
        )
        assert code == 0
        assert (out / "models" / "10.json").exists()
        from fockml.variational import TrainedModel

        model = TrainedModel.from_json((out / "models" / "10.json").read_text())
        assert model.config.seed == 2
