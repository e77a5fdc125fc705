import pytest
from fastapi.testclient import TestClient

from fockml import __version__
from fockml.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


class TestHealth:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok", "version": __version__}


class TestGenData:
    def test_generate_moons(self, client):
        r = client.post(
            "/datasets/generate", json={"name": "moons", "n": 60, "seed": 4}
        )
        assert r.status_code == 200
        report = r.json()
        assert report["command"] == "gen-data"
        grid = report["grids"]["dataset"]
        assert len(grid["x1"]) == 60
        assert set(grid["label"]) == {-1, 1}
        assert abs(report["metrics"]["balance"] - 0.5) <= 0.1

    def test_identical_requests_identical_payloads(self, client):
        body = {"name": "circles", "n": 40, "seed": 11, "noise": 0.03}
        a = client.post("/datasets/generate", json=body).json()
        b = client.post("/datasets/generate", json=body).json()
        assert a["grids"] == b["grids"]
        assert a["metrics"] == b["metrics"]

    def test_unknown_dataset_rejected(self, client):
        r = client.post("/datasets/generate", json={"name": "spiral", "n": 40})
        assert r.status_code == 422

    def test_bad_factor_rejected(self, client):
        r = client.post(
            "/datasets/generate", json={"name": "circles", "n": 40, "factor": 2.0}
        )
        assert r.status_code == 422


class TestDofTable:
    def test_values_and_crossing(self, client):
        r = client.post("/experiments/dof-table", json={"m_max": 3, "n_max": 15})
        assert r.status_code == 200
        report = r.json()
        grid = report["grids"]["dof_table"]
        rows = {
            (m, n): (pnr, thr, mn)
            for m, n, pnr, thr, mn in zip(
                grid["m"], grid["n"], grid["m_pnr"], grid["m_thr"], grid["m_min"]
            )
        }
        assert rows[(3, 3)][0] == 22
        assert rows[(3, 5)][1] == 19
        assert rows[(3, 0)][2] == 1
        assert report["metrics"]["threshold_crossing_photon_number"]["3"] == 10


class TestFitKernel:
    def test_small_grid(self, client):
        r = client.post(
            "/experiments/fit-kernel",
            json={"photons": [2, 4], "sigmas": [1.0, 0.5], "grid_points": 120},
        )
        assert r.status_code == 200
        errors = r.json()["metrics"]["max_abs_error"]
        assert errors["2"]["1.0"] <= 0.02
        assert errors["4"]["0.5"] <= 0.05

    def test_photon_budget_validated(self, client):
        r = client.post("/experiments/fit-kernel", json={"photons": [25]})
        assert r.status_code == 422


class TestClassifyKernel:
    def test_small_run(self, client):
        r = client.post(
            "/experiments/classify-kernel",
            json={"dataset": "circles", "photons": 6, "sigma": 0.5, "seed": 2, "grid_size": 12},
        )
        assert r.status_code == 200
        metrics = r.json()["metrics"]
        assert metrics["test_accuracy"] >= 0.8
        grid = r.json()["grids"]["decision_grid"]
        assert len(grid["value"]) == 12 * 12

    def test_numerical_failure_maps_to_400(self, client):
        # alpha = 0 with duplicated points makes the kernel system singular
        r = client.post(
            "/experiments/classify-kernel",
            json={
                "dataset": "circles",
                "photons": 4,
                "sigma": 0.5,
                "alpha": 0.0,
                "noise": 0.0,
                "seed": 2,
                "grid_size": 5,
            },
        )
        assert r.status_code == 400
        assert r.json()["kind"] == "numerical-failure"


class TestRks:
    def test_small_run(self, client):
        r = client.post(
            "/experiments/rks",
            json={
                "dataset": "moons",
                "photons": 6,
                "ks": [2],
                "feature_counts": [5, 40],
                "seed": 3,
                "grid_size": 10,
            },
        )
        assert r.status_code == 200
        runs = r.json()["metrics"]["runs"]
        assert set(runs) == {"R5_k2", "R40_k2"}
        assert runs["R40_k2"]["sigma"] == pytest.approx(0.5)

    def test_frequency_above_photons_is_config_error(self, client):
        r = client.post(
            "/experiments/rks",
            json={"photons": 4, "ks": [9], "feature_counts": [2], "grid_size": 5},
        )
        assert r.status_code == 400
        assert r.json()["kind"] == "config-error"


class TestFitFourier:
    def test_tiny_run_shape(self, client):
        r = client.post(
            "/experiments/fit-fourier",
            json={
                "input_states": ["10"],
                "coefficients": [[0.1, 0.0], [0.3, 0.2]],
                "n_points": 24,
                "max_evals": 300,
                "restarts": 1,
                "seed": 1,
            },
        )
        assert r.status_code == 200
        report = r.json()
        state = report["metrics"]["states"]["10"]
        assert state["band_limit"] == 1
        assert "fit_curve_10" in report["grids"]
        assert "10" in report["models"]

    def test_bad_state_string_rejected(self, client):
        r = client.post(
            "/experiments/fit-fourier", json={"input_states": ["1a0"]}
        )
        assert r.status_code == 422


class TestClassifyVariational:
    def test_single_photon_linear_run(self, client):
        r = client.post(
            "/experiments/classify-variational",
            json={
                "dataset": "linear",
                "input_states": ["100"],
                "max_evals": 600,
                "restarts": 2,
                "seed": 0,
                "grid_size": 8,
            },
        )
        assert r.status_code == 200
        report = r.json()
        state = report["metrics"]["states"]["100"]
        assert state["test_accuracy"] >= 0.9
        assert len(report["grids"]["decision_grid_100"]["value"]) == 64
        assert len(report["grids"]["train_points"]["x1"]) == 60
        assert len(report["grids"]["test_points"]["x1"]) == 40
