import math

import numpy as np
import pytest

from fockml.circuit import CircuitSpec, EncodingLayout, mesh_parameter_count
from fockml.model import Observable
from fockml.variational import (
    TrainConfig,
    TrainedModel,
    accuracy,
    classify,
    cost,
    pack_parameters,
    parameter_bounds,
    predict_labels,
    train,
    unpack_parameters,
)

from oracles import trig_poly_least_squares


def make_setup(m, state, rng=None, layout=None):
    layout = layout or EncodingLayout.single()
    n = sum(state)
    d = math.comb(n + m - 1, n)
    if rng is None:
        spec = CircuitSpec.zero_meshes(m, state, layout)
        obs = Observable.pnr(m, n, np.zeros(d))
    else:
        meshes = tuple(
            tuple(rng.uniform(-np.pi, np.pi, mesh_parameter_count(m)))
            for _ in range(layout.n_layers + 1)
        )
        spec = CircuitSpec(m, state, layout, meshes)
        obs = Observable.pnr(m, n, rng.uniform(-1, 1, d))
    return spec, obs


class TestCost:
    def test_zero_model_cost_is_half_mean_square(self):
        spec, obs = make_setup(2, (1, 0))
        X = np.linspace(0, 1, 10)
        y = np.arange(10.0)
        expected = float(np.sum(y**2)) / 20
        assert cost(spec, obs, X, y, alpha=0.0) == pytest.approx(expected)

    def test_perfect_model_zero_cost(self):
        rng = np.random.default_rng(0)
        spec, obs = make_setup(2, (1, 1), rng)
        X = np.linspace(-2, 2, 9)
        from fockml.model import batch_evaluate

        y = batch_evaluate(spec, obs, X[:, None])
        assert cost(spec, obs, X, y, alpha=0.0) == pytest.approx(0.0, abs=1e-28)

    def test_regulariser_adds_alpha_weight_norm(self):
        rng = np.random.default_rng(1)
        spec, obs = make_setup(3, (1, 1, 0), rng)
        X = np.linspace(0, 1, 5)
        y = np.zeros(5)
        base = cost(spec, obs, X, y, alpha=0.0)
        alpha = 0.3
        bumped = cost(spec, obs, X, y, alpha=alpha)
        assert bumped == pytest.approx(base + alpha * np.sum(np.square(obs.weights)))

    def test_empty_dataset_rejected(self):
        spec, obs = make_setup(2, (1, 0))
        with pytest.raises(ValueError):
            cost(spec, obs, np.zeros((0, 1)), np.zeros(0), alpha=0.0)


class TestPackUnpack:
    def test_roundtrip(self):
        rng = np.random.default_rng(2)
        spec, obs = make_setup(3, (1, 1, 1), rng)
        vec = pack_parameters(spec, obs)
        spec2, obs2 = unpack_parameters(spec, obs, vec)
        assert spec2 == spec
        assert obs2 == obs

    def test_wrong_length_rejected(self):
        spec, obs = make_setup(2, (1, 0))
        with pytest.raises(ValueError):
            unpack_parameters(spec, obs, np.zeros(3))

    def test_bounds_shapes(self):
        spec, obs = make_setup(3, (1, 1, 0))
        config = TrainConfig()
        lower, upper = parameter_bounds(spec, obs, config)
        assert lower.size == upper.size == pack_parameters(spec, obs).size
        n_mesh = spec.n_mesh_parameters
        assert np.all(lower[:n_mesh] == -np.pi)
        assert np.all(upper[n_mesh:] == 5.0)


class TestTrain:
    def test_zero_target_from_zero_start_is_immediately_optimal(self):
        spec, obs = make_setup(2, (1, 0))
        X = np.linspace(0, 2, 8)
        y = np.zeros(8)
        config = TrainConfig(alpha=0.0, max_evals=50, seed=0, restarts=1)
        model = train(spec, obs, X, y, config)
        assert model.history[0] == (1, 0.0)
        assert model.final_cost == 0.0

    def test_history_is_monotone(self):
        rng = np.random.default_rng(3)
        spec, obs = make_setup(2, (1, 1), rng)
        X = np.linspace(-3, 3, 20)
        y = np.sin(X)
        config = TrainConfig(alpha=0.0, max_evals=300, seed=1, restarts=3)
        model = train(spec, obs, X, y, config)
        costs = [c for _, c in model.history]
        assert all(b < a for a, b in zip(costs, costs[1:]))
        counts = [k for k, _ in model.history]
        assert all(b > a for a, b in zip(counts, counts[1:]))

    def test_final_cost_matches_recomputation(self):
        rng = np.random.default_rng(4)
        spec, obs = make_setup(2, (1, 1), rng)
        X = np.linspace(-3, 3, 15)
        y = 0.4 * np.cos(X)
        config = TrainConfig(alpha=0.05, max_evals=200, seed=2, restarts=2)
        model = train(spec, obs, X, y, config)
        recomputed = cost(model.spec, model.obs, X, y, config.alpha)
        assert abs(model.final_cost - recomputed) < 1e-12

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(5)
        spec, obs = make_setup(2, (2, 0), rng)
        X = np.linspace(-2, 2, 12)
        y = np.cos(2 * X) * 0.5
        config = TrainConfig(alpha=0.0, max_evals=150, seed=11, restarts=2)
        a = train(spec, obs, X, y, config)
        b = train(spec, obs, X, y, config)
        assert a.final_cost == b.final_cost
        assert a.spec == b.spec
        assert a.obs == b.obs
        assert a.history == b.history

    def test_threaded_restarts_match_serial(self):
        rng = np.random.default_rng(15)
        spec, obs = make_setup(2, (1, 1), rng)
        X = np.linspace(-2, 2, 12)
        y = np.cos(X) * 0.4
        config = TrainConfig(alpha=0.05, max_evals=120, seed=6, restarts=3)
        serial = train(spec, obs, X, y, config, threads=1)
        threaded = train(spec, obs, X, y, config, threads=2)
        assert serial.final_cost == threaded.final_cost
        assert serial.spec == threaded.spec
        assert serial.history == threaded.history

    def test_target_cost_stops_early(self):
        spec, obs = make_setup(2, (1, 0))
        X = np.linspace(0, 2, 8)
        y = np.zeros(8)
        config = TrainConfig(max_evals=500, seed=0, restarts=5, target_cost=1e-9)
        model = train(spec, obs, X, y, config)
        # the zero start already achieves the target; no restarts needed
        assert model.best_restart == 0
        assert model.n_evaluations < 100

    def test_simple_fit_reaches_floor(self):
        # one photon in two modes fits a degree-1 series; target is exactly
        # degree 1, so the floor is ~0
        spec, obs = make_setup(2, (1, 0))
        X = np.linspace(-np.pi, np.pi, 21)
        y = 0.3 + 0.4 * np.cos(X) + 0.2 * np.sin(X)
        config = TrainConfig(alpha=0.0, max_evals=1500, seed=3, restarts=3, target_cost=1e-6)
        model = train(spec, obs, X, y, config)
        assert model.final_cost <= 1e-6

    def test_unreachable_frequencies_leave_oracle_floor(self):
        # a single photon cannot represent the cos(2x) component; the best
        # cost is the degree-1 least-squares floor
        spec, obs = make_setup(2, (1, 0))
        X = np.linspace(-np.pi, np.pi, 30)
        y = 0.8 * np.cos(2 * X) + 0.3 * np.cos(X)
        _, floor = trig_poly_least_squares(X, y, degree=1)
        config = TrainConfig(
            alpha=0.0, max_evals=2000, seed=4, restarts=3, target_cost=1.02 * floor
        )
        model = train(spec, obs, X, y, config)
        assert model.final_cost >= floor - 1e-12
        assert model.final_cost <= 1.1 * floor

    def test_regularisation_path_shrinks_weights(self):
        # trend over seeds: stronger alpha gives smaller final weight norm
        X = np.linspace(-np.pi, np.pi, 20)
        y = 0.5 * np.cos(X)
        norms = {}
        for alpha in (0.0, 0.1, 0.2):
            total = 0.0
            for seed in range(5):
                spec, obs = make_setup(2, (1, 0))
                config = TrainConfig(alpha=alpha, max_evals=400, seed=seed, restarts=2)
                model = train(spec, obs, X, y, config)
                total += float(np.sum(np.square(model.obs.weights)))
            norms[alpha] = total / 5
        assert norms[0.1] <= norms[0.0] + 1e-9
        assert norms[0.2] <= norms[0.1] + 1e-9

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(alpha=-0.1)
        with pytest.raises(ValueError):
            TrainConfig(max_evals=0)
        with pytest.raises(ValueError):
            TrainConfig(restarts=0)
        with pytest.raises(ValueError):
            TrainConfig(angle_bounds=(1.0, 1.0))


class TestClassify:
    def _constant_model(self, value):
        spec = CircuitSpec.zero_meshes(2, (1, 0), EncodingLayout.single())
        obs = Observable.pnr(2, 1, [value, 0.0])
        # identity meshes keep the photon in mode 0, so f(x) = value
        return TrainedModel(
            spec=spec,
            obs=obs,
            history=((1, 0.0),),
            final_cost=0.0,
            converged=True,
            config=TrainConfig(),
        )

    def test_positive_value_maps_to_plus_one(self):
        assert classify(self._constant_model(0.3), 0.5) == 1

    def test_negative_value_maps_to_minus_one(self):
        assert classify(self._constant_model(-0.3), 0.5) == -1

    def test_zero_maps_to_plus_one(self):
        assert classify(self._constant_model(0.0), 0.5) == 1

    def test_accuracy_all_correct(self):
        model = self._constant_model(1.0)
        X = np.linspace(0, 1, 10)
        assert accuracy(model, X, np.ones(10)) == 1.0

    def test_accuracy_all_wrong(self):
        model = self._constant_model(1.0)
        X = np.linspace(0, 1, 10)
        assert accuracy(model, X, -np.ones(10)) == 0.0

    def test_trivial_model_on_balanced_labels(self):
        model = self._constant_model(1.0)
        X = np.linspace(0, 1, 40)
        y = np.array([1, -1] * 20)
        assert accuracy(model, X, y) == pytest.approx(0.5)

    def test_predict_labels_values(self):
        model = self._constant_model(-2.0)
        labels = predict_labels(model, np.zeros((4, 1)))
        assert np.all(labels == -1)


class TestSerialization:
    def test_trained_model_roundtrip(self):
        rng = np.random.default_rng(6)
        spec, obs = make_setup(2, (1, 1), rng)
        X = np.linspace(-1, 1, 10)
        y = np.cos(X)
        config = TrainConfig(alpha=0.1, max_evals=80, seed=9, restarts=2)
        model = train(spec, obs, X, y, config)
        again = TrainedModel.from_json(model.to_json())
        assert again == model
        assert cost(again.spec, again.obs, X, y, config.alpha) == pytest.approx(
            model.final_cost, abs=1e-12
        )
