"""Derivative-free training of circuit angles and observable weights.

Mesh angles and observable weights are optimised jointly against a
regularised squared loss,

    C = (1/2N) sum_i (g_i - f(x_i))^2 + alpha * sum_j w_j^2,

where the regulariser runs over observable weights only.  The optimiser is
scipy's COBYQA (a bound-constrained trust-region method built on quadratic
models, in the BOBYQA family); gradients of f with respect to mesh angles
go through matrix permanents and have no cheap analytic form, so a
derivative-free method is the natural choice.  A multi-restart wrapper
draws extra starting points uniformly from the bounds; the first restart
always starts from the supplied parameters.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, minimize

from .circuit import CircuitSpec
from .model import ModelEvaluator, Observable, _check_pairing

DEFAULT_ANGLE_BOUNDS = (-math.pi, math.pi)
DEFAULT_WEIGHT_BOUNDS = (-5.0, 5.0)


@dataclass(frozen=True)
class TrainConfig:
    """Optimiser settings: budget is per restart, seed covers everything.

    When ``target_cost`` is set, a restart stops as soon as it reaches that
    cost and no further restarts are launched; useful when the attainable
    floor is known (e.g. a least-squares bound).
    """

    alpha: float = 0.0
    max_evals: int = 2000
    seed: int = 0
    restarts: int = 1
    angle_bounds: tuple[float, float] = DEFAULT_ANGLE_BOUNDS
    weight_bounds: tuple[float, float] = DEFAULT_WEIGHT_BOUNDS
    target_cost: float | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        for lo, hi in (self.angle_bounds, self.weight_bounds):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError("bounds must be finite non-empty intervals")

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "max_evals": self.max_evals,
            "seed": self.seed,
            "restarts": self.restarts,
            "angle_bounds": list(self.angle_bounds),
            "weight_bounds": list(self.weight_bounds),
            "target_cost": self.target_cost,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "TrainConfig":
        return TrainConfig(
            alpha=float(d["alpha"]),
            max_evals=int(d["max_evals"]),
            seed=int(d["seed"]),
            restarts=int(d["restarts"]),
            angle_bounds=tuple(d["angle_bounds"]),
            weight_bounds=tuple(d["weight_bounds"]),
            target_cost=None if d.get("target_cost") is None else float(d["target_cost"]),
        )


def pack_parameters(spec: CircuitSpec, obs: Observable) -> np.ndarray:
    """Flatten (all mesh angles, observable weights) into one vector."""
    mesh = np.concatenate([np.asarray(p) for p in spec.mesh_params])
    return np.concatenate([mesh, np.asarray(obs.weights)])


def unpack_parameters(spec: CircuitSpec, obs: Observable, vec) -> tuple[CircuitSpec, Observable]:
    """Rebuild (spec, observable) from a flat parameter vector."""
    vec = np.asarray(vec, dtype=float)
    per_mesh = len(spec.mesh_params[0])
    n_mesh = spec.n_meshes * per_mesh
    if vec.size != n_mesh + len(obs.weights):
        raise ValueError(
            f"parameter vector has {vec.size} entries, expected "
            f"{n_mesh + len(obs.weights)}"
        )
    meshes = tuple(
        tuple(vec[i * per_mesh : (i + 1) * per_mesh]) for i in range(spec.n_meshes)
    )
    return spec.with_mesh_params(meshes), obs.with_weights(vec[n_mesh:])


def parameter_bounds(spec: CircuitSpec, obs: Observable, config: TrainConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-parameter (lower, upper) arrays matching pack_parameters order."""
    n_mesh = spec.n_mesh_parameters
    n_weights = len(obs.weights)
    lower = np.concatenate(
        [np.full(n_mesh, config.angle_bounds[0]), np.full(n_weights, config.weight_bounds[0])]
    )
    upper = np.concatenate(
        [np.full(n_mesh, config.angle_bounds[1]), np.full(n_weights, config.weight_bounds[1])]
    )
    return lower, upper


def _validate_dataset(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise ValueError("dataset must be nonempty")
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.size:
        raise ValueError(f"{X.shape[0]} points but {y.size} targets")
    return X, y


def cost(spec: CircuitSpec, obs: Observable, X, y, alpha: float) -> float:
    """Regularised half-mean squared error of the model on (X, y)."""
    X, y = _validate_dataset(X, y)
    _check_pairing(spec, obs)
    predictions = ModelEvaluator(spec).expectation(obs, X)
    residual = float(np.sum((y - predictions) ** 2)) / (2 * y.size)
    return residual + float(alpha) * float(np.sum(np.square(obs.weights)))


@dataclass(frozen=True)
class TrainedModel:
    """Optimised circuit + observable with the training trace.

    ``history`` records (cumulative evaluation count, best cost so far) at
    every improvement, so its costs are non-increasing; ``final_cost`` is
    the last entry and equals ``cost`` recomputed from the stored
    parameters.
    """

    spec: CircuitSpec
    obs: Observable
    history: tuple[tuple[int, float], ...]
    final_cost: float
    converged: bool
    config: TrainConfig
    n_evaluations: int = 0
    best_restart: int = 0

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "observable": self.obs.to_json_dict(),
            "history": [[int(k), float(c)] for k, c in self.history],
            "final_cost": self.final_cost,
            "converged": self.converged,
            "config": self.config.to_json_dict(),
            "n_evaluations": self.n_evaluations,
            "best_restart": self.best_restart,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "TrainedModel":
        return TrainedModel(
            spec=CircuitSpec.from_json_dict(d["spec"]),
            obs=Observable.from_json_dict(d["observable"]),
            history=tuple((int(k), float(c)) for k, c in d["history"]),
            final_cost=float(d["final_cost"]),
            converged=bool(d["converged"]),
            config=TrainConfig.from_json_dict(d["config"]),
            n_evaluations=int(d.get("n_evaluations", 0)),
            best_restart=int(d.get("best_restart", 0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @staticmethod
    def from_json(text: str) -> "TrainedModel":
        return TrainedModel.from_json_dict(json.loads(text))


@dataclass
class _RestartResult:
    best_x: np.ndarray
    best_f: float
    trace: list[tuple[int, float]] = field(default_factory=list)
    n_evals: int = 0
    success: bool = False


def _run_restart(objective, x0, lower, upper, max_evals, target_cost=None) -> _RestartResult:
    result = _RestartResult(best_x=np.asarray(x0, dtype=float), best_f=np.inf)

    def wrapped(vec):
        value = objective(vec)
        result.n_evals += 1
        if value < result.best_f:
            result.best_f = value
            result.best_x = np.array(vec, dtype=float)
            result.trace.append((result.n_evals, value))
        return value

    options = {"maxfev": int(max_evals)}
    if target_cost is not None:
        options["f_target"] = float(target_cost)
    res = minimize(
        wrapped,
        np.asarray(x0, dtype=float),
        method="COBYQA",
        bounds=Bounds(lower, upper),
        options=options,
    )
    result.success = bool(res.success)
    return result


def train(
    spec: CircuitSpec,
    obs: Observable,
    X,
    y,
    config: TrainConfig,
    threads: int = 1,
) -> TrainedModel:
    """Fit mesh angles and observable weights to targets y at points X.

    The supplied (spec, obs) provide the first starting point; further
    restarts (config.restarts - 1 of them) start from seeded uniform draws
    within the bounds.  Deterministic given the config seed.  Exhausting
    the budget is not an error: the best parameters found are returned,
    with ``converged`` reporting the optimiser's own verdict.
    """
    X, y = _validate_dataset(X, y)
    _check_pairing(spec, obs)
    lower, upper = parameter_bounds(spec, obs, config)

    def objective(vec):
        s, o = unpack_parameters(spec, obs, vec)
        return cost(s, o, X, y, config.alpha)

    rng = np.random.default_rng(config.seed)
    starts = [np.clip(pack_parameters(spec, obs), lower, upper)]
    # restart draws: angles uniform over their bounds; weights uniform over
    # a unit range (wide weight draws start deep in the regularizer's
    # penalty and waste much of the budget shrinking back)
    n_mesh = spec.n_mesh_parameters
    init_lower, init_upper = lower.copy(), upper.copy()
    init_lower[n_mesh:] = np.maximum(init_lower[n_mesh:], -1.0)
    init_upper[n_mesh:] = np.minimum(init_upper[n_mesh:], 1.0)
    for _ in range(config.restarts - 1):
        starts.append(rng.uniform(init_lower, init_upper))

    target = config.target_cost
    if threads > 1 and len(starts) > 1 and target is None:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    lambda x0: _run_restart(objective, x0, lower, upper, config.max_evals),
                    starts,
                )
            )
    else:
        results = []
        for x0 in starts:
            results.append(
                _run_restart(objective, x0, lower, upper, config.max_evals, target)
            )
            if target is not None and results[-1].best_f <= target:
                break

    # merge traces in restart order; the combined history stays monotone
    history: list[tuple[int, float]] = []
    offset = 0
    best_f, best_idx = np.inf, 0
    for idx, res in enumerate(results):
        for count, value in res.trace:
            if not history or value < history[-1][1]:
                history.append((offset + count, value))
        offset += res.n_evals
        if res.best_f < best_f:
            best_f, best_idx = res.best_f, idx

    winner = results[best_idx]
    final_spec, final_obs = unpack_parameters(spec, obs, winner.best_x)
    return TrainedModel(
        spec=final_spec,
        obs=final_obs,
        history=tuple(history),
        final_cost=float(winner.best_f),
        converged=winner.success,
        config=config,
        n_evaluations=offset,
        best_restart=best_idx,
    )


def predict_values(model: TrainedModel, X) -> np.ndarray:
    """Raw model outputs f(x) for each row of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return ModelEvaluator(model.spec).expectation(model.obs, X)


def classify(model: TrainedModel, x) -> int:
    """Label in {-1, +1} by the sign of the model output; f = 0 maps to +1."""
    value = predict_values(model, np.atleast_2d(np.asarray(x, dtype=float)))[0]
    return 1 if value >= 0 else -1


def predict_labels(model: TrainedModel, X) -> np.ndarray:
    values = predict_values(model, X)
    return np.where(values >= 0, 1, -1)


def accuracy(model: TrainedModel, X, y) -> float:
    """Fraction of points whose predicted sign matches the label."""
    X, y = _validate_dataset(X, y)
    return float(np.mean(predict_labels(model, X) == y))
