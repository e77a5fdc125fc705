"""End-to-end experiment runners shared by the HTTP service and the CLI.

Each runner takes plain keyword parameters, does the full computation, and
returns a JSON-ready report dict:

    {"command": ..., "config": {...}, "metrics": {...}, "grids": {...},
     "wall_time_s": ...}

``config`` echoes every parameter (including seeds), so a report can be
re-run exactly; ``metrics`` and ``grids`` are deterministic functions of
``config``; wall time is kept separate from the metrics so that replayed
runs produce bit-identical metric files.  Grids are lists of column
dicts ready to be written as CSV.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .circuit import CircuitSpec, EncodingLayout, fit_feature_rescale, mesh_parameter_count
from .datasets import LabeledDataset, make_dataset, split
from .kernel import (
    default_delta_grid,
    fit_kernel_classifier,
    fit_kernel_observable,
    gaussian_kernel_target,
    kernel_classify,
    kernel_predict,
    two_mode_outcome_probabilities,
)
from .model import Observable, dof_pnr, dof_threshold, m_min
from .rks import rks_classify, rks_predict, rks_train, sample_feature_set
from .variational import TrainConfig, TrainedModel, accuracy, predict_values, train

# degree-3 target series for the one-feature fitting experiment:
# g(x) = c_0 + sum_k 2 Re(c_k e^{-ikx})
DEFAULT_TARGET_COEFFS = ((0.2, 0.0), (0.69, 0.52), (0.81, 0.41), (0.68, 0.82))

# weight bounds for the fitting experiment: the degree-3 target peaks near
# 5.8 and the model output cannot exceed the largest observable weight, so
# the general-purpose (-5, 5) default would make a perfect fit impossible
FIT_WEIGHT_BOUNDS = (-8.0, 8.0)

# classification feature window: affine-rescaled per feature from the
# training set; half the encoding period, so the map stays injective
FEATURE_TARGET_RANGE = (0.0, np.pi)

DATASET_SIZE = 100
TRAIN_POINTS = 60
TEST_POINTS = 40


def _timer():
    start = time.perf_counter()
    return lambda: round(time.perf_counter() - start, 3)


def parse_input_state(state) -> tuple[int, ...]:
    """Accept (1, 1, 0), [1, 1, 0] or the string "110"."""
    if isinstance(state, str):
        return tuple(int(ch) for ch in state)
    return tuple(int(v) for v in state)


def state_label(state) -> str:
    return "".join(str(v) for v in state)


def fourier_target_values(x, coeffs=DEFAULT_TARGET_COEFFS) -> np.ndarray:
    """Real degree-D series c_0 + sum_k 2 Re(c_k e^{-ikx})."""
    x = np.asarray(x, dtype=float)
    values = np.full_like(x, float(coeffs[0][0]))
    for k, (re, im) in enumerate(coeffs):
        if k == 0:
            continue
        values += 2.0 * (re * np.cos(k * x) + im * np.sin(k * x))
    return values


def trig_floor(x, y, degree: int) -> float:
    """Half-mean-square residual of the best degree-``degree`` trig fit."""
    x = np.asarray(x, dtype=float)
    columns = [np.ones_like(x)]
    for k in range(1, degree + 1):
        columns.append(np.cos(k * x))
        columns.append(np.sin(k * x))
    design = np.column_stack(columns)
    coeffs, *_ = np.linalg.lstsq(design, np.asarray(y, dtype=float), rcond=None)
    residual = np.asarray(y) - design @ coeffs
    return float(np.sum(residual**2) / (2 * len(x)))


def _grid_columns(**columns) -> dict:
    """Column-oriented grid payload; every value JSON-serialisable."""
    out = {}
    for name, values in columns.items():
        cleaned = []
        for v in np.ravel(values):
            if isinstance(v, str):
                cleaned.append(v)
            elif isinstance(v, (int, np.integer)):
                cleaned.append(int(v))
            else:
                cleaned.append(float(v))
        out[name] = cleaned
    return out


# ---------------------------------------------------------------------------
# fit-fourier


def run_fit_fourier(
    input_states=("100", "110", "111"),
    coefficients=DEFAULT_TARGET_COEFFS,
    n_points: int = TRAIN_POINTS,
    x_min: float = -3 * np.pi,
    x_max: float = 3 * np.pi,
    alpha: float = 0.0,
    max_evals: int = 4000,
    restarts: int = 10,
    seed: int = 0,
    curve_points: int = 241,
    threads: int = 1,
) -> dict:
    """Fit the degree-3 target series with one-feature circuits.

    Each input state gets its own training run; the report carries final
    costs, the least-squares floor for the state's band limit, and sampled
    target/fit curves.  A run stops early once it reaches its floor (within
    5 percent) or, when the floor is zero, a cost of 5e-4.
    """
    elapsed = _timer()
    states = [parse_input_state(s) for s in input_states]
    coeffs = tuple((float(re), float(im)) for re, im in coefficients)
    grid = np.linspace(x_min, x_max, n_points)
    targets = fourier_target_values(grid, coeffs)
    curve_x = np.linspace(x_min, x_max, curve_points)

    metrics: dict = {"states": {}}
    grids: dict = {
        "target_curve": _grid_columns(x=curve_x, value=fourier_target_values(curve_x, coeffs))
    }
    models: dict[str, TrainedModel] = {}
    for state in states:
        m, n = len(state), sum(state)
        d = math.comb(n + m - 1, n)
        floor = trig_floor(grid, targets, degree=n)
        target_cost = max(1.05 * floor, 5e-4)
        spec = CircuitSpec.zero_meshes(m, state, EncodingLayout.single())
        obs = Observable.pnr(m, n, np.zeros(d))
        config = TrainConfig(
            alpha=alpha,
            max_evals=max_evals,
            seed=seed,
            restarts=restarts,
            weight_bounds=FIT_WEIGHT_BOUNDS,
            target_cost=target_cost,
        )
        model = train(spec, obs, grid, targets, config, threads=threads)
        label = state_label(state)
        models[label] = model
        metrics["states"][label] = {
            "final_cost": model.final_cost,
            "least_squares_floor": floor,
            "n_evaluations": model.n_evaluations,
            "converged": model.converged,
            "band_limit": n,
        }
        grids[f"fit_curve_{label}"] = _grid_columns(
            x=curve_x, value=predict_values(model, curve_x)
        )

    return {
        "command": "fit-fourier",
        "config": {
            "input_states": [state_label(s) for s in states],
            "coefficients": [list(c) for c in coeffs],
            "n_points": n_points,
            "x_min": x_min,
            "x_max": x_max,
            "alpha": alpha,
            "max_evals": max_evals,
            "restarts": restarts,
            "seed": seed,
            "curve_points": curve_points,
        },
        "metrics": metrics,
        "grids": grids,
        "models": {label: m.to_json_dict() for label, m in models.items()},
        "wall_time_s": elapsed(),
    }


# ---------------------------------------------------------------------------
# dof-table


def run_dof_table(m_max: int = 3, n_max: int = 15) -> dict:
    """Degrees-of-freedom table for PNR and threshold detectors.

    Also reports, per mode count, the first photon number at which the
    threshold count drops below the minimum needed to control the full
    series (no enhancement beyond that point).
    """
    elapsed = _timer()
    if m_max < 2:
        raise ValueError("m_max must be at least 2")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    rows_m, rows_n, pnr, thr, minimum = [], [], [], [], []
    crossings: dict[str, int | None] = {}
    for m in range(2, m_max + 1):
        crossing = None
        for n in range(n_max + 1):
            rows_m.append(m)
            rows_n.append(n)
            pnr.append(dof_pnr(m, n))
            thr.append(dof_threshold(m, n))
            minimum.append(m_min(n))
            if crossing is None and n >= 1 and dof_threshold(m, n) < m_min(n):
                crossing = n
        crossings[str(m)] = crossing
    return {
        "command": "dof-table",
        "config": {"m_max": m_max, "n_max": n_max},
        "metrics": {"threshold_crossing_photon_number": crossings},
        "grids": {
            "dof_table": _grid_columns(
                m=rows_m, n=rows_n, m_pnr=pnr, m_thr=thr, m_min=minimum
            )
        },
        "wall_time_s": elapsed(),
    }


# ---------------------------------------------------------------------------
# classify-variational


def _load_split(dataset: str, n_points: int, seed: int, noise, factor):
    data = make_dataset(dataset, n_points, seed, noise=noise, factor=factor)
    return split(data, TRAIN_POINTS, TEST_POINTS, seed + 1000)


def _decision_grid(values_fn, X, grid_size: int):
    margin = 0.3
    lo = X.min(axis=0) - margin
    hi = X.max(axis=0) + margin
    ax1 = np.linspace(lo[0], hi[0], grid_size)
    ax2 = np.linspace(lo[1], hi[1], grid_size)
    g1, g2 = np.meshgrid(ax1, ax2, indexing="ij")
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    values = values_fn(pts)
    return _grid_columns(x1=pts[:, 0], x2=pts[:, 1], value=values)


def variational_classifier_setup(
    train_X, state, seed: int, alpha: float, max_evals: int, restarts: int
):
    """Initial spec/observable/config for a 2-feature classification run.

    Meshes start at seeded random angles: identity meshes are a degenerate
    saddle (the input state never mixes), so a zero start wastes a restart.
    """
    state = parse_input_state(state)
    m, n = len(state), sum(state)
    d = math.comb(n + m - 1, n)
    scale, offset = fit_feature_rescale(train_X, target=FEATURE_TARGET_RANGE)
    rng = np.random.default_rng(seed + 90210)
    meshes = tuple(
        tuple(rng.uniform(-np.pi, np.pi, mesh_parameter_count(m))) for _ in range(2)
    )
    spec = CircuitSpec(
        m,
        state,
        EncodingLayout.series_features(2),
        meshes,
        feature_scale=scale,
        feature_offset=offset,
    )
    obs = Observable.pnr(m, n, rng.uniform(-1.0, 1.0, d))
    config = TrainConfig(alpha=alpha, max_evals=max_evals, seed=seed, restarts=restarts)
    return spec, obs, config


def run_classify_variational(
    dataset: str = "moons",
    input_states=("100", "111", "221"),
    alpha: float = 0.2,
    n_points: int = DATASET_SIZE,
    noise: float | None = None,
    factor: float = 0.5,
    max_evals: int = 3000,
    restarts: int = 4,
    seed: int = 0,
    grid_size: int = 100,
    threads: int = 1,
) -> dict:
    """Train the three-mode circuit classifier on a toy dataset.

    60 training and 40 test points; one run per input state; emits train
    and test accuracy plus a decision-value grid per state.
    """
    elapsed = _timer()
    train_set, test_set = _load_split(dataset, n_points, seed, noise, factor)
    metrics: dict = {"dataset": dataset, "states": {}}
    grids: dict = {
        "train_points": _grid_columns(
            x1=train_set.X[:, 0], x2=train_set.X[:, 1], label=train_set.y
        ),
        "test_points": _grid_columns(
            x1=test_set.X[:, 0], x2=test_set.X[:, 1], label=test_set.y
        ),
    }
    models = {}
    for raw_state in input_states:
        state = parse_input_state(raw_state)
        label = state_label(state)
        spec, obs, config = variational_classifier_setup(
            train_set.X, state, seed, alpha, max_evals, restarts
        )
        model = train(spec, obs, train_set.X, train_set.y, config, threads=threads)
        models[label] = model
        metrics["states"][label] = {
            "train_accuracy": accuracy(model, train_set.X, train_set.y),
            "test_accuracy": accuracy(model, test_set.X, test_set.y),
            "final_cost": model.final_cost,
            "n_evaluations": model.n_evaluations,
        }
        grids[f"decision_grid_{label}"] = _decision_grid(
            lambda pts, m=model: predict_values(m, pts), train_set.X, grid_size
        )
    return {
        "command": "classify-variational",
        "config": {
            "dataset": dataset,
            "input_states": [state_label(parse_input_state(s)) for s in input_states],
            "alpha": alpha,
            "n_points": n_points,
            "noise": noise,
            "factor": factor,
            "n_train": TRAIN_POINTS,
            "n_test": TEST_POINTS,
            "max_evals": max_evals,
            "restarts": restarts,
            "seed": seed,
            "grid_size": grid_size,
        },
        "metrics": metrics,
        "grids": grids,
        "models": {label: m.to_json_dict() for label, m in models.items()},
        "wall_time_s": elapsed(),
    }


# ---------------------------------------------------------------------------
# fit-kernel


def run_fit_kernel(
    photons=(2, 4, 6, 8, 10),
    sigmas=(0.25, 0.33, 0.50, 1.00),
    grid_points: int = 200,
) -> dict:
    """Fit the two-mode circuit kernel to Gaussian targets over (n, sigma).

    One probability table per photon number serves every resolution; the
    report carries the max-abs fit error matrix and the fitted curves.
    """
    elapsed = _timer()
    grid = default_delta_grid(grid_points)
    errors: dict[str, dict[str, float]] = {}
    weight_tables: dict[str, dict[str, list[float]]] = {}
    grids: dict = {}
    for n in photons:
        table = two_mode_outcome_probabilities(int(n), grid)
        errors[str(n)] = {}
        weight_tables[str(n)] = {}
        for sigma in sigmas:
            fit = fit_kernel_observable(
                int(n), float(sigma), grid=grid, probabilities=table
            )
            errors[str(n)][str(sigma)] = fit.max_abs_error
            weight_tables[str(n)][str(sigma)] = list(fit.weights)
            grids[f"kernel_fit_n{n}_sigma{sigma}"] = _grid_columns(
                delta=grid,
                target=gaussian_kernel_target(grid, float(sigma)),
                fitted=table @ np.asarray(fit.weights),
            )
    weight_rows: dict[str, list] = {"photons": [], "sigma": [], "outcome": [], "weight": []}
    for n_key, per_sigma in weight_tables.items():
        for sigma_key, weights in per_sigma.items():
            for outcome, weight in enumerate(weights):
                weight_rows["photons"].append(int(n_key))
                weight_rows["sigma"].append(float(sigma_key))
                weight_rows["outcome"].append(outcome)
                weight_rows["weight"].append(weight)
    grids["fitted_weights"] = _grid_columns(**weight_rows)
    return {
        "command": "fit-kernel",
        "config": {
            "photons": [int(n) for n in photons],
            "sigmas": [float(s) for s in sigmas],
            "grid_points": grid_points,
        },
        "metrics": {"max_abs_error": errors, "weights": weight_tables},
        "grids": grids,
        "wall_time_s": elapsed(),
    }


# ---------------------------------------------------------------------------
# classify-kernel


def run_classify_kernel(
    dataset: str = "circles",
    photons: int = 10,
    sigma: float = 0.5,
    alpha: float = 0.2,
    n_points: int = DATASET_SIZE,
    noise: float | None = None,
    factor: float = 0.5,
    seed: int = 0,
    grid_size: int = 100,
    grid_points: int = 200,
) -> dict:
    """Kernel-ridge classification with the fitted circuit kernel."""
    elapsed = _timer()
    train_set, test_set = _load_split(dataset, n_points, seed, noise, factor)
    model = fit_kernel_classifier(
        train_set.X,
        train_set.y,
        n=photons,
        sigma=sigma,
        alpha=alpha,
        grid_points=grid_points,
    )
    train_acc = float(np.mean(kernel_classify(model, train_set.X) == train_set.y))
    test_acc = float(np.mean(kernel_classify(model, test_set.X) == test_set.y))
    from .kernel import kernel_circuit_response, squared_distances

    deltas = model.delta_scale * np.sqrt(squared_distances(train_set.X, train_set.X))
    gram = np.asarray(
        kernel_circuit_response(photons, deltas.ravel(), np.asarray(model.observable.weights))
    ).reshape(deltas.shape)
    row_idx, col_idx = np.meshgrid(
        np.arange(deltas.shape[0]), np.arange(deltas.shape[1]), indexing="ij"
    )
    grids = {
        "train_points": _grid_columns(
            x1=train_set.X[:, 0], x2=train_set.X[:, 1], label=train_set.y
        ),
        "test_points": _grid_columns(
            x1=test_set.X[:, 0], x2=test_set.X[:, 1], label=test_set.y
        ),
        "decision_grid": _decision_grid(
            lambda pts: kernel_predict(model, pts), train_set.X, grid_size
        ),
        "kernel_matrix": _grid_columns(
            i=row_idx.ravel(), j=col_idx.ravel(), value=gram.ravel()
        ),
        "fitted_weights": _grid_columns(
            outcome=np.arange(photons + 1), weight=np.asarray(model.observable.weights)
        ),
    }
    return {
        "command": "classify-kernel",
        "config": {
            "dataset": dataset,
            "photons": photons,
            "sigma": sigma,
            "alpha": alpha,
            "n_points": n_points,
            "noise": noise,
            "factor": factor,
            "n_train": TRAIN_POINTS,
            "n_test": TEST_POINTS,
            "seed": seed,
            "grid_size": grid_size,
            "grid_points": grid_points,
        },
        "metrics": {
            "dataset": dataset,
            "train_accuracy": train_acc,
            "test_accuracy": test_acc,
            "kernel_fit_error": model.observable.max_abs_error,
            "delta_scale": model.delta_scale,
        },
        "grids": grids,
        "wall_time_s": elapsed(),
    }


# ---------------------------------------------------------------------------
# rks


def run_rks(
    dataset: str = "moons",
    photons: int = 10,
    gamma: float = 1.0,
    ks=(4,),
    feature_counts=(1, 10, 100),
    alpha: float = 0.2,
    n_points: int = DATASET_SIZE,
    noise: float | None = None,
    factor: float = 0.5,
    seed: int = 0,
    grid_size: int = 100,
    standardize: bool = False,
) -> dict:
    """Random-kitchen-sinks classification across feature counts and ks.

    For each feature count R the same (w, b) draws serve every requested
    frequency k (resolution sigma = 1/(k gamma)) through one simulated
    probability table per point set.
    """
    elapsed = _timer()
    train_set, test_set = _load_split(dataset, n_points, seed, noise, factor)
    train_X, test_X = train_set.X, test_set.X
    offsets = None
    if standardize:
        mean, std = train_X.mean(axis=0), train_X.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        offsets = {"mean": list(map(float, mean)), "std": list(map(float, std))}
        train_X = (train_X - mean) / std
        test_X = (test_X - mean) / std

    metrics: dict = {"dataset": dataset, "runs": {}}
    grids: dict = {
        "train_points": _grid_columns(
            x1=train_set.X[:, 0], x2=train_set.X[:, 1], label=train_set.y
        ),
        "test_points": _grid_columns(
            x1=test_set.X[:, 0], x2=test_set.X[:, 1], label=test_set.y
        ),
    }
    feature_sets: dict = {}
    for R in feature_counts:
        fs = sample_feature_set(int(R), train_X.shape[1], gamma, int(ks[0]), seed)
        feature_sets[f"feature_set_R{R}"] = fs.to_json_dict()
        for k in ks:
            fs_k = fs.with_k(int(k))
            model = rks_train(train_X, train_set.y, fs_k, alpha=alpha, n=photons)
            train_acc = float(np.mean(rks_classify(model, train_X) == train_set.y))
            test_acc = float(np.mean(rks_classify(model, test_X) == test_set.y))
            key = f"R{R}_k{k}"
            metrics["runs"][key] = {
                "R": int(R),
                "k": int(k),
                "sigma": 1.0 / (int(k) * gamma),
                "train_accuracy": train_acc,
                "test_accuracy": test_acc,
            }
            margin = 0.3
            lo = train_set.X.min(axis=0) - margin
            hi = train_set.X.max(axis=0) + margin
            ax1 = np.linspace(lo[0], hi[0], grid_size)
            ax2 = np.linspace(lo[1], hi[1], grid_size)
            g1, g2 = np.meshgrid(ax1, ax2, indexing="ij")
            pts = np.column_stack([g1.ravel(), g2.ravel()])
            pts_enc = pts if offsets is None else (pts - mean) / std
            grids[f"decision_grid_{key}"] = _grid_columns(
                x1=pts[:, 0], x2=pts[:, 1], value=rks_predict(model, pts_enc)
            )
    return {
        "command": "rks",
        "config": {
            "dataset": dataset,
            "photons": photons,
            "gamma": gamma,
            "ks": [int(k) for k in ks],
            "feature_counts": [int(r) for r in feature_counts],
            "alpha": alpha,
            "n_points": n_points,
            "noise": noise,
            "factor": factor,
            "n_train": TRAIN_POINTS,
            "n_test": TEST_POINTS,
            "seed": seed,
            "grid_size": grid_size,
            "standardize": standardize,
        },
        "metrics": metrics if offsets is None else {**metrics, "standardize": offsets},
        "grids": grids,
        "models": feature_sets,
        "wall_time_s": elapsed(),
    }


# ---------------------------------------------------------------------------
# gen-data


def run_gen_data(
    name: str,
    n: int = DATASET_SIZE,
    seed: int = 0,
    noise: float | None = None,
    factor: float = 0.5,
) -> dict:
    """Generate one toy dataset and report it as a grid."""
    elapsed = _timer()
    data = make_dataset(name, n, seed, noise=noise, factor=factor)
    return {
        "command": "gen-data",
        "config": {
            "name": name,
            "n": n,
            "seed": seed,
            "noise": data.params.get("noise"),
            "factor": data.params.get("factor", factor if name == "circles" else None),
        },
        "metrics": {"n": data.n, "balance": data.balance(), "metadata": data.metadata()},
        "grids": {
            "dataset": _grid_columns(x1=data.X[:, 0], x2=data.X[:, 1], label=data.y)
        },
        "wall_time_s": elapsed(),
    }


def dataset_from_grid(grid: dict, name: str = "dataset", seed: int = -1) -> LabeledDataset:
    """Rebuild a LabeledDataset from a report's point grid."""
    X = np.column_stack([grid["x1"], grid["x2"]])
    return LabeledDataset(name, X, np.asarray(grid["label"], dtype=int), seed)
