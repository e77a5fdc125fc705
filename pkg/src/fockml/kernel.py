"""Gaussian-kernel sampling with a fixed two-mode interferometer.

A two-mode circuit made of two 50-50 beamsplitters around one phase
shifter, fed with all n photons in the first mode, has PNR outcome
probabilities that are degree-n cosine polynomials of the encoded phase.
Encoding the (rescaled) distance delta between a pair of data points and
weighting the n+1 outcomes therefore yields a trainable radial kernel

    k(delta) = sum_j w_j p_j(delta) = c_0 + 2 sum_k c_k cos(k delta),

which is fitted to the Gaussian target exp(-delta^2 / (2 sigma^2)) by
linear least squares (the response is linear in the weights, so the
optimum is unique and deterministic).  One probability table serves every
sigma: different resolutions are different weightings of the same
outcomes.

The cosine series is even and 2 pi-periodic, hence symmetric about
delta = pi; the fit grid therefore covers [0, pi], the injective half
period, and classifier distances are rescaled into it.  The target being
Gaussian *in the encoded phase* is what makes the photon-number
thresholds come out right: its cosine coefficients decay like
exp(-k^2 sigma^2 / 2), so resolution sigma needs roughly 1/sigma photons.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import NumericalError
from .fock import enumerate_fock_basis, lift_column, lift_unitary

# 50-50 beamsplitter with the matrix elements of the 2x2 Hadamard transform
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)

DEFAULT_GRID_POINTS = 200


@lru_cache(maxsize=None)
def _lifted_parts(n: int):
    """Lifted beamsplitter, its input column, and first-mode occupations."""
    basis = enumerate_fock_basis(2, n)
    lifted = lift_unitary(HADAMARD, basis)
    input_state = (n, 0)
    column = lift_column(HADAMARD, basis, input_state)
    occ_first = basis.occupations[:, 0].astype(float)
    return lifted, column, occ_first


def two_mode_outcome_probabilities(n: int, phases) -> np.ndarray:
    """PNR outcome probabilities of the two-mode circuit at each phase.

    Returns shape (len(phases), n+1); column j is the probability of
    outcome (n-j, j), i.e. j photons leaving in the second mode.
    """
    if n < 1:
        raise ValueError(f"need at least one photon, got {n}")
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    lifted, column, occ_first = _lifted_parts(n)
    amps = (np.exp(1j * np.outer(phases, occ_first)) * column) @ lifted.T
    return np.abs(amps) ** 2


def kernel_circuit_response(n: int, delta, weights) -> np.ndarray | float:
    """Weighted outcome expectation at encoded phase(s) delta.

    A cosine polynomial of degree n in delta; scalar in, scalar out.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n + 1,):
        raise ValueError(f"need {n + 1} outcome weights, got shape {weights.shape}")
    scalar = np.isscalar(delta) or np.ndim(delta) == 0
    values = two_mode_outcome_probabilities(n, delta) @ weights
    return float(values[0]) if scalar else values


def gaussian_kernel_target(delta, sigma: float) -> np.ndarray:
    """exp(-delta^2 / (2 sigma^2)) with delta the encoded pair distance."""
    return np.exp(-np.asarray(delta, dtype=float) ** 2 / (2.0 * sigma**2))


def default_delta_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Equispaced deltas over [0, pi], the injective half period."""
    return np.linspace(0.0, np.pi, points)


@dataclass(frozen=True)
class KernelObservable:
    """Outcome weights fitted to a Gaussian target of resolution sigma."""

    n: int
    weights: tuple[float, ...]
    sigma: float
    max_abs_error: float

    def response(self, delta):
        return kernel_circuit_response(self.n, delta, self.weights)


def fit_kernel_observable(
    n: int,
    sigma: float,
    grid=None,
    alpha: float = 0.0,
    probabilities: np.ndarray | None = None,
) -> KernelObservable:
    """Least-squares fit of outcome weights to the Gaussian kernel target.

    ``grid`` defaults to 200 equispaced deltas on [0, 2 pi].  Passing a
    precomputed ``probabilities`` table (as from
    :func:`two_mode_outcome_probabilities` on the same grid) re-uses one
    set of measurements for several resolutions.  With alpha > 0 the
    objective gains the ridge term alpha * |w|^2 on top of the
    half-mean-square grid error.  A poor fit is reported through
    ``max_abs_error``, never raised.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    grid = default_delta_grid() if grid is None else np.asarray(grid, dtype=float)
    table = (
        two_mode_outcome_probabilities(n, grid)
        if probabilities is None
        else np.asarray(probabilities, dtype=float)
    )
    if table.shape != (grid.size, n + 1):
        raise ValueError(
            f"probability table shape {table.shape} does not match "
            f"({grid.size}, {n + 1})"
        )
    target = gaussian_kernel_target(grid, sigma)
    if alpha == 0.0:
        weights, *_ = np.linalg.lstsq(table, target, rcond=None)
    else:
        g = grid.size
        lhs = table.T @ table / g + 2.0 * alpha * np.eye(n + 1)
        weights = np.linalg.solve(lhs, table.T @ target / g)
    achieved = table @ weights
    return KernelObservable(
        n=n,
        weights=tuple(float(w) for w in weights),
        sigma=float(sigma),
        max_abs_error=float(np.max(np.abs(achieved - target))),
    )


def ridge_solve(K, y, alpha: float) -> np.ndarray:
    """Solve (K + alpha I) beta = y for a symmetric PSD kernel matrix.

    Raises NumericalError when the system is singular (possible only with
    alpha = 0) or the solution fails the residual check.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"kernel matrix must be square, got shape {K.shape}")
    if K.shape[0] != y.size:
        raise ValueError(f"kernel is {K.shape[0]} x {K.shape[0]} but y has {y.size} entries")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    scale = max(1.0, float(np.max(np.abs(K))))
    if np.max(np.abs(K - K.T)) > 1e-8 * scale:
        raise ValueError("kernel matrix must be symmetric")
    system = K + alpha * np.eye(K.shape[0])
    # Cholesky both solves the symmetric system and detects rank
    # deficiency, which plain LU misses when the system happens to be
    # consistent
    try:
        beta = cho_solve(cho_factor(system), y)
    except np.linalg.LinAlgError as err:
        raise NumericalError(
            f"kernel system is singular or not positive definite "
            f"(alpha={alpha}): {err}"
        ) from err
    residual = float(np.linalg.norm(system @ beta - y))
    if residual > 1e-8 * max(float(np.linalg.norm(y)), 1e-30):
        raise NumericalError(
            f"kernel solve residual {residual:.3e} exceeds tolerance; "
            "the system is numerically singular (increase alpha)"
        )
    return beta


def squared_distances(A, B) -> np.ndarray:
    """Pairwise squared Euclidean distances, shape (len(A), len(B))."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    diff = A[:, None, :] - B[None, :, :]
    return np.sum(diff**2, axis=-1)


@dataclass(frozen=True)
class KernelModel:
    """Kernel ridge classifier backed by the fitted circuit kernel.

    ``delta_scale`` maps raw pair distances into the phase interval the
    cosine series lives on (the largest training pairwise distance goes to
    pi); it is part of the model and applied again at prediction time, so
    on raw data the kernel is exp(-delta_scale^2 d^2 / (2 sigma^2)).
    """

    beta: np.ndarray
    support: np.ndarray
    observable: KernelObservable
    alpha: float
    delta_scale: float

    @property
    def sigma(self) -> float:
        return self.observable.sigma


def fit_kernel_classifier(
    X,
    y,
    n: int,
    sigma: float,
    alpha: float,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> KernelModel:
    """Fit the circuit kernel for sigma, then ridge-solve for the classifier."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ValueError(f"{X.shape[0]} points but {y.size} labels")
    obs = fit_kernel_observable(n, sigma, grid=default_delta_grid(grid_points))
    distances = np.sqrt(squared_distances(X, X))
    max_dist = float(np.max(distances))
    delta_scale = (np.pi / max_dist) if max_dist > 0 else 1.0
    gram = kernel_circuit_response(n, (delta_scale * distances).ravel(), np.asarray(obs.weights))
    gram = np.asarray(gram).reshape(X.shape[0], X.shape[0])
    gram = 0.5 * (gram + gram.T)  # response is even in delta; symmetrise roundoff
    beta = ridge_solve(gram, y, alpha)
    return KernelModel(
        beta=beta, support=X, observable=obs, alpha=float(alpha), delta_scale=delta_scale
    )


def kernel_predict(model: KernelModel, X) -> np.ndarray:
    """Decision values sum_i beta_i k(x_i, x) for each row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    deltas = model.delta_scale * np.sqrt(squared_distances(X, model.support))
    k_new = np.asarray(
        kernel_circuit_response(model.observable.n, deltas.ravel(), np.asarray(model.observable.weights))
    ).reshape(X.shape[0], model.support.shape[0])
    return k_new @ model.beta


def kernel_classify(model: KernelModel, X) -> np.ndarray:
    """Labels in {-1, +1}; zero decision values map to +1."""
    return np.where(kernel_predict(model, X) >= 0, 1, -1)
