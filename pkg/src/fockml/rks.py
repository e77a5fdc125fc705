"""Random kitchen sinks with cosine features sampled from the circuit.

The same two-mode circuit used for direct kernel sampling can isolate a
single cosine: the n+1 outcome probabilities at phase u span all even
trigonometric polynomials of degree n, so for any k <= n there is a weight
vector making the weighted outcome sum exactly sqrt(2) cos(k u).  Feeding
randomized phases u = gamma (w . x + b) then produces random Fourier
features for the Gaussian kernel of resolution sigma = 1 / (k gamma); all
k = 1 .. n are available from the same measured probabilities, so one run
of the circuit serves n kernel resolutions at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import NumericalError
from .kernel import two_mode_outcome_probabilities

ISOLATION_GRID_POINTS = 101

# feature-matrix assembly is chunked to bound the temporary (rows, n+1) tables
_CHUNK_ROWS = 200_000


@lru_cache(maxsize=None)
def isolation_weights(n: int, k: int) -> tuple[float, ...]:
    """Outcome weights making the circuit output sqrt(2) cos(k u) exactly.

    Solved once per (n, k) by least squares on a 101-point phase grid over
    [0, 2 pi); the cosine lies in the span of the outcome probabilities, so
    the residual is numerically zero.
    """
    if k < 1 or k > n:
        raise ValueError(
            f"frequency k={k} is outside the circuit spectrum 1..{n}"
        )
    grid = np.linspace(0.0, 2.0 * np.pi, ISOLATION_GRID_POINTS, endpoint=False)
    table = two_mode_outcome_probabilities(n, grid)
    target = np.sqrt(2.0) * np.cos(k * grid)
    weights, *_ = np.linalg.lstsq(table, target, rcond=None)
    return tuple(float(w) for w in weights)


def isolated_cosine(n: int, k: int, u, weights=None) -> np.ndarray | float:
    """sqrt(2) cos(k u) computed by weighting circuit outcome probabilities."""
    w = np.asarray(isolation_weights(n, k) if weights is None else weights, dtype=float)
    scalar = np.isscalar(u) or np.ndim(u) == 0
    values = two_mode_outcome_probabilities(n, u) @ w
    return float(values[0]) if scalar else values


@dataclass(frozen=True)
class RandomFeatureSet:
    """Frozen random draws defining one batch of Fourier features.

    w rows come from a standard spherical Gaussian and b from
    Uniform[0, 2 pi); both are reproducible from the seed, with one PRNG
    stream per feature index so parallel and serial assembly agree
    bit-for-bit.  ``k`` scales the base resolution gamma to an effective
    kernel resolution sigma = 1 / (k gamma).
    """

    R: int
    w: np.ndarray  # (R, data_dim)
    b: np.ndarray  # (R,)
    gamma: float
    k: int
    seed: int

    @property
    def data_dim(self) -> int:
        return self.w.shape[1]

    @property
    def sigma(self) -> float:
        return 1.0 / (self.k * self.gamma)

    def with_k(self, k: int) -> "RandomFeatureSet":
        return RandomFeatureSet(self.R, self.w, self.b, self.gamma, int(k), self.seed)

    def encoded_phases(self, X) -> np.ndarray:
        """u_{i,r} = gamma (w_r . x_i + b_r), shape (N, R)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.data_dim:
            raise ValueError(
                f"data has {X.shape[1]} features, draws were made for {self.data_dim}"
            )
        return self.gamma * (X @ self.w.T + self.b)

    def to_json_dict(self) -> dict:
        return {
            "R": self.R,
            "w": self.w.tolist(),
            "b": self.b.tolist(),
            "gamma": self.gamma,
            "k": self.k,
            "seed": self.seed,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "RandomFeatureSet":
        return RandomFeatureSet(
            R=int(d["R"]),
            w=np.asarray(d["w"], dtype=float),
            b=np.asarray(d["b"], dtype=float),
            gamma=float(d["gamma"]),
            k=int(d["k"]),
            seed=int(d["seed"]),
        )


def sample_feature_set(
    R: int, data_dim: int, gamma: float, k: int, seed: int
) -> RandomFeatureSet:
    """Draw R random features; feature r uses its own seeded substream."""
    if R < 1:
        raise ValueError("need at least one feature")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    w = np.empty((R, data_dim))
    b = np.empty(R)
    for r in range(R):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        w[r] = rng.standard_normal(data_dim)
        b[r] = rng.uniform(0.0, 2.0 * np.pi)
    return RandomFeatureSet(R=R, w=w, b=b, gamma=float(gamma), k=int(k), seed=int(seed))


def feature_matrix(X, fs: RandomFeatureSet, n: int = 10) -> np.ndarray:
    """Circuit-sampled feature matrix, entry (i, r) = sqrt(2/R) cos(k u_{i,r}).

    Every entry goes through the n-photon probability table and the (n, k)
    isolation weights, i.e. the route a photonic sampler would take.
    """
    phases = fs.encoded_phases(X)
    weights = np.asarray(isolation_weights(n, fs.k))
    flat = phases.ravel()
    out = np.empty(flat.size)
    for start in range(0, flat.size, _CHUNK_ROWS):
        chunk = flat[start : start + _CHUNK_ROWS]
        out[start : start + _CHUNK_ROWS] = (
            two_mode_outcome_probabilities(n, chunk) @ weights
        )
    return out.reshape(phases.shape) / np.sqrt(fs.R)


def multi_resolution_features(
    X, fs: RandomFeatureSet, n: int, ks
) -> dict[int, np.ndarray]:
    """Feature matrices for several frequencies from one probability table.

    The phases (and hence the simulated measurements) depend only on
    (w, b, gamma); each k is just a different weighting of the same table,
    so requesting many resolutions costs one table, not one per k.
    """
    phases = fs.encoded_phases(X)
    flat = phases.ravel()
    weight_rows = np.stack([np.asarray(isolation_weights(n, int(k))) for k in ks])
    out = np.empty((len(weight_rows), flat.size))
    for start in range(0, flat.size, _CHUNK_ROWS):
        chunk = flat[start : start + _CHUNK_ROWS]
        table = two_mode_outcome_probabilities(n, chunk)
        out[:, start : start + _CHUNK_ROWS] = weight_rows @ table.T
    scale = 1.0 / np.sqrt(fs.R)
    return {
        int(k): out[i].reshape(phases.shape) * scale for i, k in enumerate(ks)
    }


@dataclass(frozen=True)
class RksModel:
    """Linear ridge model on random circuit features."""

    coefficients: np.ndarray  # (R,)
    feature_set: RandomFeatureSet
    alpha: float
    n_photons: int


def rks_train(X, y, fs: RandomFeatureSet, alpha: float, n: int = 10) -> RksModel:
    """Solve the R x R regularized normal equations (z'z + alpha I) c = z'y."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ValueError(f"{X.shape[0]} points but {y.size} labels")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    z = feature_matrix(X, fs, n=n)
    system = z.T @ z + alpha * np.eye(fs.R)
    rhs = z.T @ y
    # Cholesky detects the rank-deficient case (alpha = 0 with R > N),
    # which LU would silently "solve" because the system is consistent
    try:
        coeffs = cho_solve(cho_factor(system), rhs)
    except np.linalg.LinAlgError as err:
        raise NumericalError(
            f"normal equations are singular (alpha={alpha}, R={fs.R}, "
            f"N={X.shape[0]}): {err}"
        ) from err
    residual = float(np.linalg.norm(system @ coeffs - rhs))
    if residual > 1e-8 * max(float(np.linalg.norm(rhs)), 1e-30):
        raise NumericalError(
            f"normal-equation residual {residual:.3e} exceeds tolerance; "
            "with alpha = 0 and R > N the system is singular"
        )
    return RksModel(
        coefficients=coeffs, feature_set=fs, alpha=float(alpha), n_photons=n
    )


def rks_predict(model: RksModel, X) -> np.ndarray:
    """Decision values c . z(x) for each row of X."""
    z = feature_matrix(X, model.feature_set, n=model.n_photons)
    return z @ model.coefficients


def rks_classify(model: RksModel, X) -> np.ndarray:
    """Labels in {-1, +1}; zero decision values map to +1."""
    return np.where(rks_predict(model, X) >= 0, 1, -1)
