"""Photon-number models: expectation values, spectra, and parameter counts.

The model value at a data point x is the expectation of a detector
observable after the circuit,

    f(x) = <input| U(x)' M U(x) |input>,

with M diagonal in the Fock basis.  Because every encoding layer is
diagonal with phases linear in x, f is a trigonometric polynomial in the
features; this module evaluates f efficiently (meshes lifted once, phases
applied per point), extracts its Fourier coefficients by exact discrete
inversion, counts trainable degrees of freedom for PNR and threshold
detectors, and draws finite-shot outcome samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitSpec, _linear_forms, reck_unitary
from .fock import FockBasis, FockState, enumerate_fock_basis, lift_column, lift_unitary

DETECTOR_PNR = "pnr"
DETECTOR_THRESHOLD = "threshold"

ClickPattern = tuple[int, ...]


def click_pattern(state: FockState) -> ClickPattern:
    """Threshold-detector outcome for a Fock state: 1 per mode with photons."""
    return tuple(1 if v > 0 else 0 for v in state)


def group_by_clicks(basis: FockBasis) -> dict[ClickPattern, tuple[int, ...]]:
    """Partition basis indices by click pattern.

    Patterns appear in order of first occurrence in the basis, which fixes
    the index order of threshold observable weights.
    """
    groups: dict[ClickPattern, list[int]] = {}
    for i, state in enumerate(basis.states):
        groups.setdefault(click_pattern(state), []).append(i)
    return {p: tuple(ix) for p, ix in groups.items()}


def n_click_patterns(m: int, n: int) -> int:
    """Number of distinct click patterns for n photons in m modes.

    For n >= 1 this is sum_{k=1}^{min(n,m)} C(m, k); the vacuum has the
    single all-zero pattern.
    """
    if n == 0:
        return 1
    return sum(math.comb(m, k) for k in range(1, min(n, m) + 1))


@dataclass(frozen=True)
class Observable:
    """Diagonal detector observable: a weight per outcome.

    PNR observables carry one weight per Fock basis state (in basis order);
    threshold observables carry one weight per click pattern (in order of
    first occurrence in the basis).  (m, n) tie the weights to a basis.
    """

    detector: str
    weights: tuple[float, ...]
    m: int
    n: int

    def __post_init__(self):
        if self.detector not in (DETECTOR_PNR, DETECTOR_THRESHOLD):
            raise ValueError(f"unknown detector type {self.detector!r}")
        object.__setattr__(
            self, "weights", tuple(float(w) for w in np.asarray(self.weights).ravel())
        )
        expected = self.n_outcomes(self.detector, self.m, self.n)
        if len(self.weights) != expected:
            raise ValueError(
                f"{self.detector} observable for (m={self.m}, n={self.n}) needs "
                f"{expected} weights, got {len(self.weights)}"
            )

    @staticmethod
    def n_outcomes(detector: str, m: int, n: int) -> int:
        if detector == DETECTOR_PNR:
            return math.comb(n + m - 1, n)
        return n_click_patterns(m, n)

    @staticmethod
    def pnr(m: int, n: int, weights) -> "Observable":
        return Observable(DETECTOR_PNR, tuple(weights), m, n)

    @staticmethod
    def threshold(m: int, n: int, weights) -> "Observable":
        return Observable(DETECTOR_THRESHOLD, tuple(weights), m, n)

    @staticmethod
    def uniform(m: int, n: int, value: float = 1.0, detector: str = DETECTOR_PNR) -> "Observable":
        return Observable(detector, (value,) * Observable.n_outcomes(detector, m, n), m, n)

    def with_weights(self, weights) -> "Observable":
        return Observable(self.detector, tuple(weights), self.m, self.n)

    def per_state_weights(self, basis: FockBasis) -> np.ndarray:
        """Weights expanded to one value per basis state.

        For threshold detectors every state in a click-pattern class gets
        that pattern's weight, which makes a threshold observable exactly a
        PNR observable constant on pattern classes.
        """
        if (basis.m, basis.n) != (self.m, self.n):
            raise ValueError(
                f"observable built for (m={self.m}, n={self.n}) cannot weight a "
                f"(m={basis.m}, n={basis.n}) basis"
            )
        w = np.asarray(self.weights)
        if self.detector == DETECTOR_PNR:
            return w.copy()
        expanded = np.empty(basis.size)
        for pat_idx, (_, state_indices) in enumerate(group_by_clicks(basis).items()):
            expanded[list(state_indices)] = w[pat_idx]
        return expanded

    def to_json_dict(self) -> dict:
        return {
            "detector": self.detector,
            "weights": list(self.weights),
            "m": self.m,
            "n": self.n,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "Observable":
        return Observable(str(d["detector"]), tuple(d["weights"]), int(d["m"]), int(d["n"]))


class ModelEvaluator:
    """Evaluates one circuit's outcome probabilities over many data points.

    Meshes are lifted to the photon space once at construction; per data
    point only diagonal phases and d x d matrix products remain, so batch
    evaluation over a dataset is cheap.  Instances are immutable after
    construction and safe for concurrent read-only use.
    """

    def __init__(self, spec: CircuitSpec):
        self.spec = spec
        self.basis = enumerate_fock_basis(spec.m, spec.n_photons)
        meshes = [reck_unitary(p, spec.m) for p in spec.mesh_params]
        self._input_column = lift_column(meshes[0], self.basis, spec.input_state)
        self._lifted = [lift_unitary(u, self.basis) for u in meshes[1:]]
        # per layer: (d, data_dim) matrix G with lifted phase G @ x per state
        self._generators = [
            self.basis.occupations @ _linear_forms(spec.layout, layer, spec.m)
            for layer in range(spec.layout.n_layers)
        ]

    def _as_points(self, X) -> np.ndarray:
        pts = np.asarray(X, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] != self.spec.layout.data_dim:
            raise ValueError(
                f"expected points of dimension {self.spec.layout.data_dim}, "
                f"got array of shape {np.shape(X)}"
            )
        if self.spec.feature_scale is not None:
            pts = pts * np.asarray(self.spec.feature_scale)
        if self.spec.feature_offset is not None:
            pts = pts + np.asarray(self.spec.feature_offset)
        return pts

    def amplitudes(self, X) -> np.ndarray:
        """Output-state amplitudes for each data point, shape (N, d)."""
        pts = self._as_points(X)
        amps = np.broadcast_to(self._input_column, (pts.shape[0], self.basis.size)).copy()
        for generator, lifted in zip(self._generators, self._lifted):
            amps *= np.exp(1j * pts @ generator.T)
            amps = amps @ lifted.T
        return amps

    def probabilities(self, X) -> np.ndarray:
        """PNR outcome probabilities for each data point, shape (N, d)."""
        return np.abs(self.amplitudes(X)) ** 2

    def expectation(self, obs: Observable, X) -> np.ndarray:
        """Observable expectation at each data point, shape (N,)."""
        return self.probabilities(X) @ obs.per_state_weights(self.basis)


def _check_pairing(spec: CircuitSpec, obs: Observable):
    if (obs.m, obs.n) != (spec.m, spec.n_photons):
        raise ValueError(
            f"observable for (m={obs.m}, n={obs.n}) does not match circuit with "
            f"m={spec.m} and {spec.n_photons} photons"
        )


def evaluate_model(spec: CircuitSpec, obs: Observable, x) -> float:
    """Model value f(x) at a single data point."""
    _check_pairing(spec, obs)
    return float(ModelEvaluator(spec).expectation(obs, np.atleast_2d(np.asarray(x, dtype=float)))[0])


def batch_evaluate(spec: CircuitSpec, obs: Observable, X) -> np.ndarray:
    """Model values over a batch of data points."""
    _check_pairing(spec, obs)
    return ModelEvaluator(spec).expectation(obs, X)


@dataclass(frozen=True)
class FourierCoefficients:
    """Coefficients c_w of f(x) = sum_w c_w e^{iwx}, w in {-degree..degree}."""

    degree: int
    values: np.ndarray  # length 2*degree + 1; entry [w + degree] is c_w

    def __getitem__(self, omega: int) -> complex:
        if abs(omega) > self.degree:
            raise KeyError(f"frequency {omega} outside band [-{self.degree}, {self.degree}]")
        return complex(self.values[omega + self.degree])

    @property
    def omegas(self) -> range:
        return range(-self.degree, self.degree + 1)

    def conjugate_symmetry_error(self) -> float:
        """max_w |c_{-w} - conj(c_w)|; zero for real-valued models."""
        return float(np.max(np.abs(self.values[::-1] - np.conj(self.values))))

    def reconstruct(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        omegas = np.arange(-self.degree, self.degree + 1)
        return np.real(np.exp(1j * np.outer(x, omegas)) @ self.values)

    def to_csv(self) -> str:
        lines = ["omega,real,imag"]
        for w in self.omegas:
            c = self[w]
            lines.append(f"{w},{c.real!r},{c.imag!r}")
        return "\n".join(lines) + "\n"


def coefficients_from_samples(samples, degree: int) -> FourierCoefficients:
    """Exact discrete inversion from 2*degree+1 equispaced samples on [0, 2pi).

    ``samples[t]`` must be f(2 pi t / (2 degree + 1)).  Exact for
    trigonometric polynomials of degree <= ``degree``.
    """
    samples = np.asarray(samples, dtype=complex).ravel()
    count = 2 * degree + 1
    if samples.size != count:
        raise ValueError(f"need {count} samples for degree {degree}, got {samples.size}")
    spectrum = np.fft.fft(samples) / count
    order = [w % count for w in range(-degree, degree + 1)]
    return FourierCoefficients(degree, spectrum[order])


def _require_unscaled(spec: CircuitSpec):
    if spec.feature_scale is not None:
        raise ValueError(
            "coefficient extraction requires integer frequencies; "
            "remove feature_scale from the spec first"
        )


def extract_fourier_coefficients(spec: CircuitSpec, obs: Observable, degree: int) -> FourierCoefficients:
    """Fourier coefficients of a one-feature model, exact up to ``degree``.

    ``degree`` must be at least the model's true band limit (photon count
    times the largest encoding multiplier is always safe).
    """
    _check_pairing(spec, obs)
    _require_unscaled(spec)
    if spec.layout.data_dim != 1:
        raise ValueError("use extract_fourier_coefficients_2d for multi-feature layouts")
    count = 2 * degree + 1
    grid = 2 * np.pi * np.arange(count) / count
    values = batch_evaluate(spec, obs, grid[:, None])
    return coefficients_from_samples(values, degree)


def extract_fourier_coefficients_2d(spec: CircuitSpec, obs: Observable, degree: int) -> np.ndarray:
    """Coefficient grid c[w1 + degree, w2 + degree] for a two-feature model."""
    _check_pairing(spec, obs)
    _require_unscaled(spec)
    if spec.layout.data_dim != 2:
        raise ValueError("this extraction handles exactly two features")
    count = 2 * degree + 1
    axis = 2 * np.pi * np.arange(count) / count
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    values = batch_evaluate(spec, obs, pts).reshape(count, count)
    spectrum = np.fft.fft2(values) / count**2
    order = [w % count for w in range(-degree, degree + 1)]
    return spectrum[np.ix_(order, order)]


def dof_pnr(m: int, n: int) -> int:
    """Trainable real parameters with PNR detectors: 2m(m-1) + C(n+m-1, n)."""
    return 2 * m * (m - 1) + math.comb(n + m - 1, n)


def dof_threshold(m: int, n: int) -> int:
    """Trainable real parameters with threshold detectors.

    2m(m-1) + sum_{k=1}^{min(n,m)} C(m, k); the sum counts click patterns
    and saturates once n >= m, so expressive power stops growing there.
    (For n = 0 the empty sum makes this 2m(m-1), one less than the single
    vacuum pattern would suggest.)
    """
    return 2 * m * (m - 1) + sum(math.comb(m, k) for k in range(1, min(n, m) + 1))


def m_min(n: int) -> int:
    """Minimum real parameters needed to control a degree-n series: 2n + 1."""
    return 2 * n + 1


def sample_counts(spec: CircuitSpec, x, shots: int, seed: int) -> dict[FockState, int]:
    """Multinomial PNR outcome counts from the exact distribution at x.

    Reproducible: the same (spec, x, shots, seed) always gives the same
    counts.  Outcomes with zero counts are omitted.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    evaluator = ModelEvaluator(spec)
    probs = evaluator.probabilities(np.atleast_2d(np.asarray(x, dtype=float)))[0]
    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"outcome probabilities sum to {total}, expected 1")
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs / total)
    return {
        evaluator.basis.states[i]: int(c) for i, c in enumerate(draws) if c > 0
    }
