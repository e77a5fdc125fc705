"""Fock bases, matrix permanents, and lifting of mode unitaries to photon space.

An m-mode linear optical element is an m x m unitary acting on mode
operators.  With n photons at the input, the physical state lives in the
n-photon Fock space of dimension binomial(n+m-1, n); the lifted unitary on
that space has entries built from permanents of submatrices of the mode
unitary.  This module provides the basis enumeration, the permanent
(Ryser's formula with Gray-code subset iteration), single transition
amplitudes, and the full lift.

Conventions frozen here:

* Fock states are plain tuples of non-negative ints, one entry per mode.
* A basis is ordered reverse-lexicographically on occupation vectors, so
  (n, 0, ..., 0) comes first and (0, ..., 0, n) last.  Observables index
  into this order, so it must never change.
* Factorial normalisation uses a precomputed table up to 20 photons;
  larger photon numbers are rejected rather than silently losing precision.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np

from .exceptions import NumericalError

# Largest supported total photon number; double precision handles these
# factorials exactly (20! < 2^63).
MAX_PHOTONS = 20

_FACTORIALS = np.array([math.factorial(k) for k in range(MAX_PHOTONS + 1)], dtype=float)

UNITARY_TOL = 1e-10

FockState = tuple[int, ...]


def fock_state(occupations) -> FockState:
    """Validate and normalise an occupation sequence to a tuple of ints."""
    occ = tuple(int(v) for v in occupations)
    if len(occ) == 0:
        raise ValueError("a Fock state needs at least one mode")
    if any(v < 0 for v in occ):
        raise ValueError(f"occupations must be non-negative, got {occ}")
    return occ


def photon_count(state: FockState) -> int:
    return int(sum(state))


def _compositions_revlex(m: int, n: int):
    """All compositions of n into m parts, reverse-lexicographically."""
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions_revlex(m - 1, n - first):
            yield (first,) + rest


class FockBasis:
    """Ordered basis of all m-mode Fock states with total photon number n.

    The ordering (reverse-lexicographic) is part of the public contract:
    observable weight vectors index into it.
    """

    def __init__(self, m: int, n: int):
        if m < 1:
            raise ValueError(f"mode count must be >= 1, got {m}")
        if n < 0:
            raise ValueError(f"photon count must be >= 0, got {n}")
        if n > MAX_PHOTONS:
            raise ValueError(
                f"photon count {n} exceeds supported maximum {MAX_PHOTONS}"
            )
        self.m = m
        self.n = n
        self.states: tuple[FockState, ...] = tuple(_compositions_revlex(m, n))
        self.index: dict[FockState, int] = {s: i for i, s in enumerate(self.states)}
        # occupation matrix, shape (size, m); reused by lifts and observables
        self.occupations = np.array(self.states, dtype=np.int64).reshape(len(self.states), m)
        self._row_indices: np.ndarray | None = None
        self._norm_factors: np.ndarray | None = None

    def _lift_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached (repeated mode indices, normalisation factors) per state."""
        if self._row_indices is None:
            self._row_indices = np.stack(
                [_repeat_indices(s) for s in self.states]
            ) if self.n > 0 else np.zeros((self.size, 0), dtype=np.int64)
            self._norm_factors = np.array([_norm_factor(s) for s in self.states])
        return self._row_indices, self._norm_factors

    @property
    def size(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i: int) -> FockState:
        return self.states[i]

    def index_of(self, state) -> int:
        key = fock_state(state)
        try:
            return self.index[key]
        except KeyError:
            raise ValueError(
                f"state {key} is not in the ({self.m} modes, {self.n} photons) basis"
            ) from None

    def __repr__(self) -> str:
        return f"FockBasis(m={self.m}, n={self.n}, size={self.size})"


def enumerate_fock_basis(m: int, n: int) -> FockBasis:
    """Basis of all compositions of n photons into m modes (reverse-lex order)."""
    return FockBasis(m, n)


def permanent(a) -> complex:
    """Permanent of a square matrix via Ryser's formula with Gray-code updates.

    O(2^k * k) for a k x k matrix; the 0 x 0 permanent is 1 by convention.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent requires a square matrix, got shape {a.shape}")
    k = a.shape[0]
    if k == 0:
        return complex(1.0)
    return complex(batch_permanent(a[None, :, :])[0])


def batch_permanent(stack) -> np.ndarray:
    """Permanents of a stack of equally-sized square matrices, shape (B, k, k).

    Same Ryser/Gray-code scheme as :func:`permanent`, vectorised over the
    batch axis so lifting a unitary costs one pass over subsets instead of
    d^2 separate passes.
    """
    stack = np.asarray(stack, dtype=complex)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise ValueError(f"expected shape (B, k, k), got {stack.shape}")
    batch, k = stack.shape[0], stack.shape[1]
    if k == 0:
        return np.ones(batch, dtype=complex)
    if k > MAX_PHOTONS:
        raise ValueError(f"matrix size {k} exceeds supported maximum {MAX_PHOTONS}")

    row_sums = np.zeros((batch, k), dtype=complex)
    totals = np.zeros(batch, dtype=complex)
    gray = 0
    for i in range(1, 2**k):
        new_gray = i ^ (i >> 1)
        changed = new_gray ^ gray
        col = changed.bit_length() - 1
        if new_gray & changed:
            row_sums += stack[:, :, col]
        else:
            row_sums -= stack[:, :, col]
        gray = new_gray
        prod = row_sums[:, 0].copy()
        for j in range(1, k):
            prod *= row_sums[:, j]
        if (k - gray.bit_count()) % 2:
            totals -= prod
        else:
            totals += prod
    return totals


def naive_permanent(a) -> complex:
    """Permutation-sum definition of the permanent; test oracle for k <= 7."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent requires a square matrix, got shape {a.shape}")
    k = a.shape[0]
    if k == 0:
        return complex(1.0)
    total = 0.0 + 0.0j
    rows = range(k)
    for sigma in permutations(range(k)):
        term = 1.0 + 0.0j
        for i in rows:
            term *= a[i, sigma[i]]
        total += term
    return complex(total)


def _repeat_indices(state: FockState) -> np.ndarray:
    """Mode index j repeated state[j] times, e.g. (2, 0, 1) -> [0, 0, 2]."""
    return np.repeat(np.arange(len(state)), state)


def _norm_factor(state: FockState) -> float:
    """1 / sqrt(prod_j state_j!)."""
    return 1.0 / math.sqrt(float(np.prod(_FACTORIALS[list(state)])))


def _check_photon_budget(n: int):
    if n > MAX_PHOTONS:
        raise ValueError(
            f"total photon number {n} exceeds supported maximum {MAX_PHOTONS}"
        )


def transition_amplitude(u, input_state, output_state) -> complex:
    """Amplitude <output| lifted(u) |input> for an m-mode unitary u.

    Builds the n x n matrix that repeats column j of u input_j times and
    row i output_i times, then returns its permanent divided by
    sqrt(prod_i output_i! * prod_j input_j!).
    """
    u = np.asarray(u, dtype=complex)
    inp = fock_state(input_state)
    out = fock_state(output_state)
    m = len(inp)
    if u.shape != (m, m):
        raise ValueError(f"unitary shape {u.shape} does not match {m} modes")
    if len(out) != m:
        raise ValueError(f"output state has {len(out)} modes, expected {m}")
    n_in, n_out = photon_count(inp), photon_count(out)
    if n_in != n_out:
        raise ValueError(
            f"photon number not conserved: input has {n_in}, output has {n_out}"
        )
    _check_photon_budget(n_in)
    if n_in == 0:
        return complex(1.0)
    sub = u[np.ix_(_repeat_indices(out), _repeat_indices(inp))]
    return complex(permanent(sub) * _norm_factor(inp) * _norm_factor(out))


def unitarity_deviation(u) -> float:
    """Frobenius-norm deviation of u'u from the identity."""
    u = np.asarray(u, dtype=complex)
    eye = np.eye(u.shape[0])
    return float(np.linalg.norm(u.conj().T @ u - eye))


def _require_unitary(u, m: int, tol: float = UNITARY_TOL):
    u = np.asarray(u, dtype=complex)
    if u.shape != (m, m):
        raise ValueError(f"expected a {m} x {m} matrix, got shape {u.shape}")
    dev = unitarity_deviation(u)
    if dev > tol:
        raise NumericalError(
            f"matrix is not unitary: Frobenius deviation {dev:.3e} exceeds {tol:.0e}"
        )
    return u


def lift_unitary(u, basis: FockBasis) -> np.ndarray:
    """Lift an m-mode unitary to the n-photon Fock space over `basis`.

    Entry [a, b] is the transition amplitude from basis state b to basis
    state a.  The result is unitary to the same tolerance as the input.
    """
    u = _require_unitary(u, basis.m)
    d, n = basis.size, basis.n
    _check_photon_budget(n)
    if n == 0:
        return np.ones((1, 1), dtype=complex)

    rows, norms = basis._lift_tables()  # rows: (d, n)
    # stack[a, b] = u[rows[a], :][:, rows[b]]
    stack = u[rows[:, None, :, None], rows[None, :, None, :]]
    perms = batch_permanent(stack.reshape(d * d, n, n)).reshape(d, d)
    return perms * np.outer(norms, norms)


def lift_column(u, basis: FockBasis, input_state) -> np.ndarray:
    """Column of the lifted unitary for a fixed input state (d amplitudes).

    Cheaper than :func:`lift_unitary` when only one input column is needed:
    d permanents instead of d^2.
    """
    u = _require_unitary(u, basis.m)
    inp = fock_state(input_state)
    if len(inp) != basis.m or photon_count(inp) != basis.n:
        raise ValueError(
            f"input state {inp} does not belong to the "
            f"({basis.m} modes, {basis.n} photons) basis"
        )
    d, n = basis.size, basis.n
    _check_photon_budget(n)
    if n == 0:
        return np.ones(1, dtype=complex)
    cols = _repeat_indices(inp)
    rows, norms = basis._lift_tables()  # rows: (d, n)
    stack = u[rows[:, :, None], cols[None, None, :]]
    perms = batch_permanent(stack)
    return perms * norms * norms[basis.index_of(inp)]
