"""Trainable beam-splitter meshes and data-encoding phase layers.

A circuit is an alternating product of trainable mesh unitaries and
diagonal data-encoding layers,

    U(x, params) = W_{L+1} . S_L(x) . ... . S_1(x) . W_1,

acting on m optical modes.  Each mesh W is a triangular arrangement of
two-mode blocks in the Reck style with m(m-1) angles; each encoding layer
S(x) applies per-mode phases that are linear forms of the data features.

Frozen conventions (trained parameters depend on them):

* Two-mode block on adjacent modes (p, p+1):

      T(theta, phi) = [[e^{i phi} cos(theta), -sin(theta)],
                       [e^{i phi} sin(theta),  cos(theta)]]

  All angles zero gives the identity.
* Block order: a triangular sweep; for column c = 1 .. m-1 the blocks act
  on pairs (c-1, c), (c-2, c-1), ..., (0, 1), in that application order.
  The flat parameter vector is [theta_1, phi_1, theta_2, phi_2, ...]
  following that block order, giving m(m-1) parameters per mesh.
* The first block is applied to the state first, i.e. the returned matrix
  is T_K @ ... @ T_2 @ T_1.
* Mode indices are 0-based throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .fock import MAX_PHOTONS, FockState, fock_state, photon_count

MESH_UNITARY_TOL = 1e-12

VARIANT_SINGLE = "single"
VARIANT_SERIES_1D = "series_1d"
VARIANT_PARALLEL_1D = "parallel_1d"
VARIANT_SERIES_FEATURES = "series_features"
VARIANT_SERIES_SUBSETS = "series_subsets"
VARIANT_PARALLEL_FEATURES = "parallel_features"

# layer = tuple of (mode, linear-form coefficients over the data features)
Placement = tuple[int, tuple[float, ...]]
Layer = tuple[Placement, ...]


@dataclass(frozen=True)
class EncodingLayout:
    """Where and how data features enter the circuit as phase shifts.

    ``layers[L]`` lists ``(mode, coeffs)`` pairs: in encoding layer L, the
    given mode receives the phase ``coeffs . x``.  Constructors below build
    the supported variants; ``data_dim`` is the expected feature dimension.
    """

    variant: str
    data_dim: int
    layers: tuple[Layer, ...]

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def max_mode(self) -> int:
        return max((mode for layer in self.layers for mode, _ in layer), default=0)

    @staticmethod
    def single() -> "EncodingLayout":
        """One phase x on the first mode of a single layer."""
        return EncodingLayout(VARIANT_SINGLE, 1, (((0, (1.0,)),),))

    @staticmethod
    def series_1d(m: int) -> "EncodingLayout":
        """One layer; mode k-1 carries the phase k*x for k = 1 .. m-1.

        The last mode carries no phase, so the n-photon frequency support
        is exactly {-(m-1)n, ..., (m-1)n}.
        """
        if m < 2:
            raise ValueError("series_1d needs at least 2 modes")
        layer = tuple((k, (float(k + 1),)) for k in range(m - 1))
        return EncodingLayout(VARIANT_SERIES_1D, 1, (layer,))

    @staticmethod
    def parallel_1d(m: int) -> "EncodingLayout":
        """m-1 layers, each applying the phase x on the first mode."""
        if m < 2:
            raise ValueError("parallel_1d needs at least 2 modes")
        layer: Layer = ((0, (1.0,)),)
        return EncodingLayout(VARIANT_PARALLEL_1D, 1, (layer,) * (m - 1))

    @staticmethod
    def series_features(data_dim: int) -> "EncodingLayout":
        """One layer; feature j enters as a phase on mode j.

        This is the multi-feature layout used for 2-D classification: with
        n photons its frequency vectors satisfy |w_1 + ... + w_D| <= n
        (the signed total degree is capped by the photon number).
        """
        if data_dim < 1:
            raise ValueError("need at least one feature")
        layer = tuple(
            (j, tuple(1.0 if i == j else 0.0 for i in range(data_dim)))
            for j in range(data_dim)
        )
        return EncodingLayout(VARIANT_SERIES_FEATURES, data_dim, (layer,))

    @staticmethod
    def series_subsets(data_dim: int) -> "EncodingLayout":
        """One layer with 2^d - 1 phases, one per nonempty feature subset sum.

        Mode i carries the i-th subset sum (singletons first, then pairs,
        ...), which makes the full d-dimensional frequency grid reachable.
        """
        if data_dim < 1:
            raise ValueError("need at least one feature")
        subsets = [
            combo
            for size in range(1, data_dim + 1)
            for combo in combinations(range(data_dim), size)
        ]
        layer = tuple(
            (i, tuple(1.0 if j in combo else 0.0 for j in range(data_dim)))
            for i, combo in enumerate(subsets)
        )
        return EncodingLayout(VARIANT_SERIES_SUBSETS, data_dim, (layer,))

    @staticmethod
    def parallel_features(data_dim: int) -> "EncodingLayout":
        """d layers; layer j applies feature j as a phase on the first mode.

        Also reaches the full d-dimensional frequency grid, with only d
        phase shifters but d+1 trainable meshes.
        """
        if data_dim < 1:
            raise ValueError("need at least one feature")
        layers = tuple(
            ((0, tuple(1.0 if i == j else 0.0 for i in range(data_dim))),)
            for j in range(data_dim)
        )
        return EncodingLayout(VARIANT_PARALLEL_FEATURES, data_dim, layers)

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant,
            "data_dim": self.data_dim,
            "layers": [
                [[mode, list(coeffs)] for mode, coeffs in layer]
                for layer in self.layers
            ],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "EncodingLayout":
        layers = tuple(
            tuple((int(mode), tuple(float(c) for c in coeffs)) for mode, coeffs in layer)
            for layer in d["layers"]
        )
        return EncodingLayout(str(d["variant"]), int(d["data_dim"]), layers)


def mesh_parameter_count(m: int) -> int:
    """m(m-1): two angles for each of the m(m-1)/2 two-mode blocks."""
    return m * (m - 1)


def reck_pairs(m: int) -> list[tuple[int, int]]:
    """Adjacent-mode pairs in the triangular application order."""
    pairs = []
    for col in range(1, m):
        for row in range(col, 0, -1):
            pairs.append((row - 1, row))
    return pairs


def _two_mode_block(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    e = np.exp(1j * phi)
    return np.array([[e * c, -s], [e * s, c]])


def reck_unitary(params, m: int) -> np.ndarray:
    """Mesh unitary from a flat vector of m(m-1) angles (radians).

    Blocks are applied in the order of :func:`reck_pairs`; params[2k] and
    params[2k+1] are the k-th block's (theta, phi).  All-zero parameters
    give the identity.
    """
    params = np.asarray(params, dtype=float).ravel()
    expected = mesh_parameter_count(m)
    if params.size != expected:
        raise ValueError(
            f"mesh for {m} modes needs {expected} angles, got {params.size}"
        )
    u = np.eye(m, dtype=complex)
    for k, (p, q) in enumerate(reck_pairs(m)):
        block = _two_mode_block(params[2 * k], params[2 * k + 1])
        # left-multiply by the block embedded on modes (p, q): only rows
        # p and q of the running product change
        u[[p, q], :] = block @ u[[p, q], :]
    return u


def _linear_forms(layout: EncodingLayout, layer: int, m: int) -> np.ndarray:
    """Per-mode feature coefficients for one layer, shape (m, data_dim)."""
    if not 0 <= layer < layout.n_layers:
        raise ValueError(f"layer {layer} out of range for {layout.n_layers} layers")
    forms = np.zeros((m, layout.data_dim))
    for mode, coeffs in layout.layers[layer]:
        if mode >= m:
            raise ValueError(
                f"layout places a phase on mode {mode} but the circuit has {m} modes"
            )
        forms[mode] = coeffs
    return forms


def _as_feature_vector(x, data_dim: int) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(x, dtype=float))
    if vec.shape != (data_dim,):
        raise ValueError(
            f"data point has shape {np.shape(x)}, expected {data_dim} feature(s)"
        )
    return vec


def encoding_phases(x, layout: EncodingLayout, layer: int, m: int) -> np.ndarray:
    """Per-mode phase values (radians) imprinted by one encoding layer."""
    vec = _as_feature_vector(x, layout.data_dim)
    return _linear_forms(layout, layer, m) @ vec


def encoding_unitary(x, layout: EncodingLayout, layer: int, m: int) -> np.ndarray:
    """Diagonal unitary exp(i * phase_k) applied by one encoding layer."""
    return np.diag(np.exp(1j * encoding_phases(x, layout, layer, m)))


@dataclass(frozen=True)
class CircuitSpec:
    """Full description of a circuit: modes, input photons, encoding, angles.

    ``mesh_params`` holds one flat angle tuple per trainable mesh; there is
    always one more mesh than encoding layers.  Optional ``feature_scale``
    and ``feature_offset`` apply an affine per-feature rescale
    x -> scale * x + offset before the encoding forms (off by default).
    """

    m: int
    input_state: FockState
    layout: EncodingLayout
    mesh_params: tuple[tuple[float, ...], ...]
    feature_scale: tuple[float, ...] | None = None
    feature_offset: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "input_state", fock_state(self.input_state))
        if len(self.input_state) != self.m:
            raise ValueError(
                f"input state has {len(self.input_state)} modes, circuit has {self.m}"
            )
        if photon_count(self.input_state) > MAX_PHOTONS:
            raise ValueError(
                f"input photon number exceeds supported maximum {MAX_PHOTONS}"
            )
        expected_meshes = self.layout.n_layers + 1
        if len(self.mesh_params) != expected_meshes:
            raise ValueError(
                f"{self.layout.n_layers} encoding layer(s) need {expected_meshes} "
                f"meshes, got {len(self.mesh_params)}"
            )
        per_mesh = mesh_parameter_count(self.m)
        frozen = []
        for i, angles in enumerate(self.mesh_params):
            angles = tuple(float(a) for a in np.asarray(angles, dtype=float).ravel())
            if len(angles) != per_mesh:
                raise ValueError(
                    f"mesh {i} has {len(angles)} angles, expected {per_mesh}"
                )
            frozen.append(angles)
        object.__setattr__(self, "mesh_params", tuple(frozen))
        if self.layout.max_mode() >= self.m:
            raise ValueError(
                f"layout uses mode {self.layout.max_mode()} but the circuit "
                f"has {self.m} modes"
            )
        for name in ("feature_scale", "feature_offset"):
            val = getattr(self, name)
            if val is not None:
                val = tuple(float(v) for v in val)
                if len(val) != self.layout.data_dim:
                    raise ValueError(
                        f"{name} has {len(val)} entries, expected {self.layout.data_dim}"
                    )
                object.__setattr__(self, name, val)

    @property
    def n_photons(self) -> int:
        return photon_count(self.input_state)

    @property
    def n_meshes(self) -> int:
        return len(self.mesh_params)

    @property
    def n_mesh_parameters(self) -> int:
        return self.n_meshes * mesh_parameter_count(self.m)

    def transform_features(self, x) -> np.ndarray:
        """Apply the optional affine feature rescale to a data point."""
        vec = _as_feature_vector(x, self.layout.data_dim)
        if self.feature_scale is not None:
            vec = vec * np.asarray(self.feature_scale)
        if self.feature_offset is not None:
            vec = vec + np.asarray(self.feature_offset)
        return vec

    def with_mesh_params(self, mesh_params) -> "CircuitSpec":
        return replace(self, mesh_params=tuple(tuple(p) for p in mesh_params))

    @staticmethod
    def zero_meshes(m: int, input_state, layout: EncodingLayout, **kwargs) -> "CircuitSpec":
        """Spec with all mesh angles zero (every mesh is the identity)."""
        per_mesh = (0.0,) * mesh_parameter_count(m)
        meshes = (per_mesh,) * (layout.n_layers + 1)
        return CircuitSpec(m, fock_state(input_state), layout, meshes, **kwargs)

    def to_json_dict(self) -> dict:
        d = {
            "m": self.m,
            "input_state": list(self.input_state),
            "layout": self.layout.to_json_dict(),
            "mesh_params": [list(p) for p in self.mesh_params],
        }
        if self.feature_scale is not None:
            d["feature_scale"] = list(self.feature_scale)
        if self.feature_offset is not None:
            d["feature_offset"] = list(self.feature_offset)
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "CircuitSpec":
        return CircuitSpec(
            m=int(d["m"]),
            input_state=fock_state(d["input_state"]),
            layout=EncodingLayout.from_json_dict(d["layout"]),
            mesh_params=tuple(tuple(float(a) for a in p) for p in d["mesh_params"]),
            feature_scale=tuple(d["feature_scale"]) if "feature_scale" in d else None,
            feature_offset=tuple(d["feature_offset"]) if "feature_offset" in d else None,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @staticmethod
    def from_json(text: str) -> "CircuitSpec":
        return CircuitSpec.from_json_dict(json.loads(text))


def mode_unitary(spec: CircuitSpec, x) -> np.ndarray:
    """The m x m unitary W_{L+1} S_L(x) ... S_1(x) W_1 at data point x."""
    vec = spec.transform_features(x)
    u = reck_unitary(spec.mesh_params[0], spec.m)
    for layer in range(spec.layout.n_layers):
        phases = encoding_phases(vec, spec.layout, layer, spec.m)
        u = np.exp(1j * phases)[:, None] * u
        u = reck_unitary(spec.mesh_params[layer + 1], spec.m) @ u
    return u


def fit_feature_rescale(X, target: tuple[float, float] = (0.0, 2 * np.pi)):
    """Per-feature affine map sending observed [min, max] onto ``target``.

    Returns (scale, offset) tuples for use as CircuitSpec feature fields.
    Constant features map to the midpoint of the target interval.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = hi - lo
    width = target[1] - target[0]
    scale = np.where(span > 0, width / np.where(span > 0, span, 1.0), 0.0)
    offset = np.where(span > 0, target[0] - lo * scale, 0.5 * (target[0] + target[1]))
    return tuple(float(s) for s in scale), tuple(float(o) for o in offset)
