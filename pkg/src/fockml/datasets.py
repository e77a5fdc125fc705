"""Toy 2-D classification datasets and seeded train/test splitting.

The three generators (linear blobs, concentric circles, interleaving
moons) are self-contained reimplementations of the usual toy shapes so the
package carries no ML-library dependency.  Everything is a pure function
of (N, seed, noise parameters); given the same inputs the outputs are
bit-identical.  Labels are always -1 / +1.

On-disk format: CSV with header ``x1,...,xD,label`` plus a JSON metadata
sidecar (``<stem>.meta.json``) recording the generator and its parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DATASET_NAMES = ("linear", "circles", "moons")

DEFAULT_NOISE = {"linear": 0.3, "circles": 0.05, "moons": 0.1}

_LINEAR_CENTER = np.array([1.0, 1.0])  # class centers at +/- this point


@dataclass
class LabeledDataset:
    """Points, labels in {-1, +1}, and how they were generated."""

    name: str
    X: np.ndarray
    y: np.ndarray
    seed: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=int).ravel()
        if self.X.shape[0] != self.y.size:
            raise ValueError(f"{self.X.shape[0]} points but {self.y.size} labels")
        if not np.all(np.isin(self.y, (-1, 1))):
            raise ValueError("labels must be -1 or +1")

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def data_dim(self) -> int:
        return self.X.shape[1]

    def balance(self) -> float:
        """Fraction of +1 labels."""
        return float(np.mean(self.y == 1))

    def to_csv(self) -> str:
        header = ",".join(f"x{j + 1}" for j in range(self.data_dim)) + ",label"
        lines = [header]
        for row, label in zip(self.X, self.y):
            lines.append(",".join(repr(float(v)) for v in row) + f",{int(label)}")
        return "\n".join(lines) + "\n"

    def metadata(self) -> dict:
        return {"name": self.name, "n": self.n, "seed": self.seed, **self.params}


def _halves(n: int) -> tuple[int, int]:
    return n - n // 2, n // 2


def make_linear(n: int, seed: int, noise: float = DEFAULT_NOISE["linear"]) -> LabeledDataset:
    """Two Gaussian blobs on either side of the line x1 + x2 = 0.

    Labels follow the side of the separating line, so with noise = 0 the
    classes sit exactly at the two centers and are perfectly separable.
    """
    rng = np.random.default_rng(seed)
    n_pos, n_neg = _halves(n)
    pos = _LINEAR_CENTER + noise * rng.standard_normal((n_pos, 2))
    neg = -_LINEAR_CENTER + noise * rng.standard_normal((n_neg, 2))
    X = np.vstack([pos, neg])
    y = np.where(X.sum(axis=1) >= 0, 1, -1)
    order = rng.permutation(n)
    return LabeledDataset("linear", X[order], y[order], seed, {"noise": noise})


def make_circles(
    n: int,
    seed: int,
    noise: float = DEFAULT_NOISE["circles"],
    factor: float = 0.5,
) -> LabeledDataset:
    """Two concentric rings: outer radius 1 (label -1), inner radius ``factor``
    (label +1), with isotropic Gaussian noise added to every point."""
    if not 0 < factor < 1:
        raise ValueError(f"factor must be in (0, 1), got {factor}")
    rng = np.random.default_rng(seed)
    n_outer, n_inner = _halves(n)
    t_out = np.linspace(0.0, 2.0 * np.pi, n_outer, endpoint=False)
    t_in = np.linspace(0.0, 2.0 * np.pi, n_inner, endpoint=False)
    outer = np.column_stack([np.cos(t_out), np.sin(t_out)])
    inner = factor * np.column_stack([np.cos(t_in), np.sin(t_in)])
    X = np.vstack([outer, inner]) + noise * rng.standard_normal((n, 2))
    y = np.concatenate([-np.ones(n_outer, dtype=int), np.ones(n_inner, dtype=int)])
    order = rng.permutation(n)
    return LabeledDataset(
        "circles", X[order], y[order], seed, {"noise": noise, "factor": factor}
    )


def make_moons(n: int, seed: int, noise: float = DEFAULT_NOISE["moons"]) -> LabeledDataset:
    """Two interleaving half-circle arcs.

    Arc A (label -1): (cos t, sin t) for t in [0, pi].
    Arc B (label +1): the point-reflected arc shifted right and up,
    (1 - cos t, 0.5 - sin t), so it dips between the feet of arc A.
    Gaussian noise is added to every point.
    """
    rng = np.random.default_rng(seed)
    n_a, n_b = _halves(n)
    t_a = np.linspace(0.0, np.pi, n_a)
    t_b = np.linspace(0.0, np.pi, n_b)
    arc_a = np.column_stack([np.cos(t_a), np.sin(t_a)])
    arc_b = np.column_stack([1.0 - np.cos(t_b), 0.5 - np.sin(t_b)])
    X = np.vstack([arc_a, arc_b]) + noise * rng.standard_normal((n, 2))
    y = np.concatenate([-np.ones(n_a, dtype=int), np.ones(n_b, dtype=int)])
    order = rng.permutation(n)
    return LabeledDataset("moons", X[order], y[order], seed, {"noise": noise})


def make_dataset(
    name: str,
    n: int,
    seed: int,
    noise: float | None = None,
    factor: float = 0.5,
) -> LabeledDataset:
    """Dispatch on dataset name with per-generator default noise."""
    if name not in DATASET_NAMES:
        raise ValueError(f"unknown dataset {name!r}; choose from {DATASET_NAMES}")
    noise = DEFAULT_NOISE[name] if noise is None else noise
    if name == "linear":
        return make_linear(n, seed, noise)
    if name == "circles":
        return make_circles(n, seed, noise, factor)
    return make_moons(n, seed, noise)


def split(
    dataset: LabeledDataset, n_train: int, n_test: int, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Disjoint stratified train/test split, deterministic given the seed.

    Each class contributes proportionally (largest-remainder rounding), so
    both halves keep the source balance.
    """
    if n_train < 1 or n_test < 1:
        raise ValueError("need at least one train and one test point")
    if n_train + n_test > dataset.n:
        raise ValueError(
            f"cannot take {n_train}+{n_test} points from a dataset of {dataset.n}"
        )
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    labels = np.unique(dataset.y)
    remaining_train, remaining_test = n_train, n_test
    for pos, label in enumerate(labels):
        cls = np.flatnonzero(dataset.y == label)
        cls = cls[rng.permutation(cls.size)]
        if pos == len(labels) - 1:
            take_train, take_test = remaining_train, remaining_test
        else:
            frac = cls.size / dataset.n
            take_train = int(round(n_train * frac))
            take_test = int(round(n_test * frac))
        if take_train + take_test > cls.size:
            raise ValueError(
                f"class {label} has only {cls.size} points, cannot supply "
                f"{take_train} train + {take_test} test"
            )
        train_idx.extend(cls[:take_train])
        test_idx.extend(cls[take_train : take_train + take_test])
        remaining_train -= take_train
        remaining_test -= take_test
    train_idx = np.sort(np.asarray(train_idx, dtype=int))
    test_idx = np.sort(np.asarray(test_idx, dtype=int))
    make = lambda idx, tag: LabeledDataset(
        dataset.name,
        dataset.X[idx],
        dataset.y[idx],
        dataset.seed,
        {**dataset.params, "split": tag, "split_seed": seed},
    )
    return make(train_idx, "train"), make(test_idx, "test")


def save_dataset(dataset: LabeledDataset, path) -> Path:
    """Write the CSV and its metadata sidecar; returns the CSV path."""
    path = Path(path)
    path.write_text(dataset.to_csv())
    sidecar = path.with_suffix(".meta.json")
    sidecar.write_text(json.dumps(dataset.metadata(), indent=2) + "\n")
    return path


def load_dataset(path) -> LabeledDataset:
    """Read a CSV written by :func:`save_dataset` (sidecar optional)."""
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    if header[-1] != "label":
        raise ValueError(f"{path} does not look like a dataset CSV (no label column)")
    dim = len(header) - 1
    rows, labels = [], []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append([float(v) for v in parts[:dim]])
        labels.append(int(parts[dim]))
    sidecar = path.with_suffix(".meta.json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return LabeledDataset(
        name=meta.get("name", path.stem),
        X=np.asarray(rows),
        y=np.asarray(labels),
        seed=int(meta.get("seed", -1)),
        params={k: v for k, v in meta.items() if k not in ("name", "n", "seed")},
    )
