"""Pydantic request/response models for the HTTP service.

Requests mirror the keyword surface of :mod:`fockml.experiments`; the
response is always a :class:`RunReport`.  Metrics and grids stay loosely
typed (nested dicts of floats/lists) because their exact shape varies per
command; the config echo inside the report is what makes a run repeatable.
"""

from __future__ import annotations

import math
from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator

DatasetName = Literal["linear", "circles", "moons"]

_PI = math.pi


class RunReport(BaseModel):
    """Self-describing result of one experiment run."""

    command: str
    config: dict[str, Any]
    metrics: dict[str, Any]
    grids: dict[str, dict[str, list[Any]]] = Field(default_factory=dict)
    models: dict[str, Any] | None = None
    wall_time_s: float


class GenDataRequest(BaseModel):
    name: DatasetName
    n: int = Field(default=100, ge=2, le=100_000)
    seed: int = 0
    noise: float | None = Field(default=None, ge=0.0)
    factor: float = Field(default=0.5, gt=0.0, lt=1.0)


class FitFourierRequest(BaseModel):
    input_states: list[str] = Field(default=["100", "110", "111"])
    coefficients: list[tuple[float, float]] = Field(
        default=[(0.2, 0.0), (0.69, 0.52), (0.81, 0.41), (0.68, 0.82)],
        description="(real, imag) series coefficients, constant term first",
    )
    n_points: int = Field(default=60, ge=4, le=2000)
    x_min: float = -3 * _PI
    x_max: float = 3 * _PI
    alpha: float = Field(default=0.0, ge=0.0)
    max_evals: int = Field(default=4000, ge=10, le=200_000)
    restarts: int = Field(default=10, ge=1, le=100)
    seed: int = 0
    threads: int = Field(default=1, ge=1, le=64)

    @field_validator("input_states")
    @classmethod
    def _states_are_digit_strings(cls, v):
        for state in v:
            if not state or any(ch not in "0123456789" for ch in state):
                raise ValueError(f"input state {state!r} must be occupation digits")
        return v

    @field_validator("x_max")
    @classmethod
    def _interval_nonempty(cls, v, info):
        if "x_min" in info.data and v <= info.data["x_min"]:
            raise ValueError("x_max must exceed x_min")
        return v


class DofTableRequest(BaseModel):
    m_max: int = Field(default=3, ge=2, le=8)
    n_max: int = Field(default=15, ge=0, le=60)


class ClassifyVariationalRequest(BaseModel):
    dataset: DatasetName = "moons"
    input_states: list[str] = Field(default=["100", "111", "221"])
    alpha: float = Field(default=0.2, ge=0.0)
    n_points: int = Field(default=100, ge=100, le=100_000)
    noise: float | None = Field(default=None, ge=0.0)
    factor: float = Field(default=0.5, gt=0.0, lt=1.0)
    max_evals: int = Field(default=3000, ge=10, le=200_000)
    restarts: int = Field(default=4, ge=1, le=100)
    seed: int = 0
    grid_size: int = Field(default=100, ge=2, le=500)
    threads: int = Field(default=1, ge=1, le=64)

    @field_validator("input_states")
    @classmethod
    def _states_are_digit_strings(cls, v):
        for state in v:
            if not state or any(ch not in "0123456789" for ch in state):
                raise ValueError(f"input state {state!r} must be occupation digits")
        return v


class FitKernelRequest(BaseModel):
    photons: list[int] = Field(default=[2, 4, 6, 8, 10])
    sigmas: list[float] = Field(default=[0.25, 0.33, 0.50, 1.00])
    grid_points: int = Field(default=200, ge=10, le=5000)

    @field_validator("photons")
    @classmethod
    def _photon_range(cls, v):
        for n in v:
            if not 1 <= n <= 20:
                raise ValueError(f"photon number {n} outside supported range 1..20")
        return v

    @field_validator("sigmas")
    @classmethod
    def _positive_sigmas(cls, v):
        if any(s <= 0 for s in v):
            raise ValueError("sigmas must be positive")
        return v


class ClassifyKernelRequest(BaseModel):
    dataset: DatasetName = "circles"
    photons: int = Field(default=10, ge=1, le=20)
    sigma: float = Field(default=0.5, gt=0.0)
    alpha: float = Field(default=0.2, ge=0.0)
    n_points: int = Field(default=100, ge=100, le=100_000)
    noise: float | None = Field(default=None, ge=0.0)
    factor: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = 0
    grid_size: int = Field(default=100, ge=2, le=500)
    grid_points: int = Field(default=200, ge=10, le=5000)


class RksRequest(BaseModel):
    dataset: DatasetName = "moons"
    photons: int = Field(default=10, ge=1, le=20)
    gamma: float = Field(default=1.0, gt=0.0)
    ks: list[int] = Field(default=[4])
    feature_counts: list[int] = Field(default=[1, 10, 100])
    alpha: float = Field(default=0.2, ge=0.0)
    n_points: int = Field(default=100, ge=100, le=100_000)
    noise: float | None = Field(default=None, ge=0.0)
    factor: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = 0
    grid_size: int = Field(default=100, ge=2, le=500)
    standardize: bool = False

    @field_validator("ks")
    @classmethod
    def _k_positive(cls, v):
        if any(k < 1 for k in v):
            raise ValueError("frequencies k must be >= 1")
        return v

    @field_validator("feature_counts")
    @classmethod
    def _r_positive(cls, v):
        if any(r < 1 for r in v):
            raise ValueError("feature counts must be >= 1")
        return v


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str
