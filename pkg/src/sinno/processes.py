"""Euler-Maruyama simulation of Ornstein-Uhlenbeck and Wiener paths.

Every realization draws from its own child stream, derived by hashing
``(base_seed, stream_index)`` through :class:`numpy.random.SeedSequence`.
A realization can therefore be regenerated on its own, and ensembles built
in one batch are bit-identical to paths simulated one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InputError

DEFAULT_STEPS = 1000
DEFAULT_HORIZON = 10.0


@dataclass(frozen=True)
class OUProcess:
    """dX = theta (mu - X) dt + sigma dW, X(0) = x0."""

    theta: float = 0.5
    mu: float = 0.0
    sigma: float = 1.0
    x0: float = 0.0

    def __post_init__(self):
        _require_finite(theta=self.theta, mu=self.mu, sigma=self.sigma, x0=self.x0)
        if self.theta <= 0:
            raise InputError(f"OU rate theta must be > 0, got {self.theta}")
        if self.sigma < 0:
            raise InputError(f"volatility sigma must be >= 0, got {self.sigma}")

    def mean(self, t):
        return self.mu + (self.x0 - self.mu) * np.exp(-self.theta * np.asarray(t))

    def variance(self, t):
        return self.sigma**2 / (2 * self.theta) * (1 - np.exp(-2 * self.theta * np.asarray(t)))


@dataclass(frozen=True)
class WienerProcess:
    """dX = sigma dW, X(0) = x0."""

    sigma: float = 1.0
    x0: float = 0.0

    def __post_init__(self):
        _require_finite(sigma=self.sigma, x0=self.x0)
        if self.sigma < 0:
            raise InputError(f"volatility sigma must be >= 0, got {self.sigma}")

    def mean(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.x0)

    def variance(self, t):
        return self.sigma**2 * np.asarray(t, dtype=float)


ProcessSpec = Union[OUProcess, WienerProcess]


def _require_finite(**params):
    for name, value in params.items():
        if not math.isfinite(value):
            raise InputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SeedSpec:
    base_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not (0 <= self.base_seed < 2**64):
            raise InputError("base_seed must be an unsigned 64-bit integer")
        if self.stream_index < 0:
            raise InputError("stream_index must be >= 0")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.base_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True, eq=False)
class SamplePath:
    """One realization sampled at strictly increasing times starting at 0."""

    times: np.ndarray
    values: np.ndarray
    seed: SeedSpec | None = field(default=None)

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise InputError("times and values must be 1-D arrays of equal length")
        if times.size == 0:
            raise InputError("sample path is empty")
        if times[0] != 0.0:
            raise InputError(f"sample path must start at t=0, got {times[0]}")
        if np.any(np.diff(times) <= 0):
            raise InputError("sample times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise InputError("sample values must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.times.size


def _check_grid(horizon: float, steps: int):
    if not (math.isfinite(horizon) and horizon > 0):
        raise InputError(f"horizon must be positive and finite, got {horizon!r}")
    if int(steps) != steps or steps < 2:
        raise InputError(f"steps must be an integer >= 2, got {steps!r}")


def _normals(base_seed: int, streams: Sequence[int], steps: int) -> np.ndarray:
    return np.stack([SeedSpec(base_seed, s).generator().standard_normal(steps) for s in streams])


def simulate_ensemble(
    spec: ProcessSpec,
    horizon: float,
    steps: int,
    base_seed: int,
    streams: Iterable[int],
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate one path per stream index.

    Returns the shared time grid (``steps + 1`` points) and a
    ``(len(streams), steps + 1)`` array of values.
    """
    _check_grid(horizon, steps)
    streams = list(streams)
    if not streams:
        raise InputError("at least one stream index is required")
    steps = int(steps)
    dt = horizon / steps
    sqrt_dt = math.sqrt(dt)
    z = _normals(base_seed, streams, steps)

    x = np.empty((len(streams), steps + 1))
    x[:, 0] = spec.x0
    if isinstance(spec, OUProcess):
        theta, mu, sigma = spec.theta, spec.mu, spec.sigma
        for i in range(steps):
            xi = x[:, i]
            x[:, i + 1] = xi + theta * (mu - xi) * dt + sigma * sqrt_dt * z[:, i]
    elif isinstance(spec, WienerProcess):
        increments = spec.sigma * sqrt_dt * z
        for i in range(steps):
            x[:, i + 1] = x[:, i] + increments[:, i]
    else:
        raise InputError(f"unsupported process spec {spec!r}")
    if not np.all(np.isfinite(x)):
        raise InputError("simulation produced non-finite values")
    return np.linspace(0.0, horizon, steps + 1), x


def simulate_paths(
    spec: ProcessSpec,
    horizon: float,
    steps: int,
    base_seed: int,
    streams: Iterable[int],
) -> list[SamplePath]:
    streams = list(streams)
    times, values = simulate_ensemble(spec, horizon, steps, base_seed, streams)
    return [
        SamplePath(times, row, SeedSpec(base_seed, s)) for s, row in zip(streams, values)
    ]


def simulate_ou(spec: OUProcess, horizon: float, steps: int, seed: SeedSpec) -> SamplePath:
    if not isinstance(spec, OUProcess):
        raise InputError("simulate_ou needs an OUProcess")
    return simulate_paths(spec, horizon, steps, seed.base_seed, [seed.stream_index])[0]


def simulate_wiener(
    spec: WienerProcess, horizon: float, steps: int, seed: SeedSpec
) -> SamplePath:
    if not isinstance(spec, WienerProcess):
        raise InputError("simulate_wiener needs a WienerProcess")
    return simulate_paths(spec, horizon, steps, seed.base_seed, [seed.stream_index])[0]
