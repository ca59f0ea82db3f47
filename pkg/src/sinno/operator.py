"""Interpolation operators on a uniform grid with random node coefficients.

For a realization with node values ``c_k = X(t_k)`` the operator is::

    S_n(t) = sum_k c_k * phi((2m / delta) * (t - t_k)),   t_k = k * delta, delta = T / n

Because ``phi`` vanishes outside ``[-2m, 2m]`` only the nodes with
``|t - t_k| < delta`` contribute, so evaluation touches the two neighbours
of ``t`` and costs O(1) regardless of ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .activation import Activation, ArrayLike
from .errors import AlignmentError, DomainError, InputError

if TYPE_CHECKING:
    from .processes import SamplePath

# relative slack for time comparisons; rounding level only
_TIME_RTOL = 1e-12
ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class UniformGrid:
    """Nodes ``t_k = k * T / n`` for ``k = 0..n`` on ``[0, T]``."""

    horizon: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise InputError(f"horizon must be positive and finite, got {self.horizon!r}")
        if int(self.n) != self.n or self.n < 1:
            raise InputError(f"node parameter n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def step(self) -> float:
        return self.horizon / self.n

    @property
    def nodes(self) -> np.ndarray:
        nodes = np.arange(self.n + 1) * self.step
        nodes[-1] = self.horizon
        return nodes


@dataclass(frozen=True, eq=False)
class SinnoOperator:
    grid: UniformGrid
    activation: Activation
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (self.grid.n + 1,):
            raise InputError(
                f"expected {self.grid.n + 1} coefficients, got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise InputError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        if np.ndim(t) == 0:
            return evaluate(self, float(t))
        return evaluate_many(self, t)

    def with_coefficients(self, coefficients) -> "SinnoOperator":
        return SinnoOperator(self.grid, self.activation, coefficients)


def nearest_indices(times: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Index of the sample time nearest each target; ties go to the earlier time.

    ``times`` must be sorted ascending. Distances equal to within
    ``ALIGN_TOL`` times the local spacing count as ties.
    """
    times = np.asarray(times, dtype=float)
    targets = np.asarray(targets, dtype=float)
    right = np.clip(np.searchsorted(times, targets, side="left"), 0, len(times) - 1)
    left = np.clip(right - 1, 0, len(times) - 1)
    d_left = np.abs(targets - times[left])
    d_right = np.abs(times[right] - targets)
    spacing = np.maximum(np.abs(times[right] - times[left]), np.finfo(float).tiny)
    take_left = d_left <= d_right + ALIGN_TOL * spacing
    return np.where(take_left, left, right)


def build_operator(
    samples: "SamplePath",
    grid: UniformGrid,
    activation: Activation,
    sampling: str = "exact",
) -> SinnoOperator:
    """Read node coefficients off a sampled path.

    ``sampling="exact"`` requires every node to sit on a sample time (within
    ``1e-9 * delta``); ``"nearest"`` takes the closest sample, preferring the
    earlier one on ties.
    """
    times = np.asarray(samples.times, dtype=float)
    values = np.asarray(samples.values, dtype=float)
    if times.size == 0:
        raise InputError("cannot build an operator from an empty sample path")
    if sampling not in ("exact", "nearest"):
        raise InputError(f"sampling must be 'exact' or 'nearest', got {sampling!r}")
    slack = _TIME_RTOL * grid.horizon
    if times[0] > slack or times[-1] < grid.horizon - slack:
        raise InputError(
            f"samples cover [{times[0]}, {times[-1]}], which does not contain [0, {grid.horizon}]"
        )

    nodes = grid.nodes
    idx = nearest_indices(times, nodes)
    if sampling == "exact":
        off = np.abs(times[idx] - nodes) > ALIGN_TOL * grid.step
        if np.any(off):
            k = int(np.argmax(off))
            raise AlignmentError(k, float(nodes[k]))
    return SinnoOperator(grid, activation, values[idx])


def _locate(grid: UniformGrid, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left neighbour index ``i`` in ``[0, n-1]`` and fractional offset in ``[0, 1]``."""
    s = t / grid.step
    # snap rounding noise so nodes hit their own index exactly
    nearest = np.rint(s)
    s = np.where(np.abs(s - nearest) <= 8 * np.finfo(float).eps * np.maximum(1.0, nearest), nearest, s)
    i = np.clip(np.floor(s), 0, grid.n - 1).astype(np.intp)
    return i, s - i


def _check_domain(op: SinnoOperator, t: np.ndarray) -> np.ndarray:
    T = op.grid.horizon
    slack = _TIME_RTOL * T
    bad = ~((t >= -slack) & (t <= T + slack))
    if np.any(bad):
        j = int(np.argmax(bad))
        where = "" if t.ndim == 0 else f" at index {j}"
        raise DomainError(f"t={t.flat[j]!r}{where} lies outside [0, {T}]")
    return np.clip(t, 0.0, T)


def evaluate(op: SinnoOperator, t: float) -> float:
    """Value of the operator at a single ``t`` in ``[0, T]``."""
    return float(evaluate_many(op, np.asarray([t], dtype=float))[0])


def evaluate_many(op: SinnoOperator, ts) -> np.ndarray:
    """Vectorised :func:`evaluate`. Order of ``ts`` does not matter."""
    ts = np.asarray(ts, dtype=float).reshape(-1)
    if ts.size == 0:
        return np.empty(0)
    ts = _check_domain(op, ts)
    i, frac = _locate(op.grid, ts)
    width = op.activation.support
    u = width * frac
    c = op.coefficients
    return c[i] * op.activation(u) + c[i + 1] * op.activation(u - width)


def raw_sum(op: SinnoOperator, t: ArrayLike) -> ArrayLike:
    """Unrestricted sum over all nodes, defined for any real ``t``.

    Outside ``[0, T]`` this decays to zero within one step, which is why
    :func:`evaluate` refuses such points; hold-out forecasting uses it
    deliberately.
    """
    x = np.asarray(t, dtype=float)
    scale = op.activation.support / op.grid.step
    args = scale * (x[..., None] - op.grid.nodes)
    out = op.activation(args) @ op.coefficients
    return float(out) if x.ndim == 0 else out
