"""Sigmoidal functions of class A(m) and the bell-shaped activations they generate.

A sigmoidal ``eta`` belongs to A(m) when it is non-decreasing, vanishes on
``(-inf, -m]`` and equals one on ``[m, inf)``. Two families are provided:

* the ramp function, in A(1/2);
* the integral of the central B-spline of order ``r``, in A(r/2).

The activation is ``phi(t) = eta(t + m) - eta(t - m)``, supported on
``[-2m, 2m]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import InputError

ArrayLike = Union[float, np.ndarray]

MAX_BSPLINE_ORDER = 20


@lru_cache(maxsize=None)
def _power_sum_coefficients(r: int, power: int) -> np.ndarray:
    # (-1)^j C(r, j) / power!, formed exactly before rounding to float
    if r > MAX_BSPLINE_ORDER:
        raise InputError(f"B-spline order {r} exceeds supported maximum {MAX_BSPLINE_ORDER}")
    coeffs = [
        float(Fraction((-1) ** j * math.comb(r, j), math.factorial(power)))
        for j in range(r + 1)
    ]
    arr = np.array(coeffs)
    arr.setflags(write=False)
    return arr


def _positive_power_sum(r: int, power: int, t: np.ndarray) -> np.ndarray:
    """Sum_j (-1)^j C(r,j) (r/2 + t - j)_+^power / power! for each t."""
    coeffs = _power_sum_coefficients(r, power)
    shifted = (r / 2.0 + t)[..., None] - np.arange(r + 1)
    return np.maximum(shifted, 0.0) ** power @ coeffs


def _as_float_array(t: ArrayLike) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _unwrap(out: np.ndarray, scalar: bool) -> ArrayLike:
    return float(out) if scalar else out


def bspline_value(r: int, t: ArrayLike) -> ArrayLike:
    """Central B-spline ``M_r(t)``; zero outside ``[-r/2, r/2]``."""
    if int(r) != r or r < 2:
        raise InputError(f"B-spline order must be an integer >= 2, got {r!r}")
    r = int(r)
    x, scalar = _as_float_array(t)
    # M_r is even; evaluating on the left half keeps the alternating sum short
    left = -np.abs(x)
    out = np.where(left <= -r / 2.0, 0.0, _positive_power_sum(r, r - 1, left))
    return _unwrap(np.maximum(out, 0.0), scalar)


@dataclass(frozen=True)
class Sigmoidal:
    """A member of class A(m).

    ``kind`` is ``"ramp"`` or ``"bspline"``; ``order`` is the B-spline order
    ``r`` (unused for the ramp).
    """

    kind: str
    order: int | None = None

    def __post_init__(self):
        if self.kind == "ramp":
            if self.order is not None:
                raise InputError("ramp sigmoidal takes no order")
        elif self.kind == "bspline":
            r = self.order
            if r is None or int(r) != r or r < 2:
                raise InputError(f"B-spline order must be an integer >= 2, got {r!r}")
            if r > MAX_BSPLINE_ORDER:
                raise InputError(
                    f"B-spline order {r} exceeds supported maximum {MAX_BSPLINE_ORDER}"
                )
            object.__setattr__(self, "order", int(r))
        else:
            raise InputError(f"unknown sigmoidal kind {self.kind!r}")

    @classmethod
    def ramp(cls) -> "Sigmoidal":
        return cls("ramp")

    @classmethod
    def bspline(cls, r: int) -> "Sigmoidal":
        return cls("bspline", r)

    @property
    def m(self) -> float:
        """Half-width of the transition region."""
        return 0.5 if self.kind == "ramp" else self.order / 2.0

    @property
    def label(self) -> str:
        return "ramp" if self.kind == "ramp" else f"bspline:{self.order}"

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return eval_sigmoidal(self, t)


def eval_sigmoidal(s: Sigmoidal, t: ArrayLike) -> ArrayLike:
    """Evaluate ``eta(t)``; values lie in ``[0, 1]``."""
    x, scalar = _as_float_array(t)
    if s.kind == "ramp":
        out = np.clip(x + 0.5, 0.0, 1.0)
        return _unwrap(out, scalar)

    r, m = s.order, s.m
    # eta(t) = 1 - eta(-t); only the left half is summed directly
    left = -np.abs(x)
    inside = left > -m
    half = np.zeros_like(left)
    if np.any(inside):
        half[inside] = _positive_power_sum(r, r, left[inside])
    half = np.clip(half, 0.0, 0.5)
    out = np.where(x > 0, 1.0 - half, half)
    out = np.where(x >= m, 1.0, np.where(x <= -m, 0.0, out))
    return _unwrap(out, scalar)


@dataclass(frozen=True)
class Activation:
    """The bell-shaped function ``phi(t) = eta(t + m) - eta(t - m)``."""

    source: Sigmoidal

    @property
    def m(self) -> float:
        return self.source.m

    @property
    def support(self) -> float:
        """Half-width ``2m`` of the support."""
        return 2.0 * self.source.m

    @property
    def label(self) -> str:
        return self.source.label

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return eval_activation(self, t)


def eval_activation(a: Activation, t: ArrayLike) -> ArrayLike:
    x, scalar = _as_float_array(t)
    m = a.m
    inside = np.abs(x) < 2.0 * m
    out = np.zeros_like(x)
    if np.any(inside):
        xi = x[inside]
        out[inside] = eval_sigmoidal(a.source, xi + m) - eval_sigmoidal(a.source, xi - m)
    return _unwrap(out, scalar)


def parse_activation(text: str) -> Activation:
    """Parse ``"ramp"`` or ``"bspline:<r>"`` into an :class:`Activation`."""
    text = text.strip().lower()
    if text == "ramp":
        return Activation(Sigmoidal.ramp())
    if text.startswith("bspline:"):
        try:
            r = int(text.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad B-spline order in {text!r}") from None
        return Activation(Sigmoidal.bspline(r))
    raise InputError(f"unknown activation {text!r}; expected 'ramp' or 'bspline:<r>'")


def moment_bound(a: Activation, alpha: float) -> float:
    """Upper bound ``(2m)^alpha (floor(4m) + 2)`` on the discrete absolute moment."""
    m = a.m
    return (2.0 * m) ** alpha * (math.floor(4.0 * m) + 2)


def discrete_moment(
    a: Activation,
    alpha: float,
    resolution: float = 1e-4,
    window: tuple[float, float] = (0.0, 1.0),
) -> float:
    """Approximate ``sup_t sum_k |phi(t - k)| |t - k|^alpha`` by a grid scan.

    The shifted sum is 1-periodic in ``t``, so scanning the default window
    ``[0, 1]`` covers the supremum up to the grid resolution.
    """
    if resolution <= 0:
        raise InputError("scan resolution must be positive")
    if alpha < 0:
        raise InputError("moment order alpha must be >= 0")
    lo, hi = window
    if hi < lo:
        raise InputError("scan window must satisfy lo <= hi")
    count = int(math.ceil((hi - lo) / resolution)) + 1
    ts = np.linspace(lo, hi, count)
    reach = 2.0 * a.m
    ks = np.arange(math.floor(lo - reach) - 1, math.ceil(hi + reach) + 2)
    best = 0.0
    # chunked to bound memory for fine scans
    for start in range(0, count, 4096):
        diff = ts[start:start + 4096, None] - ks[None, :]
        weights = np.abs(eval_activation(a, diff))
        dist = np.abs(diff) ** alpha if alpha > 0 else 1.0
        best = max(best, float(np.max(np.sum(weights * dist, axis=1))))
    return best
