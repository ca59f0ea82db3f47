"""Error measurements for operator approximations of sampled processes.

Covers node, query-point and time-averaged mean-square errors, their
Monte-Carlo averages over seeded realizations, the empirical modulus of
continuity ``W(X, h) = max_{|t-s| <= h} E|X_t - X_s|^2``, log-log rate
fitting and the Chebyshev tail bound.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .activation import Activation
from .errors import AlignmentError, DomainError, FitError, InputError
from .operator import (
    SinnoOperator,
    UniformGrid,
    build_operator,
    evaluate,
    evaluate_many,
    nearest_indices,
)
from .processes import DEFAULT_STEPS, ProcessSpec, SamplePath, simulate_paths

_HORIZON_RTOL = 1e-9


@dataclass(frozen=True)
class MseReport:
    n: int
    realizations: int
    query_point: float
    mse_nodes: float
    mse_query: float
    mse_query_std: float
    mse_global: float
    mse_global_std: float
    mean_query_value: float
    sampling: str = "exact"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ModulusEstimate:
    h: float
    w: float
    pairs_used: int
    std_error: float
    resolution: float


@dataclass(frozen=True)
class RateFit:
    alpha_hat: float
    c_hat: float
    r_squared: float
    points_used: int

    def to_dict(self) -> dict:
        return asdict(self)


def _check_same_interval(op: SinnoOperator, path: SamplePath):
    T = op.grid.horizon
    if abs(path.horizon - T) > _HORIZON_RTOL * T:
        raise InputError(
            f"path horizon {path.horizon} does not match operator horizon {T}"
        )


def value_at(path: SamplePath, t) -> np.ndarray:
    """Path value at the nearest sample time (earlier sample on ties)."""
    return path.values[nearest_indices(path.times, np.atleast_1d(t))]


def mse_nodes(op: SinnoOperator, path: SamplePath) -> float:
    """Average squared error over the ``n + 1`` nodes."""
    _check_same_interval(op, path)
    nodes = op.grid.nodes
    reference = value_at(path, nodes)
    return float(np.mean((reference - evaluate_many(op, nodes)) ** 2))


def _snap_query(op: SinnoOperator, path: SamplePath, t_q: float) -> float:
    T = op.grid.horizon
    if not (0.0 < t_q < T):
        raise DomainError(f"query point {t_q} must lie strictly inside (0, {T})")
    return float(path.times[nearest_indices(path.times, [t_q])[0]])


def mse_query(op: SinnoOperator, path: SamplePath, t_q: float) -> float:
    """Squared error at the sample time nearest ``t_q``.

    Both the path and the operator are read at that sample time, so a query
    point off the fine grid is snapped rather than compared across times.
    """
    _check_same_interval(op, path)
    t = _snap_query(op, path, t_q)
    x = value_at(path, t)[0]
    return float((x - evaluate(op, t)) ** 2)


def squared_errors(op: SinnoOperator, path: SamplePath) -> np.ndarray:
    """``(X(t) - S_n(t))^2`` at every sample time of the path."""
    _check_same_interval(op, path)
    return (path.values - evaluate_many(op, path.times)) ** 2


def mse_global(op: SinnoOperator, path: SamplePath) -> float:
    """Time average of the squared error via the composite trapezoid rule."""
    if len(path) < 2:
        raise InputError("global MSE needs at least two sample points")
    err = squared_errors(op, path)
    return float(np.trapezoid(err, path.times) / op.grid.horizon)


def operator_for(path: SamplePath, grid: UniformGrid, activation: Activation, sampling: str = "auto"):
    """Build from ``path``; ``"auto"`` tries exact sampling, then nearest."""
    if sampling != "auto":
        return build_operator(path, grid, activation, sampling), sampling
    try:
        return build_operator(path, grid, activation, "exact"), "exact"
    except AlignmentError:
        return build_operator(path, grid, activation, "nearest"), "nearest"


def _std(x: np.ndarray) -> float:
    # shifted so identical samples give exactly 0
    return float(np.std(x - x[0], ddof=1)) if x.size > 1 else 0.0


def sweep_paths(
    paths: Sequence[SamplePath],
    activation: Activation,
    ns: Iterable[int],
    query: float,
    sampling: str = "auto",
) -> list[MseReport]:
    """Per-``n`` Monte-Carlo averages of the three errors over given paths.

    With ``sampling="auto"`` nodes are read exactly when they all fall on the
    fine grid and from the nearest sample otherwise.
    """
    if not paths:
        raise InputError("need at least one realization")
    ns = [int(n) for n in ns]
    if not ns:
        raise InputError("ns must be non-empty")
    horizon = paths[0].horizon
    reports = []
    for n in ns:
        try:
            grid = UniformGrid(horizon, n)
            node_err, q_err, g_err, q_val = [], [], [], []
            modes = set()
            for path in paths:
                op, mode = operator_for(path, grid, activation, sampling)
                modes.add(mode)
                node_err.append(mse_nodes(op, path))
                q_err.append(mse_query(op, path, query))
                g_err.append(mse_global(op, path))
                q_val.append(evaluate(op, _snap_query(op, path, query)))
        except (InputError, DomainError) as exc:
            cls = DomainError if isinstance(exc, DomainError) else InputError
            raise cls(f"n={n}: {exc}") from exc
        q_err, g_err = np.array(q_err), np.array(g_err)
        reports.append(
            MseReport(
                n=n,
                realizations=len(paths),
                query_point=float(query),
                mse_nodes=float(np.mean(node_err)),
                mse_query=float(np.mean(q_err)),
                mse_query_std=_std(q_err),
                mse_global=float(np.mean(g_err)),
                mse_global_std=_std(g_err),
                mean_query_value=float(np.mean(q_val)),
                sampling="nearest" if "nearest" in modes else "exact",
            )
        )
    return reports


def mc_sweep(
    process: ProcessSpec,
    activation: Activation,
    ns: Iterable[int],
    realizations: int,
    query: float,
    horizon: float,
    base_seed: int,
    steps: int = DEFAULT_STEPS,
    sampling: str = "auto",
) -> list[MseReport]:
    """Simulate streams ``1..R`` once and sweep the node parameter over them."""
    if realizations < 1:
        raise InputError("realizations must be >= 1")
    paths = simulate_paths(process, horizon, steps, base_seed, range(1, realizations + 1))
    return sweep_paths(paths, activation, ns, query, sampling)


def _stack(ensemble: Sequence[SamplePath]) -> tuple[np.ndarray, np.ndarray]:
    if len(ensemble) == 0:
        raise InputError("ensemble is empty")
    times = ensemble[0].times
    for p in ensemble[1:]:
        if p.times.shape != times.shape or not np.array_equal(p.times, times):
            raise InputError("all paths in an ensemble must share one time grid")
    return times, np.stack([p.values for p in ensemble])


def modulus_from_values(times: np.ndarray, values: np.ndarray, h: float) -> ModulusEstimate:
    """Empirical modulus of continuity for an ``(P, N)`` array on a uniform grid."""
    times = np.asarray(times, dtype=float)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] == 0:
        raise InputError("ensemble is empty")
    if times.size < 2:
        raise InputError("need at least two grid points")
    spacing = np.diff(times)
    dt = float(spacing.mean())
    if np.max(np.abs(spacing - dt)) > 1e-9 * dt:
        raise InputError("modulus estimation needs a uniform time grid")
    max_lag = min(int(math.floor(h / dt + 1e-9)), times.size - 1)
    if max_lag < 1:
        raise InputError(f"h={h} is smaller than the grid step {dt}")

    P = values.shape[0]
    best, best_se, pairs = 0.0, 0.0, 0
    for lag in range(1, max_lag + 1):
        sq = (values[:, lag:] - values[:, :-lag]) ** 2
        means = sq.mean(axis=0)
        j = int(np.argmax(means))
        pairs += means.size
        if means[j] > best:
            best = float(means[j])
            best_se = float(np.std(sq[:, j], ddof=1) / math.sqrt(P)) if P > 1 else 0.0
    return ModulusEstimate(h=float(h), w=best, pairs_used=pairs, std_error=best_se, resolution=dt)


def modulus_estimate(ensemble: Sequence[SamplePath], h: float) -> ModulusEstimate:
    """Max over grid pairs ``|t - s| <= h`` of the ensemble-mean squared increment."""
    times, values = _stack(ensemble)
    return modulus_from_values(times, values, h)


def rate_fit(points, horizon: float = 1.0) -> RateFit:
    """Least-squares fit of ``mse ~ C (T / n)^alpha`` in log-log coordinates.

    Points with non-positive error are dropped; at least three must remain.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    pts = pts[(pts[:, 1] > 0) & np.isfinite(pts[:, 1])]
    if len(pts) < 3:
        raise FitError(f"rate fit needs >= 3 points with positive error, got {len(pts)}")
    log_n, log_e = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(log_n) == 0:
        raise FitError("rate fit needs at least two distinct n")
    res = stats.linregress(log_n, log_e)
    alpha = -float(res.slope)
    c_hat = math.exp(float(res.intercept)) / horizon**alpha
    return RateFit(alpha_hat=alpha, c_hat=c_hat, r_squared=float(res.rvalue**2), points_used=len(pts))


def chebyshev_bound_check(mse: float, epsilon: float) -> float:
    """Chebyshev bound ``mse / epsilon^2`` on ``P(|S_n - X| >= epsilon)``."""
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    return mse / epsilon**2


def exceedance_frequency(errors, epsilon: float) -> tuple[float, float]:
    """Fraction of ``|errors| >= epsilon`` and its binomial standard error."""
    errors = np.abs(np.asarray(errors, dtype=float))
    if errors.size == 0:
        raise InputError("no errors given")
    p = float(np.mean(errors >= epsilon))
    return p, math.sqrt(p * (1 - p) / errors.size)


def mse_profile(ops: Sequence[SinnoOperator], paths: Sequence[SamplePath]) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo mean and standard error of the squared error at each sample time."""
    if len(ops) != len(paths) or not paths:
        raise InputError("need one operator per path")
    sq = np.stack([squared_errors(op, p) for op, p in zip(ops, paths)])
    se = sq.std(axis=0, ddof=1) / math.sqrt(len(paths)) if len(paths) > 1 else np.zeros(sq.shape[1])
    return sq.mean(axis=0), se


def query_errors(
    paths: Sequence[SamplePath],
    activation: Activation,
    n: int,
    query: float,
    sampling: str = "auto",
) -> np.ndarray:
    """Signed errors ``S_n(t_q) - X(t_q)`` per realization, at the snapped query time."""
    if not paths:
        raise InputError("need at least one realization")
    grid = UniformGrid(paths[0].horizon, n)
    out = np.empty(len(paths))
    for r, path in enumerate(paths):
        op, _ = operator_for(path, grid, activation, sampling)
        t = _snap_query(op, path, query)
        out[r] = evaluate(op, t) - value_at(path, t)[0]
    return out
