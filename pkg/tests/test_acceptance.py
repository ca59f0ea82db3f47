"""Exit criteria, each at its stated tolerance and time budget.

Every test records a PASS/FAIL line that the terminal summary prints.
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from sinno.activation import Activation, Sigmoidal, discrete_moment, moment_bound
from sinno.errors import NotFoundError
from sinno.ingest import (
    fit_and_score,
    load_who_csv,
    multi_country_report,
    normalize_time,
)
from sinno.metrics import (
    exceedance_frequency,
    mc_sweep,
    modulus_from_values,
    mse_nodes,
    mse_profile,
    operator_for,
    query_errors,
    rate_fit,
)
from sinno.operator import SinnoOperator, UniformGrid, evaluate, evaluate_many
from sinno.processes import OUProcess, SamplePath, simulate_ensemble, simulate_paths

from conftest import DATA_DIR

pytestmark = pytest.mark.acceptance

OU = OUProcess(theta=0.5, mu=0.0, sigma=1.0, x0=0.0)
T = 10.0
TQ = 3.70
ACTIVATIONS = [Activation(Sigmoidal.ramp())] + [Activation(Sigmoidal.bspline(r)) for r in (2, 3, 4, 5)]
RAMP = ACTIVATIONS[0]


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_c1_interpolation_exactness(record_criterion):
    with Timer() as clock:
        paths = simulate_paths(OU, T, 1000, 101, range(1, 101))
        worst = 0.0
        for n in (5, 10, 50):
            grid = UniformGrid(T, n)
            for p in paths:
                op, _ = operator_for(p, grid, RAMP)
                worst = max(worst, mse_nodes(op, p))
    ok = worst <= 1e-24 and clock.elapsed < 5
    record_criterion("1 interpolation", ok, f"max mse_nodes={worst:.3g} ({clock.elapsed:.2f}s)")
    assert worst <= 1e-24
    assert clock.elapsed < 5


def test_c2_constant_reproduction(record_criterion):
    ts = np.linspace(0, T, 10_000)
    worst = 0.0
    with Timer() as clock:
        for act in ACTIVATIONS:
            for n in (1, 7, 10, 50, 100):
                op = SinnoOperator(UniformGrid(T, n), act, np.ones(n + 1))
                worst = max(worst, float(np.max(np.abs(evaluate_many(op, ts) - 1.0))))
    ok = worst <= 1e-12 and clock.elapsed < 5
    record_criterion("2 constant reproduction", ok, f"max |S-1|={worst:.3g} ({clock.elapsed:.2f}s)")
    assert worst <= 1e-12
    assert clock.elapsed < 5


def test_c3_moment_bound(record_criterion):
    rows = []
    with Timer() as clock:
        for act in ACTIVATIONS:
            for alpha in (0.0, 1.0, 2.0):
                rows.append((act.label, alpha, discrete_moment(act, alpha), moment_bound(act, alpha)))
        ramp0 = discrete_moment(RAMP, 0.0)
    bounded = all(value <= bound for _, _, value, bound in rows)
    exact = abs(ramp0 - 1.0) <= 1e-9
    worst = max(value / bound for _, _, value, bound in rows)
    record_criterion("3 moment bound", bounded and exact and clock.elapsed < 10,
                     f"max ratio={worst:.3f}, ramp alpha=0 -> {ramp0!r} ({clock.elapsed:.2f}s)")
    assert bounded, rows
    assert exact
    assert clock.elapsed < 10


def test_c4_quantitative_l2_bound(record_criterion):
    with Timer() as clock:
        times, values = simulate_ensemble(OU, T, 1000, 404, range(1, 501))
        paths = [SamplePath(times, v) for v in values]
        details, ok = [], True
        for n in (10, 20, 40):
            grid = UniformGrid(T, n)
            ops = [operator_for(p, grid, RAMP)[0] for p in paths]
            mean, se = mse_profile(ops, paths)
            k = int(np.argmax(mean))
            w = modulus_from_values(times, values, grid.step)
            slack = 3 * math.hypot(se[k], w.std_error)
            ok &= mean[k] <= w.w + slack
            details.append(f"n={n}: {mean[k]:.3f}<={w.w:.3f}+{slack:.3f}")
    ok = bool(ok) and clock.elapsed < 120
    record_criterion("4 L2 bound", ok, "; ".join(details) + f" ({clock.elapsed:.1f}s)")
    assert ok


def test_c5_holder_rate(record_criterion):
    with Timer() as clock:
        reports = mc_sweep(OU, RAMP, (10, 20, 40, 80, 160), 200, TQ, T, 505, steps=1600)
        fit = rate_fit([(r.n, r.mse_global) for r in reports], horizon=T)
        globals_ = [r.mse_global for r in reports]
        decays = all(a > b for a, b in zip(globals_, globals_[1:]))

        near = {r.n: r.mse_query for r in mc_sweep(OU, RAMP, (26, 27, 28, 90, 95, 100), 200, TQ, T, 506)}
    # n=100 puts a node on t_q; n=27 puts one within a single fine step of it
    collapse_exact = near[100] * 10 <= min(near[90], near[95])
    collapse_near = near[27] * 10 <= min(near[26], near[28])
    rate_ok = 0.7 <= fit.alpha_hat <= 1.3 and fit.r_squared >= 0.95
    ok = rate_ok and decays and collapse_exact and collapse_near and clock.elapsed < 180
    record_criterion(
        "5 Holder rate", ok,
        f"alpha={fit.alpha_hat:.3f} R2={fit.r_squared:.4f} decay={decays} "
        f"q(100)={near[100]:.2g} vs {min(near[90], near[95]):.3g}, "
        f"q(27)={near[27]:.2g} vs {min(near[26], near[28]):.3g} ({clock.elapsed:.1f}s)",
    )
    assert rate_ok, fit
    assert decays, globals_
    assert collapse_exact and collapse_near, near
    assert clock.elapsed < 180


def test_c6_modulus_properties(record_criterion):
    hs = (0.01, 0.02, 0.05, 0.1, 0.2)
    with Timer() as clock:
        times, x = simulate_ensemble(OU, T, 1000, 606, range(1, 1001))
        _, y = simulate_ensemble(OU, T, 1000, 607, range(1, 1001))
        wx = [modulus_from_values(times, x, h) for h in hs]
        wy = [modulus_from_values(times, y, h) for h in hs]
        wxy = [modulus_from_values(times, x + y, h) for h in hs]
    monotone = all(a.w <= b.w for a, b in zip(wx, wx[1:]))
    sub = [
        s.w <= a.w + b.w + 3 * math.sqrt(s.std_error**2 + a.std_error**2 + b.std_error**2)
        for s, a, b in zip(wxy, wx, wy)
    ]
    ok = monotone and all(sub) and clock.elapsed < 60
    record_criterion("6 modulus", ok,
                     f"W(X)={[round(e.w, 4) for e in wx]} subadditive={sub} ({clock.elapsed:.1f}s)")
    assert monotone
    assert all(sub)
    assert clock.elapsed < 60


def test_c7_chebyshev(record_criterion):
    with Timer() as clock:
        paths = simulate_paths(OU, T, 1000, 707, range(1, 1001))
        errors = query_errors(paths, RAMP, 50, TQ)
    mse = float(np.mean(errors**2))
    rows, ok = [], True
    for eps in (0.25, 0.5, 1.0):
        freq, se = exceedance_frequency(errors, eps)
        bound = mse / eps**2
        ok &= freq <= bound + 3 * se
        rows.append(f"eps={eps}: {freq:.3f}<={bound:.3f}")
    ok = bool(ok) and clock.elapsed < 60
    record_criterion("7 Chebyshev", ok, "; ".join(rows) + f" ({clock.elapsed:.1f}s)")
    assert ok


def test_c8_brute_force_equivalence(record_criterion):
    rng = np.random.default_rng(808)
    worst = 0.0
    with Timer() as clock:
        for case in range(10_000):
            n = int(rng.integers(1, 51))
            act = ACTIVATIONS[case % len(ACTIVATIONS)]
            grid = UniformGrid(float(rng.uniform(0.1, 100.0)), n)
            coeffs = rng.uniform(-1.0, 1.0, n + 1)
            op = SinnoOperator(grid, act, coeffs)
            # every tenth case lands on a node, including both endpoints
            t = grid.nodes[rng.integers(0, n + 1)] if case % 10 == 0 else rng.uniform(0, grid.horizon)
            scale = 2 * act.m / grid.step
            full = float(np.dot(coeffs, act(scale * (t - grid.nodes))))
            worst = max(worst, abs(evaluate(op, t) - full))
    ok = worst <= 1e-12 and clock.elapsed < 5
    record_criterion("8 brute force", ok, f"max abs diff={worst:.3g} ({clock.elapsed:.2f}s)")
    assert worst <= 1e-12
    assert clock.elapsed < 5


REAL_WHO = Path(os.environ.get("SINNO_WHO_CSV", DATA_DIR / "WHO-COVID-19-global-daily-data.csv"))
REF_COUNTRIES = ["India", "United States of America", "China", "Brazil"]


def test_c9a_covid_fixture(record_criterion):
    with Timer() as clock:
        india = load_who_csv(DATA_DIR / "who_fixture.csv", "India", 2020)
        brazil = load_who_csv(DATA_DIR / "who_fixture.csv", "Brazil", 2020)
        dups = load_who_csv(DATA_DIR / "who_duplicates.csv", "Chile", 2021)
        checks = {
            "three India rows": len(india) == 3,
            "blank counted": india.blank_cells == 1,
            "blank as zero": india.values.tolist() == [3.0, 0.0, 7.0],
            "Brazil sorted": brazil.values.tolist() == [2.0, 1.0],
            "last duplicate wins": dups.values.tolist() == [11.0, 25.0, 30.0, 40.0] and dups.duplicates == 2,
            "normalized times": normalize_time(india).times.tolist() == [0.0, 0.5, 1.0],
            "nodes interpolate": fit_and_score(india, 2, RAMP).mse_nodes == 0.0,
        }
        try:
            load_who_csv(DATA_DIR / "who_fixture.csv", "Atlantis", 2020)
            checks["unknown country"] = False
        except NotFoundError:
            checks["unknown country"] = True
    failed = [k for k, v in checks.items() if not v]
    ok = not failed and clock.elapsed < 30
    record_criterion("9a COVID fixture", ok, f"failed={failed} ({clock.elapsed:.2f}s)")
    assert not failed
    assert clock.elapsed < 30


def test_c9b_covid_real_file(record_criterion):
    if not REAL_WHO.is_file():
        record_criterion("9b COVID real file", None, f"skipped: {REAL_WHO} not present")
        pytest.skip(f"WHO file not found at {REAL_WHO}")
    with Timer() as clock:
        report = multi_country_report(REAL_WHO, REF_COUNTRIES, 2020, 100, 14)
    rmse = {c: r.rmse for c, r in report.results.items()}
    india_order = "India" in rmse and 1e3 < rmse["India"] < 1e5
    china_smallest = len(rmse) == 4 and min(rmse, key=rmse.get) == "China"
    ok = india_order and china_smallest and clock.elapsed < 30
    record_criterion("9b COVID real file", ok,
                     f"rmse={ {c: round(v) for c, v in rmse.items()} } ({clock.elapsed:.1f}s)")
    assert india_order, rmse
    assert china_smallest, rmse
    assert clock.elapsed < 30
