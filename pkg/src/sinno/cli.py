"""Command-line front end: ``sinno simulate | sweep | covid``.

Every run writes plot-ready tables plus a ``manifest.json`` holding all
parameters and seeds. The manifest is written last and marks completion.

Exit codes: 0 success, 1 usage error, 2 input/data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .activation import Activation, parse_activation
from .errors import FitError, InputError, SinnoError
from .ingest import HOLDOUT_RULES, fit_and_score, holdout_rmse, read_who_csv, select_country
from .metrics import (
    chebyshev_bound_check,
    exceedance_frequency,
    operator_for,
    query_errors,
    rate_fit,
    sweep_paths,
)
from .operator import UniformGrid
from .processes import (
    DEFAULT_HORIZON,
    DEFAULT_STEPS,
    OUProcess,
    ProcessSpec,
    SamplePath,
    SeedSpec,
    WienerProcess,
    simulate_paths,
)

log = logging.getLogger("sinno")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3
DEFAULT_SEED = 20240601
DEFAULT_SWEEP_NS = tuple(range(5, 101, 5))
DEFAULT_EPSILONS = (0.25, 0.5, 1.0)
CSV_FMT = "%.17g"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    out: Path
    fmt: str = "csv"
    process: ProcessSpec | None = None
    horizon: float = DEFAULT_HORIZON
    steps: int = DEFAULT_STEPS
    activation: Activation | None = None
    ns: tuple[int, ...] = ()
    realizations: int = 1
    query: float = 3.70
    seed: int = DEFAULT_SEED
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    curves: bool = False
    input_dir: Path | None = None
    file: Path | None = None
    countries: tuple[str, ...] = ()
    year: int = 2020
    holdout_days: int = 14
    holdout_rule: str = "constant"

    def parameters(self) -> dict:
        params = {
            "out": str(self.out),
            "format": self.fmt,
        }
        if self.command in ("simulate", "sweep"):
            params.update(
                process=_process_dict(self.process) if self.process else None,
                horizon=self.horizon,
                steps=self.steps,
                seed=self.seed,
                realizations=self.realizations,
            )
        if self.command in ("sweep", "covid"):
            params.update(activation=self.activation.label, ns=list(self.ns))
        if self.command == "sweep":
            params.update(
                query=self.query,
                epsilons=list(self.epsilons),
                curves=self.curves,
                input_dir=str(self.input_dir) if self.input_dir else None,
            )
        if self.command == "covid":
            params.update(
                file=str(self.file),
                countries=list(self.countries),
                year=self.year,
                holdout_days=self.holdout_days,
                holdout_rule=self.holdout_rule,
            )
        return params


def _process_dict(spec: ProcessSpec) -> dict:
    if isinstance(spec, OUProcess):
        return {"kind": "ou", "theta": spec.theta, "mu": spec.mu, "sigma": spec.sigma, "x0": spec.x0}
    return {"kind": "wiener", "sigma": spec.sigma, "x0": spec.x0}


def _parse_ns(text: str) -> tuple[int, ...]:
    try:
        ns = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--ns must be a comma list of integers, got {text!r}") from None
    if not ns or any(n < 1 for n in ns):
        raise UsageError("--ns needs at least one positive integer")
    return ns


def _parse_floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"{flag} must be a comma list of numbers, got {text!r}") from None
    if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise UsageError(f"{flag} needs positive values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sinno", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--format", dest="fmt", choices=("csv", "json", "both"), default="csv")

    def process_flags(p):
        p.add_argument("--process", choices=("ou", "wiener"), default="ou")
        p.add_argument("--theta", type=float, default=0.5)
        p.add_argument("--mu", type=float, default=0.0)
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--x0", type=float, default=0.0)
        p.add_argument("--horizon", type=float, default=DEFAULT_HORIZON)
        p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("simulate", help="simulate sample paths")
    common(p)
    process_flags(p)
    p.add_argument("--realizations", type=int, default=1)

    p = sub.add_parser("sweep", help="Monte-Carlo MSE sweep over n")
    common(p)
    process_flags(p)
    p.add_argument("--realizations", type=int, default=3)
    p.add_argument("--activation", default="ramp", help="ramp | bspline:<r>")
    p.add_argument("--ns", default=",".join(map(str, DEFAULT_SWEEP_NS)))
    p.add_argument("--query", type=float, default=3.70)
    p.add_argument("--epsilon", default=",".join(map(str, DEFAULT_EPSILONS)),
                   help="comma list of tail thresholds for the Chebyshev report")
    p.add_argument("--curves", action="store_true",
                   help="also write (t, X_t, S_n) for realization 1 at every n")
    p.add_argument("--input-dir", type=Path,
                   help="sweep over paths from a previous `simulate` run instead of simulating")

    p = sub.add_parser("covid", help="fit daily case counts and score a hold-out window")
    common(p)
    p.add_argument("--file", type=Path, required=True)
    p.add_argument("--country", action="append", dest="countries")
    p.add_argument("--year", type=int, default=2020)
    p.add_argument("--ns", default="100")
    p.add_argument("--activation", default="ramp")
    p.add_argument("--holdout-days", type=int, default=14)
    p.add_argument("--holdout-rule", choices=HOLDOUT_RULES, default="constant")
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    """Validate every parameter before any work starts."""
    cfg = RunConfig(command=args.command, out=args.out, fmt=args.fmt)
    try:
        if args.command in ("simulate", "sweep"):
            if args.process == "ou":
                cfg.process = OUProcess(args.theta, args.mu, args.sigma, args.x0)
            else:
                cfg.process = WienerProcess(args.sigma, args.x0)
            UniformGrid(args.horizon, 1)
            if args.steps < 2:
                raise UsageError("--steps must be >= 2")
            SeedSpec(args.seed, 0)
            if args.realizations < 1:
                raise UsageError("--realizations must be >= 1")
            cfg.horizon, cfg.steps = args.horizon, args.steps
            cfg.seed, cfg.realizations = args.seed, args.realizations
        if args.command in ("sweep", "covid"):
            cfg.activation = parse_activation(args.activation)
            cfg.ns = _parse_ns(args.ns)
        if args.command == "sweep":
            cfg.epsilons = _parse_floats(args.epsilon, "--epsilon")
            cfg.curves, cfg.input_dir = args.curves, args.input_dir
            cfg.query = args.query
            if args.input_dir is None and not (0 < args.query < args.horizon):
                raise UsageError(f"--query must lie in (0, {args.horizon})")
        if args.command == "covid":
            cfg.file = args.file
            cfg.countries = tuple(args.countries or ["India"])
            cfg.year = args.year
            if args.holdout_days < 1:
                raise UsageError("--holdout-days must be >= 1")
            cfg.holdout_days, cfg.holdout_rule = args.holdout_days, args.holdout_rule
    except InputError as exc:
        raise UsageError(str(exc)) from None
    return cfg


# ---------------------------------------------------------------- writers

def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_table(out: Path, stem: str, columns: Sequence[str], rows, fmt: str) -> list[str]:
    """Write ``rows`` as ``stem.csv`` and/or ``stem.json``; returns file names."""
    written = []
    if fmt in ("csv", "both"):
        name = f"{stem}.csv"
        with open(out / name, "w", newline="") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_cell(v) for v in row) + "\n")
        written.append(name)
    if fmt in ("json", "both"):
        name = f"{stem}.json"
        records = [dict(zip(columns, (_jsonable(v) for v in row))) for row in rows]
        (out / name).write_text(json.dumps(records, indent=1))
        written.append(name)
    return written


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return CSV_FMT % v
    return str(v)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if hasattr(v, "isoformat"):
        return v.isoformat()
    return v


def write_json(out: Path, name: str, payload: dict) -> str:
    (out / name).write_text(json.dumps(payload, indent=2, default=_jsonable))
    return name


def read_path_csv(path: Path) -> SamplePath:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SamplePath(data[:, 0], data[:, 1])


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_") or "series"


# ---------------------------------------------------------------- commands

def cmd_simulate(cfg: RunConfig) -> list[str]:
    streams = list(range(1, cfg.realizations + 1))
    paths = simulate_paths(cfg.process, cfg.horizon, cfg.steps, cfg.seed, streams)
    out = _ensure_dir(cfg.out)
    files = []
    for s, path in zip(streams, paths):
        files += write_table(out, f"path_{s:04d}", ("t", "value"), zip(path.times, path.values), cfg.fmt)
    files.append(write_json(out, "manifest.json", {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "parameters": cfg.parameters(),
        "seeds": {"base_seed": cfg.seed, "stream_indices": streams},
        "files": files,
    }))
    return files


def _load_simulation(input_dir: Path) -> tuple[list[SamplePath], dict]:
    try:
        manifest = json.loads((input_dir / "manifest.json").read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{input_dir}/manifest.json is not valid JSON: {exc}") from None
    if manifest.get("command") != "simulate":
        raise InputError(f"{input_dir} is not the output of `sinno simulate`")
    names = [f for f in manifest["files"] if f.startswith("path_") and f.endswith(".csv")]
    if not names:
        raise InputError(f"{input_dir}: no path CSVs recorded (re-run simulate with --format csv)")
    return [read_path_csv(input_dir / f) for f in sorted(names)], manifest


def cmd_sweep(cfg: RunConfig) -> list[str]:
    source = None
    if cfg.input_dir is not None:
        paths, manifest = _load_simulation(cfg.input_dir)
        source = {"input_dir": str(cfg.input_dir), "simulate_manifest": manifest}
        if not (0 < cfg.query < paths[0].horizon):
            raise InputError(f"query {cfg.query} outside (0, {paths[0].horizon})")
    else:
        streams = range(1, cfg.realizations + 1)
        paths = simulate_paths(cfg.process, cfg.horizon, cfg.steps, cfg.seed, streams)

    reports = sweep_paths(paths, cfg.activation, cfg.ns, cfg.query)
    try:
        fit = rate_fit([(r.n, r.mse_global) for r in reports], horizon=paths[0].horizon)
        fit_info, fit_error = fit.to_dict(), None
    except FitError as exc:
        fit_info, fit_error = None, str(exc)

    tails = []
    for r in reports:
        errs = query_errors(paths, cfg.activation, r.n, cfg.query)
        for eps in cfg.epsilons:
            freq, se = exceedance_frequency(errs, eps)
            tails.append({
                "n": r.n,
                "epsilon": eps,
                "chebyshev_bound": chebyshev_bound_check(r.mse_query, eps),
                "empirical_frequency": freq,
                "binomial_std_error": se,
            })

    out = _ensure_dir(cfg.out)
    columns = ("n", "mse_nodes", "mse_query_mean", "mse_query_std", "mse_global_mean",
               "mse_global_std", "mean_estimate")
    rows = [(r.n, r.mse_nodes, r.mse_query, r.mse_query_std, r.mse_global,
             r.mse_global_std, r.mean_query_value) for r in reports]
    files = write_table(out, "sweep", columns, rows, cfg.fmt)

    if cfg.curves:
        first = paths[0]
        for n in cfg.ns:
            op, _ = operator_for(first, UniformGrid(first.horizon, n), cfg.activation, "auto")
            s = op(first.times)
            files += write_table(out, f"curves_n{n}", ("t", "x", "s"),
                                 zip(first.times, first.values, s), cfg.fmt)

    files.append(write_json(out, "summary.json", {
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "reports": [r.to_dict() for r in reports],
        "rate_fit": fit_info,
        "rate_fit_error": fit_error,
        "chebyshev": tails,
    }))
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "parameters": cfg.parameters(),
        "seeds": {"base_seed": cfg.seed, "stream_indices": list(range(1, len(paths) + 1))},
        "files": files,
    }
    if source:
        manifest["source"] = source
        manifest["seeds"] = source["simulate_manifest"].get("seeds")
    files.append(write_json(out, "manifest.json", manifest))
    return files


def cmd_covid(cfg: RunConfig) -> tuple[list[str], bool]:
    """Returns written files and whether at least one country succeeded."""
    if not cfg.file.is_file():
        raise FileNotFoundError(f"input file not found: {cfg.file}")
    frame = read_who_csv(cfg.file)
    n_fit = max(cfg.ns)

    results, failures, warnings = {}, {}, {}
    recon, decay = {}, []
    for country in cfg.countries:
        try:
            ds = select_country(frame, country, cfg.year)
            fit = fit_and_score(ds, n_fit, cfg.activation)
            hold = holdout_rmse(ds, n_fit, cfg.activation, cfg.holdout_days, cfg.holdout_rule)
            for n in cfg.ns:
                f = fit if n == n_fit else fit_and_score(ds, n, cfg.activation)
                decay.append((country, n, f.mse_nodes, f.mse_global))
        except InputError as exc:
            failures[country] = str(exc)
            continue
        results[country] = {"holdout": hold, "mse_nodes": fit.mse_nodes, "mse_global": fit.mse_global}
        warnings[country] = {
            "blank_cells": ds.blank_cells,
            "duplicate_dates": ds.duplicates,
            "missing_dates": ds.missing_dates,
        }
        recon[country] = list(zip(
            (d.item().isoformat() for d in ds.dates), ds.values, fit.operator(fit.samples.times)
        ))

    out = _ensure_dir(cfg.out)
    files = []
    for country, rows in recon.items():
        files += write_table(out, f"reconstruction_{_slug(country)}", ("date", "actual", "predicted"),
                             rows, cfg.fmt)
    files += write_table(out, "holdout", ("country", "rmse"),
                         [(c, r["holdout"].rmse) for c, r in results.items()], cfg.fmt)
    files += write_table(out, "mse_decay", ("country", "n", "mse_nodes", "mse_global"), decay, cfg.fmt)
    files.append(write_json(out, "summary.json", {
        "schema_version": SCHEMA_VERSION,
        "command": "covid",
        "n": n_fit,
        "results": {
            c: {"mse_nodes": r["mse_nodes"], "mse_global": r["mse_global"], **r["holdout"].to_dict()}
            for c, r in results.items()
        },
        "failures": failures,
        "warnings": warnings,
    }))
    files.append(write_json(out, "manifest.json", {
        "schema_version": SCHEMA_VERSION,
        "command": "covid",
        "parameters": cfg.parameters(),
        "files": files,
    }))
    return files, bool(results)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
    except UsageError as exc:
        print(f"sinno: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if cfg.command == "simulate":
            files = cmd_simulate(cfg)
        elif cfg.command == "sweep":
            files = cmd_sweep(cfg)
        else:
            files, ok = cmd_covid(cfg)
            if not ok:
                print("sinno: every requested country failed; see summary.json", file=sys.stderr)
                return EXIT_DATA
    except SinnoError as exc:
        print(f"sinno: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"sinno: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote %d file(s) to %s", len(files), cfg.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
