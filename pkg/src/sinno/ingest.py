"""Daily case-count ingestion (WHO COVID-19 CSV layout) and hold-out scoring.

Dates are handled as integer day offsets from the first record, so missing
days keep their place on the time axis. Times are mapped linearly onto
``[0, 1]`` before an operator is built.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .activation import Activation, Sigmoidal
from .errors import InputError, NotFoundError, SchemaError
from .operator import SinnoOperator, UniformGrid, build_operator, raw_sum
from .metrics import mse_global, mse_nodes
from .processes import SamplePath

log = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("Date_reported", "Country", "New_cases")
HOLDOUT_RULES = ("constant", "support")


@dataclass(frozen=True)
class TimeSeriesRecord:
    date: dt.date
    value: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """Date-sorted, de-duplicated daily series for one country."""

    country: str
    dates: np.ndarray  # datetime64[D], strictly increasing
    values: np.ndarray
    blank_cells: int = 0
    duplicates: int = 0

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape or dates.ndim != 1:
            raise InputError("dates and values must be 1-D and equally long")
        if dates.size and np.any(np.diff(dates).astype(int) <= 0):
            raise InputError("dates must be strictly increasing")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_records(cls, country: str, records: Iterable[TimeSeriesRecord]) -> "Dataset":
        """Sort by date; for repeated dates the last record wins."""
        latest: dict[dt.date, float] = {}
        total = 0
        for rec in records:
            latest[rec.date] = float(rec.value)
            total += 1
        keys = sorted(latest)
        return cls(
            country,
            np.array(keys, dtype="datetime64[D]"),
            np.array([latest[k] for k in keys]),
            duplicates=total - len(keys),
        )

    def __len__(self) -> int:
        return self.dates.size

    @property
    def t0(self) -> dt.date:
        return self.dates[0].item()

    @property
    def tn(self) -> dt.date:
        return self.dates[-1].item()

    @property
    def day_offsets(self) -> np.ndarray:
        return (self.dates - self.dates[0]).astype(np.int64)

    @property
    def missing_dates(self) -> int:
        return int(self.day_offsets[-1] + 1 - len(self)) if len(self) else 0

    @property
    def records(self) -> list[TimeSeriesRecord]:
        return [TimeSeriesRecord(d.item(), float(v)) for d, v in zip(self.dates, self.values)]

    def head(self, count: int) -> "Dataset":
        return Dataset(self.country, self.dates[:count], self.values[:count])


def read_who_csv(path: str | PathLike) -> pd.DataFrame:
    """Parse the CSV once; extra columns are dropped."""
    try:
        frame = pd.read_csv(path, dtype={"Country": str}, keep_default_na=False, na_values=[""])
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: file is empty") from None
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing required column(s) {', '.join(missing)}")
    frame = frame.loc[:, list(REQUIRED_COLUMNS)].copy()
    try:
        frame["Date_reported"] = pd.to_datetime(frame["Date_reported"], format="%Y-%m-%d")
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: Date_reported is not ISO-8601: {exc}") from None
    try:
        frame["New_cases"] = pd.to_numeric(frame["New_cases"], errors="raise")
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: New_cases is not numeric: {exc}") from None
    return frame


def select_country(frame: pd.DataFrame, country: str, year: int) -> Dataset:
    rows = frame[(frame["Country"] == country) & (frame["Date_reported"].dt.year == year)]
    if rows.empty:
        raise NotFoundError(f"no rows for country {country!r} in year {year}")
    blanks = int(rows["New_cases"].isna().sum())
    if blanks:
        log.warning("%s %d: %d blank New_cases cell(s) read as 0", country, year, blanks)
    # stable sort keeps file order among equal dates, so keep="last" is last occurrence
    rows = rows.sort_values("Date_reported", kind="stable")
    deduped = rows.drop_duplicates("Date_reported", keep="last")
    dups = len(rows) - len(deduped)
    if dups:
        log.warning("%s %d: %d duplicate date row(s); last occurrence kept", country, year, dups)
    return Dataset(
        country,
        deduped["Date_reported"].to_numpy().astype("datetime64[D]"),
        deduped["New_cases"].fillna(0).to_numpy(dtype=float),
        blank_cells=blanks,
        duplicates=dups,
    )


def load_who_csv(path: str | PathLike, country: str, year: int) -> Dataset:
    return select_country(read_who_csv(path), country, year)


def normalize_time(data: Dataset | SamplePath) -> SamplePath:
    """Map sample times linearly so the first is 0 and the last is 1."""
    if isinstance(data, Dataset):
        offsets, values = data.day_offsets.astype(float), data.values
    else:
        offsets, values = np.asarray(data.times, dtype=float), data.values
    if offsets.size < 2:
        raise InputError("time normalization needs at least two records")
    span = offsets[-1] - offsets[0]
    times = (offsets - offsets[0]) / span
    times[-1] = 1.0
    return SamplePath(times, values)


@dataclass(frozen=True)
class FitResult:
    mse_nodes: float
    mse_global: float
    operator: SinnoOperator
    samples: SamplePath


def fit_and_score(ds: Dataset, n: int, activation: Activation) -> FitResult:
    """Build an operator with ``n + 1`` nodes on the normalized series and score it."""
    if len(ds) < n + 1:
        raise InputError(f"{ds.country}: {len(ds)} records cannot support n={n} (needs n+1)")
    samples = normalize_time(ds)
    op = build_operator(samples, UniformGrid(1.0, n), activation, sampling="nearest")
    return FitResult(mse_nodes(op, samples), mse_global(op, samples), op, samples)


@dataclass(frozen=True)
class HoldoutResult:
    country: str
    D: int
    rmse: float
    rule: str
    predictions: list[tuple[dt.date, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "country": self.country,
            "D": self.D,
            "rmse": self.rmse,
            "rule": self.rule,
            "predictions": [
                {"date": d.isoformat(), "predicted": p, "actual": a} for d, p, a in self.predictions
            ],
        }


def holdout_rmse(
    ds: Dataset,
    n: int,
    activation: Activation,
    D: int,
    rule: str = "constant",
) -> HoldoutResult:
    """Fit on all but the last ``D`` records and score the forecast of those ``D``.

    Hold-out dates are mapped through the training normalization, so they sit
    at ``t > 1``. ``rule="constant"`` carries the last node value forward;
    ``rule="support"`` uses the raw operator sum, which is zero once ``t`` is
    a full step past the last node.
    """
    if rule not in HOLDOUT_RULES:
        raise InputError(f"hold-out rule must be one of {HOLDOUT_RULES}, got {rule!r}")
    if D < 1:
        raise InputError("hold-out window D must be at least 1 day")
    if D >= len(ds):
        raise InputError(f"D={D} leaves no training data ({len(ds)} records)")
    if len(ds) <= D + 1:
        raise InputError(f"need more than D+1={D + 1} records, got {len(ds)}")

    train = ds.head(len(ds) - D)
    fit = fit_and_score(train, n, activation)
    offsets = ds.day_offsets.astype(float)
    span = offsets[len(train) - 1]
    t_hold = offsets[len(train):] / span
    actual = ds.values[len(train):]
    if rule == "constant":
        predicted = np.full(D, fit.operator.coefficients[-1])
    else:
        predicted = np.asarray(raw_sum(fit.operator, t_hold), dtype=float)
    rmse = math.sqrt(float(np.mean((actual - predicted) ** 2)))
    preds = [
        (d.item(), float(p), float(a))
        for d, p, a in zip(ds.dates[len(train):], predicted, actual)
    ]
    return HoldoutResult(ds.country, D, rmse, rule, preds)


@dataclass
class CountryReport:
    results: dict[str, HoldoutResult]
    failures: dict[str, str]


def multi_country_report(
    source: str | PathLike | pd.DataFrame,
    countries: Sequence[str],
    year: int,
    n: int,
    D: int,
    activation: Activation | None = None,
    rule: str = "constant",
) -> CountryReport:
    """Hold-out results for several countries from one parse of the file.

    ``source`` is a CSV path or a frame already returned by
    :func:`read_who_csv`. Per-country failures are collected; only a run
    where every country fails raises.
    """
    activation = activation or Activation(Sigmoidal.ramp())
    frame = source if isinstance(source, pd.DataFrame) else read_who_csv(source)
    results, failures = {}, {}
    for country in countries:
        try:
            ds = select_country(frame, country, year)
            results[country] = holdout_rmse(ds, n, activation, D, rule)
        except InputError as exc:
            failures[country] = str(exc)
    if not results:
        detail = "; ".join(f"{c}: {m}" for c, m in failures.items())
        raise NotFoundError(f"all countries failed: {detail}")
    return CountryReport(results, failures)
