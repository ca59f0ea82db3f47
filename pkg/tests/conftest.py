from pathlib import Path

import numpy as np
import pandas as pd
import pytest

DATA_DIR = Path(__file__).parent / "data"

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def write_who_csv(path, series, year=2020, start=None):
    """Write a WHO-shaped CSV with one daily row per value for each country."""
    start = np.datetime64(start or f"{year}-01-01", "D")
    rows = []
    for country, values in series.items():
        for i, v in enumerate(values):
            rows.append({
                "Date_reported": str(start + i),
                "Country_code": country[:2].upper(),
                "Country": country,
                "WHO_region": "X",
                "New_cases": int(round(v)),
                "Cumulative_cases": 0,
                "New_deaths": 0,
                "Cumulative_deaths": 0,
            })
    pd.DataFrame(rows).to_csv(path, index=False)
    return Path(path)


def synthetic_year(scale, seed, days=366):
    """Smooth epidemic-like curve with multiplicative day-to-day noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(days)
    wave = np.exp(-((t - 250) / 60.0) ** 2) + 0.3 * np.exp(-((t - 120) / 40.0) ** 2)
    return np.maximum(scale * wave * rng.lognormal(0, 0.2, days), 0)


@pytest.fixture(scope="session")
def who_year_csv(tmp_path_factory):
    series = {
        "India": synthetic_year(9e4, 1),
        "United States of America": synthetic_year(2e5, 2),
        "China": synthetic_year(50, 3),
        "Brazil": synthetic_year(5e4, 4),
    }
    return write_who_csv(tmp_path_factory.mktemp("who") / "who_2020.csv", series)


@pytest.fixture
def record_criterion():
    def record(name, passed, detail=""):
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        _ACCEPTANCE[name] = (status, detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda k: (len(k.split()[0]), k)):
        status, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())
