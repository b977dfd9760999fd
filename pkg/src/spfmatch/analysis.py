"""Dataset validation statistics: temperature, volume and daily cross-medium correlations."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from .ingest import (DEFAULT_MIN_COVERAGE, HEAT_PUMP_TYPES, Dataset, HeatingType, Medium,
                     WeatherSeries, aggregate_annual)

log = logging.getLogger(__name__)

# (month, day) inclusive spans; Jan 1 - Feb 20 and Nov 1 - Dec 31
WINTER_WINDOW = (((1, 1), (2, 20)), ((11, 1), (12, 31)))


class UndefinedCorrelationError(ValueError):
    pass


class InsufficientCoverageError(ValueError):
    def __init__(self, message: str, missing_spans: list[tuple[str, str]]):
        self.missing_spans = missing_spans
        super().__init__(message)


@dataclass(frozen=True)
class CorrelationReport:
    pair: str
    year_range: tuple[int, int]
    r: float
    n: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["year_range"] = list(self.year_range)
        return d


def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d and of equal length")
    if x.size < 3:
        raise ValueError(f"need at least 3 pairs, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("zero variance; correlation undefined")
    r = np.dot(dx, dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def daily_mean_series(dataset: Dataset, medium: Medium | str, year: int,
                      strict: bool = False) -> pd.Series:
    """Mean daily reading across all meters of ``medium`` in ``year``.

    Hourly meters are summed to days first. By default each day averages over
    the meters reporting that day; ``strict`` keeps only days on which every
    meter with data in the year reports.
    """
    medium = Medium(medium)
    start, end = np.datetime64(f"{year}-01-01"), np.datetime64(f"{year + 1}-01-01")
    columns = {}
    for meter in dataset.meters_of(medium):
        daily = meter.daily()
        lo, hi = np.searchsorted(daily.timestamps, [start, end])
        if hi > lo:
            columns[meter.meter_id] = pd.Series(daily.values[lo:hi],
                                                index=pd.DatetimeIndex(daily.timestamps[lo:hi]))
    if not columns:
        return pd.Series(dtype=float, name=medium.value)
    frame = pd.DataFrame(columns)
    if strict:
        frame = frame.dropna()
    means = frame.mean(axis=1, skipna=True).dropna()
    means.name = medium.value
    return means.sort_index()


def _window_days(year: int, window=WINTER_WINDOW) -> np.ndarray:
    spans = []
    for (m0, d0), (m1, d1) in window:
        first = np.datetime64(f"{year}-{m0:02d}-{d0:02d}")
        last = np.datetime64(f"{year}-{m1:02d}-{d1:02d}")
        spans.append(np.arange(first, last + 1))
    return np.concatenate(spans)


def _spans(days: np.ndarray) -> list[tuple[str, str]]:
    if days.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(days).astype(int) != 1)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [days.size - 1]])
    return [(str(days[s]), str(days[e])) for s, e in zip(starts, ends)]


def winter_mean_temp(weather: WeatherSeries, year: int, window=WINTER_WINDOW,
                     min_coverage: float = DEFAULT_MIN_COVERAGE) -> float:
    """Mean of daily temperatures over the winter window of ``year``.

    The default window is Jan 1 - Feb 20 plus Nov 1 - Dec 31, i.e. 112 days.
    """
    wanted = _window_days(year, window)
    present = np.isin(wanted, weather.dates)
    if present.mean() < min_coverage or not present.any():
        missing = _spans(wanted[~present])
        raise InsufficientCoverageError(
            f"weather covers {present.sum()} of {wanted.size} winter days in {year}; "
            f"missing {missing}", missing)
    return float(weather.temps[np.isin(weather.dates, wanted)].mean())


def validation_suite(dataset: Dataset, years, min_coverage: float = DEFAULT_MIN_COVERAGE
                     ) -> tuple[list[CorrelationReport], list[str]]:
    """Correlation checks for each year.

    Per year: daily heat-pump mean vs temperature, daily gas mean vs
    temperature, building volume vs annual gas and vs annual heat-pump
    electricity, daily gas mean vs daily heat-pump mean. Entries whose inputs
    are missing are skipped and explained in the returned diagnostics.
    """
    reports: list[CorrelationReport] = []
    diagnostics: list[str] = []

    def add(pair: str, year: int, x, y):
        try:
            reports.append(CorrelationReport(pair, (year, year), pearson_r(x, y), len(x)))
        except ValueError as exc:
            diagnostics.append(f"{year} {pair}: {exc}")

    for year in years:
        gas = daily_mean_series(dataset, Medium.GAS_VOLUME, year)
        hp = daily_mean_series(dataset, Medium.HP_ELECTRICITY, year)
        if dataset.weather is None:
            diagnostics.append(f"{year}: no weather data; temperature correlations skipped")
        else:
            w = dataset.weather.year(year)
            temp = pd.Series(w.temps, index=pd.DatetimeIndex(w.dates))
            for label, series in (("daily hp electricity vs temperature", hp),
                                  ("daily gas vs temperature", gas)):
                joined = pd.concat([series, temp], axis=1, join="inner")
                if joined.empty:
                    diagnostics.append(f"{year} {label}: no overlapping days")
                else:
                    add(label, year, joined.iloc[:, 0].to_numpy(), joined.iloc[:, 1].to_numpy())

        for label, medium, types in (
                ("building volume vs annual gas", Medium.GAS_VOLUME, [HeatingType.GAS_FURNACE]),
                ("building volume vs annual hp electricity", Medium.HP_ELECTRICITY, HEAT_PUMP_TYPES)):
            vols, totals = [], []
            for b in dataset.buildings_of(*types):
                meter = dataset.meter_of(b, medium)
                if meter is None or b.volume is None:
                    continue
                a = aggregate_annual(meter, year, b.building_id)
                if a.coverage_fraction >= min_coverage:
                    vols.append(b.volume)
                    totals.append(a.total)
            if not vols:
                diagnostics.append(f"{year} {label}: no buildings with volume and annual value")
            else:
                add(label, year, vols, totals)

        joined = pd.concat([gas, hp], axis=1, join="inner")
        if joined.empty:
            diagnostics.append(f"{year} daily gas vs daily hp electricity: no overlapping days")
        else:
            add("daily gas vs daily hp electricity", year,
                joined.iloc[:, 0].to_numpy(), joined.iloc[:, 1].to_numpy())

    for d in diagnostics:
        log.warning(d)
    return reports, diagnostics
