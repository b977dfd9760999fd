"""Electricity demand if every gas furnace were replaced by a heat pump."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .ingest import (DEFAULT_MIN_COVERAGE, HEAT_PUMP_TYPES, Dataset, HeatingType, Medium,
                     aggregate_annual)
from .thermal import GasParams, b_factor, gas_to_heat

log = logging.getLogger(__name__)


class Population(str, Enum):
    EXISTING_HP = "existing_hp"
    FUTURE_HP = "future_hp"


@dataclass(frozen=True)
class BuildingForecast:
    building_id: str
    q_gas_kwh: float
    e_predicted_kwh: float


@dataclass(frozen=True)
class RetrofitForecast:
    """Per-building and total predicted electricity for one year.

    ``increase_pct`` is 100 * predicted electricity / household electricity,
    both summed over the furnace buildings that have a household meter
    (``baseline_buildings`` of them, ``baseline_kwh`` in total).
    """

    year: int
    b: float
    per_building: list[BuildingForecast]
    total_kwh: float
    increase_pct: float | None = None
    baseline_kwh: float | None = None
    baseline_buildings: int = 0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def total_gwh(self) -> float:
        return self.total_kwh / 1e6

    def rows(self) -> list[list[str]]:
        return [[f.building_id, str(self.year), repr(f.q_gas_kwh), repr(f.e_predicted_kwh)]
                for f in self.per_building]

    def to_dict(self) -> dict:
        return {
            "year": self.year,
            "b": self.b,
            "n_buildings": len(self.per_building),
            "total_kwh": self.total_kwh,
            "total_gwh": self.total_gwh,
            "increase_pct": self.increase_pct,
            "increase_base": "household electricity of furnace buildings, excluding heating",
            "baseline_kwh": self.baseline_kwh,
            "baseline_buildings": self.baseline_buildings,
            "diagnostics": list(self.diagnostics),
        }


def resolve_b(b: float | None = None, spf: float | None = None, gamma: float | None = None) -> float:
    """B from either B itself or an (SPF, gamma) pair."""
    if (b is None) == (spf is None):
        raise ValueError("give exactly one of b or spf")
    if b is not None:
        if not b > 0:
            raise ValueError(f"B must be > 0, got {b}")
        return float(b)
    return b_factor(spf, 0.0 if gamma is None else gamma)


def _gas_heat(dataset: Dataset, year: int, gas: GasParams, min_coverage: float,
              diagnostics: list[str]) -> list[tuple[str, float]]:
    out = []
    for b in dataset.buildings_of(HeatingType.GAS_FURNACE):
        meter = dataset.meter_of(b, Medium.GAS_VOLUME)
        if meter is None:
            diagnostics.append(f"{b.building_id}: no gas meter")
            continue
        a = aggregate_annual(meter, year, b.building_id)
        if a.coverage_fraction == 0 or a.coverage_fraction < min_coverage:
            diagnostics.append(
                f"{b.building_id}: gas coverage {a.coverage_fraction:.3f} in {year}, skipped")
            continue
        out.append((b.building_id, float(gas_to_heat(a.total, gas))))
    return out


def _household(dataset: Dataset, building_id: str, year: int, min_coverage: float) -> float | None:
    meter = dataset.meter_of(building_id, Medium.HOUSEHOLD_ELECTRICITY)
    if meter is None:
        return None
    a = aggregate_annual(meter, year, building_id)
    if a.coverage_fraction == 0 or a.coverage_fraction < min_coverage:
        return None
    return a.total


def forecast_retrofit(dataset: Dataset, year: int, b: float | None = None, *,
                      spf: float | None = None, gamma: float | None = None,
                      gas: GasParams = GasParams(),
                      min_coverage: float = DEFAULT_MIN_COVERAGE) -> RetrofitForecast:
    """Predict heat-pump electricity Q / B for every furnace building in ``year``."""
    b_val = resolve_b(b, spf, gamma)
    diagnostics: list[str] = []
    per_building = [BuildingForecast(bid, q, q / b_val)
                    for bid, q in _gas_heat(dataset, year, gas, min_coverage, diagnostics)]
    total = math.fsum(f.e_predicted_kwh for f in per_building)

    predicted, baseline = [], []
    for f in per_building:
        hh = _household(dataset, f.building_id, year, min_coverage)
        if hh is not None and hh > 0:
            predicted.append(f.e_predicted_kwh)
            baseline.append(hh)
    increase = base = None
    if baseline:
        base = math.fsum(baseline)
        increase = 100.0 * math.fsum(predicted) / base
    for d in diagnostics:
        log.info(d)
    return RetrofitForecast(year, b_val, per_building, total, increase, base, len(baseline),
                            diagnostics)


@dataclass(frozen=True)
class RatioStats:
    population: Population
    n: int
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outlier_count: int
    clip_at: float | None = None

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    def to_dict(self) -> dict:
        return {"population": self.population.value, "n": self.n,
                "quartiles": [self.q1, self.median, self.q3],
                "whiskers": [self.whisker_low, self.whisker_high],
                "outlier_count": self.outlier_count, "clip_at": self.clip_at}


def summarize_ratios(ratios, population: Population | str, clip_at: float | None = None) -> RatioStats:
    """Box-plot statistics: linear-interpolation quartiles, Tukey 1.5 IQR whiskers.

    Values above ``clip_at`` are counted as outliers but kept in the quartiles.
    """
    x = np.sort(np.asarray(ratios, dtype=float))
    if x.size == 0:
        raise ValueError("no ratios to summarise")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outlier = (x < lo_fence) | (x > hi_fence)
    if clip_at is not None:
        outlier |= x > clip_at
    return RatioStats(Population(population), int(x.size), float(q1), float(med), float(q3),
                      float(inside.min()), float(inside.max()), int(outlier.sum()), clip_at)


def building_ratios(dataset: Dataset, year: int, population: Population | str,
                    b: float | None = None, *, gas: GasParams = GasParams(),
                    min_coverage: float = DEFAULT_MIN_COVERAGE
                    ) -> tuple[list[tuple[str, float]], list[str]]:
    """Heat-pump electricity over household electricity (which excludes the heat pump).

    ``existing_hp`` uses metered heat-pump electricity; ``future_hp`` uses
    Q / B for furnace buildings and therefore needs ``b``.
    """
    population = Population(population)
    diagnostics: list[str] = []
    if population is Population.EXISTING_HP:
        hp_kwh = []
        for bld in dataset.buildings_of(*HEAT_PUMP_TYPES):
            meter = dataset.meter_of(bld, Medium.HP_ELECTRICITY)
            if meter is None:
                diagnostics.append(f"{bld.building_id}: no heat-pump meter")
                continue
            a = aggregate_annual(meter, year, bld.building_id)
            if a.coverage_fraction == 0 or a.coverage_fraction < min_coverage:
                diagnostics.append(f"{bld.building_id}: heat-pump coverage too low in {year}")
                continue
            hp_kwh.append((bld.building_id, a.total))
    else:
        if b is None:
            raise ValueError("future_hp ratios need B")
        hp_kwh = [(bid, q / b) for bid, q in _gas_heat(dataset, year, gas, min_coverage, diagnostics)]

    ratios = []
    for bid, e in hp_kwh:
        hh = _household(dataset, bid, year, min_coverage)
        if hh is None or hh <= 0:
            diagnostics.append(f"{bid}: no positive household baseline in {year}, excluded")
            continue
        ratios.append((bid, e / hh))
    return ratios, diagnostics


def ratio_stats(dataset: Dataset, year: int, population: Population | str, b: float | None = None,
                *, clip_at: float | None = None, gas: GasParams = GasParams(),
                min_coverage: float = DEFAULT_MIN_COVERAGE) -> RatioStats:
    ratios, _ = building_ratios(dataset, year, population, b, gas=gas, min_coverage=min_coverage)
    return summarize_ratios([r for _, r in ratios], population, clip_at)


def write_forecast_csv(forecasts, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["building_id", "year", "q_gas_kwh", "e_predicted_kwh"])
        for f in forecasts:
            w.writerows(f.rows())


def write_ratios_csv(rows, path) -> None:
    """``rows`` are (building_id, population, ratio) triples."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["building_id", "population", "ratio"])
        for bid, pop, r in rows:
            w.writerow([bid, Population(pop).value, repr(float(r))])
