"""Grid search for the electricity-to-heat scale factor B and the implied mean SPF.

For a candidate B, the heat-pump electricity sample scaled by B is compared to
the furnace heat-demand sample. Both are binned on edges rebuilt from the
pooled sample at every grid point, and the B with the smallest divergence wins.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distribution import BinningSpec, Variant, histogram, jsd, make_common_edges
from .ingest import (DEFAULT_MIN_COVERAGE, HEAT_PUMP_TYPES, Dataset, HeatingType, Medium,
                     annual_values, filter_by_coverage)
from .thermal import GasParams, RetrofitParams, gas_to_heat

log = logging.getLogger(__name__)

DEFAULT_MIN_SAMPLES = 10


class TooFewSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    b_min: float = 1.5
    b_max: float = 4.0
    step: float = 0.1

    def __post_init__(self):
        if not self.b_min > 0:
            raise ValueError(f"b_min must be > 0, got {self.b_min}")
        if not self.b_max > self.b_min:
            raise ValueError(f"b_max ({self.b_max}) must exceed b_min ({self.b_min})")
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")

    def points(self) -> np.ndarray:
        """Grid values from b_min to b_max inclusive.

        Computed as b_min + i * step and rounded to 12 decimals so that
        e.g. 3.0 is exactly 3.0 rather than 3.0000000000000004.
        """
        n = int(np.floor((self.b_max - self.b_min) / self.step + 1e-9))
        pts = np.round(self.b_min + self.step * np.arange(n + 1), 12)
        if self.b_max - pts[-1] > 1e-9 * self.step:
            pts = np.append(pts, self.b_max)
        return pts


@dataclass(frozen=True)
class EstimationConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    binning: BinningSpec = field(default_factory=BinningSpec)
    variant: Variant = Variant.PAPER_SYMMETRIC_KL
    epsilon: float | None = None
    gamma: float = 0.0
    gas: GasParams = field(default_factory=GasParams)
    min_coverage: float = DEFAULT_MIN_COVERAGE
    min_samples: int = DEFAULT_MIN_SAMPLES
    refine: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        RetrofitParams(self.gamma)


@dataclass(frozen=True)
class EstimationResult:
    year: int | None
    b_star: float
    curve: list[tuple[float, float]]
    spf_mean: float
    gamma: float
    variant: Variant
    n_gas: int
    n_hp: int

    def to_dict(self) -> dict:
        return {
            "year": self.year,
            "b_star": self.b_star,
            "spf_mean": self.spf_mean,
            "gamma": self.gamma,
            "variant": self.variant.value,
            "curve": [{"b": b, "jsd": (d if np.isfinite(d) else None)} for b, d in self.curve],
            "n_gas": self.n_gas,
            "n_hp": self.n_hp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimationResult":
        curve = [(float(p["b"]), float("inf") if p["jsd"] is None else float(p["jsd"]))
                 for p in d["curve"]]
        return cls(d["year"], float(d["b_star"]), curve, float(d["spf_mean"]), float(d["gamma"]),
                   Variant.parse(d["variant"]), int(d["n_gas"]), int(d["n_hp"]))

    def curve_csv(self) -> str:
        lines = ["b,jsd"]
        lines += [f"{b!r},{d!r}" for b, d in self.curve]
        return "\n".join(lines) + "\n"


def scale_sample(values, b: float) -> np.ndarray:
    if not b > 0:
        raise ValueError(f"scale must be > 0, got {b}")
    return np.asarray(values, dtype=float) * b


def spf_from_b(b_star: float, gamma: float) -> float:
    """Mean SPF implied by B and the heat-demand reduction gamma."""
    if not b_star > 0:
        raise ValueError(f"B must be > 0, got {b_star}")
    RetrofitParams(gamma)
    return b_star * (1.0 - gamma)


def format_spf(value: float) -> str:
    # one decimal, as SPF values are conventionally reported
    return f"{value:.1f}"


def divergence_at(heat, electricity, b: float, binning: BinningSpec = BinningSpec(),
                  variant: Variant | str = Variant.PAPER_SYMMETRIC_KL,
                  epsilon: float | None = None) -> float:
    scaled = scale_sample(electricity, b)
    edges = make_common_edges(heat, scaled, binning)
    return jsd(histogram(scaled, edges), histogram(heat, edges), epsilon, variant)


def _check_sample(name: str, values: np.ndarray, floor: int) -> None:
    if values.size < floor:
        raise TooFewSamplesError(f"{name} sample has {values.size} values, need >= {floor}")
    if not np.all(values > 0) or not np.all(np.isfinite(values)):
        raise ValueError(f"{name} sample must be finite and strictly positive")


def estimate_b(heat_annual, electricity_annual, grid: GridSpec = GridSpec(),
               binning: BinningSpec = BinningSpec(),
               variant: Variant | str = Variant.PAPER_SYMMETRIC_KL, *,
               epsilon: float | None = None, gamma: float = 0.0, year: int | None = None,
               min_samples: int = DEFAULT_MIN_SAMPLES, refine: bool = False,
               max_workers: int | None = None) -> EstimationResult:
    """Grid point B minimising the divergence between B * electricity and heat.

    Ties go to the smaller B. With ``refine`` a second pass at step/10 is run
    over the neighbourhood of the coarse optimum and appended to the curve.
    Grid points may be evaluated on a thread pool (``max_workers``); the result
    does not depend on evaluation order.
    """
    variant = Variant.parse(variant)
    heat = np.asarray(heat_annual, dtype=float)
    elec = np.asarray(electricity_annual, dtype=float)
    _check_sample("heat", heat, min_samples)
    _check_sample("electricity", elec, min_samples)

    def evaluate(points: np.ndarray) -> list[float]:
        fn = lambda b: divergence_at(heat, elec, float(b), binning, variant, epsilon)  # noqa: E731
        if max_workers and max_workers > 1:
            with ThreadPoolExecutor(max_workers) as pool:
                return list(pool.map(fn, points))
        return [fn(b) for b in points]

    points = grid.points()
    divs = evaluate(points)
    best = int(np.argmin(divs))
    b_star = float(points[best])
    curve = [(float(b), float(d)) for b, d in zip(points, divs)]

    if refine:
        fine = GridSpec(max(b_star - grid.step, grid.b_min / 10), b_star + grid.step, grid.step / 10)
        fine_pts = fine.points()
        fine_divs = evaluate(fine_pts)
        j = int(np.argmin(fine_divs))
        if fine_divs[j] < divs[best]:
            b_star = float(fine_pts[j])
        merged = dict(curve)
        merged.update((float(b), float(d)) for b, d in zip(fine_pts, fine_divs))
        curve = sorted(merged.items())

    return EstimationResult(year, b_star, curve, spf_from_b(b_star, gamma), gamma, variant,
                            int(heat.size), int(elec.size))


def annual_samples(dataset: Dataset, year: int, gas: GasParams = GasParams(),
                   min_coverage: float = DEFAULT_MIN_COVERAGE) -> tuple[np.ndarray, np.ndarray]:
    """Per-building annual furnace heat (kWh) and heat-pump electricity (kWh) for ``year``.

    Only buildings whose meter passes the coverage filter and whose total is
    positive are kept.
    """
    gas_vals = filter_by_coverage(
        annual_values(dataset, Medium.GAS_VOLUME, year, [HeatingType.GAS_FURNACE]), min_coverage)
    hp_vals = filter_by_coverage(
        annual_values(dataset, Medium.HP_ELECTRICITY, year, HEAT_PUMP_TYPES), min_coverage)
    heat = gas_to_heat(np.array([v.total for v in gas_vals], dtype=float), gas)
    elec = np.array([v.total for v in hp_vals], dtype=float)
    return heat[heat > 0], elec[elec > 0]


def estimate_all_years(dataset: Dataset, years, config: EstimationConfig = EstimationConfig(),
                       max_workers: int | None = None
                       ) -> tuple[list[EstimationResult], dict[int, str]]:
    """Run :func:`estimate_b` separately for each year.

    Returns the successful results in year order and a mapping of skipped
    years to the reason they were skipped.
    """
    def run(year: int):
        heat, elec = annual_samples(dataset, year, config.gas, config.min_coverage)
        return estimate_b(heat, elec, config.grid, config.binning, config.variant,
                          epsilon=config.epsilon, gamma=config.gamma, year=year,
                          min_samples=config.min_samples, refine=config.refine)

    def guarded(year: int):
        try:
            return run(year)
        except ValueError as exc:
            return exc

    years = [int(y) for y in years]
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            outcomes = list(pool.map(guarded, years))
    else:
        outcomes = [guarded(y) for y in years]

    results, skipped = [], {}
    for year, outcome in zip(years, outcomes):
        if isinstance(outcome, EstimationResult):
            results.append(outcome)
        else:
            log.warning("year %d skipped: %s", year, outcome)
            skipped[year] = str(outcome)
    return results, skipped
