"""Synthetic towns with known ground truth.

A town has furnace-heated and heat-pump-heated buildings drawn from the same
heat-demand distribution. Heat-pump buildings need ``1 - gamma`` of that heat
and their electricity is heat divided by a per-building SPF, so the scale
factor B = SPF / (1 - gamma) is known exactly.

All randomness comes from one ``numpy.random.Generator`` (PCG64) seeded with
``config.seed`` and consumed in this fixed order:

1. weather: per year, one normal draw per day;
2. furnace buildings: volumes, then heat intensities;
3. heat-pump buildings: volumes, heat intensities, type uniforms, SPF noise;
4. per year: furnace year-to-year factors, then heat-pump ones;
5. household electricity: furnace buildings first, then heat-pump buildings;
6. per year: day-to-day load noise for furnace buildings, then heat-pump ones.
"""

from __future__ import annotations

import calendar
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .ingest import (BuildingRecord, Dataset, HeatingType, Medium, MeterSeries, Resolution,
                     WeatherSeries, write_dataset)
from .thermal import GasParams

# relative load per hour of day, normalised below; morning and evening peaks
_DIURNAL = np.array([0.7, 0.65, 0.65, 0.65, 0.7, 0.85, 1.2, 1.35, 1.25, 1.05, 0.95, 0.9,
                     0.9, 0.9, 0.9, 0.95, 1.05, 1.2, 1.3, 1.3, 1.2, 1.05, 0.9, 0.8])
DIURNAL_SHAPE = _DIURNAL / _DIURNAL.sum()

WINTER_MONTHS = (1, 2, 11, 12)


class SynthConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid synth config: " + "; ".join(problems))


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of a synthetic town.

    ``b_true`` maps year to the stock-typical B; alternatively ``spf_true``
    maps year to the typical SPF and B follows as SPF / (1 - gamma_true).
    With neither given every year uses B = 3.2. Per-building SPF is the
    typical value times a type factor times ``exp(spf_sigma * N(0, 1))``.
    Air-source SPF additionally scales by
    ``1 + air_temp_slope * (winter_mean - ref_winter_temp)``.
    """

    seed: int = 0
    years: tuple[int, ...] = (2021,)
    n_gas: int = 1400
    n_hp: int = 73
    volume_median: float = 600.0
    volume_sigma: float = 0.1
    intensity_median: float = 30.0
    intensity_sigma: float = 0.12
    gas_dispersion: float = 1.0
    b_true: dict | None = None
    spf_true: dict | None = None
    gamma_true: float = 0.105
    spf_sigma: float = 0.2
    hp_mix: float = 0.76
    air_factor: float = 1.0
    ground_factor: float = 1.0
    air_temp_slope: float = 0.0
    ref_winter_temp: float = 3.8
    temp_mean: float = 10.0
    temp_amplitude: float = 8.0
    temp_noise: float = 2.5
    winter_offset: dict = field(default_factory=dict)
    base_temp: float = 15.0
    dhw_fraction: float = 0.1
    year_sigma: float = 0.03
    daily_sigma: float = 0.1
    household_median: float = 4000.0
    household_sigma: float = 0.35
    hp_resolution: str = "hourly"
    gas: GasParams = field(default_factory=GasParams)

    def __post_init__(self):
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        for name in ("b_true", "spf_true", "winter_offset"):
            value = getattr(self, name)
            if isinstance(value, (int, float)):
                value = {y: float(value) for y in self.years}
            if value is not None:
                object.__setattr__(self, name, {int(k): float(v) for k, v in dict(value).items()})
        if isinstance(self.gas, dict):
            object.__setattr__(self, "gas", GasParams(**self.gas))
        problems = self.problems()
        if problems:
            raise SynthConfigError(problems)

    def problems(self) -> list[str]:
        p = []
        if not self.years:
            p.append("years must be non-empty")
        if len(set(self.years)) != len(self.years):
            p.append("years must be distinct")
        if self.n_gas <= 0:
            p.append(f"n_gas must be > 0, got {self.n_gas}")
        if self.n_hp <= 0:
            p.append(f"n_hp must be > 0, got {self.n_hp}")
        for name in ("volume_median", "intensity_median", "household_median", "gas_dispersion"):
            if not getattr(self, name) > 0:
                p.append(f"{name} must be > 0")
        for name in ("volume_sigma", "intensity_sigma", "spf_sigma", "temp_noise",
                     "year_sigma", "daily_sigma", "household_sigma", "temp_amplitude"):
            if getattr(self, name) < 0:
                p.append(f"{name} must be >= 0")
        if not 0 <= self.hp_mix <= 1:
            p.append(f"hp_mix must lie in [0, 1], got {self.hp_mix}")
        if not 0 <= self.gamma_true < 1:
            p.append(f"gamma_true must lie in [0, 1), got {self.gamma_true}")
        if not 0 <= self.dhw_fraction <= 1:
            p.append(f"dhw_fraction must lie in [0, 1], got {self.dhw_fraction}")
        if self.b_true is not None and self.spf_true is not None:
            p.append("give b_true or spf_true, not both")
        for name in ("b_true", "spf_true"):
            table = getattr(self, name)
            if table is not None:
                missing = [y for y in self.years if y not in table]
                if missing:
                    p.append(f"{name} lacks years {missing}")
                if any(v <= 0 for v in table.values()):
                    p.append(f"{name} values must be > 0")
        if self.air_factor <= 0 or self.ground_factor <= 0:
            p.append("type factors must be > 0")
        if self.hp_resolution not in ("hourly", "daily"):
            p.append(f"hp_resolution must be hourly or daily, got {self.hp_resolution}")
        return p

    def typical_b(self, year: int) -> float:
        if self.b_true is not None:
            return self.b_true[year]
        if self.spf_true is not None:
            return self.spf_true[year] / (1.0 - self.gamma_true)
        return 3.2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["years"] = list(self.years)
        return d


@dataclass(frozen=True)
class GroundTruth:
    """Known answers for a synthetic town.

    ``hp_heat`` holds the annual heat delivered by each heat pump, keyed by
    (building_id, year); it is never written to the meter files.
    """

    years: list[dict]
    buildings: list[dict]
    gamma_true: float
    hp_heat: dict = field(default_factory=dict, repr=False)

    def b_true(self, year: int) -> float:
        return next(y["b_true"] for y in self.years if y["year"] == year)

    def to_json(self) -> str:
        return json.dumps({"years": self.years, "buildings": self.buildings,
                           "gamma_true": self.gamma_true}, indent=2)


@dataclass(frozen=True)
class Town:
    dataset: Dataset
    truth: GroundTruth
    config: SynthConfig

    def write(self, directory) -> Path:
        d = Path(directory)
        write_dataset(self.dataset, d)
        (d / "groundtruth.json").write_text(self.truth.to_json() + "\n", encoding="utf-8")
        return d


def _year_days(year: int) -> np.ndarray:
    return np.arange(np.datetime64(f"{year}-01-01"), np.datetime64(f"{year + 1}-01-01"))


def _climatology(config: SynthConfig, year: int) -> np.ndarray:
    n = 366 if calendar.isleap(year) else 365
    doy = np.arange(n)
    return config.temp_mean - config.temp_amplitude * np.cos(2 * np.pi * (doy - 15) / n)


def _winter_mask(days: np.ndarray) -> np.ndarray:
    months = days.astype("datetime64[M]").astype(int) % 12 + 1
    return np.isin(months, WINTER_MONTHS)


def generate_weather(config: SynthConfig, rng: np.random.Generator | None = None) -> WeatherSeries:
    """Daily mean temperatures: annual sinusoid, daily noise and per-year winter offset.

    The offset for a year is added to every day of January, February,
    November and December.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    dates, temps = [], []
    for year in config.years:
        days = _year_days(year)
        t = _climatology(config, year) + config.temp_noise * rng.standard_normal(days.size)
        t = t + np.where(_winter_mask(days), config.winter_offset.get(year, 0.0), 0.0)
        dates.append(days)
        temps.append(t)
    return WeatherSeries(np.concatenate(dates), np.concatenate(temps))


def degree_days(temps: np.ndarray, base_temp: float) -> np.ndarray:
    return np.maximum(base_temp - np.asarray(temps, dtype=float), 0.0)


def daily_weights(temps: np.ndarray, base_temp: float, dhw_fraction: float) -> np.ndarray:
    """Share of annual heat falling on each day: degree-day part plus a flat hot-water floor."""
    dd = degree_days(temps, base_temp)
    flat = np.full(len(dd), 1.0 / len(dd))
    if dd.sum() == 0:
        return flat
    return (1 - dhw_fraction) * dd / dd.sum() + dhw_fraction * flat


def _jitter(weights: np.ndarray, n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    # per-building day-to-day noise, renormalised so each row still sums to one
    w = weights[None, :] * np.exp(sigma * rng.standard_normal((n, weights.size)))
    return w / w.sum(axis=1, keepdims=True)


def _winter_window_mean(weather: WeatherSeries, year: int) -> float:
    # imported lazily to avoid a cycle; synth only needs the default window
    from .analysis import winter_mean_temp
    return winter_mean_temp(weather, year)


def generate_town(config: SynthConfig) -> Town:
    rng = np.random.default_rng(config.seed)
    weather = generate_weather(config, rng)

    gas_vol = config.volume_median * np.exp(config.volume_sigma * rng.standard_normal(config.n_gas))
    gas_int = config.intensity_median * np.exp(
        config.gas_dispersion * config.intensity_sigma * rng.standard_normal(config.n_gas))
    hp_vol = config.volume_median * np.exp(config.volume_sigma * rng.standard_normal(config.n_hp))
    hp_int = config.intensity_median * np.exp(config.intensity_sigma * rng.standard_normal(config.n_hp))
    is_air = rng.random(config.n_hp) < config.hp_mix
    spf_noise = np.exp(config.spf_sigma * rng.standard_normal(config.n_hp))

    year_factors = {}
    for year in config.years:
        year_factors[year] = (np.exp(config.year_sigma * rng.standard_normal(config.n_gas)),
                              np.exp(config.year_sigma * rng.standard_normal(config.n_hp)))
    household = config.household_median * np.exp(
        config.household_sigma * rng.standard_normal(config.n_gas + config.n_hp))

    kwh_per_m3 = config.gas.kwh_per_m3
    gamma = config.gamma_true
    gas_ids = [f"G{i:04d}" for i in range(config.n_gas)]
    hp_ids = [f"H{i:04d}" for i in range(config.n_hp)]

    gas_ts, gas_vals = {b: [] for b in gas_ids}, {b: [] for b in gas_ids}
    hp_ts, hp_vals = {b: [] for b in hp_ids}, {b: [] for b in hp_ids}
    hh_ts = {b: [] for b in gas_ids + hp_ids}
    hh_vals = {b: [] for b in gas_ids + hp_ids}

    truth_years, truth_buildings, hp_heat = [], [], {}
    hourly = config.hp_resolution == "hourly"

    for year in config.years:
        days = _year_days(year)
        temps = weather.year(year).temps
        weights = daily_weights(temps, config.base_temp, config.dhw_fraction)
        # annual demand scales with the year's degree days relative to the noise-free climate
        dd_ratio = degree_days(temps, config.base_temp).sum() / degree_days(
            _climatology(config, year), config.base_temp).sum()

        winter_t = _winter_window_mean(weather, year)
        air = config.air_factor * (1 + config.air_temp_slope * (winter_t - config.ref_winter_temp))
        if air <= 0:
            raise SynthConfigError([f"air-source SPF factor non-positive in {year}"])
        type_factor = np.where(is_air, air, config.ground_factor)
        b_typ = config.typical_b(year) * (config.hp_mix * air + (1 - config.hp_mix) * config.ground_factor)
        spf_typ = config.typical_b(year) * (1 - gamma)
        spf_b = spf_typ * type_factor * spf_noise

        f_gas, f_hp = year_factors[year]
        gas_heat = gas_vol * gas_int * dd_ratio * f_gas
        gas_daily = (gas_heat / kwh_per_m3)[:, None] * _jitter(weights, config.n_gas,
                                                               config.daily_sigma, rng)
        hp_weights = _jitter(weights, config.n_hp, config.daily_sigma, rng)
        for i, b in enumerate(gas_ids):
            gas_ts[b].append(days)
            gas_vals[b].append(gas_daily[i])

        heat_hp = hp_vol * hp_int * dd_ratio * f_hp * (1 - gamma)
        hours = np.arange(np.datetime64(f"{year}-01-01T00"), np.datetime64(f"{year + 1}-01-01T00"))
        for i, b in enumerate(hp_ids):
            heat_daily = heat_hp[i] * hp_weights[i]
            if hourly:
                heat_profile = np.outer(heat_daily, DIURNAL_SHAPE).ravel()
                hp_ts[b].append(hours)
            else:
                heat_profile = heat_daily
                hp_ts[b].append(days)
            hp_vals[b].append(heat_profile / spf_b[i])
            hp_heat[(b, year)] = float(heat_profile.sum())
            truth_buildings.append({"building_id": b, "year": year, "spf_true": float(spf_b[i])})

        season = 1 + 0.15 * np.cos(2 * np.pi * (np.arange(days.size) - 15) / days.size)
        season = season / season.sum()
        for i, b in enumerate(gas_ids + hp_ids):
            hh_ts[b].append(days)
            hh_vals[b].append(household[i] * season)

        truth_years.append({"year": year, "b_true": float(b_typ),
                            "spf_mean_true": float(spf_b.mean())})

    meters, buildings = {}, {}
    hp_res = Resolution.HOURLY if hourly else Resolution.DAILY
    for i, b in enumerate(gas_ids):
        gm, hm = f"{b}-gas", f"{b}-hh"
        meters[gm] = MeterSeries(gm, Medium.GAS_VOLUME, Resolution.DAILY,
                                 np.concatenate(gas_ts[b]), np.concatenate(gas_vals[b]))
        meters[hm] = MeterSeries(hm, Medium.HOUSEHOLD_ELECTRICITY, Resolution.DAILY,
                                 np.concatenate(hh_ts[b]), np.concatenate(hh_vals[b]))
        buildings[b] = BuildingRecord(b, HeatingType.GAS_FURNACE, (gm, hm), float(gas_vol[i]))
    for i, b in enumerate(hp_ids):
        pm, hm = f"{b}-hp", f"{b}-hh"
        meters[pm] = MeterSeries(pm, Medium.HP_ELECTRICITY, hp_res,
                                 np.concatenate(hp_ts[b]), np.concatenate(hp_vals[b]))
        meters[hm] = MeterSeries(hm, Medium.HOUSEHOLD_ELECTRICITY, Resolution.DAILY,
                                 np.concatenate(hh_ts[b]), np.concatenate(hh_vals[b]))
        kind = HeatingType.HEAT_PUMP_AIR if is_air[i] else HeatingType.HEAT_PUMP_GROUND
        buildings[b] = BuildingRecord(b, kind, (pm, hm), float(hp_vol[i]))

    truth = GroundTruth(truth_years, truth_buildings, gamma, hp_heat)
    return Town(Dataset(meters, buildings, weather), truth, config)
