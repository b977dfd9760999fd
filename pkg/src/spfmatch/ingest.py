"""Loading, validating and aggregating smart-meter, building and weather files.

File layouts (UTF-8, header row required):

* ``meters.csv``    ``meter_id,medium,resolution,timestamp,value``
* ``buildings.csv`` ``building_id,volume_m3,heating_type,meter_ids`` (``|``-separated ids)
* ``weather.csv``   ``date,mean_temp_c``
"""

from __future__ import annotations

import calendar
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

METER_COLUMNS = ["meter_id", "medium", "resolution", "timestamp", "value"]
BUILDING_COLUMNS = ["building_id", "volume_m3", "heating_type", "meter_ids"]
WEATHER_COLUMNS = ["date", "mean_temp_c"]

DEFAULT_MIN_COVERAGE = 0.9


class Medium(str, Enum):
    GAS_VOLUME = "gas_volume"
    HP_ELECTRICITY = "hp_electricity"
    HOUSEHOLD_ELECTRICITY = "household_electricity"


class Resolution(str, Enum):
    DAILY = "daily"
    HOURLY = "hourly"

    @property
    def unit(self) -> str:
        return "D" if self is Resolution.DAILY else "h"

    @property
    def time_format(self) -> str:
        return "%Y-%m-%d" if self is Resolution.DAILY else "%Y-%m-%dT%H"


# gas meters are read once per day; electricity meters may be daily or hourly
ALLOWED_RESOLUTIONS = {
    Medium.GAS_VOLUME: {Resolution.DAILY},
    Medium.HP_ELECTRICITY: {Resolution.DAILY, Resolution.HOURLY},
    Medium.HOUSEHOLD_ELECTRICITY: {Resolution.DAILY, Resolution.HOURLY},
}


class HeatingType(str, Enum):
    GAS_FURNACE = "gas_furnace"
    HEAT_PUMP_AIR = "heat_pump_air"
    HEAT_PUMP_GROUND = "heat_pump_ground"
    OTHER = "other"

    @property
    def is_heat_pump(self) -> bool:
        return self in (HeatingType.HEAT_PUMP_AIR, HeatingType.HEAT_PUMP_GROUND)


HEAT_PUMP_TYPES = (HeatingType.HEAT_PUMP_AIR, HeatingType.HEAT_PUMP_GROUND)


class IngestError(ValueError):
    """A data file violates its schema or an invariant of the data model."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path if line is None else f"{self.path}, line {line}"
            where += ": "
        super().__init__(where + message)


class DanglingReferenceError(IngestError):
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class MeterSeries:
    """Readings of one meter. Arrays are copied and made read-only."""

    meter_id: str
    medium: Medium
    resolution: Resolution
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        medium = Medium(self.medium)
        resolution = Resolution(self.resolution)
        if resolution not in ALLOWED_RESOLUTIONS[medium]:
            raise IngestError(
                f"meter {self.meter_id}: {medium.value} cannot have {resolution.value} resolution")
        ts = np.asarray(self.timestamps).astype(f"datetime64[{resolution.unit}]")
        values = np.asarray(self.values, dtype=float)
        if ts.shape != values.shape or ts.ndim != 1:
            raise IngestError(f"meter {self.meter_id}: timestamps and values differ in shape")
        if ts.size > 1 and np.any(ts[1:] <= ts[:-1]):
            raise IngestError(f"meter {self.meter_id}: timestamps not strictly increasing")
        if not np.all(np.isfinite(values)):
            raise IngestError(f"meter {self.meter_id}: non-finite reading")
        if np.any(values < 0):
            i = int(np.argmax(values < 0))
            raise IngestError(f"meter {self.meter_id}: negative reading {values[i]!r} at {ts[i]}")
        object.__setattr__(self, "medium", medium)
        object.__setattr__(self, "resolution", resolution)
        object.__setattr__(self, "timestamps", _frozen(ts))
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self) -> int:
        return len(self.values)

    def daily(self) -> "MeterSeries":
        """Readings summed per calendar day."""
        if self.resolution is Resolution.DAILY:
            return self
        days = self.timestamps.astype("datetime64[D]")
        unique, start = np.unique(days, return_index=True)
        sums = np.add.reduceat(self.values, start) if len(start) else np.array([])
        return MeterSeries(self.meter_id, self.medium, Resolution.DAILY, unique, sums)

    def years(self) -> np.ndarray:
        return np.unique(self.timestamps.astype("datetime64[Y]").astype(int) + 1970)


@dataclass(frozen=True)
class BuildingRecord:
    building_id: str
    heating_type: HeatingType
    meter_ids: tuple[str, ...] = ()
    volume: float | None = None
    location_tag: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "heating_type", HeatingType(self.heating_type))
        object.__setattr__(self, "meter_ids", tuple(self.meter_ids))
        if self.volume is not None and not self.volume > 0:
            raise IngestError(f"building {self.building_id}: volume must be > 0, got {self.volume}")


@dataclass(frozen=True, eq=False)
class WeatherSeries:
    dates: np.ndarray
    temps: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates).astype("datetime64[D]")
        temps = np.asarray(self.temps, dtype=float)
        if dates.shape != temps.shape:
            raise IngestError("weather dates and temperatures differ in length")
        if dates.size > 1 and np.any(dates[1:] <= dates[:-1]):
            raise IngestError("weather dates not strictly increasing")
        if not np.all(np.isfinite(temps)):
            raise IngestError("non-finite temperature")
        object.__setattr__(self, "dates", _frozen(dates))
        object.__setattr__(self, "temps", _frozen(temps))

    def year(self, year: int) -> "WeatherSeries":
        mask = (self.dates >= np.datetime64(f"{year}-01-01")) & (
            self.dates < np.datetime64(f"{year + 1}-01-01"))
        return WeatherSeries(self.dates[mask], self.temps[mask])


@dataclass(frozen=True)
class AnnualValue:
    building_id: str
    year: int
    total: float
    coverage_fraction: float


@dataclass(frozen=True)
class DatasetPaths:
    meters: Path
    buildings: Path
    weather: Path | None = None

    @classmethod
    def in_directory(cls, directory, weather: bool = True) -> "DatasetPaths":
        d = Path(directory)
        w = d / "weather.csv"
        return cls(d / "meters.csv", d / "buildings.csv", w if weather and w.exists() else None)


@dataclass(frozen=True)
class Dataset:
    """Cross-referenced, read-only collection of meters, buildings and weather."""

    meters: Mapping[str, MeterSeries]
    buildings: Mapping[str, BuildingRecord]
    weather: WeatherSeries | None = None
    _meter_owner: Mapping[str, str] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        meters = dict(self.meters)
        buildings = dict(self.buildings)
        owner: dict[str, str] = {}
        for b in buildings.values():
            seen: set[Medium] = set()
            for mid in b.meter_ids:
                if mid not in meters:
                    raise DanglingReferenceError(
                        f"building {b.building_id} references unknown meter {mid}")
                medium = meters[mid].medium
                if medium in (Medium.GAS_VOLUME, Medium.HP_ELECTRICITY) and medium in seen:
                    raise IngestError(f"building {b.building_id} has more than one {medium.value} meter")
                seen.add(medium)
                if {Medium.GAS_VOLUME, Medium.HP_ELECTRICITY} <= seen:
                    raise IngestError(f"building {b.building_id} has both a gas and a heat-pump meter; "
                                      "hybrid buildings are not supported")
                if mid in owner:
                    raise IngestError(f"meter {mid} linked to both {owner[mid]} and {b.building_id}")
                owner[mid] = b.building_id
        orphans = set(meters) - set(owner)
        if orphans:
            log.warning("%d meters not linked to any building", len(orphans))
        object.__setattr__(self, "meters", MappingProxyType(meters))
        object.__setattr__(self, "buildings", MappingProxyType(buildings))
        object.__setattr__(self, "_meter_owner", MappingProxyType(owner))

    def owner_of(self, meter_id: str) -> str | None:
        return self._meter_owner.get(meter_id)

    def meter_of(self, building: BuildingRecord | str, medium: Medium | str) -> MeterSeries | None:
        medium = Medium(medium)
        if isinstance(building, str):
            building = self.buildings[building]
        for mid in building.meter_ids:
            if self.meters[mid].medium is medium:
                return self.meters[mid]
        return None

    def buildings_of(self, *types: HeatingType | str) -> list[BuildingRecord]:
        types = tuple(HeatingType(t) for t in types)
        return [b for b in self.buildings.values() if b.heating_type in types]

    def meters_of(self, medium: Medium | str) -> list[MeterSeries]:
        medium = Medium(medium)
        return [m for m in self.meters.values() if m.medium is medium]

    def years(self) -> list[int]:
        years: set[int] = set()
        for m in self.meters.values():
            years.update(int(y) for y in m.years())
        return sorted(years)


# --- reading --------------------------------------------------------------------------

_LINE_RE = re.compile(r"line (\d+)")


def _read_table(path, columns: list[str], optional: Iterable[str] = ()) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise IngestError("file not found", path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.ParserError as exc:
        m = _LINE_RE.search(str(exc))
        raise IngestError(f"malformed row: {exc}", path, int(m.group(1)) if m else None) from exc
    except pd.errors.EmptyDataError as exc:
        raise IngestError("empty file, header row required", path) from exc
    except UnicodeDecodeError as exc:
        raise IngestError("file is not valid UTF-8", path) from exc
    header = [c.strip() for c in df.columns]
    df.columns = header
    missing = [c for c in columns if c not in header]
    if missing:
        raise IngestError(f"missing columns {missing}; header was {header}", path, 1)
    extra = [c for c in header if c not in columns and c not in optional]
    if extra:
        raise IngestError(f"unexpected columns {extra}", path, 1)
    return df


def _parse_floats(column: pd.Series) -> np.ndarray:
    """Exact (round-trip) float parsing; unparseable entries become NaN."""
    text = column.str.strip()
    try:
        return text.astype(float).to_numpy()
    except ValueError:
        # pandas' fast parser may differ by an ulp, so it is only used to locate bad rows
        values = pd.to_numeric(text, errors="coerce").to_numpy(dtype=float)
        good = np.isfinite(values)
        values[good] = text[good].astype(float).to_numpy()
        return values


def _first_bad(mask: np.ndarray) -> int:
    # header is line 1, first data row line 2
    return int(np.flatnonzero(mask)[0]) + 2


def read_meters(path) -> dict[str, MeterSeries]:
    df = _read_table(path, METER_COLUMNS)
    for col in ("meter_id", "medium", "resolution"):
        df[col] = df[col].str.strip()
    if (df["meter_id"] == "").any():
        raise IngestError("empty meter_id", path, _first_bad((df["meter_id"] == "").to_numpy()))
    for col, enum in (("medium", Medium), ("resolution", Resolution)):
        bad = ~df[col].isin([e.value for e in enum]).to_numpy()
        if bad.any():
            line = _first_bad(bad)
            raise IngestError(f"unknown {col} tag {df[col].iloc[line - 2]!r}", path, line)

    values = _parse_floats(df["value"])
    bad = ~np.isfinite(values)
    if bad.any():
        line = _first_bad(bad)
        raise IngestError(f"unparseable value {df['value'].iloc[line - 2]!r}", path, line)
    neg = values < 0
    if neg.any():
        line = _first_bad(neg)
        raise IngestError(
            f"negative reading {values[line - 2]!r} for meter {df['meter_id'].iloc[line - 2]}",
            path, line)

    stamps = np.empty(len(df), dtype="datetime64[h]")
    for res in Resolution:
        rows = (df["resolution"] == res.value).to_numpy()
        if not rows.any():
            continue
        raw = df["timestamp"].to_numpy()[rows]
        parsed = pd.to_datetime(pd.Series(raw).str.strip(), format=res.time_format, errors="coerce")
        bad_rows = parsed.isna().to_numpy()
        if bad_rows.any():
            line = int(np.flatnonzero(rows)[np.flatnonzero(bad_rows)[0]]) + 2
            raise IngestError(
                f"timestamp {df['timestamp'].iloc[line - 2]!r} does not match {res.value} format",
                path, line)
        stamps[rows] = parsed.to_numpy().astype("datetime64[h]")

    meters: dict[str, MeterSeries] = {}
    row_index = np.arange(len(df))
    for meter_id, idx in df.groupby("meter_id", sort=False).indices.items():
        media = df["medium"].to_numpy()[idx]
        resolutions = df["resolution"].to_numpy()[idx]
        if (media != media[0]).any() or (resolutions != resolutions[0]).any():
            line = int(row_index[idx][np.flatnonzero((media != media[0]) | (resolutions != resolutions[0]))[0]]) + 2
            raise IngestError(f"duplicate meter_id {meter_id} with conflicting medium/resolution",
                              path, line)
        medium, res = Medium(media[0]), Resolution(resolutions[0])
        if res not in ALLOWED_RESOLUTIONS[medium]:
            raise IngestError(f"meter {meter_id}: {medium.value} cannot be {res.value}",
                              path, int(idx[0]) + 2)
        ts = stamps[idx].astype(f"datetime64[{res.unit}]")
        order = np.argsort(ts, kind="stable")
        ts_sorted = ts[order]
        dup = np.flatnonzero(ts_sorted[1:] == ts_sorted[:-1])
        if dup.size:
            line = int(idx[order[dup[0] + 1]]) + 2
            raise IngestError(f"meter {meter_id}: duplicate timestamp {ts_sorted[dup[0]]}", path, line)
        meters[meter_id] = MeterSeries(meter_id, medium, res, ts_sorted, values[idx][order])
    return meters


def read_buildings(path) -> dict[str, BuildingRecord]:
    df = _read_table(path, BUILDING_COLUMNS, optional=["location_tag"])
    buildings: dict[str, BuildingRecord] = {}
    for i, row in enumerate(df.to_dict("records")):
        line = i + 2
        bid = row["building_id"].strip()
        if not bid:
            raise IngestError("empty building_id", path, line)
        if bid in buildings:
            raise IngestError(f"duplicate building_id {bid}", path, line)
        vol_raw = row["volume_m3"].strip()
        try:
            volume = float(vol_raw) if vol_raw else None
        except ValueError:
            raise IngestError(f"unparseable volume {vol_raw!r}", path, line) from None
        try:
            heating = HeatingType(row["heating_type"].strip())
        except ValueError:
            raise IngestError(f"unknown heating_type {row['heating_type']!r}", path, line) from None
        ids = tuple(m.strip() for m in row["meter_ids"].split("|") if m.strip())
        tag = row.get("location_tag", "").strip() or None
        try:
            buildings[bid] = BuildingRecord(bid, heating, ids, volume, tag)
        except IngestError as exc:
            raise IngestError(str(exc), path, line) from None
    return buildings


def read_weather(path) -> WeatherSeries:
    df = _read_table(path, WEATHER_COLUMNS)
    dates = pd.to_datetime(df["date"].str.strip(), format="%Y-%m-%d", errors="coerce")
    if dates.isna().any():
        raise IngestError("unparseable date", path, _first_bad(dates.isna().to_numpy()))
    temps = _parse_floats(df["mean_temp_c"])
    if not np.all(np.isfinite(temps)):
        raise IngestError("unparseable temperature", path, _first_bad(~np.isfinite(temps)))
    d = dates.to_numpy().astype("datetime64[D]")
    if d.size > 1 and np.any(d[1:] <= d[:-1]):
        raise IngestError("dates not strictly increasing", path,
                          _first_bad(np.concatenate([[False], d[1:] <= d[:-1]])))
    return WeatherSeries(d, temps)


def load_dataset(paths: DatasetPaths | Mapping) -> Dataset:
    """Read and cross-reference the meter, building and (optional) weather files."""
    if not isinstance(paths, DatasetPaths):
        paths = DatasetPaths(**{k: (None if v is None else Path(v)) for k, v in dict(paths).items()})
    meters = read_meters(paths.meters)
    buildings = read_buildings(paths.buildings)
    weather = read_weather(paths.weather) if paths.weather is not None else None
    try:
        return Dataset(meters, buildings, weather)
    except IngestError as exc:
        raise type(exc)(str(exc), paths.buildings) from None


# --- writing --------------------------------------------------------------------------

def _fmt(values: np.ndarray) -> list[str]:
    return [repr(float(v)) for v in values]


def write_meters(meters: Iterable[MeterSeries], path) -> None:
    frames = []
    for m in meters:
        frames.append(pd.DataFrame({
            "meter_id": m.meter_id,
            "medium": m.medium.value,
            "resolution": m.resolution.value,
            "timestamp": np.datetime_as_string(m.timestamps, unit=m.resolution.unit),
            "value": _fmt(m.values),
        }))
    df = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=METER_COLUMNS)
    df.to_csv(path, index=False, columns=METER_COLUMNS, lineterminator="\n")


def write_buildings(buildings: Iterable[BuildingRecord], path) -> None:
    buildings = list(buildings)
    rows = [{
        "building_id": b.building_id,
        "volume_m3": "" if b.volume is None else repr(float(b.volume)),
        "heating_type": b.heating_type.value,
        "meter_ids": "|".join(b.meter_ids),
        "location_tag": b.location_tag or "",
    } for b in buildings]
    columns = BUILDING_COLUMNS + (["location_tag"] if any(b.location_tag for b in buildings) else [])
    pd.DataFrame(rows, columns=BUILDING_COLUMNS + ["location_tag"]).to_csv(
        path, index=False, columns=columns, lineterminator="\n")


def write_weather(weather: WeatherSeries, path) -> None:
    pd.DataFrame({
        "date": np.datetime_as_string(weather.dates, unit="D"),
        "mean_temp_c": _fmt(weather.temps),
    }).to_csv(path, index=False, lineterminator="\n")


def write_dataset(dataset: Dataset, directory) -> DatasetPaths:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = DatasetPaths(d / "meters.csv", d / "buildings.csv",
                         d / "weather.csv" if dataset.weather is not None else None)
    write_meters(dataset.meters.values(), paths.meters)
    write_buildings(dataset.buildings.values(), paths.buildings)
    if dataset.weather is not None:
        write_weather(dataset.weather, paths.weather)
    return paths


# --- aggregation ----------------------------------------------------------------------

def days_in_year(year: int) -> int:
    return 366 if calendar.isleap(year) else 365


def aggregate_annual(series: MeterSeries, year: int, building_id: str | None = None) -> AnnualValue:
    """Calendar-year total of a series and the fraction of days with any reading."""
    start = np.datetime64(f"{year}-01-01", series.resolution.unit)
    end = np.datetime64(f"{year + 1}-01-01", series.resolution.unit)
    lo, hi = np.searchsorted(series.timestamps, [start, end])
    values = series.values[lo:hi]
    days = np.unique(series.timestamps[lo:hi].astype("datetime64[D]")).size
    return AnnualValue(
        building_id=building_id if building_id is not None else series.meter_id,
        year=year,
        total=float(values.sum()) if values.size else 0.0,
        coverage_fraction=days / days_in_year(year),
    )


def filter_by_coverage(values: Iterable[AnnualValue], min_coverage: float = DEFAULT_MIN_COVERAGE
                       ) -> list[AnnualValue]:
    if not 0 <= min_coverage <= 1:
        raise ValueError(f"min_coverage must lie in [0, 1], got {min_coverage}")
    values = list(values)
    kept = [v for v in values if v.coverage_fraction >= min_coverage]
    log.info("coverage >= %.3g: kept %d of %d annual values", min_coverage, len(kept), len(values))
    return kept


def annual_values(dataset: Dataset, medium: Medium, year: int,
                  heating_types: Iterable[HeatingType] | None = None) -> list[AnnualValue]:
    """Annual aggregates of ``medium`` for every building (optionally of given types) with such a meter."""
    types = None if heating_types is None else set(heating_types)
    out = []
    for b in dataset.buildings.values():
        if types is not None and b.heating_type not in types:
            continue
        meter = dataset.meter_of(b, medium)
        if meter is not None:
            out.append(aggregate_annual(meter, year, b.building_id))
    return out
