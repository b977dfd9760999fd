import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spfmatch.ingest import (AnnualValue, BuildingRecord, DanglingReferenceError, Dataset, DatasetPaths,
                             IngestError, Medium, MeterSeries, Resolution, aggregate_annual,
                             filter_by_coverage, load_dataset, write_dataset)


def daily(values, start="2021-01-01", medium=Medium.GAS_VOLUME, meter_id="m"):
    ts = np.datetime64(start) + np.arange(len(values))
    return MeterSeries(meter_id, medium, Resolution.DAILY, ts, values)


def test_load_valid_fixture(tiny_files):
    ds = load_dataset(DatasetPaths.in_directory(tiny_files))
    assert len(ds.buildings) == 2
    assert ds.buildings["b1"].volume == 520.5
    assert ds.buildings["b2"].volume is None
    assert ds.meter_of("b2", Medium.HP_ELECTRICITY).resolution is Resolution.HOURLY
    assert ds.weather.temps.tolist() == [-1.5, 0.5]
    assert ds.owner_of("g1") == "b1"


def test_negative_reading_names_meter_and_line(tiny_files):
    p = tiny_files / "meters.csv"
    p.write_text(p.read_text().replace("2021-01-02,3.0", "2021-01-02,-3.0"))
    with pytest.raises(IngestError, match="g1") as err:
        load_dataset(DatasetPaths.in_directory(tiny_files))
    assert err.value.line == 3


def test_dangling_meter_reference(tiny_files):
    p = tiny_files / "buildings.csv"
    p.write_text(p.read_text().replace("b1,520.5,gas_furnace,g1", "b1,520.5,gas_furnace,g1|gX"))
    with pytest.raises(DanglingReferenceError, match="gX"):
        load_dataset(DatasetPaths.in_directory(tiny_files))


def test_malformed_row_reports_line(tiny_files):
    p = tiny_files / "meters.csv"
    lines = p.read_text().splitlines()
    lines[4] = lines[4] + ",extra"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(IngestError) as err:
        load_dataset(DatasetPaths.in_directory(tiny_files))
    assert err.value.line == 5
    assert "meters.csv" in str(err.value)


@pytest.mark.parametrize("old, new, what", [
    ("g1,gas_volume,daily,2021-01-02", "g1,gas_vol,daily,2021-01-02", "medium"),
    ("2021-01-02,3.0", "2021-01-02,abc", "value"),
    ("g1,gas_volume,daily,2021-01-02", "g1,gas_volume,daily,2021/01/02", "timestamp"),
    ("g1,gas_volume,daily,2021-01-02", "g1,gas_volume,daily,2021-01-01", "duplicate timestamp"),
    ("g1,gas_volume,daily,2021-01-02,3.0", "g1,hp_electricity,daily,2021-01-02,3.0", "duplicate meter_id"),
])
def test_meter_schema_errors(tiny_files, old, new, what):
    p = tiny_files / "meters.csv"
    p.write_text(p.read_text().replace(old, new))
    with pytest.raises(IngestError, match=what) as err:
        load_dataset(DatasetPaths.in_directory(tiny_files))
    assert err.value.line == 3


def test_hourly_gas_rejected(write_files):
    d = write_files({
        "meters.csv": "meter_id,medium,resolution,timestamp,value\ng,gas_volume,hourly,2021-01-01T00,1\n",
        "buildings.csv": "building_id,volume_m3,heating_type,meter_ids\nb,,gas_furnace,g\n",
    })
    with pytest.raises(IngestError, match="cannot be hourly"):
        load_dataset(DatasetPaths(d / "meters.csv", d / "buildings.csv"))


def test_missing_header_column(write_files):
    d = write_files({
        "meters.csv": "meter_id,medium,timestamp,value\ng,gas_volume,2021-01-01,1\n",
        "buildings.csv": "building_id,volume_m3,heating_type,meter_ids\nb,,gas_furnace,g\n",
    })
    with pytest.raises(IngestError, match="missing columns"):
        load_dataset(DatasetPaths(d / "meters.csv", d / "buildings.csv"))


def test_two_gas_meters_in_one_building(write_files):
    d = write_files({
        "meters.csv": ("meter_id,medium,resolution,timestamp,value\n"
                       "g,gas_volume,daily,2021-01-01,1\nh,gas_volume,daily,2021-01-01,1\n"),
        "buildings.csv": "building_id,volume_m3,heating_type,meter_ids\nb,,gas_furnace,g|h\n",
    })
    with pytest.raises(IngestError, match="more than one gas_volume"):
        load_dataset(DatasetPaths(d / "meters.csv", d / "buildings.csv"))


def test_missing_file():
    with pytest.raises(IngestError, match="not found"):
        load_dataset(DatasetPaths("/nonexistent/m.csv", "/nonexistent/b.csv"))


def test_series_is_read_only():
    s = daily([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_series_invariants():
    with pytest.raises(IngestError):
        MeterSeries("m", "gas_volume", "daily", np.array(["2021-01-02", "2021-01-01"], "datetime64[D]"), [1, 2])
    with pytest.raises(IngestError):
        daily([1.0, -0.1])


def test_aggregate_constant_daily_year():
    a = aggregate_annual(daily([2.0] * 365), 2021)
    assert a.total == 730
    assert a.coverage_fraction == 1.0


def test_aggregate_hourly_january():
    hours = np.arange(np.datetime64("2021-01-01T00"), np.datetime64("2021-02-01T00"))
    s = MeterSeries("h", Medium.HP_ELECTRICITY, Resolution.HOURLY, hours, np.ones(hours.size))
    a = aggregate_annual(s, 2021)
    assert a.total == 744
    assert a.coverage_fraction == pytest.approx(31 / 365)


def test_aggregate_empty_year():
    a = aggregate_annual(daily([1.0, 2.0]), 2019)
    assert (a.total, a.coverage_fraction) == (0, 0)


def test_aggregate_ignores_other_years():
    a = aggregate_annual(daily([1.0] * 10, start="2020-12-27"), 2021)
    assert a.total == 5.0


def test_daily_sums_hourly():
    hours = np.arange(np.datetime64("2021-03-01T00"), np.datetime64("2021-03-03T00"))
    s = MeterSeries("h", Medium.HP_ELECTRICITY, Resolution.HOURLY, hours, np.arange(48.0))
    d = s.daily()
    assert d.values.tolist() == [sum(range(24)), sum(range(24, 48))]


def test_filter_by_coverage():
    v = [AnnualValue("a", 2021, 1.0, 0.95), AnnualValue("b", 2021, 1.0, 0.5)]
    assert [x.building_id for x in filter_by_coverage(v, 0.9)] == ["a"]
    assert filter_by_coverage(v, 0) == v
    assert filter_by_coverage([AnnualValue("c", 2021, 1.0, 0.99)], 1.0) == []
    with pytest.raises(ValueError):
        filter_by_coverage(v, 1.5)


@given(st.lists(st.floats(0, 1e4), min_size=2, max_size=400), st.data())
@settings(max_examples=60)
def test_aggregate_additive(values, data):
    s = daily(values, start="2021-06-01")
    cut = data.draw(st.integers(1, len(values) - 1))
    a = MeterSeries("m", s.medium, s.resolution, s.timestamps[:cut], s.values[:cut])
    b = MeterSeries("m", s.medium, s.resolution, s.timestamps[cut:], s.values[cut:])
    for year in (2021, 2022):
        whole = aggregate_annual(s, year).total
        parts = aggregate_annual(a, year).total + aggregate_annual(b, year).total
        assert parts == pytest.approx(whole, rel=1e-12, abs=1e-9)


def test_csv_round_trip_preserves_annual_values(small_town, tmp_path):
    ds = small_town.dataset
    paths = write_dataset(ds, tmp_path)
    back = load_dataset(paths)
    assert set(back.meters) == set(ds.meters)
    for mid, meter in ds.meters.items():
        for year in (2020, 2021):
            assert aggregate_annual(back.meters[mid], year) == aggregate_annual(meter, year)
    np.testing.assert_array_equal(back.weather.temps, ds.weather.temps)
    assert back.buildings == dict(ds.buildings)


def test_dataset_mappings_immutable(small_town):
    with pytest.raises(TypeError):
        small_town.dataset.meters["x"] = None


def test_dataset_rejects_shared_meter():
    m = daily([1.0])
    from spfmatch.ingest import BuildingRecord
    with pytest.raises(IngestError, match="linked to both"):
        Dataset({"m": m}, {"a": BuildingRecord("a", "gas_furnace", ("m",)),
                           "b": BuildingRecord("b", "gas_furnace", ("m",))})


def test_hybrid_building_rejected():
    days = np.array(["2021-01-01"], dtype="datetime64[D]")
    meters = {"g": MeterSeries("g", "gas_volume", "daily", days, [1.0]),
              "h": MeterSeries("h", "hp_electricity", "daily", days, [1.0])}
    with pytest.raises(IngestError, match="hybrid"):
        Dataset(meters, {"b": BuildingRecord("b", "gas_furnace", ["g", "h"])})
