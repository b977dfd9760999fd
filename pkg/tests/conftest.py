import textwrap

import pytest

from acceptance_log import LINES as ACCEPTANCE_LINES
from spfmatch.synth import SynthConfig, generate_town


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def write_files(tmp_path):
    """Write a dict of filename -> text into tmp_path and return the directory."""
    def _write(files: dict):
        for name, text in files.items():
            (tmp_path / name).write_text(textwrap.dedent(text).lstrip(), encoding="utf-8")
        return tmp_path
    return _write


@pytest.fixture
def tiny_files(write_files):
    return write_files({
        "meters.csv": """
            meter_id,medium,resolution,timestamp,value
            g1,gas_volume,daily,2021-01-01,2.5
            g1,gas_volume,daily,2021-01-02,3.0
            h1,hp_electricity,hourly,2021-01-01T00,1.0
            h1,hp_electricity,hourly,2021-01-01T01,1.5
            h1,hp_electricity,hourly,2021-01-02T05,0.5
        """,
        "buildings.csv": """
            building_id,volume_m3,heating_type,meter_ids
            b1,520.5,gas_furnace,g1
            b2,,heat_pump_air,h1
        """,
        "weather.csv": """
            date,mean_temp_c
            2021-01-01,-1.5
            2021-01-02,0.5
        """,
    })


@pytest.fixture(scope="session")
def small_town():
    cfg = SynthConfig(seed=11, years=(2020, 2021), n_gas=120, n_hp=40,
                      b_true={2020: 3.0, 2021: 3.4})
    return generate_town(cfg)
