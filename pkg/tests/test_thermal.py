import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spfmatch.thermal import (GasParams, RetrofitParams, b_factor, gas_to_heat,
                              predict_electricity, retrofit_heat, spf)

pos = st.floats(min_value=0, max_value=1e7, allow_nan=False)
gammas = st.floats(min_value=0, max_value=0.95)
scales = st.floats(min_value=0.05, max_value=20)


def test_gas_to_heat_examples():
    assert gas_to_heat(0, GasParams(0.95, 10.5, 0.9)) == 0
    assert gas_to_heat(5, GasParams(1, 1, 1)) == 5
    assert gas_to_heat(1000, GasParams(0.95, 10.5, 0.9)) == pytest.approx(8977.5, rel=1e-12)


@pytest.mark.parametrize("kwargs", [dict(z=0), dict(nu=-1), dict(lam=0), dict(lam=1.01)])
def test_gas_params_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        GasParams(**kwargs)


def test_retrofit_heat_examples():
    assert retrofit_heat(100, RetrofitParams(0)) == 100
    assert retrofit_heat(100, RetrofitParams(0.105)) == pytest.approx(89.5, rel=1e-12)
    assert retrofit_heat(0, RetrofitParams(0.3)) == 0


@pytest.mark.parametrize("gamma", [-0.1, 1.0, 1.5])
def test_retrofit_params_range(gamma):
    with pytest.raises(ValueError):
        RetrofitParams(gamma)


def test_spf_examples():
    assert spf(3000, 1000) == 3.0
    assert spf(0, 1000) == 0
    assert spf(8977.5, 2992.5) == pytest.approx(3.0, rel=1e-12)


def test_spf_zero_electricity_names_target():
    with pytest.raises(ZeroDivisionError, match="H0001/2021"):
        spf(10, 0, label="H0001/2021")


def test_predict_electricity_examples():
    s = 3.3 * 0.895
    assert predict_electricity(8950, 0.105, s) == pytest.approx(8950 / 3.3, rel=1e-12)
    assert predict_electricity(8950, 0.105, s) == pytest.approx(2712.1212121, rel=1e-9)
    assert predict_electricity(100, 0, 1) == 100
    assert predict_electricity(0, 0.2, 2.5) == 0


@pytest.mark.parametrize("bad", [0, -1.0])
def test_predict_electricity_rejects_nonpositive_spf(bad):
    with pytest.raises(ValueError):
        predict_electricity(100, 0.1, bad)


@given(pos, gammas, scales)
def test_composition_identity(q, gamma, b):
    assert math.isclose(predict_electricity(q, gamma, b * (1 - gamma)) * b, q,
                        rel_tol=1e-12, abs_tol=1e-300)


@given(st.floats(min_value=1e-3, max_value=1e7), gammas, scales)
def test_round_trip_through_spf(q, gamma, s):
    heat = retrofit_heat(q, RetrofitParams(gamma))
    assert math.isclose(spf(heat, predict_electricity(q, gamma, s)), s, rel_tol=1e-12)


@given(pos, pos)
@settings(max_examples=200)
def test_gas_to_heat_linear(a, b):
    p = GasParams(0.95, 10.5, 0.9)
    assert math.isclose(gas_to_heat(a + b, p), gas_to_heat(a, p) + gas_to_heat(b, p),
                        rel_tol=1e-12, abs_tol=1e-9)


def test_b_factor():
    assert b_factor(3.0, 0.0) == 3.0
    assert b_factor(2.9535, 0.105) == pytest.approx(3.3, rel=1e-12)
