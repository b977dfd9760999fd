import json

import numpy as np
import pytest

from spfmatch import estimator
from spfmatch.distribution import BinningSpec, Variant
from spfmatch.estimator import (EstimationConfig, EstimationResult, GridSpec, TooFewSamplesError,
                                estimate_all_years, estimate_b, format_spf, scale_sample,
                                spf_from_b)


def paired(c, n=400, seed=0):
    """Heat sample exactly c times an electricity sample, then shuffled apart."""
    rng = np.random.default_rng(seed)
    e = rng.lognormal(np.log(4000), 0.35, n)
    q = c * e
    rng.shuffle(q)
    return q, e


def test_grid_points_default():
    pts = GridSpec().points()
    assert len(pts) == 26
    assert pts[0] == 1.5 and pts[-1] == 4.0
    assert 3.0 in pts and 3.7 in pts


def test_grid_override():
    np.testing.assert_array_equal(GridSpec(2.0, 3.0, 0.5).points(), [2.0, 2.5, 3.0])


@pytest.mark.parametrize("kw", [dict(b_min=0), dict(b_min=2, b_max=1), dict(step=0)])
def test_grid_validation(kw):
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_scale_sample():
    assert scale_sample([1, 2, 3], 1).tolist() == [1, 2, 3]
    assert scale_sample([1, 2, 3], 3).tolist() == [3, 6, 9]
    assert scale_sample([], 2).tolist() == []
    with pytest.raises(ValueError):
        scale_sample([1], 0)


@pytest.mark.parametrize("variant", list(Variant))
def test_paired_then_shuffled_recovers_exactly(variant):
    q, e = paired(3.0)
    r = estimate_b(q, e, variant=variant)
    assert r.b_star == 3.0
    assert [b for b, _ in r.curve] == GridSpec().points().tolist()
    assert dict(r.curve)[3.0] == 0.0


def test_curve_minimum_strict_against_neighbours():
    q, e = paired(2.7, seed=3)
    curve = dict(estimate_b(q, e).curve)
    assert curve[2.7] < curve[2.6] and curve[2.7] < curve[2.8]


@pytest.mark.parametrize("k", [1e-3, 0.25, 7.3, 1000.0])
def test_argmin_invariant_under_common_units(k):
    q, e = paired(3.3, seed=5)
    base = estimate_b(q, e).b_star
    assert estimate_b(q * k, e * k).b_star == base


def test_inverse_scaling_of_electricity():
    q, e = paired(3.0, seed=7)
    assert estimate_b(q, 1.5 * e).b_star == 2.0
    assert estimate_b(q, 2.0 * e).b_star == 1.5


def test_ties_go_to_smaller_b(monkeypatch):
    monkeypatch.setattr(estimator, "divergence_at", lambda *a, **k: 1.0)
    q, e = paired(3.0)
    assert estimate_b(q, e).b_star == 1.5


def test_sample_floor():
    q, e = paired(3.0, n=9)
    with pytest.raises(TooFewSamplesError):
        estimate_b(q, e)
    assert estimate_b(q, e, min_samples=5).b_star == 3.0


def test_rejects_nonpositive_values():
    q, e = paired(3.0)
    e[0] = 0.0
    with pytest.raises(ValueError):
        estimate_b(q, e)


def test_refinement_finds_off_grid_scale():
    q, e = paired(3.14, seed=2)
    assert estimate_b(q, e).b_star == 3.1
    r = estimate_b(q, e, refine=True)
    assert r.b_star == pytest.approx(3.14, abs=1e-9)
    bs = [b for b, _ in r.curve]
    assert bs == sorted(bs) and len(bs) > 26


def test_parallel_matches_sequential():
    rng = np.random.default_rng(1)
    q = rng.lognormal(9.8, 0.2, 1400)
    e = rng.lognormal(8.6, 0.25, 73)
    a = estimate_b(q, e)
    b = estimate_b(q, e, max_workers=4)
    assert a.curve == b.curve and a.b_star == b.b_star


def test_spf_from_b_display_rounding():
    assert spf_from_b(3.3, 0.105) == pytest.approx(2.9535, rel=1e-12)
    assert format_spf(spf_from_b(3.3, 0.105)) == "3.0"
    assert spf_from_b(3.5, 0.105) == pytest.approx(3.1325, rel=1e-12)
    assert format_spf(spf_from_b(3.5, 0.105)) == "3.1"
    assert spf_from_b(3.0, 0.0) == 3.0


def test_result_spf_and_json_round_trip():
    q, e = paired(3.0)
    r = estimate_b(q, e, gamma=0.105, year=2021, variant="paper", epsilon=0.0)
    assert r.spf_mean == pytest.approx(3.0 * 0.895, rel=1e-12)
    d = json.loads(json.dumps(r.to_dict(), allow_nan=False))
    assert set(d) == {"year", "b_star", "spf_mean", "gamma", "variant", "curve", "n_gas", "n_hp"}
    back = EstimationResult.from_dict(d)
    assert back == r
    assert r.curve_csv().startswith("b,jsd\n1.5,")


def test_estimate_all_years(small_town):
    results, skipped = estimate_all_years(small_town.dataset, [2019, 2020, 2021])
    assert [r.year for r in results] == [2020, 2021]
    assert 2019 in skipped
    for r in results:
        assert r.n_gas == 120 and r.n_hp == 40


def test_estimate_all_years_parallel_deterministic(small_town):
    a, _ = estimate_all_years(small_town.dataset, [2020, 2021])
    b, _ = estimate_all_years(small_town.dataset, [2020, 2021], max_workers=2)
    assert a == b


def test_year_without_heat_pumps_skipped(small_town):
    from spfmatch.ingest import Dataset, HEAT_PUMP_TYPES
    ds = small_town.dataset
    keep = {k: b for k, b in ds.buildings.items() if b.heating_type not in HEAT_PUMP_TYPES}
    meters = {m: ds.meters[m] for b in keep.values() for m in b.meter_ids}
    results, skipped = estimate_all_years(Dataset(meters, keep, ds.weather), [2021])
    assert results == [] and "electricity" in skipped[2021]


def test_config_variant_parsing():
    assert EstimationConfig(variant="mixture").variant is Variant.MIXTURE_JSD
    with pytest.raises(ValueError):
        EstimationConfig(gamma=1.0)
