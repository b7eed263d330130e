import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dramxray.profile import (PRESETS, Bitline, PolarityRule, ProfileError, load_profile, preset,
                              profile_from_dict, random_profile, save_profile)

from conftest import toy_profile


# values below are the published structural facts for each device family
@pytest.mark.parametrize("name, pattern, edge_div, inverted, polarity, stride", [
    ("mfrA-2016", [640] * 11 + [576] * 2, 8, True, PolarityRule.ALL_TRUE, True),
    ("mfrA-2018", [832] * 4 + [768], 4, True, PolarityRule.ALL_TRUE, True),
    ("mfrB", [688, 688, 672], 4, False, PolarityRule.ALTERNATING_BY_SUBARRAY, False),
    ("hbm2", [832] * 4 + [768], 2, True, PolarityRule.ALL_TRUE, True),
])
def test_preset_structure(name, pattern, edge_div, inverted, polarity, stride):
    p = preset(name)
    assert p.subarray_pattern == pattern
    assert p.edge_pair_period == p.rows_per_bank // edge_div
    assert p.datapath_inversion is inverted
    assert p.polarity_rule is polarity
    assert p.bitline_structure is Bitline.OPEN
    assert (p.coupled_row_stride == p.rows_per_bank // 2) if stride else p.coupled_row_stride is None


def test_preset_clock_periods():
    for name in ("mfrA-2016", "mfrA-2018", "mfrB"):
        assert preset(name).timing.tCK_ns == 1.25
    assert preset("hbm2").timing.tCK_ns == 2.50


def test_presets_keep_inter_chip_sigma_above_intra_chip():
    for name in PRESETS:
        f = preset(name).fault_params
        assert f.chip_offset_sigma > max(f.rh_threshold_sigma, f.pg_threshold_sigma)


def test_unknown_preset():
    with pytest.raises(ProfileError):
        preset("mfrC")


def test_round_trip(tmp_path):
    p = preset("mfrA-2018")
    save_profile(p, tmp_path / "p.json")
    assert load_profile(tmp_path / "p.json") == p


def test_unknown_keys_rejected():
    d = preset("mfrB").to_dict()
    d["fault_params"]["bogus"] = 1
    with pytest.raises(ProfileError) as err:
        profile_from_dict(d)
    assert "bogus" in str(err.value)
    d = preset("mfrB").to_dict()
    d["extra"] = True
    with pytest.raises(ProfileError):
        profile_from_dict(d)


@pytest.mark.parametrize("change", [
    dict(rows_per_bank=300),
    dict(subarray_pattern=[100, 100]),
    dict(edge_pair_period=96),
    dict(serialization_period=3),
    dict(coupled_row_stride=64),
    dict(subarray_pattern=[64, 64]),
])
def test_invalid_profiles(change):
    with pytest.raises(ProfileError):
        toy_profile().replace(**change).validate()


def test_pattern_must_divide_rows():
    with pytest.raises(ProfileError) as err:
        toy_profile(pattern=(50, 50, 50), period=150).validate()
    assert err.value.field in ("subarray_pattern", "edge_pair_period")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_profiles_are_valid_and_deterministic(seed):
    a, b = random_profile(seed), random_profile(seed)
    a.validate()
    assert a.to_json() == b.to_json()
    assert sum(a.subarray_pattern) * (a.rows_per_bank // sum(a.subarray_pattern)) == a.rows_per_bank


def test_random_profile_json_is_loadable():
    p = random_profile(7)
    assert profile_from_dict(json.loads(p.to_json())) == p
