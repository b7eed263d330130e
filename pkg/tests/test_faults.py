import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dramxray.device import create_device
from dramxray.faults import increments, on_aggressor_cycle, sample_thresholds
from dramxray.port import CommandPort, Session
from dramxray.profile import PolarityRule

from conftest import toy_profile

W = 64


def test_rowhammer_time_weight_closed_form():
    p = toy_profile()
    tras = p.timing.tRAS_cycles
    rh1, pg1 = increments(p, tras)
    rh5, pg5 = increments(p, 5 * tras)
    assert rh1 == pytest.approx(1.0) and pg1 == pytest.approx(1.0)
    # 1 + 4 * eps with the default eps = 0.05
    assert rh5 / rh1 == pytest.approx(1.2)
    assert pg5 / pg1 == pytest.approx(5.0)


@pytest.mark.parametrize("charged", [True, False])
def test_victim_data_selects_the_mechanism(charged):
    dev = create_device(toy_profile(polarity=PolarityRule.ALL_TRUE))
    s = Session(CommandPort(dev))
    s.write(10, np.full(W, int(charged), dtype=np.uint8))
    s.write(12, np.full(W, int(charged), dtype=np.uint8))
    on_aggressor_cycle(dev, 0, 11, dev.profile.timing.tRAS_cycles, count=10)
    for victim in (10, 12):
        if charged:
            assert dev.acc_rh[0, victim].sum() == 0 and dev.acc_pg[0, victim].sum() > 0
        else:
            assert dev.acc_pg[0, victim].sum() == 0 and dev.acc_rh[0, victim].sum() > 0


def test_each_cell_sees_exactly_one_side_per_mechanism():
    dev = create_device(toy_profile(polarity=PolarityRule.ALL_TRUE))
    s = Session(CommandPort(dev))
    s.write(10, np.zeros(W, dtype=np.uint8))
    on_aggressor_cycle(dev, 0, 9, 28, count=1)
    on_aggressor_cycle(dev, 0, 11, 28, count=1)
    # each discharged cell of row 10 has one shared-active-region neighbour
    assert np.array_equal(dev.acc_rh[0, 10], np.ones(W))


def test_threshold_example_from_the_activation_sweep():
    # a charged passing-gate victim with threshold 300K flips at 400K activations, not at 200K
    for count, flips in ((200_000, False), (400_000, True)):
        dev = create_device(toy_profile(polarity=PolarityRule.ALL_TRUE, retention_mean=1e15))
        dev.thr_pg[:] = 300_000.0
        s = Session(CommandPort(dev))
        s.write(10, np.ones(W, dtype=np.uint8))
        s.hammer(11, count)
        pg_bits = ~dev.layout.partner_upper[10]  # bits whose passing gate is row 11
        lost = dev.datamap.to_internal(s.read(10)) == 0
        assert not lost[~pg_bits].any()
        assert bool(lost[pg_bits].all()) is flips


def test_restore_resets_accumulators(session):
    dev = session.port._device
    session.write(10, np.zeros(W, dtype=np.uint8))
    on_aggressor_cycle(dev, 0, 11, 28, count=1000)
    assert dev.acc_rh[0, 10].sum() > 0
    session.read(10)
    assert dev.acc_rh[0, 10].sum() == 0 and dev.acc_pg[0, 10].sum() == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_threshold_tables_are_deterministic_and_positive(seed):
    p = toy_profile(seed=seed)
    a, b = sample_thresholds(p), sample_thresholds(p)
    for x, y in zip(a[1:], b[1:]):
        assert np.array_equal(x, y)
        assert (x > 0).all()
    assert (a.retention >= 2 * p.timing.tREFW_cycles).all()


def test_zero_chip_sigma_means_no_offset():
    p = toy_profile(chip_offset_sigma=0.0)
    assert sample_thresholds(p).chip_offset == 1.0


def test_log_normal_medians():
    p = toy_profile(rows=8192, pattern=(8192,), period=8192, chip_offset_sigma=0.0)
    t = sample_thresholds(p)
    assert math.isclose(np.median(t.rowhammer), p.fault_params.rh_threshold_mean, rel_tol=0.01)
    assert math.isclose(np.median(t.passing_gate), p.fault_params.pg_threshold_mean, rel_tol=0.01)
    assert math.isclose(np.std(np.log(t.rowhammer)), p.fault_params.rh_threshold_sigma, rel_tol=0.02)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 200_000), st.integers(1, 200_000), st.booleans())
def test_flips_monotone_in_count(c1, c2, charged):
    lo, hi = sorted((c1, c2))
    out = []
    for count in (lo, hi):
        dev = create_device(toy_profile(polarity=PolarityRule.ALL_TRUE, rh_threshold_mean=5e4,
                                        pg_threshold_mean=5e4, retention_mean=1e15))
        s = Session(CommandPort(dev))
        s.write(10, np.full(W, int(charged), dtype=np.uint8))
        s.hammer(11, count)
        out.append(int((s.read(10) != int(charged)).sum()))
    assert out[0] <= out[1]


def test_passing_gate_monotone_in_activated_time():
    out = []
    for act in (28, 56, 140):
        dev = create_device(toy_profile(polarity=PolarityRule.ALL_TRUE, pg_threshold_mean=5e4, retention_mean=1e15))
        s = Session(CommandPort(dev))
        s.write(10, np.ones(W, dtype=np.uint8))
        s.hammer(11, 30_000, act)
        out.append(int((s.read(10) == 0).sum()))
    assert out == sorted(out) and out[-1] > out[0]


def test_interleaved_victim_refresh_prevents_flips():
    dev = create_device(toy_profile(polarity=PolarityRule.ALL_TRUE, rh_threshold_mean=5e4, retention_mean=1e15))
    s = Session(CommandPort(dev))
    s.write(10, np.zeros(W, dtype=np.uint8))
    for _ in range(20):
        s.hammer(11, 10_000)
        s.read(10)  # sense and restore
    assert int(dev.thr_rh[0, 10].min()) > 10_000
    assert not s.read(10).any()
