import bisect
from itertools import accumulate

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dramxray.geometry import ABOVE, BELOW, LOWER, OWN, UPPER, Layout
from dramxray.profile import Bitline

from conftest import toy_profile


@st.composite
def patterns(draw):
    parts = draw(st.integers(1, 6))
    sizes = draw(st.lists(st.integers(4, 40), min_size=parts, max_size=parts))
    # pad the last subarray so the pattern sum divides 256
    total = sum(sizes)
    period = next(p for p in (32, 64, 128, 256) if p >= total)
    sizes[-1] += period - total
    return sizes, period


@settings(max_examples=60, deadline=None)
@given(patterns())
def test_subarray_of_matches_prefix_sums(pp):
    sizes, period = pp
    layout = Layout(toy_profile(pattern=sizes, period=period))
    full = sizes * (256 // sum(sizes))
    starts = [0] + list(accumulate(full))[:-1]
    for row in range(256):
        k = bisect.bisect_right(starts, row) - 1
        sub = layout.subarray_of(row)
        assert (sub.ordinal, sub.base, sub.size) == (k, starts[k], full[k])
    assert layout.boundaries() == starts[1:]


def test_subarray_of_rejects_out_of_range():
    with pytest.raises(IndexError):
        Layout(toy_profile()).subarray_of(256)


@settings(max_examples=30, deadline=None)
@given(patterns())
def test_open_strips_split_each_row_in_half_and_pair_symmetrically(pp):
    sizes, period = pp
    layout = Layout(toy_profile(pattern=sizes, period=period))
    for k in range(layout.num_subarrays):
        conn = layout.sa_connectivity(k)
        assert conn.count(ABOVE) == conn.count(BELOW) == 32
        partner = layout.strip_partner(k)
        assert layout.strip_partner(partner[ABOVE])[BELOW] == k
        assert layout.strip_partner(partner[BELOW])[ABOVE] == k


def test_adjacent_subarrays_alternate_sides():
    layout = Layout(toy_profile())
    a, b = layout.sa_connectivity(0), layout.sa_connectivity(1)
    assert all(x != y for x, y in zip(a, b))


def test_folded_strips_are_private():
    layout = Layout(toy_profile(bitline=Bitline.FOLDED))
    assert layout.sa_connectivity(1) == [OWN] * 64
    assert layout.strip_partner(1) == {ABOVE: None, BELOW: None}


def test_edge_pairs_per_group():
    layout = Layout(toy_profile(pattern=(40, 24), period=128))
    # groups of 128 rows: subarrays at 0,40,64,104 and 128,168,192,232
    assert layout.edge_pairs() == [(0, 104), (128, 232)]
    assert layout.strip_partner(0)[BELOW] == 3
    assert layout.strip_partner(3)[ABOVE] == 0


@pytest.mark.parametrize("sp", [2, 4, 8])
def test_partner_side_interleaves_with_bits_and_flips_with_row_parity(sp):
    layout = Layout(toy_profile(serialization=sp))
    half = sp // 2
    for bit in range(64):
        expected = UPPER if (bit // half) % 2 == 0 else LOWER
        assert layout.partner_side(10, bit) == expected
        assert layout.partner_side(11, bit) != expected
