"""Subarray boundaries from activate-induced bitflips.

Sense-amplifier strips isolate neighbouring subarrays, so a boundary is a pair of adjacent
rows where neither row disturbs the other.
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Optional

import numpy as np

from .probe import DEFAULT_CEILING, DEFAULT_START, Probe

log = logging.getLogger(__name__)

# median flips per single-sided test (both backgrounds) before a count is trusted
CALIBRATION_TARGET = 24


class AibScan(NamedTuple):
    count: int
    from_lower: np.ndarray  # flips seen in row r when hammering r - 1
    from_upper: np.ndarray  # flips seen in row r when hammering r + 1
    boundaries: list
    undecided: list


def _side_test(probe: Probe, aggressor: int, count: int) -> tuple:
    """Flip counts in the rows below and above ``aggressor`` over both data backgrounds."""
    n = probe.rows
    below, above = aggressor - 1, aggressor + 1
    got_below = got_above = 0
    for value in (1, 0):
        if below >= 0:
            probe.fill(below, value)
        if above < n:
            probe.fill(above, value)
        probe.hammer(aggressor, count)
        if below >= 0:
            got_below += int((probe.read(below) != value).sum())
        if above < n:
            got_above += int((probe.read(above) != value).sum())
    return got_below, got_above


def calibrate_count(probe: Probe, start: int = DEFAULT_START, ceiling: int = DEFAULT_CEILING,
                    probes: int = 32) -> int:
    """Double the activation count until single-sided hammering reliably flips bits."""
    n = probe.rows
    aggressors = np.linspace(2, n - 3, probes).astype(int)
    count = start
    while True:
        sides = []
        for a in aggressors:
            sides.extend(_side_test(probe, int(a), count))
        med = float(np.median(sides))
        log.debug("calibration count=%d median flips=%.1f", count, med)
        if med >= CALIBRATION_TARGET or count >= ceiling:
            return min(count, ceiling)
        count *= 2


def find_boundaries_aib(probe: Probe, count: Optional[int] = None) -> AibScan:
    n = probe.rows
    if count is None:
        count = calibrate_count(probe)
    from_lower = np.zeros(n, dtype=np.int64)
    from_upper = np.zeros(n, dtype=np.int64)
    for a in range(n):
        below, above = _side_test(probe, a, count)
        if a - 1 >= 0:
            from_upper[a - 1] = below
        if a + 1 < n:
            from_lower[a + 1] = above
    boundaries = []
    undecided = []
    for r in range(1, n):
        linked_up = from_lower[r] > 0
        linked_down = from_upper[r - 1] > 0
        if not linked_up and not linked_down:
            boundaries.append(r)
    for r in range(n):
        lower = from_lower[r] > 0 if r > 0 else False
        upper = from_upper[r] > 0 if r < n - 1 else False
        if not lower and not upper:
            undecided.append(r)
    return AibScan(count, from_lower, from_upper, boundaries, undecided)
