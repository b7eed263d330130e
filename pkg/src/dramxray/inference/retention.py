"""True-/anti-cell map from retention failures (refresh withheld during the wait).

Leakage only takes a cell from charged to discharged, so an all-1 pass decays true-cells
(1 -> 0) and an all-0 pass decays anti-cells (0 -> 1).
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Optional

import numpy as np

from .probe import Probe

log = logging.getLogger(__name__)

MAX_DOUBLINGS = 24


class RetentionScan(NamedTuple):
    wait_cycles: int
    decays_ones: np.ndarray  # per row, 1 -> 0 flips after the all-1 pass
    decays_zeros: np.ndarray  # per row, 0 -> 1 flips after the all-0 pass
    row_polarity: list  # "TRUE" / "ANTI" / None per row
    boundaries: list
    anomalies: list


class WaitTooShort(RuntimeError):
    pass


def _pass(probe: Probe, rows, value: int, wait: int) -> np.ndarray:
    for r in rows:
        probe.fill(r, value)
    probe.wait(wait)
    return np.array([int((probe.read(r) != value).sum()) for r in rows], dtype=np.int64)


def calibrate_wait(probe: Probe, probes: int = 64) -> int:
    """Double the wait from one refresh window until most probe rows show a decay in one pass."""
    rows = np.linspace(0, probe.rows - 1, probes).astype(int)
    wait = probe.timing.tREFW_cycles
    for _ in range(MAX_DOUBLINGS):
        ones = _pass(probe, rows, 1, wait)
        zeros = _pass(probe, rows, 0, wait)
        per_row = np.maximum(ones, zeros)
        if np.median(per_row) >= probe.width // 2:
            return wait
        wait *= 2
    return wait


def find_true_anti(probe: Probe, wait: Optional[int] = None) -> RetentionScan:
    n = probe.rows
    if wait is None:
        wait = calibrate_wait(probe)
    rows = range(n)
    ones = _pass(probe, rows, 1, wait)
    zeros = _pass(probe, rows, 0, wait)
    if not ones.any() and not zeros.any():
        raise WaitTooShort(f"no retention failures after {wait} cycles; lengthen the wait")
    polarity = []
    for a, b in zip(ones, zeros):
        polarity.append("TRUE" if a > b else "ANTI" if b > a else None)
    boundaries = []
    last = None
    for r, p in enumerate(polarity):
        if p is None:
            continue
        if last is not None and p != last[1] and last[0] == r - 1:
            boundaries.append(r)
        last = (r, p)
    anomalies = []
    mixed = int(((ones > 0) & (zeros > 0)).sum())
    if mixed:
        anomalies.append(f"{mixed} rows decayed in both passes")
    return RetentionScan(int(wait), ones, zeros, polarity, boundaries, anomalies)


def subarray_polarity(scan: RetentionScan, boundaries: list, rows: int) -> list:
    edges = [0] + list(boundaries) + [rows]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        votes = [p for p in scan.row_polarity[lo:hi] if p is not None]
        if not votes:
            out.append(None)
            continue
        t = votes.count("TRUE")
        a = len(votes) - t
        out.append("TRUE" if t > a else "ANTI" if a > t else None)
    return out
