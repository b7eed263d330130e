"""Structure from the timing-violation row-copy: boundaries, bitline type, coupled rows, edge pairs."""

from __future__ import annotations

import bisect
from typing import NamedTuple, Optional

from .probe import Probe, classify_copy


class CopyScan(NamedTuple):
    kinds: list  # kinds[r] classifies the copy r -> r + 1
    boundaries: list
    bitline: Optional[str]
    inverted: Optional[bool]
    anomalies: list


def find_boundaries_rowcopy(probe: Probe) -> CopyScan:
    n = probe.rows
    kinds = []
    inversions = set()
    anomalies = []
    for r in range(n - 1):
        kind, inv = classify_copy(probe, r, r + 1)
        kinds.append(kind)
        if kind == "HALF":
            inversions.add(inv)
        elif kind == "ANOMALY":
            anomalies.append(f"row-copy {r}->{r + 1}: copy fraction is neither 0, 1/2 nor 1")
    boundaries = [r + 1 for r, k in enumerate(kinds) if k != "FULL"]
    if "HALF" in kinds:
        bitline = "OPEN"
    elif "NONE" in kinds:
        bitline = "FOLDED"
    else:
        bitline = None
    if len(inversions) > 1:
        anomalies.append("half copies disagree on value inversion")
    inverted = inversions.pop() if len(inversions) == 1 else None
    return CopyScan(kinds, boundaries, bitline, inverted, anomalies)


def _subarray_index(boundaries: list, row: int) -> int:
    return bisect.bisect_right(boundaries, row)


def _interior_pair(boundaries: list, rows: int, offset: int) -> Optional[int]:
    """A row i with i, i+1 and i+offset, i+offset+1 each inside one subarray."""
    bset = set(boundaries)
    for i in range(1, rows - offset - 2):
        if i + 1 in bset or i + offset + 1 in bset:
            continue
        return i
    return None


def detect_coupled_rows(probe: Probe, boundaries: list) -> tuple:
    """Return ``(stride or None, anomalies)``; candidates are N/2 first, then smaller powers of two."""
    n = probe.rows
    candidates = []
    s = n // 2
    while s >= 2:
        candidates.append(s)
        s //= 2
    confirmed = []
    for s in candidates:
        i = _interior_pair(boundaries, n, s)
        if i is None:
            continue
        j = i + 1
        probe.fill(i + s, 1)
        probe.fill(j + s, 0)
        probe.fill(i, 1)
        probe.copy(i, j, 1, 0)
        if probe.read(j + s).any():
            confirmed.append(s)
    anomalies = []
    if len(confirmed) > 1:
        anomalies.append(f"several coupled-row strides confirmed: {confirmed}")
    return (confirmed[0] if confirmed else None), anomalies


def detect_edge_pairs(probe: Probe, boundaries: list, bitline: Optional[str]) -> tuple:
    """Return ``(period, pairs, anomalies)``. Pairs are ``(bottom_base, top_base)`` rows."""
    n = probe.rows
    if bitline != "OPEN":
        return None, [], []
    bset = set(boundaries)
    bases = [0] + list(boundaries)
    confirmed = []
    for period in (n // 8, n // 4, n // 2, n):
        if period < 2 or n % period:
            continue
        if any(g * period not in bset for g in range(1, n // period)):
            continue
        if _subarray_index(boundaries, period - 1) - _subarray_index(boundaries, 0) <= 1:
            continue  # first and last subarray adjacent anyway
        ok = True
        for g in range(n // period):
            kind, _ = classify_copy(probe, g * period, g * period + period - 1)
            if kind != "HALF":
                ok = False
                break
        if ok:
            confirmed.append(period)
    anomalies = []
    if not confirmed:
        anomalies.append("open bitline but no edge-subarray pairing confirmed")
        return None, [], anomalies
    if len(confirmed) > 1:
        anomalies.append(f"several edge periods confirmed: {confirmed}")
    period = confirmed[0]
    pairs = [(g * period, bases[_subarray_index(boundaries, g * period + period - 1)])
             for g in range(n // period)]
    return period, pairs, anomalies
