"""Per-bit effective aggressor side for charged and discharged victims."""

from __future__ import annotations

import bisect
from typing import Optional

import numpy as np

from .probe import DEFAULT_CEILING, Probe

STATES = {"EFF_CHARGE": 1, "EFF_DISCHARGE": 0}
PARITIES = ("even", "odd")


def interior_rows(boundaries: list, rows: int, polarity: Optional[list], stride: Optional[int]) -> list:
    """Rows whose two neighbours share their subarray and whose polarity is known.

    With coupled rows only the lower half is used, so victims never overlap a coupled aggressor.
    """
    edges = [0] + list(boundaries) + [rows]
    limit = rows // 2 if stride else rows
    out = []
    for k, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        if polarity is not None and polarity[k] is None:
            continue
        out.extend(r for r in range(lo + 1, hi - 1) if r < limit)
    return out


def row_polarity_lookup(boundaries: list, polarity: Optional[list]):
    def charged_value(row: int) -> int:
        """Host value that leaves the cell charged."""
        if polarity is None:
            return 1
        return 1 if polarity[bisect.bisect_right(boundaries, row)] == "TRUE" else 0

    return charged_value


def spread(rows: list, count: int) -> list:
    if len(rows) <= count:
        return list(rows)
    idx = np.linspace(0, len(rows) - 1, count).astype(int)
    return [rows[i] for i in idx]


def single_side_flips(probe: Probe, victim: int, side: str, value: int, count: int,
                      activated_cycles: Optional[int] = None) -> np.ndarray:
    """Internal-order flip mask of ``victim`` after hammering its UPPER (row + 1) or LOWER neighbour."""
    probe.fill(victim, value)
    probe.hammer(victim + 1 if side == "UPPER" else victim - 1, count, activated_cycles)
    return probe.read(victim) != value


def detect_period(maps: list) -> Optional[int]:
    for p in (2, 4, 8):
        half = p // 2
        ok = True
        for seq in maps:
            known = [(b, s) for b, s in enumerate(seq) if s != "?"]
            if not known:
                ok = False
                break
            b0, s0 = known[0]
            other = "L" if s0 == "U" else "U"
            for b, s in known:
                same = ((b // half) - (b0 // half)) % 2 == 0
                if s != (s0 if same else other):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return p
    return None


def discover_aggressor_patterns(probe: Probe, boundaries: list, polarity: Optional[list],
                                stride: Optional[int], count: int, victims_per_parity: int = 48,
                                extra_rounds: int = 3, ceiling: int = DEFAULT_CEILING) -> dict:
    """Per-bit effective side. While any bit is tied, another round runs on fresh victims at
    double the activation count (charged cells can need far more than the AIB calibration)."""
    candidates = interior_rows(boundaries, probe.rows, polarity, stride)
    charged_value = row_polarity_lookup(boundaries, polarity)
    w = probe.width
    result = {}
    unresolved = 0
    for name, charged in STATES.items():
        result[name] = {}
        for parity_name, parity in zip(PARITIES, (0, 1)):
            pool = [r for r in candidates if r % 2 == parity]
            tally = {"UPPER": np.zeros(w, dtype=np.int64), "LOWER": np.zeros(w, dtype=np.int64)}
            used = set()
            n = count
            for _ in range(1 + extra_rounds):
                fresh = [r for r in pool if r not in used]
                rows = spread(fresh, victims_per_parity)
                if not rows:
                    break
                used.update(rows)
                for v in rows:
                    value = charged_value(v) if charged else 1 - charged_value(v)
                    for side in tally:
                        tally[side] += single_side_flips(probe, v, side, value, n)
                if (tally["UPPER"] != tally["LOWER"]).all():
                    break
                n = min(ceiling, 2 * n)
            up, lo = tally["UPPER"], tally["LOWER"]
            seq = "".join("U" if u > l else "L" if l > u else "?" for u, l in zip(up, lo))
            unresolved += seq.count("?")
            result[name][parity_name] = seq
    maps = [result[n][p] for n in STATES for p in PARITIES]
    result["period"] = detect_period(maps)
    result["unresolved"] = unresolved
    return result


def side_masks(patterns: dict, name: str, row: int) -> dict:
    seq = patterns[name][PARITIES[row % 2]]
    up = np.array([c == "U" for c in seq])
    lo = np.array([c == "L" for c in seq])
    return {"UPPER": up, "LOWER": lo}
