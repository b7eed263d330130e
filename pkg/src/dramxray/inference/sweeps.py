"""Activation-count and activated-time sensitivity, and chip-to-chip variation."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .patterns import PARITIES, STATES, interior_rows, row_polarity_lookup, side_masks, spread
from .probe import DEFAULT_CEILING, Probe

ACT_COUNT = "ACT_COUNT"
ACT_TIME = "ACT_TIME"
COUNT_GRID = (200_000, 250_000, 300_000, 350_000, 400_000)
TIME_GRID_NS = (35.0, 70.0, 105.0, 140.0, 175.0)
FIXED_COUNT = 300_000


class Victims:
    """Victim rows plus what each needs written to be charged / discharged."""

    def __init__(self, probe: Probe, structure: dict, step: int = 1, limit: Optional[int] = None):
        rows = interior_rows(structure["boundaries"], probe.rows, structure["polarity"],
                             structure["coupled_row_stride"])
        rows = rows[::step]
        if limit is not None:
            rows = spread(rows, limit)
        self.rows = rows
        self.charged_value = row_polarity_lookup(structure["boundaries"], structure["polarity"])

    def value(self, row: int, pattern: str) -> int:
        c = self.charged_value(row)
        return c if STATES[pattern] else 1 - c


def pattern_flips(probe: Probe, patterns: dict, pattern: str, row: int, value: int,
                  count: int, activated_cycles: Optional[int] = None) -> int:
    """Apply one composite pattern to one victim: each bit counts only from its effective side."""
    masks = side_masks(patterns, pattern, row)
    total = 0
    for side, mask in masks.items():
        if not mask.any():
            continue
        probe.fill(row, value)
        probe.hammer(row + 1 if side == "UPPER" else row - 1, count, activated_cycles)
        total += int(((probe.read(row) != value) & mask).sum())
    return total


def ns_to_cycles(probe: Probe, ns: float) -> int:
    return int(round(ns / probe.timing.tCK_ns))


def sweep_sensitivity(probe: Probe, patterns: dict, structure: dict, pattern: str, axis: str,
                      grid=None, victims: Optional[Victims] = None, max_rows: int = 2048) -> dict:
    if victims is None:
        victims = Victims(probe, structure, limit=max_rows)
    if grid is None:
        grid = COUNT_GRID if axis == ACT_COUNT else TIME_GRID_NS
    grid = list(grid)
    bits = len(victims.rows) * probe.width
    flips = []
    for x in grid:
        if axis == ACT_COUNT:
            count, act = int(x), None
        elif axis == ACT_TIME:
            count, act = FIXED_COUNT, ns_to_cycles(probe, x)
        else:
            raise ValueError(f"unknown axis {axis!r}")
        n = 0
        for r in victims.rows:
            n += pattern_flips(probe, patterns, pattern, r, victims.value(r, pattern), count, act)
        flips.append(n)
    ber = [f / bits if bits else 0.0 for f in flips]
    base = ber[0] if ber else 0.0
    rel = [(b / base) if base > 0 else None for b in ber]
    return {"pattern": pattern, "axis": axis, "grid": grid, "flips": flips, "ber": ber,
            "relative_ber": rel, "victim_rows": len(victims.rows)}


# -- variation -------------------------------------------------------------

def row_error_counts(probe: Probe, patterns: dict, victims: Victims, count: int,
                     stop_at_first: bool = False) -> list:
    out = []
    for r in victims.rows:
        n = 0
        for pattern in STATES:
            n += pattern_flips(probe, patterns, pattern, r, victims.value(r, pattern), count)
            if stop_at_first and n:
                return out + [n]
        out.append(n)
    return out


def hc_first(probe: Probe, patterns: dict, victims: Victims, ceiling: int = 4 * DEFAULT_CEILING,
             rel_precision: float = 0.01) -> Optional[int]:
    """Lowest activation count flipping any bit of the victim sample (bisection)."""

    def any_flip(count: int) -> bool:
        return any(row_error_counts(probe, patterns, victims, count, stop_at_first=True))

    hi = 50_000
    while not any_flip(hi):
        if hi >= ceiling:
            return None
        hi *= 2
    lo = hi // 2 if hi > 50_000 else 0
    while hi - lo > max(1, int(hi * rel_precision)):
        mid = (lo + hi) // 2
        if any_flip(mid):
            hi = mid
        else:
            lo = mid
    return hi


def five_numbers(values) -> list:
    a = np.asarray(values, dtype=float)
    q = np.percentile(a, [0, 25, 50, 75, 100])
    return [float(x) for x in q]


def chip_stats(probe: Probe, patterns: dict, structure: dict, step: int = 16,
               count: int = FIXED_COUNT, with_hc_first: bool = True) -> dict:
    victims = Victims(probe, structure, step=step)
    counts = row_error_counts(probe, patterns, victims, count)
    out = {"chip": probe.port.chip_label, "rows": len(counts), "summary": five_numbers(counts)}
    out["hc_first"] = hc_first(probe, patterns, victims) if with_hc_first else None
    return out


def variation_summary(chips: list) -> dict:
    medians = [c["summary"][2] for c in chips]
    iqrs = [c["summary"][3] - c["summary"][1] for c in chips]
    inter = float(np.std(medians, ddof=1)) if len(medians) > 1 else 0.0
    intra = float(np.mean(iqrs)) if iqrs else 0.0
    ratio = inter / intra if intra > 0 else (math.inf if inter > 0 else 1.0)
    return {"chips": chips, "inter_chip_std_of_medians": inter, "mean_intra_chip_iqr": intra,
            "dispersion_ratio": ratio if math.isfinite(ratio) else None,
            "hc_first": [c["hc_first"] for c in chips]}
