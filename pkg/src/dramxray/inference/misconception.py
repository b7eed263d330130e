"""Victim-distance histograms under a chosen address interpretation.

Ignoring the RCD inversion makes truly adjacent victims look like they sit several rows
away, which is how a "direct non-adjacent" disturbance can be mistaken for real.
"""

from __future__ import annotations

from collections import Counter
from typing import Optional

import numpy as np

from .probe import Probe


def misconception_demo(probe: Probe, count: int, stride: Optional[int] = None, aggressors: int = 64,
                       window: int = 16) -> dict:
    n = probe.rows
    hist = Counter()
    picks = np.linspace(window + 1, n // 2 - window - 2 if stride else n - window - 2, aggressors).astype(int)
    for a in picks:
        a = int(a)
        centres = [a] + ([(a + stride) % n] if stride else [])
        watch = sorted({(c + d) % n for c in centres for d in range(-window, window + 1) if d} - set(centres))
        for value in (1, 0):
            for r in watch:
                probe.fill(r, value)
            probe.hammer(a, count)
            for r in watch:
                if (probe.read(r) != value).any():
                    hist[min(_dist(r, c, n) for c in centres)] += 1
    total = sum(hist.values())
    return {
        "interpretation": probe.interp.to_dict(),
        "histogram": {str(k): v for k, v in sorted(hist.items())},
        "victims": total,
        "fraction_at_distance_1": (hist.get(1, 0) / total) if total else None,
        "max_distance": max(hist) if hist else None,
    }


def _dist(a: int, b: int, n: int) -> int:
    d = abs(a - b)
    return min(d, n - d)
