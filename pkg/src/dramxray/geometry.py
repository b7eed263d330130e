"""Physical layout derived from a profile: subarray tiling, sense-amplifier strips, 6F2 sides.

Conventions used throughout the package:

* Rows are internal (post-remap) indices. ``UPPER`` is the neighbour at ``row + 1``,
  ``LOWER`` the neighbour at ``row - 1``.
* With an open bitline, subarray ordinal ``k`` (group-local ordinal ``j``) drives bit ``b``
  onto the strip ABOVE it when ``(b + j)`` is even, otherwise onto the strip BELOW it.
  Adjacent subarrays therefore meet on the same bit positions.
* Within every group of ``edge_pair_period`` rows the bottom subarray's BELOW half and the
  top subarray's ABOVE half share one edge strip. Their columns pair up in rank order, so
  the pairing is position-preserving whenever the group holds an even number of subarrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .profile import Bitline, DeviceProfile, PolarityRule

UPPER = "UPPER"
LOWER = "LOWER"
ABOVE = "ABOVE"
BELOW = "BELOW"
OWN = "OWN"


class Subarray(NamedTuple):
    ordinal: int
    base: int
    size: int


@dataclass(frozen=True)
class StripLink:
    strip: int
    bits: np.ndarray  # bit positions of this subarray on the strip
    cols: np.ndarray  # strip column each of those bits lands on


class Layout:
    def __init__(self, profile: DeviceProfile):
        self.profile = profile
        n = profile.rows_per_bank
        reps = n // sum(profile.subarray_pattern)
        self.sizes = np.array(list(profile.subarray_pattern) * reps, dtype=np.int64)
        self.bases = np.concatenate([[0], np.cumsum(self.sizes)[:-1]])
        self.num_subarrays = len(self.sizes)
        self.row_sub = np.repeat(np.arange(self.num_subarrays), self.sizes)
        period = profile.edge_pair_period
        self.group_of = self.bases // period
        self.num_groups = n // period
        first = np.searchsorted(self.bases, np.arange(self.num_groups) * period)
        self.group_first = first
        self.group_last = np.concatenate([first[1:], [self.num_subarrays]]) - 1
        self.local = np.arange(self.num_subarrays) - first[self.group_of]

        if profile.polarity_rule is PolarityRule.ALL_TRUE:
            self.sub_true = np.ones(self.num_subarrays, dtype=bool)
        else:
            self.sub_true = np.arange(self.num_subarrays) % 2 == 0
        self.row_true = self.sub_true[self.row_sub]

        w = profile.row_width_bits
        half = profile.serialization_period // 2
        bit_group = np.arange(w) // half
        rows = np.arange(n)
        # True where the shared-active-region partner is row + 1
        self.partner_upper = ((bit_group[None, :] + rows[:, None]) % 2) == 0
        # by aggressor parity: bits for which victims [row - 1, row + 1] are rowhammer victims
        self.victim_rh_side = [np.stack([~self.partner_upper[p], self.partner_upper[p]]) for p in (0, 1)]
        self.links = [self._links(k) for k in range(self.num_subarrays)]
        self.num_strips = self.num_subarrays + self.num_groups

    # -- subarrays ---------------------------------------------------------

    def subarray_of(self, row: int) -> Subarray:
        if not 0 <= row < self.profile.rows_per_bank:
            raise IndexError(f"row {row} outside [0, {self.profile.rows_per_bank})")
        k = int(self.row_sub[row])
        return Subarray(k, int(self.bases[k]), int(self.sizes[k]))

    def boundaries(self) -> list:
        return [int(b) for b in self.bases[1:]]

    def same_subarray(self, a: int, b: int) -> bool:
        n = self.profile.rows_per_bank
        return 0 <= a < n and 0 <= b < n and self.row_sub[a] == self.row_sub[b]

    def edge_pairs(self) -> list:
        return [(int(self.bases[f]), int(self.bases[l]))
                for f, l in zip(self.group_first, self.group_last)]

    # -- sense amplifiers --------------------------------------------------

    def _above_mask(self, k: int) -> np.ndarray:
        w = self.profile.row_width_bits
        return (np.arange(w) + self.local[k]) % 2 == 0

    def _links(self, k: int) -> list:
        w = self.profile.row_width_bits
        if self.profile.bitline_structure is Bitline.FOLDED:
            allbits = np.arange(w)
            return [StripLink(k, allbits, allbits)]
        g = int(self.group_of[k])
        edge = self.num_subarrays + g
        above = np.flatnonzero(self._above_mask(k))
        below = np.flatnonzero(~self._above_mask(k))
        links = []
        if k == self.group_first[g]:
            links.append(StripLink(edge, below, below))
        else:
            links.append(StripLink(k, below, below))
        if k == self.group_last[g]:
            bottom = int(self.group_first[g])
            bottom_below = np.flatnonzero(~self._above_mask(bottom))
            links.append(StripLink(edge, above, bottom_below))
        else:
            links.append(StripLink(k + 1, above, above))
        return links

    def sa_connectivity(self, ordinal: int) -> list:
        """Side of the strip each bit of subarray ``ordinal`` drives (ABOVE/BELOW, or OWN if folded)."""
        if not 0 <= ordinal < self.num_subarrays:
            raise IndexError(f"subarray ordinal {ordinal} outside [0, {self.num_subarrays})")
        if self.profile.bitline_structure is Bitline.FOLDED:
            return [OWN] * self.profile.row_width_bits
        mask = self._above_mask(ordinal)
        return [ABOVE if m else BELOW for m in mask]

    def strip_partner(self, ordinal: int) -> dict:
        """Subarray sharing each strip side of ``ordinal`` (None when folded)."""
        if self.profile.bitline_structure is Bitline.FOLDED:
            return {ABOVE: None, BELOW: None}
        g = int(self.group_of[ordinal])
        first, last = int(self.group_first[g]), int(self.group_last[g])
        return {
            ABOVE: first if ordinal == last else ordinal + 1,
            BELOW: last if ordinal == first else ordinal - 1,
        }

    # -- 6F2 cell geometry -------------------------------------------------

    def partner_side(self, row: int, bit: int) -> str:
        return UPPER if self.partner_upper[row, bit] else LOWER
