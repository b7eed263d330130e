"""Host <-> internal address and data mapping, plus deliberately naive interpretations.

Every function here works on the public remap record (what a DIMM datasheet and the
JEDEC documents tell an experimenter), never on hidden device structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .profile import Remap

TO_HOST = "TO_HOST"
TO_INTERNAL = "TO_INTERNAL"


@dataclass(frozen=True)
class AddressInterpretation:
    apply_rcd_inversion: bool = True
    apply_row_scramble: bool = True
    apply_dq_permutation: bool = True

    @property
    def is_correct(self) -> bool:
        return self.apply_rcd_inversion and self.apply_row_scramble and self.apply_dq_permutation

    def to_dict(self) -> dict:
        return {
            "apply_rcd_inversion": self.apply_rcd_inversion,
            "apply_row_scramble": self.apply_row_scramble,
            "apply_dq_permutation": self.apply_dq_permutation,
        }


CORRECT = AddressInterpretation()


class RowMap:
    """Row-address layers for one chip: RCD inversion, then row-decoder scramble."""

    def __init__(self, remap: Remap, rows: int):
        if rows <= 0 or rows & (rows - 1):
            raise ValueError(f"row count {rows} is not a power of 2")
        self.rows = rows
        self.rcd_xor = (rows - 1 if remap.rcd_mask is None else remap.rcd_mask) if remap.rcd_inverted else 0
        sc = remap.row_scramble
        if sc.get("kind") == "xor_fold":
            self.fold_bit = int(sc["source_bit"])
            self.fold_mask = int(sc["target_mask"])
        else:
            self.fold_bit, self.fold_mask = None, 0

    def _check(self, row: int) -> None:
        if not 0 <= row < self.rows:
            raise IndexError(f"row {row} outside [0, {self.rows})")

    def invert(self, row):
        return row ^ self.rcd_xor

    def scramble(self, row):
        # involution: the source bit is never among the folded target bits
        if self.fold_bit is None:
            return row
        return row ^ (((row >> self.fold_bit) & 1) * self.fold_mask)

    def to_internal(self, host_row: int, interp: AddressInterpretation = CORRECT) -> int:
        self._check(host_row)
        r = self.invert(host_row) if interp.apply_rcd_inversion else host_row
        return self.scramble(r) if interp.apply_row_scramble else r

    def to_host(self, internal_row: int, interp: AddressInterpretation = CORRECT) -> int:
        self._check(internal_row)
        r = self.scramble(internal_row) if interp.apply_row_scramble else internal_row
        return self.invert(r) if interp.apply_rcd_inversion else r


def host_to_internal_row(remap: Remap, rows: int, host_row: int) -> int:
    return RowMap(remap, rows).to_internal(host_row)


def internal_to_host_row(remap: Remap, rows: int, internal_row: int) -> int:
    return RowMap(remap, rows).to_host(internal_row)


class DataMap:
    def __init__(self, remap: Remap, width: int):
        perm = np.asarray(remap.dq_permutation if remap.dq_permutation else range(width), dtype=np.int64)
        if len(perm) != width:
            raise ValueError(f"dq permutation has {len(perm)} entries, row width is {width}")
        self.width = width
        self.perm = perm
        self.inverse = np.argsort(perm)

    def to_host(self, internal_bits, interp: AddressInterpretation = CORRECT) -> np.ndarray:
        bits = np.asarray(internal_bits)
        if bits.shape[-1] != self.width:
            raise ValueError(f"payload width {bits.shape[-1]} != {self.width}")
        return bits[..., self.perm] if interp.apply_dq_permutation else bits.copy()

    def to_internal(self, host_bits, interp: AddressInterpretation = CORRECT) -> np.ndarray:
        bits = np.asarray(host_bits)
        if bits.shape[-1] != self.width:
            raise ValueError(f"payload width {bits.shape[-1]} != {self.width}")
        return bits[..., self.inverse] if interp.apply_dq_permutation else bits.copy()


def dq_map(remap: Remap, width: int, direction: str, payload) -> np.ndarray:
    dm = DataMap(remap, width)
    if direction == TO_HOST:
        return dm.to_host(payload)
    if direction == TO_INTERNAL:
        return dm.to_internal(payload)
    raise ValueError(f"unknown direction {direction!r}")


def view_under(interp: AddressInterpretation, remap: Remap, rows: int, width: int,
               pairs: Optional[Iterable] = None, bit_mask=None):
    """Re-express internal observations the way a host holding ``interp`` would see them.

    ``pairs`` are ``(aggressor_internal, victim_internal)`` tuples; they come back as
    ``(believed_aggressor, believed_victim)``. ``bit_mask`` is an internal-order bit mask
    and comes back in the bit order that ``interp`` believes to be internal.
    """
    rm = RowMap(remap, rows)
    out = {}
    if pairs is not None:
        seen = []
        for agg, vic in pairs:
            ha, hv = rm.to_host(agg), rm.to_host(vic)
            seen.append((rm.to_internal(ha, interp), rm.to_internal(hv, interp)))
        out["pairs"] = seen
    if bit_mask is not None:
        dm = DataMap(remap, width)
        out["bit_mask"] = dm.to_internal(dm.to_host(bit_mask), interp)
    return out
