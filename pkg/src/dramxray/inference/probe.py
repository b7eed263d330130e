"""Experiment helpers in the coordinates an experimenter believes to be internal."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..addressmap import CORRECT, AddressInterpretation, DataMap, RowMap
from ..port import CommandPort, Session

DEFAULT_CEILING = 1_600_000
DEFAULT_START = 100_000


class Probe:
    """Row/bit addressing goes through the chosen interpretation of the documented remap."""

    def __init__(self, port: CommandPort, interp: AddressInterpretation = CORRECT, bank: int = 0):
        self.port = port
        self.interp = interp
        self.bank = bank
        self.session = Session(port, bank)
        self.rows = port.rows_per_bank
        self.width = port.row_width
        self.timing = port.timing
        self.rowmap = RowMap(port.remap, self.rows)
        self.datamap = DataMap(port.remap, self.width)
        self.ones = np.ones(self.width, dtype=np.uint8)
        self.zeros = np.zeros(self.width, dtype=np.uint8)

    def host(self, row: int) -> int:
        return self.rowmap.to_host(row % self.rows, self.interp)

    def believed(self, host_row: int) -> int:
        return self.rowmap.to_internal(host_row, self.interp)

    def write(self, row: int, bits) -> None:
        self.session.write(self.host(row), self.datamap.to_host(bits, self.interp))

    def fill(self, row: int, value: int) -> None:
        self.session.write(self.host(row), self.ones if value else self.zeros)

    def read(self, row: int) -> np.ndarray:
        return self.datamap.to_internal(self.session.read(self.host(row)), self.interp)

    def hammer(self, row: int, count: int, activated_cycles: Optional[int] = None) -> None:
        self.session.hammer(self.host(row), count, activated_cycles)

    def copy(self, src: int, dst: int, src_value: int, dst_value: int) -> np.ndarray:
        """Uniform-data row-copy: returns the destination row as read right after the copy."""
        self.fill(dst, dst_value)
        data = self.session.row_copy(self.host(src), self.host(dst), self.ones if src_value else self.zeros)
        return self.datamap.to_internal(data, self.interp)

    def wait(self, cycles: int) -> None:
        self.session.wait(cycles)


def classify_copy(probe: Probe, src: int, dst: int) -> tuple:
    """Return ``(kind, inverted)`` with kind FULL/HALF/NONE/ANOMALY for one src->dst copy.

    Two copies over an all-0 destination: a 1-source reveals plainly copied bits, a 0-source
    reveals inverted ones. Bits that come out 1 both times were driven by something other than
    the source (a coupled row sharing a strip with the destination) and do not count.
    """
    w = probe.width
    ones = probe.copy(src, dst, 1, 0).astype(bool)
    zeros = probe.copy(src, dst, 0, 0).astype(bool)
    plain = int((ones & ~zeros).sum())
    inverted = int((zeros & ~ones).sum())
    moved = plain + inverted
    if moved == 0:
        return "NONE", None
    if plain == w and inverted == 0:
        return "FULL", False
    if moved == w // 2 and (plain == 0 or inverted == 0):
        return "HALF", inverted > 0
    return "ANOMALY", None
