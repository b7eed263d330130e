"""The command interface a reverse-engineering host sees.

A :class:`CommandPort` exposes what a memory controller and a DIMM datasheet give an
experimenter: geometry counts, timing, the documented address/DQ remapping, and the
ability to issue commands and let time pass. Everything else about the device stays
behind it.
"""

from __future__ import annotations

import copy
from typing import Optional

import numpy as np

from . import engine
from .engine import Command, CommandResult, Kind


class CommandPort:
    __slots__ = ("_device",)

    def __init__(self, device):
        self._device = device

    # -- public datasheet facts ---------------------------------------------

    @property
    def chip_label(self) -> str:
        return self._device.profile.chip_label

    @property
    def num_banks(self) -> int:
        return self._device.profile.num_banks

    @property
    def rows_per_bank(self) -> int:
        return self._device.profile.rows_per_bank

    @property
    def row_width(self) -> int:
        return self._device.profile.row_width_bits

    @property
    def timing(self):
        return copy.copy(self._device.profile.timing)

    @property
    def remap(self):
        return copy.deepcopy(self._device.profile.remap)

    @property
    def refresh_rows_per_command(self) -> int:
        return self._device.rows_per_ref

    # -- commands ------------------------------------------------------------

    @property
    def now(self) -> int:
        return max(self._device.cycle, self._device.last_issue)

    def issue(self, cmd: Command) -> CommandResult:
        res = engine.issue(self._device, cmd)
        res.flips = []  # the host never sees internal coordinates
        return res

    def advance_to(self, cycle: int) -> None:
        engine.advance_to(self._device, cycle)

    def hammer(self, bank: int, host_row: int, count: int, activated_cycles: Optional[int] = None) -> int:
        """Bulk ACT/PRE loop on one host row; returns the cycle after the last PRE + tRP."""
        return engine.hammer(self._device, bank, host_row, count, activated_cycles).cycle


class Session:
    """Legal-timing helpers over a port: write/read whole rows, hammer, row-copy."""

    def __init__(self, port: CommandPort, bank: int = 0):
        self.port = port
        self.bank = bank
        self.t = port.timing
        self.width = port.row_width
        self.ones = np.ones(self.width, dtype=np.uint8)
        self.zeros = np.zeros(self.width, dtype=np.uint8)

    def _next(self, gap: int) -> int:
        return self.port.now + gap

    def write(self, host_row: int, bits) -> None:
        p, b, t = self.port, self.bank, self.t
        c = self._next(t.tRP_cycles)
        p.issue(Command(Kind.ACT, b, host_row, issue_cycle=c))
        p.issue(Command(Kind.WR, b, host_row, np.asarray(bits, dtype=np.uint8), c + t.tRCD_cycles))
        p.issue(Command(Kind.PRE, b, issue_cycle=c + t.tRAS_cycles))

    def read(self, host_row: int) -> np.ndarray:
        p, b, t = self.port, self.bank, self.t
        c = self._next(t.tRP_cycles)
        p.issue(Command(Kind.ACT, b, host_row, issue_cycle=c))
        data = p.issue(Command(Kind.RD, b, host_row, issue_cycle=c + t.tRCD_cycles)).data
        p.issue(Command(Kind.PRE, b, issue_cycle=c + t.tRAS_cycles))
        return data

    def hammer(self, host_row: int, count: int, activated_cycles: Optional[int] = None) -> None:
        self.port.hammer(self.bank, host_row, count, activated_cycles)

    def row_copy(self, src_host: int, dst_host: int, src_bits, gap: int = 1) -> np.ndarray:
        """Write ``src_bits`` into the source, precharge, re-activate the destination ``gap``
        cycles later, and return what the destination reads while still open."""
        p, b, t = self.port, self.bank, self.t
        c = self._next(t.tRP_cycles)
        p.issue(Command(Kind.ACT, b, src_host, issue_cycle=c))
        p.issue(Command(Kind.WR, b, src_host, np.asarray(src_bits, dtype=np.uint8), c + t.tRCD_cycles))
        pre = c + t.tRAS_cycles
        p.issue(Command(Kind.PRE, b, issue_cycle=pre))
        p.issue(Command(Kind.ACT, b, dst_host, issue_cycle=pre + gap))
        data = p.issue(Command(Kind.RD, b, dst_host, issue_cycle=pre + gap + t.tRCD_cycles)).data
        p.issue(Command(Kind.PRE, b, issue_cycle=pre + gap + t.tRAS_cycles))
        return data

    def wait(self, cycles: int) -> None:
        self.port.advance_to(self.port.now + int(cycles))
