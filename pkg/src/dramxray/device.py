"""Simulated DRAM chip: profile, layout and mutable cell/bank state."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .addressmap import DataMap, RowMap
from .faults import sample_thresholds
from .geometry import Layout
from .profile import DeviceProfile

INF = float("inf")
NEVER = -INF  # strip never latched / fully equalized


@dataclass
class BankState:
    active_rows: list = field(default_factory=list)  # internal rows, addressed row first
    act_cycle: int = 0
    pre_cycle: int = 0

    @property
    def phase(self) -> str:
        return "ACTIVE" if self.active_rows else "IDLE"

    @property
    def active_row(self) -> Optional[int]:
        return self.active_rows[0] if self.active_rows else None


class Device:
    """One chip. Single owner at a time; no shared globals, so separate Devices run independently."""

    def __init__(self, profile: DeviceProfile):
        profile.validate()
        self.profile = profile
        self.layout = Layout(profile)
        self.rowmap = RowMap(profile.remap, profile.rows_per_bank)
        self.datamap = DataMap(profile.remap, profile.row_width_bits)
        tables = sample_thresholds(profile)
        self.chip_offset = tables.chip_offset
        self.thr_rh = tables.rowhammer
        self.thr_pg = tables.passing_gate
        self.retention = tables.retention
        shape = tables.retention.shape
        nb, n, w = shape
        self.charge = np.zeros(shape, dtype=np.uint8)
        self.acc_rh = np.zeros(shape)
        self.acc_pg = np.zeros(shape)
        self.deadline = np.full(shape, INF)
        self.rng = np.random.default_rng([profile.fault_params.seed, 1])
        self.banks = [BankState() for _ in range(nb)]
        ns = self.layout.num_strips
        self.strip_data = np.zeros((nb, ns, w), dtype=np.uint8)
        self.strip_src = np.zeros((nb, ns), dtype=np.int64)
        self.strip_pre = np.full((nb, ns), NEVER)
        self.cycle = 0
        self.last_issue = -1
        self.ref_pointer = 0
        self.rows_per_ref = max(1, n // 8192)
        # lower bound on the earliest charged-cell deadline per row; decay is applied lazily
        self.row_next = np.full((nb, n), INF)
        self.row_min_retention = tables.retention.min(axis=2)

    # -- retention bookkeeping --------------------------------------------
    #
    # A charged idle cell discharges once the clock passes its deadline. Nothing observes a
    # cell's charge except an ACT of its row, a disturbance hook on it, or a refresh, so each
    # of those settles the row first instead of the device tracking decays as they happen.

    def settle(self, bank: int, row: int) -> int:
        """Apply pending decay to one idle row; returns the number of cells lost."""
        if self.row_next[bank, row] > self.cycle:
            return 0
        charge = self.charge[bank, row]
        deadline = self.deadline[bank, row]
        charged = charge == 1
        gone = charged & (deadline <= self.cycle)
        lost = int(gone.sum())
        charge[gone] = 0
        left = charged & ~gone
        self.row_next[bank, row] = float(deadline[left].min()) if left.any() else INF
        return lost

    def rearm_row(self, bank: int, row: int, now: int) -> None:
        self.deadline[bank, row] = now + self.retention[bank, row]
        self.row_next[bank, row] = now + self.row_min_retention[bank, row]

    def rearm_cells(self, bank: int, row: int, mask: np.ndarray) -> None:
        d = self.deadline[bank, row]
        d[mask] = self.cycle + self.retention[bank, row][mask]
        self.row_next[bank, row] = min(self.row_next[bank, row], float(d[mask].min()) if mask.any() else INF)

    def restore_row(self, bank: int, row: int, now: int) -> None:
        """Sense-and-restore: clears disturbance and re-arms retention."""
        self.settle(bank, row)
        self.acc_rh[bank, row] = 0.0
        self.acc_pg[bank, row] = 0.0
        self.rearm_row(bank, row, now)

    def decay_until(self, cycle: int) -> int:
        """Settle every idle row at ``cycle`` (the device clock must already be there)."""
        if cycle > self.cycle:
            raise ValueError("decay_until cannot run ahead of the device clock")
        active = {(b, r) for b, st in enumerate(self.banks) for r in st.active_rows}
        lost = 0
        for b, r in zip(*np.nonzero(self.row_next <= self.cycle)):
            if (int(b), int(r)) not in active:
                lost += self.settle(int(b), int(r))
        return lost

    # -- views -------------------------------------------------------------

    def host_bits(self, bank: int, row: int) -> np.ndarray:
        """Host-visible data of an internal row (polarity decoded, DQ permuted)."""
        logical = self.charge[bank, row] if self.layout.row_true[row] else 1 - self.charge[bank, row]
        return self.datamap.to_host(logical)

    def charge_for(self, row: int, host_bits) -> np.ndarray:
        logical = self.datamap.to_internal(np.asarray(host_bits, dtype=np.uint8))
        return logical if self.layout.row_true[row] else 1 - logical

    def coupled_rows(self, row: int) -> list:
        s = self.profile.coupled_row_stride
        if s is None:
            return [row]
        return [row, (row + s) % self.profile.rows_per_bank]


def create_device(profile: DeviceProfile) -> Device:
    return Device(profile)
