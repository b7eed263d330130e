"""Activate-induced bitflip and retention models.

Each aggressor activation disturbs the two neighbouring rows of its own subarray. Per bit,
the neighbour sharing the 6F2 active region is the rowhammer victim, the other neighbour
is the passing-gate victim:

* rowhammer accumulates only on discharged victims, weighted
  ``1 + eps * (t_active / tRAS - 1)`` per activation;
* passing-gate accumulates only on charged victims, weighted ``(t_active / tRAS) ** alpha``.

A victim flips when its accumulator exceeds its threshold; the accumulator then resets.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .profile import DeviceProfile


class ThresholdTables(NamedTuple):
    chip_offset: float
    rowhammer: np.ndarray  # (banks, rows, width) activations
    passing_gate: np.ndarray  # (banks, rows, width) weighted activations
    retention: np.ndarray  # (banks, rows, width) cycles


def sample_thresholds(profile: DeviceProfile, seed=None) -> ThresholdTables:
    fp = profile.fault_params
    rng = np.random.default_rng(fp.seed if seed is None else seed)
    shape = (profile.num_banks, profile.rows_per_bank, profile.row_width_bits)
    offset = float(np.exp(rng.normal(0.0, fp.chip_offset_sigma))) if fp.chip_offset_sigma > 0 else 1.0
    rh = offset * fp.rh_threshold_mean * np.exp(fp.rh_threshold_sigma * rng.standard_normal(shape))
    pg = offset * fp.pg_threshold_mean * np.exp(fp.pg_threshold_sigma * rng.standard_normal(shape))
    ret = fp.retention_mean * np.exp(fp.retention_sigma * rng.standard_normal(shape))
    # shipped parts hold data across at least two refresh windows
    np.maximum(ret, 2.0 * profile.timing.tREFW_cycles, out=ret)
    return ThresholdTables(offset, rh, pg, ret)


def increments(profile: DeviceProfile, activated_cycles: float) -> tuple:
    fp = profile.fault_params
    ratio = activated_cycles / profile.timing.tRAS_cycles
    rh = max(0.0, 1.0 + fp.rh_time_epsilon * (ratio - 1.0))
    pg = ratio ** fp.pg_time_exponent
    return rh, pg


def _disturb(device, bank: int, rows, rh_side: np.ndarray, inc_rh: float, inc_pg: float):
    """Accumulate on victim ``rows`` (an int or a strided slice) and apply flips; returns the flip mask."""
    charge = device.charge[bank, rows]
    rh = rh_side & (charge == 0)
    pg = ~rh_side & (charge == 1)
    acc_rh = device.acc_rh[bank, rows]
    acc_pg = device.acc_pg[bank, rows]
    np.add(acc_rh, inc_rh, out=acc_rh, where=rh)
    np.add(acc_pg, inc_pg, out=acc_pg, where=pg)
    f_rh = rh & (acc_rh > device.thr_rh[bank, rows])
    f_pg = pg & (acc_pg > device.thr_pg[bank, rows])
    flipped = f_rh | f_pg
    if not flipped.any():
        return None
    charge[f_rh] = 1
    charge[f_pg] = 0
    acc_rh[f_rh] = 0.0
    acc_pg[f_pg] = 0.0
    return f_rh, flipped


def on_aggressor_cycle(device, bank: int, aggressor_row: int, activated_cycles: float, count: int = 1) -> list:
    """Apply ``count`` ACT/PRE cycles of one aggressor row; returns flipped ``(row, bit)`` pairs.

    ``count > 1`` is exact for a single aggressor: every victim cell is exposed to just
    one mechanism, which stops acting once the cell flips.
    """
    lay = device.layout
    inc_rh, inc_pg = increments(device.profile, activated_cycles)
    inc_rh *= count
    inc_pg *= count
    a = aggressor_row
    below, above = a - 1, a + 1
    flips = []
    if lay.same_subarray(a, below) and lay.same_subarray(a, above):
        # both victims at once through a strided view: rows a-1 and a+1
        device.settle(bank, below)
        device.settle(bank, above)
        rows = slice(below, above + 1, 2)
        hit = _disturb(device, bank, rows, lay.victim_rh_side[a % 2], inc_rh, inc_pg)
        if hit is not None:
            f_rh, flipped = hit
            for i, victim in enumerate((below, above)):
                if f_rh[i].any():
                    device.rearm_cells(bank, victim, f_rh[i])
            vi, bits = np.nonzero(flipped)
            flips.extend(zip((below + 2 * vi).tolist(), bits.tolist()))
        return flips
    for i, victim in enumerate((below, above)):
        if not lay.same_subarray(a, victim):
            continue
        device.settle(bank, victim)
        hit = _disturb(device, bank, victim, lay.victim_rh_side[a % 2][i], inc_rh, inc_pg)
        if hit is not None:
            f_rh, flipped = hit
            if f_rh.any():
                device.rearm_cells(bank, victim, f_rh)
            flips.extend((victim, b) for b in np.flatnonzero(flipped).tolist())
    return flips
