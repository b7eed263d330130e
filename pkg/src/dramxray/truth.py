"""Ground-truth InferenceReport read straight from a profile's hidden structure.

This is the validation harness's side of the firewall: the inference package never
imports it.
"""

from __future__ import annotations

from typing import Union

from .device import Device
from .geometry import LOWER, UPPER, Layout
from .profile import Bitline, DeviceProfile
from .report import BankReport, InferenceReport


def _sides(layout: Layout, row: int, partner: bool) -> str:
    out = []
    for bit in range(layout.profile.row_width_bits):
        side = layout.partner_side(row, bit)
        if not partner:
            side = LOWER if side == UPPER else UPPER
        out.append(side[0])
    return "".join(out)


def aggressor_patterns(layout: Layout) -> dict:
    """Discharged cells are hit from their shared-active-region partner, charged cells from the other side."""
    return {
        "EFF_CHARGE": {"even": _sides(layout, 0, False), "odd": _sides(layout, 1, False)},
        "EFF_DISCHARGE": {"even": _sides(layout, 0, True), "odd": _sides(layout, 1, True)},
    }


def ground_truth_report(source: Union[Device, DeviceProfile]) -> InferenceReport:
    profile = source.profile if isinstance(source, Device) else source
    layout = source.layout if isinstance(source, Device) else Layout(profile)
    is_open = profile.bitline_structure is Bitline.OPEN
    banks = []
    for bank in range(profile.num_banks):
        banks.append(BankReport(
            bank=bank,
            boundaries=layout.boundaries(),
            subarray_sizes=[int(s) for s in layout.sizes],
            bitline=profile.bitline_structure.value,
            cross_copy_inverted=bool(profile.datapath_inversion) if is_open else None,
            polarity=["TRUE" if t else "ANTI" for t in layout.sub_true],
            coupled_row_stride=profile.coupled_row_stride,
            edge_period=profile.edge_pair_period if is_open else None,
            edge_pairs=[list(p) for p in layout.edge_pairs()] if is_open else [],
            serialization_period=profile.serialization_period,
            aggressor_patterns=aggressor_patterns(layout),
        ))
    return InferenceReport(chip_label=profile.chip_label, rows_per_bank=profile.rows_per_bank,
                           row_width=profile.row_width_bits, banks=banks)
