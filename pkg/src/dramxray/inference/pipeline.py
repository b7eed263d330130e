"""End-to-end reverse engineering of one chip through its command port."""

from __future__ import annotations

import logging
from typing import Callable, Iterable, Optional

from ..addressmap import CORRECT, AddressInterpretation
from ..port import CommandPort
from ..report import BankReport, InferenceReport
from . import sweeps as sw
from .aib import calibrate_count, find_boundaries_aib
from .crosscheck import cross_check
from .misconception import misconception_demo
from .patterns import discover_aggressor_patterns
from .probe import Probe
from .retention import WaitTooShort, find_true_anti, subarray_polarity
from .rowcopy import detect_coupled_rows, detect_edge_pairs, find_boundaries_rowcopy

log = logging.getLogger(__name__)

STAGES = ("boundaries", "structure", "patterns", "sweeps", "variation", "misconception")
REQUIRES = {
    "boundaries": (),
    "structure": ("boundaries",),
    "patterns": ("structure",),
    "sweeps": ("patterns",),
    "variation": ("patterns",),
    "misconception": (),
}


class StageError(ValueError):
    pass


def resolve_stages(selection: Iterable[str]) -> list:
    chosen = set()
    for item in selection:
        for name in str(item).split(","):
            name = name.strip()
            if not name:
                continue
            if name == "all":
                chosen.update(STAGES)
            elif name in STAGES:
                chosen.add(name)
            else:
                raise StageError(f"unknown stage {name!r}; choose from {', '.join(STAGES + ('all',))}")
    for name in chosen:
        for dep in REQUIRES[name]:
            if dep not in chosen:
                raise StageError(f"stage {name!r} requires stage {dep!r}")
    return [s for s in STAGES if s in chosen]


def sizes_from(boundaries: list, rows: int) -> list:
    edges = [0] + list(boundaries) + [rows]
    return [b - a for a, b in zip(edges[:-1], edges[1:])]


def structure_of(bank: BankReport) -> dict:
    return {"boundaries": bank.boundaries, "polarity": bank.polarity,
            "coupled_row_stride": bank.coupled_row_stride}


VariationRunner = Callable[[dict, dict], list]


def run_pipeline(port: CommandPort, stages: Iterable[str] = ("all",), interp: AddressInterpretation = CORRECT,
                 bank: int = 0, variation: Optional[VariationRunner] = None,
                 sweep_rows: int = 2048) -> InferenceReport:
    stages = resolve_stages(stages)
    probe = Probe(port, interp, bank)
    report = InferenceReport(chip_label=port.chip_label, rows_per_bank=port.rows_per_bank,
                             row_width=port.row_width, interpretation=interp.to_dict())
    b = BankReport(bank=bank)
    report.banks.append(b)
    n = port.rows_per_bank

    if "boundaries" in stages:
        log.info("%s: AIB boundary scan", port.chip_label)
        aib = find_boundaries_aib(probe)
        b.boundaries = aib.boundaries
        b.subarray_sizes = sizes_from(aib.boundaries, n)
        b.techniques["aib"] = aib.boundaries
        b.calibration["hammer_count"] = aib.count
        b.undecided_rows = aib.undecided
        if aib.undecided:
            report.anomalies.append(f"{len(aib.undecided)} rows showed no AIB from either side")

    if "structure" in stages:
        log.info("%s: row-copy scan", port.chip_label)
        copy = find_boundaries_rowcopy(probe)
        b.techniques["rowcopy"] = copy.boundaries
        b.bitline = copy.bitline
        b.cross_copy_inverted = copy.inverted if copy.bitline == "OPEN" else None
        report.anomalies.extend(copy.anomalies)
        log.info("%s: retention scan", port.chip_label)
        try:
            ret = find_true_anti(probe)
            b.techniques["retention"] = ret.boundaries
            b.calibration["retention_wait_cycles"] = ret.wait_cycles
            b.polarity = subarray_polarity(ret, b.boundaries, n)
            report.anomalies.extend(ret.anomalies)
        except WaitTooShort as exc:
            report.anomalies.append(str(exc))
        b.coupled_row_stride, more = detect_coupled_rows(probe, b.boundaries)
        report.anomalies.extend(more)
        b.edge_period, pairs, more = detect_edge_pairs(probe, b.boundaries, b.bitline)
        b.edge_pairs = [list(p) for p in pairs]
        report.anomalies.extend(more)
        b.cross_check = cross_check(b.techniques)

    if "patterns" in stages:
        log.info("%s: aggressor patterns", port.chip_label)
        pats = discover_aggressor_patterns(probe, b.boundaries, b.polarity, b.coupled_row_stride,
                                           b.calibration["hammer_count"])
        b.aggressor_patterns = pats
        b.serialization_period = pats["period"]
        if pats["period"] is None:
            report.anomalies.append("no serialization period fits the recovered aggressor sides")
        if pats["unresolved"]:
            report.anomalies.append(f"{pats['unresolved']} aggressor-side entries unresolved")

    if "sweeps" in stages:
        log.info("%s: sensitivity sweeps", port.chip_label)
        victims = sw.Victims(probe, structure_of(b), limit=sweep_rows)
        for pattern in ("EFF_CHARGE", "EFF_DISCHARGE"):
            for axis in (sw.ACT_COUNT, sw.ACT_TIME):
                report.sweeps.append(sw.sweep_sensitivity(probe, b.aggressor_patterns, structure_of(b),
                                                          pattern, axis, victims=victims))

    if "variation" in stages and variation is not None:
        log.info("%s: chip variation", port.chip_label)
        chips = variation(structure_of(b), b.aggressor_patterns)
        report.variation = sw.variation_summary(chips)

    if "misconception" in stages:
        log.info("%s: misconception demo", port.chip_label)
        count = b.calibration.get("hammer_count") or calibrate_count(Probe(port, CORRECT, bank))
        out = {"selected": misconception_demo(probe, count, b.coupled_row_stride)}
        if not interp.is_correct:
            out["correct"] = misconception_demo(Probe(port, CORRECT, bank), count, b.coupled_row_stride)
        report.misconception = out

    return report
