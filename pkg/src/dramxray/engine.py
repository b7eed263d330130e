"""Cycle-stamped DRAM command state machine and the trace interchange format.

Timing violations are never errors, matching hardware: an ACT that lands within the
charge-share window after a PRE copies the still-latched strip values into the new row.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .device import INF, NEVER, Device
from .faults import on_aggressor_cycle

log = logging.getLogger(__name__)


class Kind(str, Enum):
    ACT = "ACT"
    PRE = "PRE"
    RD = "RD"
    WR = "WR"
    REF = "REF"
    NOP = "NOP"


class ProtocolError(RuntimeError):
    def __init__(self, message: str, cycle: Optional[int] = None):
        super().__init__(message if cycle is None else f"cycle {cycle}: {message}")
        self.cycle = cycle


class TraceError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class Command:
    kind: Kind
    bank: int = 0
    row: Optional[int] = None  # host row address
    payload: Optional[np.ndarray] = None  # host bits, WR only
    issue_cycle: int = 0


@dataclass
class CommandResult:
    cycle: int
    data: Optional[np.ndarray] = None
    restore_violation: bool = False
    flips: list = field(default_factory=list)


def advance_to(device: Device, cycle: int) -> int:
    if cycle < device.cycle:
        raise ProtocolError(f"time moving backward ({cycle} < {device.cycle})", cycle)
    device.cycle = int(cycle)
    return device.cycle


def _window(device: Device) -> float:
    return device.profile.fault_params.copy_window_fraction * device.profile.timing.tRP_cycles


def _activate(device: Device, bank: int, row: int, t: int) -> None:
    lay = device.layout
    k = int(lay.row_sub[row])
    window = _window(device)
    device.settle(bank, row)
    pre = device.strip_pre[bank]
    for link in lay.links[k]:
        s = link.strip
        if pre[s] <= t < pre[s] + window:
            vals = device.strip_data[bank, s, link.cols]
            src = int(device.strip_src[bank, s])
            if src != k:
                flip = device.profile.datapath_inversion ^ bool(lay.sub_true[src] != lay.sub_true[k])
                if flip:
                    vals = 1 - vals
            device.charge[bank, row, link.bits] = vals
        device.strip_data[bank, s, link.cols] = device.charge[bank, row, link.bits]
        device.strip_src[bank, s] = k
        pre[s] = INF
    device.acc_rh[bank, row] = 0.0
    device.acc_pg[bank, row] = 0.0


def _strips_of(device: Device, row: int):
    return [link.strip for link in device.layout.links[int(device.layout.row_sub[row])]]


def _check_bank(device: Device, bank: int, cycle: int) -> None:
    if not 0 <= bank < device.profile.num_banks:
        raise ProtocolError(f"bank {bank} does not exist", cycle)


def issue(device: Device, cmd: Command) -> CommandResult:
    t = int(cmd.issue_cycle)
    if t <= device.last_issue:
        raise ProtocolError(f"issue cycle {t} not after previous command at {device.last_issue}", t)
    advance_to(device, t)
    device.last_issue = t
    kind = Kind(cmd.kind)
    if kind is Kind.NOP:
        return CommandResult(t)
    if kind is Kind.REF:
        return _refresh(device, t)
    _check_bank(device, cmd.bank, t)
    bank = device.banks[cmd.bank]
    if kind is Kind.ACT:
        if bank.active_rows:
            raise ProtocolError(f"ACT to bank {cmd.bank} in phase ACTIVE", t)
        if cmd.row is None:
            raise ProtocolError("ACT needs a row", t)
        rows = device.coupled_rows(device.rowmap.to_internal(int(cmd.row)))
        for r in rows:
            _activate(device, cmd.bank, r, t)
        bank.active_rows = rows
        bank.act_cycle = t
        return CommandResult(t)
    if not bank.active_rows:
        raise ProtocolError(f"{kind.value} to bank {cmd.bank} in phase IDLE", t)
    addressed = bank.active_rows[0]
    if kind in (Kind.RD, Kind.WR) and cmd.row is not None and device.rowmap.to_internal(int(cmd.row)) != addressed:
        raise ProtocolError(f"{kind.value} row {cmd.row} is not the open row of bank {cmd.bank}", t)
    if kind is Kind.RD:
        return CommandResult(t, data=device.host_bits(cmd.bank, addressed))
    if kind is Kind.WR:
        if cmd.payload is None or len(cmd.payload) != device.profile.row_width_bits:
            raise ProtocolError("WR payload must carry one bit per DQ of the row", t)
        charge = device.charge_for(addressed, cmd.payload)
        device.charge[cmd.bank, addressed] = charge
        device.acc_rh[cmd.bank, addressed] = 0.0
        device.acc_pg[cmd.bank, addressed] = 0.0
        for link in device.layout.links[int(device.layout.row_sub[addressed])]:
            device.strip_data[cmd.bank, link.strip, link.cols] = charge[link.bits]
        device.rearm_row(cmd.bank, addressed, t)
        return CommandResult(t)
    # PRE
    return _precharge(device, cmd.bank, t)


def _precharge(device: Device, b: int, t: int) -> CommandResult:
    bank = device.banks[b]
    active = t - bank.act_cycle
    violation = active < device.profile.timing.tRAS_cycles
    p_fail = device.profile.fault_params.restore_fail_prob
    rows = bank.active_rows
    bank.active_rows = []
    bank.pre_cycle = t
    flips = []
    for r in rows:
        if violation and p_fail > 0:
            failed = device.rng.random(device.profile.row_width_bits) < p_fail
            device.charge[b, r][failed] = 0
        device.rearm_row(b, r, t)
        for s in _strips_of(device, r):
            device.strip_pre[b, s] = t
    for r in rows:
        flips.extend(on_aggressor_cycle(device, b, r, active))
    return CommandResult(t, restore_violation=violation, flips=flips)


def _refresh(device: Device, t: int) -> CommandResult:
    for i, bank in enumerate(device.banks):
        if bank.active_rows:
            raise ProtocolError(f"REF with bank {i} in phase ACTIVE", t)
    g = device.rows_per_ref
    start = device.ref_pointer * g
    device.ref_pointer = (device.ref_pointer + 1) % (device.profile.rows_per_bank // g)
    flips = []
    tras = device.profile.timing.tRAS_cycles
    for b in range(device.profile.num_banks):
        for base in range(start, start + g):
            for r in device.coupled_rows(base):
                device.restore_row(b, r, t)
                for s in _strips_of(device, r):
                    device.strip_pre[b, s] = NEVER
                flips.extend(on_aggressor_cycle(device, b, r, tras))
    return CommandResult(t, flips=flips)


def hammer(device: Device, bank: int, host_row: int, count: int, activated_cycles: Optional[int] = None) -> CommandResult:
    """``count`` back-to-back ACT/PRE cycles on one row at legal tRP spacing, applied in bulk.

    Equivalent to issuing the commands one at a time, the first ACT one tRP after the last
    command; the device clock ends one tRP after the final PRE.
    """
    tm = device.profile.timing
    act = tm.tRAS_cycles if activated_cycles is None else int(activated_cycles)
    if count <= 0:
        return CommandResult(device.cycle)
    t0 = max(device.cycle + 1, device.last_issue + tm.tRP_cycles)
    issue(device, Command(Kind.ACT, bank, host_row, issue_cycle=t0))
    last_pre = t0 + (count - 1) * (act + tm.tRP_cycles) + act
    st = device.banks[bank]
    rows = list(st.active_rows)
    st.active_rows = []
    st.pre_cycle = last_pre
    for r in rows:
        if act < tm.tRAS_cycles and device.profile.fault_params.restore_fail_prob > 0:
            failed = device.rng.random(device.profile.row_width_bits) < device.profile.fault_params.restore_fail_prob
            device.charge[bank, r][failed] = 0
        device.rearm_row(bank, r, last_pre)
        for s in _strips_of(device, r):
            device.strip_pre[bank, s] = last_pre
    flips = []
    for r in rows:
        flips.extend(on_aggressor_cycle(device, bank, r, act, count))
    end = last_pre + tm.tRP_cycles
    advance_to(device, end)
    device.last_issue = end
    return CommandResult(end, restore_violation=act < tm.tRAS_cycles, flips=flips)


def sa_connectivity(device: Device, ordinal: int) -> list:
    return device.layout.sa_connectivity(ordinal)


# ---------------------------------------------------------------------------
# trace files: "cycle kind bank row [hex payload]", bit j of the payload is DQ j


def bits_to_hex(bits) -> str:
    value = 0
    for j, b in enumerate(np.asarray(bits).tolist()):
        if b:
            value |= 1 << j
    return f"{value:x}"


def hex_to_bits(text: str, width: int) -> np.ndarray:
    value = int(text, 16)
    if value >> width:
        raise ValueError(f"payload {text} wider than {width} bits")
    return np.array([(value >> j) & 1 for j in range(width)], dtype=np.uint8)


def format_command(cmd: Command) -> str:
    row = "-" if cmd.row is None else str(cmd.row)
    parts = [str(cmd.issue_cycle), Kind(cmd.kind).value, str(cmd.bank), row]
    if cmd.payload is not None:
        parts.append(bits_to_hex(cmd.payload))
    return " ".join(parts)


def parse_trace(lines: Iterable[str], width: int) -> list:
    cmds = []
    last = -1
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (4, 5):
            raise TraceError(lineno, f"expected 'cycle kind bank row [payload]', got {raw.strip()!r}")
        try:
            cycle = int(fields[0])
            kind = Kind(fields[1].upper())
            bank = int(fields[2])
            row = None if fields[3] == "-" else int(fields[3])
            payload = hex_to_bits(fields[4], width) if len(fields) == 5 else None
        except ValueError as exc:
            raise TraceError(lineno, str(exc)) from None
        if cycle <= last:
            raise TraceError(lineno, f"cycle {cycle} does not increase")
        if kind is Kind.WR and payload is None:
            raise TraceError(lineno, "WR needs a hex payload")
        if kind is Kind.ACT and row is None:
            raise TraceError(lineno, "ACT needs a row")
        last = cycle
        cmds.append(Command(kind, bank, row, payload, cycle))
    return cmds


def replay(device: Device, commands: Iterable[Command]) -> list:
    """Issue every command in order; returns the RD results as ``(cycle, bank, row, bits)``."""
    reads = []
    for cmd in commands:
        res = issue(device, cmd)
        if res.restore_violation:
            log.info("cycle %d: PRE before tRAS on bank %d", res.cycle, cmd.bank)
        if cmd.kind is Kind.RD:
            row = cmd.row
            if row is None:
                row = device.rowmap.to_host(device.banks[cmd.bank].active_row)
            reads.append((res.cycle, cmd.bank, row, res.data))
    return reads


def dump_rows(device: Device, bank: int, host_rows: Iterable[int]) -> dict:
    """Read rows at legal timing after the trace; returns host row -> host bits."""
    tm = device.profile.timing
    out = {}
    if device.banks[bank].active_rows:
        t = max(device.last_issue + 1, device.banks[bank].act_cycle + tm.tRAS_cycles)
        issue(device, Command(Kind.PRE, bank, issue_cycle=t))
    for row in host_rows:
        t = device.last_issue + tm.tRP_cycles
        issue(device, Command(Kind.ACT, bank, row, issue_cycle=t))
        res = issue(device, Command(Kind.RD, bank, row, issue_cycle=t + tm.tRCD_cycles))
        out[row] = res.data
        issue(device, Command(Kind.PRE, bank, issue_cycle=t + tm.tRAS_cycles))
    return out
