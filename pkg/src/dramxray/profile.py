"""Device profiles: the hidden ground truth of one simulated DRAM chip.

Profiles round-trip through JSON with exactly the dataclass field names below;
unknown keys are rejected so typos never silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np


class ProfileError(ValueError):
    """Raised when a profile violates one of its invariants."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class Bitline(str, Enum):
    OPEN = "OPEN"
    FOLDED = "FOLDED"


class PolarityRule(str, Enum):
    ALL_TRUE = "ALL_TRUE"
    ALTERNATING_BY_SUBARRAY = "ALTERNATING_BY_SUBARRAY"


@dataclass
class Timing:
    tCK_ns: float = 1.25
    tRAS_cycles: int = 28
    tRP_cycles: int = 11
    tRCD_cycles: int = 11
    tREFW_cycles: int = 51_200_000


@dataclass
class FaultParams:
    """Fault-model knobs. Threshold/retention ``*_mean`` values are log-normal medians
    (the scale parameter); ``*_sigma`` values are log-space standard deviations."""

    rh_threshold_mean: float = 250_000.0
    rh_threshold_sigma: float = 0.45
    pg_threshold_mean: float = 1_000_000.0
    pg_threshold_sigma: float = 0.43
    pg_time_exponent: float = 1.0
    rh_time_epsilon: float = 0.05
    retention_mean: float = 1.6e9
    retention_sigma: float = 0.5
    chip_offset_sigma: float = 0.6
    seed: int = 0
    # destination ACT within this fraction of tRP after PRE turns into a row-copy
    copy_window_fraction: float = 0.6
    # per-cell restore failure probability on a PRE issued before tRAS
    restore_fail_prob: float = 0.0


@dataclass
class Remap:
    rcd_inverted: bool = False
    # None inverts every row-address bit
    rcd_mask: Optional[int] = None
    row_scramble: dict = field(default_factory=lambda: {"kind": "identity"})
    # host DQ j carries internal bit position dq_permutation[j]; empty means identity
    dq_permutation: list = field(default_factory=list)


@dataclass
class DeviceProfile:
    chip_label: str
    num_banks: int
    rows_per_bank: int
    row_width_bits: int
    subarray_pattern: list
    bitline_structure: Bitline
    datapath_inversion: bool
    polarity_rule: PolarityRule
    coupled_row_stride: Optional[int]
    edge_pair_period: int
    serialization_period: int
    timing: Timing = field(default_factory=Timing)
    fault_params: FaultParams = field(default_factory=FaultParams)
    remap: Remap = field(default_factory=Remap)
    experimental_stride: bool = False

    def __post_init__(self):
        self.bitline_structure = Bitline(self.bitline_structure)
        self.polarity_rule = PolarityRule(self.polarity_rule)
        self.subarray_pattern = [int(s) for s in self.subarray_pattern]
        if not self.remap.dq_permutation:
            self.remap.dq_permutation = list(range(self.row_width_bits))

    @property
    def row_bits(self) -> int:
        return int(self.rows_per_bank).bit_length() - 1

    def validate(self) -> "DeviceProfile":
        validate_profile(self)
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["bitline_structure"] = self.bitline_structure.value
        d["polarity_rule"] = self.polarity_rule.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def replace(self, **changes) -> "DeviceProfile":
        return dataclasses.replace(self, **changes)

    def with_seed(self, seed: int) -> "DeviceProfile":
        fp = dataclasses.replace(self.fault_params, seed=int(seed))
        return dataclasses.replace(self, fault_params=fp)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def validate_profile(p: DeviceProfile) -> None:
    for name in ("num_banks", "rows_per_bank", "row_width_bits", "edge_pair_period"):
        if int(getattr(p, name)) <= 0:
            raise ProfileError(name, "must be a positive count")
    n = p.rows_per_bank
    if not _is_pow2(n):
        raise ProfileError("rows_per_bank", f"{n} is not a power of 2")
    if not p.subarray_pattern:
        raise ProfileError("subarray_pattern", "must be non-empty")
    if any(s <= 0 for s in p.subarray_pattern):
        raise ProfileError("subarray_pattern", "every subarray size must be > 0")
    total = sum(p.subarray_pattern)
    if n % total:
        raise ProfileError("subarray_pattern", f"pattern sum {total} does not divide rows_per_bank {n}")
    period = p.edge_pair_period
    if period % total or n % period:
        raise ProfileError(
            "edge_pair_period",
            f"{period} must be a multiple of the pattern sum {total} and divide rows_per_bank {n}",
        )
    if p.bitline_structure is Bitline.OPEN and (period // total) * len(p.subarray_pattern) < 3:
        # with two subarrays the edge strip and the middle strip join the same pair of subarrays
        raise ProfileError("edge_pair_period", "an open-bitline group needs at least 3 subarrays")
    if p.serialization_period not in (2, 4, 8):
        raise ProfileError("serialization_period", "must be one of 2, 4, 8")
    w = p.row_width_bits
    if w % p.serialization_period or w % 2:
        raise ProfileError("row_width_bits", f"{w} must be a multiple of the serialization period")
    if p.coupled_row_stride is not None:
        s = int(p.coupled_row_stride)
        if s != n // 2 and not (p.experimental_stride and _is_pow2(s) and s < n):
            raise ProfileError("coupled_row_stride", f"{s} must equal rows_per_bank/2")
        # coupled rows must never land on a shared sense-amplifier strip
        if s % period:
            raise ProfileError("coupled_row_stride", f"{s} must be a multiple of edge_pair_period {period}")
    t = p.timing
    for name in ("tCK_ns", "tRAS_cycles", "tRP_cycles", "tRCD_cycles", "tREFW_cycles"):
        if getattr(t, name) <= 0:
            raise ProfileError(f"timing.{name}", "must be positive")
    f = p.fault_params
    for name in ("rh_threshold_sigma", "pg_threshold_sigma", "retention_sigma", "chip_offset_sigma",
                 "rh_time_epsilon", "pg_time_exponent"):
        if getattr(f, name) < 0:
            raise ProfileError(f"fault_params.{name}", "must be >= 0")
    for name in ("rh_threshold_mean", "pg_threshold_mean", "retention_mean"):
        if getattr(f, name) <= 0:
            raise ProfileError(f"fault_params.{name}", "must be strictly positive")
    if not 0 < f.copy_window_fraction <= 1:
        raise ProfileError("fault_params.copy_window_fraction", "must lie in (0, 1]")
    if not 0 <= f.restore_fail_prob <= 1:
        raise ProfileError("fault_params.restore_fail_prob", "must lie in [0, 1]")
    r = p.remap
    bits = p.row_bits
    if r.rcd_mask is not None and not 0 <= r.rcd_mask < n:
        raise ProfileError("remap.rcd_mask", f"must fit in {bits} row-address bits")
    kind = r.row_scramble.get("kind")
    if kind == "xor_fold":
        src = r.row_scramble.get("source_bit")
        mask = r.row_scramble.get("target_mask")
        if src is None or mask is None or not 0 <= src < bits or not 0 <= mask < n or (mask >> src) & 1:
            raise ProfileError("remap.row_scramble", "xor_fold needs source_bit < row bits and a target_mask excluding it")
        if set(r.row_scramble) - {"kind", "source_bit", "target_mask"}:
            raise ProfileError("remap.row_scramble", "unknown xor_fold keys")
    elif kind != "identity" or len(r.row_scramble) != 1:
        raise ProfileError("remap.row_scramble", f"unsupported scramble {r.row_scramble!r}")
    if sorted(r.dq_permutation) != list(range(w)):
        raise ProfileError("remap.dq_permutation", f"must be a permutation of range({w})")


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ProfileError(path or "profile", "expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ProfileError(path or "profile", f"unknown keys {sorted(unknown)}")
    nested = {"timing": Timing, "fault_params": FaultParams, "remap": Remap}
    kwargs = {}
    for k, v in data.items():
        if cls is DeviceProfile and k in nested:
            v = _build(nested[k], v, k)
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ProfileError(path or "profile", str(exc)) from None


def profile_from_dict(data: dict) -> DeviceProfile:
    return _build(DeviceProfile, data, "").validate()


def load_profile(path) -> DeviceProfile:
    with open(path) as fh:
        return profile_from_dict(json.load(fh))


def save_profile(profile: DeviceProfile, path) -> None:
    with open(path, "w") as fh:
        fh.write(profile.to_json())


# ---------------------------------------------------------------------------
# presets

DDR4_TIMING = Timing(tCK_ns=1.25, tRAS_cycles=28, tRP_cycles=11, tRCD_cycles=11, tREFW_cycles=51_200_000)
HBM2_TIMING = Timing(tCK_ns=2.50, tRAS_cycles=14, tRP_cycles=6, tRCD_cycles=6, tREFW_cycles=12_800_000)

XOR_FOLD = {"kind": "xor_fold", "source_bit": 3, "target_mask": 0b110}


def _dq_shuffle(width: int, seed: int) -> list:
    return [int(i) for i in np.random.default_rng(seed).permutation(width)]


def preset(name: str) -> DeviceProfile:
    width = 64
    if name == "mfrA-2016":
        n = 65536
        return DeviceProfile(
            chip_label=name, num_banks=1, rows_per_bank=n, row_width_bits=width,
            subarray_pattern=[640] * 11 + [576] * 2, bitline_structure=Bitline.OPEN,
            datapath_inversion=True, polarity_rule=PolarityRule.ALL_TRUE,
            coupled_row_stride=n // 2, edge_pair_period=n // 8, serialization_period=8,
            timing=dataclasses.replace(DDR4_TIMING), fault_params=FaultParams(seed=2016),
            remap=Remap(rcd_inverted=True, row_scramble=dict(XOR_FOLD), dq_permutation=_dq_shuffle(width, 16)),
        )
    if name == "mfrA-2018":
        n = 16384
        return DeviceProfile(
            chip_label=name, num_banks=1, rows_per_bank=n, row_width_bits=width,
            subarray_pattern=[832] * 4 + [768], bitline_structure=Bitline.OPEN,
            datapath_inversion=True, polarity_rule=PolarityRule.ALL_TRUE,
            coupled_row_stride=n // 2, edge_pair_period=n // 4, serialization_period=4,
            timing=dataclasses.replace(DDR4_TIMING), fault_params=FaultParams(seed=2018),
            remap=Remap(row_scramble=dict(XOR_FOLD), dq_permutation=_dq_shuffle(width, 18)),
        )
    if name == "mfrB":
        n = 8192
        return DeviceProfile(
            chip_label=name, num_banks=1, rows_per_bank=n, row_width_bits=width,
            subarray_pattern=[688, 688, 672], bitline_structure=Bitline.OPEN,
            datapath_inversion=False, polarity_rule=PolarityRule.ALTERNATING_BY_SUBARRAY,
            coupled_row_stride=None, edge_pair_period=n // 4, serialization_period=2,
            timing=dataclasses.replace(DDR4_TIMING), fault_params=FaultParams(seed=2021),
            remap=Remap(dq_permutation=_dq_shuffle(width, 21)),
        )
    if name == "hbm2":
        n = 8192
        return DeviceProfile(
            chip_label=name, num_banks=1, rows_per_bank=n, row_width_bits=width,
            subarray_pattern=[832] * 4 + [768], bitline_structure=Bitline.OPEN,
            datapath_inversion=True, polarity_rule=PolarityRule.ALL_TRUE,
            coupled_row_stride=n // 2, edge_pair_period=n // 2, serialization_period=2,
            timing=dataclasses.replace(HBM2_TIMING),
            fault_params=FaultParams(seed=2, retention_mean=8e9),
            remap=Remap(),
        )
    raise ProfileError("preset", f"unknown preset {name!r}; choose from {PRESETS}")


PRESETS = ("mfrA-2016", "mfrA-2018", "mfrB", "hbm2")


def random_profile(seed: int, rows_per_bank: Optional[int] = None, rcd_inverted: Optional[bool] = None,
                   row_width_bits: int = 64) -> DeviceProfile:
    """Draw a structurally random but valid profile; identical seeds give identical profiles."""
    rng = np.random.default_rng(seed)
    n = int(rows_per_bank or rng.choice([1024, 2048, 4096, 8192]))
    period = n // int(rng.choice([8, 4, 2]))
    repeats = int(rng.choice([1, 2]))
    total = period // repeats
    count = int(rng.integers(3, max(4, min(9, total // 48))))
    # random composition of `total` into `count` parts, each at least 16 rows
    cuts = np.sort(rng.choice(np.arange(1, total - 16 * count + count), size=count - 1, replace=False))
    parts = np.diff(np.concatenate([[0], cuts, [total - 16 * count + count]])) + 15
    pattern = [int(x) for x in parts]
    assert sum(pattern) == total
    bitline = Bitline.OPEN if rng.random() < 0.8 else Bitline.FOLDED
    if rcd_inverted is None:
        rcd_inverted = bool(rng.random() < 0.5)
    scramble = dict(XOR_FOLD) if n >= 16 and rng.random() < 0.5 else {"kind": "identity"}
    return DeviceProfile(
        chip_label=f"random-{seed}", num_banks=1, rows_per_bank=n, row_width_bits=row_width_bits,
        subarray_pattern=pattern, bitline_structure=bitline,
        datapath_inversion=bool(rng.random() < 0.5),
        polarity_rule=PolarityRule.ALTERNATING_BY_SUBARRAY if rng.random() < 0.5 else PolarityRule.ALL_TRUE,
        coupled_row_stride=n // 2 if rng.random() < 0.5 else None,
        edge_pair_period=period,
        serialization_period=int(rng.choice([2, 4, 8])),
        timing=dataclasses.replace(DDR4_TIMING),
        fault_params=FaultParams(seed=int(rng.integers(0, 2**31))),
        remap=Remap(rcd_inverted=rcd_inverted, row_scramble=scramble,
                    dq_permutation=[int(i) for i in rng.permutation(row_width_bits)]),
    ).validate()
