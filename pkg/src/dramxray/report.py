"""InferenceReport schema shared by the inference engine and the validation harness."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from typing import Optional

SCHEMA_VERSION = 1

# fields compared between inference and ground truth
STRUCTURAL_FIELDS = (
    "boundaries",
    "subarray_sizes",
    "bitline",
    "cross_copy_inverted",
    "polarity",
    "coupled_row_stride",
    "edge_period",
    "edge_pairs",
    "serialization_period",
    "aggressor_patterns",
)


@dataclass
class BankReport:
    bank: int = 0
    boundaries: list = field(default_factory=list)
    subarray_sizes: list = field(default_factory=list)
    bitline: Optional[str] = None
    cross_copy_inverted: Optional[bool] = None
    polarity: Optional[list] = None
    coupled_row_stride: Optional[int] = None
    edge_period: Optional[int] = None
    edge_pairs: list = field(default_factory=list)
    serialization_period: Optional[int] = None
    aggressor_patterns: Optional[dict] = None
    techniques: dict = field(default_factory=dict)
    cross_check: dict = field(default_factory=dict)
    calibration: dict = field(default_factory=dict)
    undecided_rows: list = field(default_factory=list)

    def structure(self) -> dict:
        out = {}
        for name in STRUCTURAL_FIELDS:
            value = getattr(self, name)
            if name == "aggressor_patterns" and value is not None:
                value = {k: value[k] for k in ("EFF_CHARGE", "EFF_DISCHARGE")}
            out[name] = value
        return out


@dataclass
class InferenceReport:
    chip_label: str = ""
    rows_per_bank: int = 0
    row_width: int = 0
    interpretation: dict = field(default_factory=dict)
    banks: list = field(default_factory=list)
    sweeps: list = field(default_factory=list)
    variation: Optional[dict] = None
    misconception: Optional[dict] = None
    anomalies: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "InferenceReport":
        data = dict(data)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {data.get('schema_version')!r}")
        data["banks"] = [BankReport(**b) for b in data.get("banks", [])]
        return cls(**data)

    @property
    def consistent(self) -> bool:
        return all(b.cross_check.get("verdict", "CONSISTENT") == "CONSISTENT" for b in self.banks)


def structure_diff(found: InferenceReport, truth: InferenceReport) -> list:
    """Human-readable list of structural mismatches (empty when they agree)."""
    diffs = []
    if len(found.banks) != len(truth.banks):
        return [f"bank count {len(found.banks)} != {len(truth.banks)}"]
    for fb, tb in zip(found.banks, truth.banks):
        f, t = fb.structure(), tb.structure()
        for name in STRUCTURAL_FIELDS:
            if _normalise(f[name]) != _normalise(t[name]):
                diffs.append(f"bank {fb.bank} {name}: found {_short(f[name])} expected {_short(t[name])}")
    return diffs


def _normalise(value):
    return json.loads(json.dumps(value))


def _short(value, limit: int = 160) -> str:
    text = json.dumps(value)
    return text if len(text) <= limit else text[:limit] + "..."


def sweep_csv(table: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["axis_value", "relative_ber"])
    for x, rel in zip(table["grid"], table["relative_ber"]):
        writer.writerow([x, "" if rel is None else repr(float(rel))])
    return buf.getvalue()
