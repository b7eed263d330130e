"""Experiment orchestration: profiles to devices to reports, optionally across worker processes.

Every unit of work (one bank of one profile, one variation chip) gets its own Device built
from the profile, so results do not depend on which worker ran it or in what order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .addressmap import CORRECT, AddressInterpretation
from .device import create_device
from .inference import pipeline
from .inference import sweeps as sw
from .inference.probe import Probe
from .port import CommandPort
from .profile import DeviceProfile
from .report import InferenceReport, structure_diff
from .truth import ground_truth_report

log = logging.getLogger(__name__)

VARIATION_CHIPS = 16
VARIATION_SEED_OFFSET = 1000


@dataclass
class RunOptions:
    stages: list = field(default_factory=lambda: ["all"])
    interp: AddressInterpretation = CORRECT
    workers: int = 1
    seed: Optional[int] = None
    variation_chips: int = VARIATION_CHIPS
    variation_step: int = 16
    sweep_rows: int = 2048


def open_port(profile: DeviceProfile) -> CommandPort:
    return CommandPort(create_device(profile))


def variation_profiles(profile: DeviceProfile, chips: int) -> list:
    base = profile.fault_params.seed + VARIATION_SEED_OFFSET
    return [profile.with_seed(base + i).replace(chip_label=f"{profile.chip_label}#chip{i}")
            for i in range(chips)]


def chip_job(args) -> dict:
    profile, structure, patterns, step = args
    probe = Probe(open_port(profile), CORRECT, 0)
    return sw.chip_stats(probe, patterns, structure, step=step)


def bank_job(args) -> InferenceReport:
    profile, bank, stages, interp, sweep_rows = args
    stages = [s for s in pipeline.resolve_stages(stages) if s != "variation"]
    return pipeline.run_pipeline(open_port(profile), stages, interp, bank, sweep_rows=sweep_rows)


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


def run_profile(profile: DeviceProfile, options: RunOptions = RunOptions()) -> InferenceReport:
    if options.seed is not None:
        profile = profile.with_seed(options.seed)
    stages = pipeline.resolve_stages(options.stages)
    jobs = [(profile, b, stages, options.interp, options.sweep_rows) for b in range(profile.num_banks)]
    parts = _map(bank_job, jobs, options.workers)
    report = parts[0]
    for extra in parts[1:]:
        report.banks.extend(extra.banks)
        report.sweeps.extend(extra.sweeps)
        report.anomalies.extend(f"bank {extra.banks[0].bank}: {a}" for a in extra.anomalies)
    if "variation" in stages:
        b = report.banks[0]
        structure = pipeline.structure_of(b)
        chips = variation_profiles(profile, options.variation_chips)
        log.info("%s: variation over %d chips", profile.chip_label, len(chips))
        stats = _map(chip_job, [(c, structure, b.aggressor_patterns, options.variation_step) for c in chips],
                     options.workers)
        report.variation = sw.variation_summary(stats)
    return report


def run_many(profiles: list, options: RunOptions = RunOptions()) -> list:
    """Reports for several profiles, in input order. Workers shard across profiles."""
    if options.workers <= 1 or len(profiles) <= 1:
        return [run_profile(p, options) for p in profiles]
    inner = RunOptions(**{**options.__dict__, "workers": 1})
    with ProcessPoolExecutor(max_workers=min(options.workers, len(profiles))) as pool:
        return list(pool.map(run_profile, profiles, [inner] * len(profiles)))


def verify(profile: DeviceProfile, report: InferenceReport) -> list:
    return structure_diff(report, ground_truth_report(profile))
