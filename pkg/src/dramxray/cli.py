"""dramxray command-line front end.

Exit status: 0 clean, 1 when a report carries a CONFLICT, an anomaly or a --verify
mismatch, 2 for bad input (profile, stage selection, trace).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .addressmap import AddressInterpretation
from .device import create_device
from .engine import ProtocolError, TraceError, bits_to_hex, dump_rows, parse_trace, replay
from .inference.pipeline import STAGES, StageError, resolve_stages
from .profile import PRESETS, ProfileError, load_profile, preset, random_profile
from .report import sweep_csv
from .runner import RunOptions, run_many, verify

log = logging.getLogger("dramxray")

EXIT_OK, EXIT_FINDINGS, EXIT_INPUT = 0, 1, 2


def log_level(env=os.environ) -> int:
    """Level named by XRAY_LOG (DEBUG, INFO, WARNING, ...); WARNING when unset or unknown."""
    level = getattr(logging, env.get("XRAY_LOG", "WARNING").upper(), None)
    return level if isinstance(level, int) else logging.WARNING


def setup_logging() -> None:
    logging.basicConfig(level=log_level(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def resolve_profile(spec: str):
    """A profile path, or a preset name when no such file exists."""
    if Path(spec).exists():
        return load_profile(spec)
    if spec in PRESETS:
        return preset(spec)
    raise ProfileError("profile", f"no profile file or preset named {spec!r}")


def cmd_gen_profile(args) -> int:
    if args.randomize:
        profile = random_profile(args.seed, rows_per_bank=args.rows, rcd_inverted=args.rcd_inverted)
    elif args.preset:
        profile = preset(args.preset)
        if args.seed is not None:
            profile = profile.with_seed(args.seed)
    else:
        print("gen-profile: give a preset name or --randomize", file=sys.stderr)
        return EXIT_INPUT
    text = profile.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def write_report(out: Path, report) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    for table in report.sweeps:
        (out / f"sweep_{table['pattern']}_{table['axis']}.csv").write_text(sweep_csv(table))


def cmd_run(args) -> int:
    stages = resolve_stages(args.stage or ["all"])
    profiles = [resolve_profile(p) for p in args.profile]
    labels = [p.chip_label for p in profiles]
    if len(set(labels)) != len(labels):
        raise ProfileError("chip_label", "profiles in one run need distinct chip labels")
    interp = AddressInterpretation(apply_rcd_inversion=not args.naive_rcd,
                                   apply_row_scramble=not args.naive_scramble,
                                   apply_dq_permutation=not args.naive_dq)
    options = RunOptions(stages=stages, interp=interp, workers=args.workers, seed=args.seed)
    reports = run_many(profiles, options)
    status = EXIT_OK
    for profile, report in zip(profiles, reports):
        write_report(Path(args.out) / profile.chip_label, report)
        verdicts = [b.cross_check.get("verdict") for b in report.banks if b.cross_check]
        if "CONFLICT" in verdicts:
            print(f"{profile.chip_label}: cross-check CONFLICT", file=sys.stderr)
            status = EXIT_FINDINGS
        for a in report.anomalies:
            print(f"{profile.chip_label}: anomaly: {a}", file=sys.stderr)
            status = EXIT_FINDINGS
        if args.verify:
            if args.seed is not None:
                profile = profile.with_seed(args.seed)
            diffs = verify(profile, report) if {"structure", "patterns"} <= set(stages) else \
                ["--verify needs the structure and patterns stages"]
            for d in diffs:
                print(f"{profile.chip_label}: verify: {d}", file=sys.stderr)
                status = EXIT_FINDINGS
            if not diffs:
                print(f"{profile.chip_label}: verify OK")
    return status


def parse_rows(text: str) -> list:
    rows = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            rows.extend(range(int(lo), int(hi) + 1))
        elif part:
            rows.append(int(part))
    return rows


def cmd_replay(args) -> int:
    profile = resolve_profile(args.profile)
    device = create_device(profile)
    with open(args.trace) as fh:
        cmds = parse_trace(fh, profile.row_width_bits)
    for cycle, bank, row, bits in replay(device, cmds):
        print(f"RD {cycle} {bank} {row} {bits_to_hex(bits)}")
    rows = parse_rows(args.rows) if args.rows else []
    for row, bits in dump_rows(device, args.bank, rows).items():
        print(f"ROW {args.bank} {row} {bits_to_hex(bits)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dramxray", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-profile", help="write a preset or randomized device profile")
    g.add_argument("preset", nargs="?", choices=PRESETS)
    g.add_argument("--randomize", action="store_true")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--rows", type=int, default=None, help="rows per bank for --randomize")
    g.add_argument("--rcd-inverted", dest="rcd_inverted", action="store_true", default=None)
    g.add_argument("--out", help="output file (default stdout)")
    g.set_defaults(func=cmd_gen_profile)

    r = sub.add_parser("run", help="reverse-engineer one or more simulated chips")
    r.add_argument("--profile", action="append", required=True, help="profile file or preset name (repeatable)")
    r.add_argument("--stage", action="append", help=f"one or more of {', '.join(STAGES)}, or all")
    r.add_argument("--naive-rcd", action="store_true", help="ignore the RCD row-address inversion")
    r.add_argument("--naive-dq", action="store_true", help="ignore the DQ bit permutation")
    r.add_argument("--naive-scramble", action="store_true", help="ignore the row-address scramble")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--seed", type=int, default=None, help="override every profile's fault seed")
    r.add_argument("--out", default="xray-out")
    r.add_argument("--verify", action="store_true", help="compare structure against ground truth")
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="replay a command trace and dump rows")
    p.add_argument("trace")
    p.add_argument("--profile", required=True)
    p.add_argument("--rows", default="", help="host rows to dump, e.g. 0,5,10-12")
    p.add_argument("--bank", type=int, default=0)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ProfileError, StageError, TraceError, OSError, ValueError) as exc:
        print(f"dramxray: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ProtocolError as exc:
        print(f"dramxray: protocol error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
