"""Command-line entry point: ``mdrcf track``, ``mdrcf bench`` and small helpers."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from mdrcf.errors import TrackingError
from mdrcf.tracker import GATES, VARIANTS, TrackerConfig, run_sequence
from mdrcf.types import BoundingBox

log = logging.getLogger("mdrcf")


def _variant(name: str) -> str:
    if name not in VARIANTS:
        raise argparse.ArgumentTypeError(f"unknown variant {name!r}; valid variants: {', '.join(VARIANTS)}")
    return name


def _variant_list(text: str) -> list[str]:
    names = [v.strip() for v in text.split(",") if v.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty variant list")
    return [_variant(v) for v in names]


def _gate_list(text: str) -> list[str]:
    names = [g.strip() for g in text.split(",") if g.strip()]
    bad = [g for g in names if g not in GATES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown gate(s) {bad}; valid gates: {', '.join(GATES)}")
    return names


def _box(text: str) -> BoundingBox:
    try:
        x, y, w, h = (float(v) for v in text.replace(" ", "").split(","))
        return BoundingBox(x, y, w, h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected x,y,w,h with positive size, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdrcf", description="Correlation-filter tracker with a drift-aware update gate.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="track one sequence and write per-frame records")
    p.add_argument("--seq", required=True, type=Path, help="sequence directory (img/ + groundtruth_rect.txt)")
    p.add_argument("--config", type=Path, help="JSON file with tracker parameters")
    p.add_argument("--variant", type=_variant, default="MDRCF", help=f"one of {', '.join(VARIANTS)}")
    p.add_argument("--out", required=True, type=Path, help="result file to write")
    init = p.add_mutually_exclusive_group()
    init.add_argument("--gt-init", action="store_true", help="initialize from the first ground-truth box (default)")
    init.add_argument("--init", type=_box, help="initial box x,y,w,h in 0-based pixels")

    b = sub.add_parser("bench", help="one-pass evaluation over a dataset")
    b.add_argument("--dataset", required=True, type=Path, help="directory of sequence directories")
    b.add_argument("--variants", required=True, type=_variant_list, help="comma-separated variant names")
    b.add_argument("--out", required=True, type=Path, help="output directory")
    b.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    b.add_argument("--config", type=Path, help="JSON file with base tracker parameters")
    b.add_argument("--gates", type=_gate_list, help="run every variant once per gate, e.g. psr,apce,psmd")
    b.add_argument("--psr-threshold", type=float, help="PSR gate threshold")
    b.add_argument("--apce-threshold", type=float, help="APCE gate threshold")
    b.add_argument("--results-only", action="store_true", help="recompute metrics from stored result files")

    s = sub.add_parser("synth", help="write a small synthetic dataset")
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--frames", type=int, default=30)

    c = sub.add_parser("cn-table", help="write the color-name lookup table to a binary file")
    c.add_argument("--out", required=True, type=Path)
    return parser


def _load_config(path) -> TrackerConfig:
    return TrackerConfig.from_json(path) if path else TrackerConfig()


def cmd_track(args) -> int:
    from mdrcf.bench.dataset import load_sequence
    from mdrcf.bench.results import write_results

    config = replace(_load_config(args.config), variant=args.variant)
    seq = load_sequence(args.seq)
    init_box = args.init or seq.init_box
    records = run_sequence(seq.frames, init_box, config)
    write_results(args.out, records, config.snapshot_hash(), args.variant)
    print(f"{seq.name}: {len(records)} frames -> {args.out}")
    return 0


def cmd_bench(args) -> int:
    from mdrcf.bench.dataset import load_dataset
    from mdrcf.bench.runner import run_bench, tracker_configs

    if args.jobs < 1:
        raise ValueError("--jobs must be at least 1")
    base = _load_config(args.config)
    overrides = {}
    if args.psr_threshold is not None:
        overrides["psr_threshold"] = args.psr_threshold
    if args.apce_threshold is not None:
        overrides["apce_threshold"] = args.apce_threshold
    base = replace(base, **overrides)
    sequences = load_dataset(args.dataset)
    configs = tracker_configs(args.variants, base, args.gates)
    report = run_bench(sequences, configs, args.out, jobs=args.jobs, results_only=args.results_only)
    print(f"{'tracker':<32} {'prec@20':>8} {'succ@0.5':>9} {'auc':>7}")
    for label, c in report.summary.items():
        print(f"{label:<32} {c.precision_at_20:8.3f} {c.success_at_05:9.3f} {c.auc:7.3f}")
    return 0


def cmd_synth(args) -> int:
    from mdrcf.synthetic import write_toy_dataset

    write_toy_dataset(args.out, args.frames)
    print(f"wrote {args.out}")
    return 0


def cmd_cn_table(args) -> int:
    from mdrcf.features.color import synthesize_cn_table, write_cn_table

    write_cn_table(args.out, synthesize_cn_table())
    print(f"wrote {args.out}")
    return 0


COMMANDS = {"track": cmd_track, "bench": cmd_bench, "synth": cmd_synth, "cn-table": cmd_cn_table}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad flags
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (TrackingError, ValueError, OSError) as exc:
        print(f"mdrcf {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
