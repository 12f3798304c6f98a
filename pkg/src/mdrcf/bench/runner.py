"""One-pass evaluation over a dataset of sequences and tracker variants."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from mdrcf.bench import metrics
from mdrcf.bench.dataset import ATTRIBUTES, Sequence, load_dataset
from mdrcf.bench.results import read_results, write_curve, write_results, write_table
from mdrcf.tracker import TrackerConfig, run_sequence

log = logging.getLogger(__name__)

SUMMARY_HEADER = ("tracker", "sequences", "frames", "precision@20", "success@0.5", "auc")


@dataclass(frozen=True)
class Job:
    label: str
    sequence: Sequence
    config: TrackerConfig
    out_path: Path


@dataclass
class BenchReport:
    summary: dict  # label -> EvalCurves averaged over sequences
    per_sequence: dict  # label -> {sequence name -> EvalCurves}
    attributes: dict  # label -> {attribute -> mean AUC or None}


def tracker_configs(variants, base: TrackerConfig | None = None, gates=None) -> dict[str, TrackerConfig]:
    """Label -> config. With ``gates`` every variant is run once per gate (``variant+gate``)."""
    base = base or TrackerConfig()
    out = {}
    for v in variants:
        if gates:
            for g in gates:
                out[f"{v}+{g}"] = replace(base, variant=v, gate=g)
        else:
            out[v] = replace(base, variant=v)
    return out


def _run_job(job: Job):
    seq = job.sequence
    records = run_sequence(seq.frames, seq.init_box, job.config)
    write_results(job.out_path, records, job.config.snapshot_hash(), job.label)
    return records


def _evaluate(records, seq: Sequence) -> metrics.EvalCurves:
    return metrics.eval_curves([r.box for r in records], seq.boxes)


def run_bench(dataset, configs: dict[str, TrackerConfig], out_dir, jobs: int = 1,
              results_only: bool = False) -> BenchReport:
    sequences = load_dataset(dataset) if not isinstance(dataset, list) else dataset
    out_dir = Path(out_dir)
    work = []
    for label in sorted(configs):
        (out_dir / label).mkdir(parents=True, exist_ok=True)
        for seq in sequences:
            work.append(Job(label, seq, configs[label], out_dir / label / f"{seq.name}.csv"))

    if results_only:
        all_records = [read_results(j.out_path, j.config.snapshot_hash()) for j in work]
    elif jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            all_records = list(pool.map(_run_job, work))
    else:
        all_records = [_run_job(j) for j in work]

    per_seq: dict = {}
    for job, records in zip(work, all_records):
        per_seq.setdefault(job.label, {})[job.sequence.name] = _evaluate(records, job.sequence)

    summary, attrs = {}, {}
    for label in sorted(per_seq):
        curves = per_seq[label]
        summary[label] = metrics.mean_curves(curves[name] for name in sorted(curves))
        attrs[label] = metrics.aggregate_by_attribute(curves, sequences)

    report = BenchReport(summary, per_seq, attrs)
    write_report(report, out_dir)
    return report


def write_report(report: BenchReport, out_dir) -> None:
    out_dir = Path(out_dir)
    rows = [
        (label, len(report.per_sequence[label]), c.num_frames, c.precision_at_20, c.success_at_05, c.auc)
        for label, c in report.summary.items()
    ]
    write_table(out_dir / "summary.csv", SUMMARY_HEADER, rows)
    write_table(out_dir / "attributes.csv", ("tracker",) + ATTRIBUTES,
                [(label,) + tuple(t[a] for a in ATTRIBUTES) for label, t in report.attributes.items()])
    curve_dir = out_dir / "curves"
    curve_dir.mkdir(exist_ok=True)
    for label, c in report.summary.items():
        write_curve(curve_dir / f"{label}_precision.csv", metrics.PRECISION_THRESHOLDS, c.precision)
        write_curve(curve_dir / f"{label}_success.csv", metrics.SUCCESS_THRESHOLDS, c.success)
