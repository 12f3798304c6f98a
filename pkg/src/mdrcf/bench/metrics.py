"""One-pass evaluation metrics.

Precision counts frames with center error <= threshold; success counts frames
with IoU strictly greater than the threshold, so success at IoU 1.0 is always
0 and a perfect run scores AUC = 20/21 on the 21-point grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mdrcf.bench.dataset import ATTRIBUTES
from mdrcf.errors import InvalidParameterError

PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
SUCCESS_THRESHOLDS = np.round(np.arange(0, 21) * 0.05, 10)
PRECISION_AT = 20.0
SUCCESS_AT = 0.5


def center_error(pred, gt) -> float:
    (px, py), (gx, gy) = pred.center, gt.center
    return float(np.hypot(px - gx, py - gy))


def iou(pred, gt) -> float:
    ix = max(0.0, min(pred.x + pred.w, gt.x + gt.w) - max(pred.x, gt.x))
    iy = max(0.0, min(pred.y + pred.h, gt.y + gt.h) - max(pred.y, gt.y))
    inter = ix * iy
    union = pred.w * pred.h + gt.w * gt.h - inter
    return float(inter / union) if union > 0 else 0.0


@dataclass(frozen=True)
class EvalCurves:
    precision: np.ndarray
    success: np.ndarray
    precision_at_20: float
    success_at_05: float
    auc: float
    num_frames: int


def curves_from_errors(errors, overlaps) -> EvalCurves:
    errors = np.asarray(errors, dtype=np.float64)
    overlaps = np.asarray(overlaps, dtype=np.float64)
    if errors.size == 0:
        raise InvalidParameterError("no annotated frames to evaluate")
    precision = np.array([np.mean(errors <= t) for t in PRECISION_THRESHOLDS])
    success = np.array([np.mean(overlaps > t) for t in SUCCESS_THRESHOLDS])
    return EvalCurves(
        precision, success,
        float(np.mean(errors <= PRECISION_AT)),
        float(np.mean(overlaps > SUCCESS_AT)),
        float(np.mean(success)),
        int(errors.size),
    )


def eval_curves(preds, gts) -> EvalCurves:
    """Curves over frames whose ground truth is present (``None`` entries are skipped)."""
    if len(preds) != len(gts):
        raise InvalidParameterError(f"{len(preds)} predictions vs {len(gts)} ground-truth boxes")
    pairs = [(p, g) for p, g in zip(preds, gts) if g is not None]
    return curves_from_errors([center_error(p, g) for p, g in pairs], [iou(p, g) for p, g in pairs])


def mean_curves(curves) -> EvalCurves:
    """Per-sequence average, reduced in the given order."""
    curves = list(curves)
    if not curves:
        raise InvalidParameterError("nothing to average")
    n = len(curves)
    return EvalCurves(
        sum(c.precision for c in curves) / n,
        sum(c.success for c in curves) / n,
        sum(c.precision_at_20 for c in curves) / n,
        sum(c.success_at_05 for c in curves) / n,
        sum(c.auc for c in curves) / n,
        sum(c.num_frames for c in curves),
    )


def aggregate_by_attribute(results: dict, sequences) -> dict:
    """Mean AUC per attribute; attributes with no tagged sequence map to ``None``."""
    table = {a: [] for a in ATTRIBUTES}
    for seq in sorted(sequences, key=lambda s: s.name):
        for tag in seq.attributes:
            if tag not in table:
                raise InvalidParameterError(f"{seq.name}: unknown attribute {tag!r}")
            table[tag].append(results[seq.name].auc)
    return {a: (sum(v) / len(v) if v else None) for a, v in table.items()}
