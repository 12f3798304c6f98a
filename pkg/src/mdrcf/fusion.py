"""Merging per-feature response maps."""
from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from mdrcf.errors import DimensionError, InvalidParameterError

LAMBDA_CEILING = 0.5 - 1e-9
STAPLE_MERGE_FACTOR = 0.3


@dataclass(frozen=True)
class MergeFactor:
    lambda_hat: float
    branch: str  # "low_alpha" | "high_alpha" | "clamped" | "fixed"
    mean_alpha: float
    raw: float


def resample_to(layer: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Bilinear resampling of an ``(H, W)`` layer onto ``shape=(H, W)``."""
    layer = np.asarray(layer, dtype=np.float64)
    if layer.shape == tuple(shape):
        return layer
    return cv2.resize(layer, (shape[1], shape[0]), interpolation=cv2.INTER_LINEAR)


def fixed_merge(r_cf: np.ndarray, r_ch: np.ndarray, lambda_hat: float) -> np.ndarray:
    """``(1 - lambda_hat) * r_cf + lambda_hat * r_ch`` on ``r_cf``'s grid."""
    if not 0.0 <= lambda_hat <= 1.0:
        raise InvalidParameterError(f"merge factor must lie in [0, 1], got {lambda_hat}")
    r_cf = np.asarray(r_cf, dtype=np.float64)
    r_ch = resample_to(r_ch, r_cf.shape)
    if r_ch.shape != r_cf.shape:
        raise DimensionError(f"cannot merge {r_ch.shape} into {r_cf.shape}")
    return (1.0 - lambda_hat) * r_cf + lambda_hat * r_ch


def eam_factor(alpha, h_hat: float = 0.38, phi: float = 1.09, epsilon: float = 2.0) -> MergeFactor:
    """Exponential adaptive merge factor from the mean foreground probability.

    ``alpha`` is a ColorProbabilityMap, an array of per-pixel probabilities or
    an already averaged scalar. Below ``h_hat`` the factor is ``exp(a) - phi``,
    otherwise ``exp(-a) / epsilon``; the result is clamped into ``[0, 0.5)``.
    """
    values = getattr(alpha, "alpha", alpha)
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise InvalidParameterError("empty foreground probability map")
    mean_alpha = float(values.mean())
    if mean_alpha < h_hat:
        raw, branch = math.exp(mean_alpha) - phi, "low_alpha"
    else:
        raw, branch = math.exp(-mean_alpha) / epsilon, "high_alpha"
    lam = min(max(raw, 0.0), LAMBDA_CEILING)
    if lam != raw:
        branch = "clamped"
    return MergeFactor(lam, branch, mean_alpha, raw)


def merge_tracker_responses(responses, weights=None) -> np.ndarray:
    """Weighted mean ``sum(w_i r_i) / sum(w_i)`` on the first response's grid."""
    responses = [np.asarray(r, dtype=np.float64) for r in responses]
    if not responses:
        raise InvalidParameterError("no responses to merge")
    weights = np.ones(len(responses)) if weights is None else np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(responses),):
        raise InvalidParameterError(f"{len(responses)} responses but {weights.size} weights")
    if np.any(weights < 0) or weights.sum() <= 0:
        raise InvalidParameterError("weights must be non-negative with a positive sum")
    if len(responses) == 1:
        return responses[0]
    shape = responses[0].shape
    out = np.zeros(shape)
    for r, w in zip(responses, weights):
        r = resample_to(r, shape)
        if r.shape != shape:
            raise DimensionError(f"cannot merge {r.shape} into {shape}")
        out += w * r
    return out / weights.sum()
