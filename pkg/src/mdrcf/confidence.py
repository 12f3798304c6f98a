"""Primary/secondary response peaks, PSMD and the adaptive update gate.

All argmax scans break ties row-major (smallest row, then smallest column).
Positions are ``(w, h)`` cell coordinates; layers are ``(H, W)`` arrays and a
multi-layer response is ``(H, W, L)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mdrcf.errors import InvalidParameterError, NoSecondaryPeakError

PSMD_MAX = 1e6
DENOMINATOR_EPS = 1e-12
MASK_MIN, MASK_MAX = 2, 15
MU_RANGE = (1.0, 11.0)
NU_RANGE = (0.0, 5.0)


@dataclass(frozen=True)
class PeakReport:
    layer: int
    primary: tuple[int, int]
    v_p: float
    secondary: tuple[int, int] | None
    v_s: float
    half_width: int


@dataclass(frozen=True)
class ConfidenceReport:
    v_m: float
    v_p: float
    v_s: float
    psmd: float
    primary: tuple[int, int]
    secondary: tuple[int, int] | None
    degenerate: bool = False
    update_flag: bool = True


@dataclass(frozen=True)
class AdaptiveThresholds:
    t_psmd: float
    t_max: float
    mu: float
    nu: float


def _check_mu_nu(mu: float, nu: float) -> None:
    if not MU_RANGE[0] <= mu <= MU_RANGE[1]:
        raise InvalidParameterError(f"mu must lie in [1, 11], got {mu}")
    if not NU_RANGE[0] < nu <= NU_RANGE[1]:
        raise InvalidParameterError(f"nu must lie in (0, 5], got {nu}")


def _as_layers(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.ndim == 2:
        r = r[:, :, None]
    if r.ndim != 3 or r.size == 0:
        raise InvalidParameterError(f"response must be a non-empty (H, W[, L]) array, got {r.shape}")
    return r


def max_response_layer(r: np.ndarray) -> int:
    r = _as_layers(r)
    return int(np.argmax(r.max(axis=(0, 1))))


def _argmax_rowmajor(layer: np.ndarray) -> tuple[int, int]:
    h, w = np.unravel_index(int(np.argmax(layer)), layer.shape)
    return int(w), int(h)


def primary_peak(layer: np.ndarray) -> tuple[tuple[int, int], float]:
    layer = np.asarray(layer, dtype=np.float64)
    if layer.size == 0:
        raise InvalidParameterError("empty response layer")
    pos = _argmax_rowmajor(layer)
    return pos, float(layer[pos[1], pos[0]])


def build_mask(width: int, height: int, primary: tuple[int, int], half_width: int) -> np.ndarray:
    """Binary ``(H, W)`` mask: 0 within Chebyshev distance ``half_width`` of ``primary``, else 1."""
    if not MASK_MIN <= half_width <= MASK_MAX:
        raise InvalidParameterError(f"mask half-width must lie in [2, 15], got {half_width}")
    pw, ph = primary
    if not (0 <= pw < width and 0 <= ph < height):
        raise InvalidParameterError(f"primary peak {primary} outside {width}x{height} map")
    mask = np.ones((height, width), dtype=np.uint8)
    mask[max(0, ph - half_width):ph + half_width + 1, max(0, pw - half_width):pw + half_width + 1] = 0
    return mask


def secondary_peak(layer: np.ndarray, mask: np.ndarray) -> tuple[tuple[int, int], float]:
    """Largest value outside the masked square; raises if the mask covers everything."""
    layer = np.asarray(layer, dtype=np.float64)
    mask = np.asarray(mask).astype(bool)
    if mask.shape != layer.shape:
        raise InvalidParameterError(f"mask {mask.shape} does not match layer {layer.shape}")
    if not mask.any():
        raise NoSecondaryPeakError("mask covers the whole response map")
    # scan only unmasked cells: r_l * mask could promote a masked 0 over negative values
    masked = np.where(mask, layer, -np.inf)
    pos = _argmax_rowmajor(masked)
    return pos, float(layer[pos[1], pos[0]])


def layer_mean(layer: np.ndarray) -> float:
    return float(np.mean(np.asarray(layer, dtype=np.float64)))


def psmd(v_p: float, v_s: float, v_m: float) -> float:
    """Primary/secondary peak mean-difference ratio; capped at ``PSMD_MAX`` when degenerate."""
    return psmd_checked(v_p, v_s, v_m)[0]


def psmd_checked(v_p: float, v_s: float, v_m: float) -> tuple[float, bool]:
    den = abs(v_s - v_m)
    if den < DENOMINATOR_EPS:
        return PSMD_MAX, True
    return min((v_p - v_m) / den, PSMD_MAX), False


def detect_peaks(r: np.ndarray, half_width: int = 10) -> PeakReport:
    layers = _as_layers(r)
    l = max_response_layer(layers)
    layer = layers[:, :, l]
    pos, v_p = primary_peak(layer)
    mask = build_mask(layer.shape[1], layer.shape[0], pos, half_width)
    try:
        spos, v_s = secondary_peak(layer, mask)
    except NoSecondaryPeakError:
        spos, v_s = None, 0.0
    return PeakReport(l, pos, v_p, spos, v_s, half_width)


def confidence(r: np.ndarray, half_width: int = 10) -> ConfidenceReport:
    """Peak analysis and PSMD score of a response map (flag defaults to true)."""
    layers = _as_layers(r)
    peaks = detect_peaks(layers, half_width)
    v_m = layer_mean(layers[:, :, peaks.layer])
    score, degenerate = psmd_checked(peaks.v_p, peaks.v_s, v_m)
    return ConfidenceReport(v_m, peaks.v_p, peaks.v_s, score, peaks.primary, peaks.secondary, degenerate)


def adaptive_thresholds(frame2: ConfidenceReport, mu: float = 1.06, nu: float = 0.94) -> AdaptiveThresholds:
    """Thresholds from second-frame statistics: ``PSMD / mu`` and ``V_p / nu``."""
    _check_mu_nu(mu, nu)
    return AdaptiveThresholds(frame2.psmd / mu, frame2.v_p / nu, mu, nu)


def update_gate(report: ConfidenceReport, thresholds: AdaptiveThresholds) -> bool:
    return bool(report.psmd >= thresholds.t_psmd and report.v_p >= thresholds.t_max)


# -- baseline confidence scores ----------------------------------------------

def psr(layer: np.ndarray, exclusion: int = 11) -> float:
    """Peak-to-sidelobe ratio.

    The sidelobe is the layer minus an ``exclusion x exclusion`` window centered
    on the peak (``exclusion=0`` keeps every cell). Population std; a flat
    sidelobe yields ``PSMD_MAX``.
    """
    layer = np.asarray(layer, dtype=np.float64)
    if exclusion < 0:
        raise InvalidParameterError("exclusion window must be non-negative")
    (pw, ph), peak = primary_peak(layer)
    keep = np.ones(layer.shape, dtype=bool)
    if exclusion > 0:
        half = exclusion // 2
        keep[max(0, ph - half):ph + half + 1, max(0, pw - half):pw + half + 1] = False
    side = layer[keep]
    if side.size == 0:
        raise InvalidParameterError(f"layer {layer.shape} is not larger than the exclusion window")
    std = side.std()
    if std < DENOMINATOR_EPS:
        return PSMD_MAX
    return float((peak - side.mean()) / std)


def apce(r: np.ndarray) -> float:
    """Average peak-to-correlation energy; 0 for a constant map."""
    r = np.asarray(r, dtype=np.float64)
    if r.size == 0:
        raise InvalidParameterError("empty response map")
    fmax, fmin = r.max(), r.min()
    energy = np.mean((r - fmin) ** 2)
    if energy <= 0:
        return 0.0
    return float((fmax - fmin) ** 2 / energy)
