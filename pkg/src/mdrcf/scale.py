"""Scale estimation with a 1-D correlation filter over a scale pyramid (DSST style).

The filter is a multi-channel MOSSE filter along the scale axis: every scale
hypothesis contributes one HOG descriptor column, and the response peak over
the ``S`` hypotheses gives the scale change relative to the current estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import cv2
import numpy as np

from mdrcf.core_filter import subpixel_peak
from mdrcf.errors import DimensionError, InvalidParameterError, TrackingError
from mdrcf.features.hog import hog_batch
from mdrcf.features.patch import extract_window

MIN_TARGET_PX = 4.0


@dataclass(frozen=True)
class ScaleState:
    num_scales: int
    scale_step: float
    current_scale: float
    base_size: tuple[float, float]  # target (w, h) in pixels at scale 1
    model_size: tuple[int, int]  # (w, h) every scale patch is resampled to
    min_scale: float
    max_scale: float
    learning_rate: float = 0.025
    lam: float = 1e-2
    label_sigma: float = 1.0
    cell_size: int = 4
    interpolate: bool = False
    num: np.ndarray | None = None
    den: np.ndarray | None = None

    def __post_init__(self):
        if self.num_scales < 1 or self.num_scales % 2 == 0:
            raise InvalidParameterError(f"number of scales must be odd, got {self.num_scales}")
        if not self.scale_step > 1.0:
            raise InvalidParameterError(f"scale step must exceed 1, got {self.scale_step}")
        if not self.current_scale > 0:
            raise InvalidParameterError("current scale must be positive")

    @property
    def center_index(self) -> int:
        return (self.num_scales - 1) // 2

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(self.num_scales) - self.center_index

    @property
    def factors(self) -> np.ndarray:
        return self.scale_step ** self.exponents

    @property
    def window(self) -> np.ndarray:
        # raised cosine that stays positive at the extreme scales
        n = self.num_scales
        return np.sin(np.pi * (np.arange(n) + 1) / (n + 1)) ** 2

    @property
    def label_spectrum(self) -> np.ndarray:
        y = np.exp(-0.5 * (self.exponents / self.label_sigma) ** 2)
        return np.fft.fft(y)

    @property
    def target_size(self) -> tuple[float, float]:
        return (self.base_size[0] * self.current_scale, self.base_size[1] * self.current_scale)

    @property
    def trained(self) -> bool:
        return self.num is not None


def init_scale_state(frame_shape, box_size, num_scales=17, scale_step=1.02, learning_rate=0.025,
                     lam=1e-2, label_sigma=1.0, max_model_area=512.0, cell_size=4,
                     interpolate=False) -> ScaleState:
    w, h = box_size
    if not (w > 0 and h > 0):
        raise InvalidParameterError(f"degenerate target size {box_size}")
    H, W = frame_shape[:2]
    shrink = min(1.0, np.sqrt(max_model_area / (w * h)))
    mw = max(2 * cell_size, int(round(w * shrink / cell_size)) * cell_size)
    mh = max(2 * cell_size, int(round(h * shrink / cell_size)) * cell_size)
    min_scale = MIN_TARGET_PX / min(w, h)
    max_scale = max(min(W / w, H / h), min_scale)
    return ScaleState(num_scales, scale_step, 1.0, (float(w), float(h)), (mw, mh), min_scale, max_scale,
                      learning_rate, lam, label_sigma, cell_size, interpolate)


def scale_sample(frame: np.ndarray, center, state: ScaleState) -> np.ndarray:
    """``d x S`` matrix of windowed HOG descriptors, one column per scale hypothesis."""
    tw, th = state.target_size
    if not (tw > 0 and th > 0):
        raise InvalidParameterError("degenerate target box")
    patches = []
    for f in state.factors:
        size = (max(1.0, tw * f), max(1.0, th * f))
        shrinking = size[0] > state.model_size[0]
        interp = cv2.INTER_AREA if shrinking else cv2.INTER_LINEAR
        patches.append(extract_window(frame, center, size, state.model_size, interp))
    feats = hog_batch(np.stack(patches), state.cell_size)
    sample = feats.reshape(state.num_scales, -1).T
    return sample * state.window[None, :]


def scale_response(sample: np.ndarray, state: ScaleState) -> np.ndarray:
    if not state.trained:
        raise TrackingError("scale filter has not been trained")
    if sample.shape != state.num.shape:
        raise DimensionError(f"scale sample {sample.shape} does not match filter {state.num.shape}")
    zf = np.fft.fft(sample, axis=1)
    return np.real(np.fft.ifft(np.sum(state.num * zf, axis=0) / (state.den + state.lam)))


def estimate_scale(sample: np.ndarray, state: ScaleState) -> tuple[ScaleState, int]:
    """New state with the current scale moved to the response peak; also returns the peak index."""
    resp = scale_response(sample, state)
    k = int(np.argmax(resp))
    step = float(k - state.center_index)
    if state.interpolate and 0 < k < state.num_scales - 1:
        step += subpixel_peak(resp[k - 1], resp[k], resp[k + 1])
    scale = state.current_scale * state.scale_step**step
    scale = float(np.clip(scale, state.min_scale, state.max_scale))
    return replace(state, current_scale=scale), k


def update_scale_filter(state: ScaleState, sample: np.ndarray) -> ScaleState:
    """Linear-interpolation update of the scale filter; the first call trains from scratch."""
    xf = np.fft.fft(sample, axis=1)
    num = state.label_spectrum[None, :] * np.conj(xf)
    den = np.sum(np.real(xf * np.conj(xf)), axis=0)
    if state.trained:
        lr = state.learning_rate
        if num.shape != state.num.shape:
            raise DimensionError(f"scale sample {sample.shape} does not match filter {state.num.shape}")
        num = (1.0 - lr) * state.num + lr * num
        den = (1.0 - lr) * state.den + lr * den
    return replace(state, num=num, den=den)
