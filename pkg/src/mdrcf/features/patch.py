from __future__ import annotations

import cv2
import numpy as np

from mdrcf.errors import InvalidParameterError, OutOfFrameError
from mdrcf.types import BoundingBox


def to_float_image(frame: np.ndarray) -> np.ndarray:
    """Convert a uint8 or float frame to float32 in [0, 1]; drops a singleton channel axis."""
    frame = np.asarray(frame)
    if frame.ndim == 3 and frame.shape[2] == 1:
        frame = frame[:, :, 0]
    if frame.dtype == np.uint8:
        return frame.astype(np.float32) / 255.0
    return frame.astype(np.float32, copy=False)


def is_color(image: np.ndarray) -> bool:
    return image.ndim == 3 and image.shape[2] == 3


def crop_replicate(frame: np.ndarray, x0: int, y0: int, w: int, h: int) -> np.ndarray:
    """Crop ``[y0, y0+h) x [x0, x0+w)``; pixels outside the frame repeat the nearest edge."""
    H, W = frame.shape[:2]
    if 0 <= x0 and 0 <= y0 and x0 + w <= W and y0 + h <= H:
        return frame[y0:y0 + h, x0:x0 + w]
    rows = np.clip(np.arange(y0, y0 + h), 0, H - 1)
    cols = np.clip(np.arange(x0, x0 + w), 0, W - 1)
    return frame[np.ix_(rows, cols)]


def resize(image: np.ndarray, size: tuple[int, int], interpolation=cv2.INTER_LINEAR) -> np.ndarray:
    """Resample to ``size=(width, height)``; identity when the size already matches."""
    width, height = size
    if image.shape[1] == width and image.shape[0] == height:
        return image
    return cv2.resize(image, (int(width), int(height)), interpolation=interpolation)


def extract_window(frame, center, window_size, template_size, interpolation=cv2.INTER_LINEAR):
    """Crop a ``window_size=(w, h)`` region centered on ``center`` and resample it."""
    cx, cy = center
    ww = max(1, int(round(window_size[0])))
    wh = max(1, int(round(window_size[1])))
    x0 = int(np.floor(cx - ww / 2.0 + 0.5))
    y0 = int(np.floor(cy - wh / 2.0 + 0.5))
    return resize(crop_replicate(frame, x0, y0, ww, wh), template_size, interpolation)


def extract_patch(frame: np.ndarray, box: BoundingBox, padding: float, template_size: tuple[int, int]) -> np.ndarray:
    """Search-window patch around ``box`` enlarged by ``1 + padding``, resampled to ``template_size``."""
    if padding < 0:
        raise InvalidParameterError(f"padding must be non-negative, got {padding}")
    H, W = frame.shape[:2]
    if box.x >= W or box.y >= H or box.x + box.w <= 0 or box.y + box.h <= 0:
        raise OutOfFrameError(f"box {box.as_tuple()} lies entirely outside the {W}x{H} frame")
    scale = 1.0 + padding
    return extract_window(frame, box.center, (box.w * scale, box.h * scale), template_size)
