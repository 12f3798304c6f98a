"""Color features: color names, intensity channels and color histograms."""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import cv2
import numpy as np

from mdrcf.errors import ColorspaceError, DimensionError, InvalidParameterError
from mdrcf.features.patch import is_color

COLOR_NAMES = (
    "black", "blue", "brown", "grey", "green", "orange",
    "pink", "purple", "red", "white", "yellow",
)
CN_TABLE_ROWS = 32 * 32 * 32
CN_TABLE_ENV = "MDRCF_CN_TABLE"

# sRGB prototypes used to synthesize the default lookup table
_PROTOTYPES = np.array([
    (0, 0, 0), (30, 60, 200), (120, 70, 30), (128, 128, 128), (40, 160, 40),
    (255, 140, 0), (255, 160, 190), (130, 40, 150), (210, 30, 30),
    (255, 255, 255), (240, 230, 40),
], dtype=np.float32)
_PROTOTYPE_SPREAD = 18.0  # Lab units

NUM_INTENSITY_BINS = 6


def _to_lab(rgb_u8: np.ndarray) -> np.ndarray:
    img = (rgb_u8.reshape(-1, 1, 3).astype(np.float32) / 255.0)
    return cv2.cvtColor(img, cv2.COLOR_RGB2Lab).reshape(-1, 3).astype(np.float64)


def synthesize_cn_table() -> np.ndarray:
    """Soft RGB -> 11 color-name table from Lab distances to fixed prototypes.

    Rows follow the standard layout ``R//8 + 32*(G//8) + 1024*(B//8)`` and are
    evaluated at the low corner of each 8-level bin, so RGB (0, 0, 0) maps to
    its own row exactly.
    """
    levels = np.arange(32) * 8
    b, g, r = np.meshgrid(levels, levels, levels, indexing="ij")
    rgb = np.stack([r.ravel(), g.ravel(), b.ravel()], axis=1)
    lab = _to_lab(rgb)
    protos = _to_lab(_PROTOTYPES)
    d2 = ((lab[:, None, :] - protos[None, :, :]) ** 2).sum(-1)
    logits = -d2 / (2.0 * _PROTOTYPE_SPREAD**2)
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    return p.astype(np.float32)


def write_cn_table(path, table: np.ndarray) -> None:
    table = np.asarray(table, dtype="<f4")
    if table.shape != (CN_TABLE_ROWS, len(COLOR_NAMES)):
        raise DimensionError(f"CN table must be {CN_TABLE_ROWS}x11, got {table.shape}")
    table.tofile(path)


def read_cn_table(path) -> np.ndarray:
    """Load a little-endian float32 table of 32768 x 11 probabilities."""
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != CN_TABLE_ROWS * len(COLOR_NAMES):
        raise DimensionError(f"{path}: expected {CN_TABLE_ROWS * 11} floats, found {raw.size}")
    return raw.reshape(CN_TABLE_ROWS, len(COLOR_NAMES)).astype(np.float32)


@lru_cache(maxsize=4)
def load_cn_table(path: str | None = None) -> np.ndarray:
    """The CN table at ``path``, else ``$MDRCF_CN_TABLE``, else the synthesized table."""
    path = path or os.environ.get(CN_TABLE_ENV)
    table = read_cn_table(path) if path else synthesize_cn_table()
    table.setflags(write=False)
    return table


def _cell_mean(pixels: np.ndarray, cell_size: int) -> np.ndarray:
    H, W, C = pixels.shape
    hc, wc = H // cell_size, W // cell_size
    if hc == 0 or wc == 0:
        raise DimensionError(f"patch {W}x{H} is smaller than one {cell_size}px cell")
    pixels = pixels[:hc * cell_size, :wc * cell_size]
    return pixels.reshape(hc, cell_size, wc, cell_size, C).mean(axis=(1, 3))


def cn_indices(patch: np.ndarray) -> np.ndarray:
    rgb = np.clip(np.rint(patch * 255.0), 0, 255).astype(np.int32) // 8
    return rgb[..., 0] + 32 * rgb[..., 1] + 1024 * rgb[..., 2]


def color_name_probabilities(patch: np.ndarray, table: np.ndarray | None = None) -> np.ndarray:
    """Per-pixel 11-vector of color-name probabilities for an RGB patch in [0, 1]."""
    if not is_color(patch):
        raise ColorspaceError("color names need a 3-channel RGB patch; use intensity_channels for gray input")
    table = load_cn_table() if table is None else table
    return table[cn_indices(patch)]


def color_names(patch: np.ndarray, cell_size: int = 4, table: np.ndarray | None = None) -> np.ndarray:
    """Cell-averaged color-name map ``(H // cell, W // cell, 11)``."""
    return _cell_mean(color_name_probabilities(patch, table).astype(np.float64), cell_size)


def intensity_probabilities(patch: np.ndarray) -> np.ndarray:
    """Soft assignment of each intensity to 6 evenly spaced bin centers on [0, 1]."""
    pos = np.clip(patch, 0.0, 1.0) * (NUM_INTENSITY_BINS - 1)
    lo = np.minimum(np.floor(pos).astype(np.intp), NUM_INTENSITY_BINS - 2)
    frac = pos - lo
    out = np.zeros(patch.shape + (NUM_INTENSITY_BINS,))
    np.put_along_axis(out, lo[..., None], (1.0 - frac)[..., None], axis=-1)
    np.put_along_axis(out, (lo + 1)[..., None], frac[..., None], axis=-1)
    return out


def intensity_channels(patch: np.ndarray, cell_size: int = 4) -> np.ndarray:
    """6-channel intensity map for grayscale patches; each cell sums to 1."""
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 2:
        raise ColorspaceError("intensity channels need a single-channel patch")
    cells = _cell_mean(intensity_probabilities(patch), cell_size)
    return cells / cells.sum(axis=-1, keepdims=True)


# -- color histograms ---------------------------------------------------------

def histogram_bins(patch: np.ndarray, bins: int = 32) -> np.ndarray:
    """Joint histogram bin index per pixel (``bins**C`` bins for C channels)."""
    q = np.minimum((np.clip(patch, 0.0, 1.0) * bins).astype(np.intp), bins - 1)
    if q.ndim == 2:
        return q
    return q[..., 0] + bins * q[..., 1] + bins * bins * q[..., 2]


def color_histogram(patch: np.ndarray, mask: np.ndarray | None = None, bins: int = 32) -> np.ndarray:
    """Normalized joint color histogram over the pixels where ``mask`` is true."""
    idx = histogram_bins(patch, bins)
    nbins = bins ** (3 if is_color(patch) else 1)
    if mask is not None:
        idx = idx[mask]
    counts = np.bincount(idx.ravel(), minlength=nbins).astype(np.float64)
    total = counts.sum()
    if total == 0:
        raise InvalidParameterError("histogram region contains no pixels")
    return counts / total


@dataclass(frozen=True)
class ColorProbabilityMap:
    alpha: np.ndarray

    @property
    def n_pixels(self) -> int:
        return int(self.alpha.size)

    @property
    def mean(self) -> float:
        return float(self.alpha.mean())


def foreground_probability(search_region: np.ndarray, fg_hist: np.ndarray, bg_hist: np.ndarray,
                           bins: int = 32) -> ColorProbabilityMap:
    """Per-pixel ``fg / (fg + bg)`` of the pixel's histogram bin; 0/0 reads as 0.5."""
    fg_hist = np.asarray(fg_hist, dtype=np.float64)
    bg_hist = np.asarray(bg_hist, dtype=np.float64)
    if fg_hist.shape != bg_hist.shape:
        raise DimensionError("foreground and background histograms differ in size")
    if fg_hist.sum() <= 0 or bg_hist.sum() <= 0:
        raise InvalidParameterError("foreground/background histogram is empty")
    idx = histogram_bins(search_region, bins)
    fg = fg_hist[idx]
    bg = bg_hist[idx]
    den = fg + bg
    alpha = np.full(idx.shape, 0.5)
    np.divide(fg, den, out=alpha, where=den > 0)
    return ColorProbabilityMap(alpha)
