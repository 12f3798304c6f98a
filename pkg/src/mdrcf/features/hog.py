"""31-channel HOG (Felzenszwalb layout).

Channels 0-17 are contrast-sensitive orientations over 360 degrees, 18-26 are
contrast-insensitive orientations over 180 degrees and 27-30 are the four
block-normalization (texture) energies.

Orientations are soft-binned between the two nearest bin centers; pixels are
hard-assigned to cells. Block energies at the border use edge-replicated
cells so the output keeps one entry per cell.
"""
from __future__ import annotations

import numpy as np

from mdrcf.errors import DimensionError, InvalidParameterError
from mdrcf.features.patch import resize

NUM_ORIENTATIONS = 9
NUM_CHANNELS = 3 * NUM_ORIENTATIONS + 4
_TRUNCATE = 0.2
_TEXTURE_SCALE = 0.2357
_EPS = 1e-4


def _gradients(imgs: np.ndarray):
    # imgs: (N, H, W, C); dominant channel per pixel by gradient magnitude
    p = np.pad(imgs, ((0, 0), (1, 1), (1, 1), (0, 0)), mode="edge")
    gx = p[:, 1:-1, 2:, :] - p[:, 1:-1, :-2, :]
    gy = p[:, 2:, 1:-1, :] - p[:, :-2, 1:-1, :]
    mag2 = gx * gx + gy * gy
    if imgs.shape[-1] > 1:
        best = np.argmax(mag2, axis=-1)[..., None]
        gx = np.take_along_axis(gx, best, axis=-1)
        gy = np.take_along_axis(gy, best, axis=-1)
        mag2 = np.take_along_axis(mag2, best, axis=-1)
    return gx[..., 0], gy[..., 0], np.sqrt(mag2[..., 0])


def _orientation_histograms(imgs: np.ndarray, cell_size: int) -> np.ndarray:
    n, H, W = imgs.shape[:3]
    gx, gy, mag = _gradients(imgs)
    nbins = 2 * NUM_ORIENTATIONS
    theta = np.arctan2(gy, gx) % (2.0 * np.pi)
    pos = theta * (nbins / (2.0 * np.pi))
    lo = np.floor(pos).astype(np.intp)
    frac = pos - lo
    lo %= nbins
    hi = (lo + 1) % nbins

    flat = np.zeros((mag.size, nbins))
    idx = np.arange(mag.size)
    flat[idx, lo.ravel()] = (mag * (1.0 - frac)).ravel()
    flat[idx, hi.ravel()] += (mag * frac).ravel()
    hc, wc = H // cell_size, W // cell_size
    hist = flat.reshape(n, hc, cell_size, wc, cell_size, nbins).sum(axis=(2, 4))
    return hist


def hog_batch(imgs: np.ndarray, cell_size: int = 4) -> np.ndarray:
    """HOG for a stack ``(N, H, W)`` or ``(N, H, W, C)`` of equally sized patches.

    Returns ``(N, H // cell_size, W // cell_size, 31)``.
    """
    imgs = np.asarray(imgs, dtype=np.float64)
    if imgs.ndim == 3:
        imgs = imgs[..., None]
    if imgs.ndim != 4:
        raise DimensionError(f"expected (N, H, W[, C]) patches, got {imgs.shape}")
    if cell_size < 1:
        raise InvalidParameterError(f"cell size must be positive, got {cell_size}")
    H, W = imgs.shape[1:3]
    if H < cell_size or W < cell_size:
        raise DimensionError(f"patch {W}x{H} is smaller than one {cell_size}px cell")

    h18 = _orientation_histograms(imgs, cell_size)
    h9 = h18[..., :NUM_ORIENTATIONS] + h18[..., NUM_ORIENTATIONS:]
    energy = np.sum(h9 * h9, axis=-1)
    e = np.pad(energy, ((0, 0), (1, 1), (1, 1)), mode="edge")
    # 2x2 block sums; block (i, j) covers padded cells (i..i+1, j..j+1)
    blocks = e[:, :-1, :-1] + e[:, 1:, :-1] + e[:, :-1, 1:] + e[:, 1:, 1:]
    hc, wc = energy.shape[1:]
    norms = [
        1.0 / np.sqrt(blocks[:, di:di + hc, dj:dj + wc] + _EPS)
        for di in (0, 1) for dj in (0, 1)
    ]

    out = np.zeros(h18.shape[:3] + (NUM_CHANNELS,))
    for k, nk in enumerate(norms):
        t18 = np.minimum(h18 * nk[..., None], _TRUNCATE)
        t9 = np.minimum(h9 * nk[..., None], _TRUNCATE)
        out[..., :18] += t18
        out[..., 18:27] += t9
        out[..., 27 + k] = _TEXTURE_SCALE * t18.sum(axis=-1)
    out[..., :27] *= 0.5
    return out


def hog(patch: np.ndarray, cell_size: int = 4) -> np.ndarray:
    """HOG feature map ``(H // cell, W // cell, 31)`` of a gray ``(H, W)`` or color ``(H, W, 3)`` patch.

    Patches whose sides are not multiples of ``cell_size`` are resampled to
    the nearest multiple first.
    """
    patch = np.asarray(patch)
    H, W = patch.shape[:2]
    if H < cell_size or W < cell_size:
        raise DimensionError(f"patch {W}x{H} is smaller than one {cell_size}px cell")
    if H % cell_size or W % cell_size:
        Ht = max(cell_size, int(round(H / cell_size)) * cell_size)
        Wt = max(cell_size, int(round(W / cell_size)) * cell_size)
        patch = resize(patch.astype(np.float32), (Wt, Ht))
    return hog_batch(patch[None], cell_size)[0]
