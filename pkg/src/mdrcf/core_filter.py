"""Frequency-domain kernelized ridge regression.

Arrays are laid out as ``(H, W)`` or ``(H, W, L)`` (rows, columns, layers);
cell coordinates are always passed as ``(w, h)`` i.e. ``(column, row)``.

DFT convention: unnormalized forward transform, ``1/(W*H)`` scaled inverse
(numpy's default), so ``sum(v**2) == sum(abs(fft2(v))**2) / (W*H)``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from mdrcf.errors import DegenerateTrainingError, DimensionError, InvalidParameterError

_DIV_EPS = 1e-12


def fft2(x: np.ndarray) -> np.ndarray:
    return np.fft.fft2(x, axes=(0, 1))


def ifft2(xf: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(xf, axes=(0, 1))


def _as_3d(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3:
        raise DimensionError(f"expected a (H, W[, L]) array, got shape {x.shape}")
    if x.size == 0:
        raise DimensionError("feature map is empty")
    return x


def gaussian_label(width: int, height: int, sigma: float, peak: tuple[int, int]) -> np.ndarray:
    """Gaussian regression target with circular distance to ``peak=(w, h)``."""
    if width < 1 or height < 1:
        raise InvalidParameterError(f"label size must be positive, got {width}x{height}")
    if not sigma > 0:
        raise InvalidParameterError(f"label sigma must be positive, got {sigma}")
    pw, ph = peak
    if not (0 <= pw < width and 0 <= ph < height):
        raise InvalidParameterError(f"peak {peak} outside {width}x{height} grid")
    dw = np.abs(np.arange(width) - pw)
    dw = np.minimum(dw, width - dw)
    dh = np.abs(np.arange(height) - ph)
    dh = np.minimum(dh, height - dh)
    d2 = dh[:, None] ** 2 + dw[None, :] ** 2
    return np.exp(-d2 / (2.0 * sigma**2))


def hann_1d(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidParameterError(f"window length must be positive, got {n}")
    if n == 1:
        return np.ones(1)
    i = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * i / (n - 1)))


def hann_window(width: int, height: int) -> np.ndarray:
    """Separable raised-cosine window of shape ``(height, width)``."""
    return np.outer(hann_1d(height), hann_1d(width))


def gaussian_kernel_correlation(x: np.ndarray, z: np.ndarray, kernel_sigma: float) -> np.ndarray:
    """Spectrum of the Gaussian kernel between ``x`` and every cyclic shift of ``z``.

    In the spatial domain ``k(t) = exp(-||x - z(. + t)||^2 / (sigma^2 * n))``
    with ``n = W*H*L``.
    """
    x = _as_3d(x)
    z = _as_3d(z)
    if x.shape != z.shape:
        raise DimensionError(f"kernel inputs differ in shape: {x.shape} vs {z.shape}")
    if not kernel_sigma > 0:
        raise InvalidParameterError(f"kernel sigma must be positive, got {kernel_sigma}")
    cross = np.real(ifft2(np.sum(np.conj(fft2(x)) * fft2(z), axis=2, keepdims=True)))[:, :, 0]
    d2 = np.sum(x * x) + np.sum(z * z) - 2.0 * cross
    np.maximum(d2, 0.0, out=d2)
    k = np.exp(-d2 / (kernel_sigma**2 * x.size))
    return fft2(k)


def linear_kernel_correlation(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Spectrum of ``c(t) = sum_p <x(p), z(p + t)>`` (no normalization)."""
    x = _as_3d(x)
    z = _as_3d(z)
    if x.shape != z.shape:
        raise DimensionError(f"kernel inputs differ in shape: {x.shape} vs {z.shape}")
    return np.sum(np.conj(fft2(x)) * fft2(z), axis=2)


def train_filter(kf: np.ndarray, yf: np.ndarray, lam: float) -> np.ndarray:
    """Closed-form dual solution ``yf / (kf + lam)``."""
    kf = np.asarray(kf)
    yf = np.asarray(yf)
    if kf.shape != yf.shape:
        raise DimensionError(f"kernel spectrum {kf.shape} and label spectrum {yf.shape} differ")
    if lam < 0:
        raise InvalidParameterError(f"lambda must be non-negative, got {lam}")
    denom = kf + lam
    if np.any(np.abs(denom) < _DIV_EPS):
        raise DegenerateTrainingError("kernel spectrum + lambda vanishes at some frequency")
    return yf / denom


def ridge_closed_form(X: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Primal ridge solution ``(X^T X + lam I)^-1 X^T y``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
    if lam < 0:
        raise InvalidParameterError(f"lambda must be non-negative, got {lam}")
    A = X.T @ X + lam * np.eye(X.shape[1])
    try:
        return np.linalg.solve(A, X.T @ y)
    except np.linalg.LinAlgError as exc:
        raise DegenerateTrainingError("ridge system is singular") from exc


@dataclass(frozen=True)
class FilterModel:
    """A trained translation filter.

    ``alphaf`` is the dual filter spectrum; ``template`` is the feature map the
    kernel is evaluated against at detection time. Both are interpolated with
    the same learning rate.
    """

    alphaf: np.ndarray
    template: np.ndarray
    kernel_sigma: float
    lam: float
    eta: float
    frame_index: int = 1

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError(f"learning rate must lie in [0, 1], got {self.eta}")
        if self.frame_index < 1:
            raise InvalidParameterError("frame_index starts at 1")

    @property
    def shape(self) -> tuple[int, int]:
        return self.alphaf.shape[:2]


def new_model(template, yf, kernel_sigma=0.5, lam=1e-4, eta=0.02) -> FilterModel:
    template = _as_3d(template)
    kf = gaussian_kernel_correlation(template, template, kernel_sigma)
    return FilterModel(train_filter(kf, yf, lam), template, kernel_sigma, lam, eta)


def update_model(model: FilterModel, alphaf_new: np.ndarray, template_new: np.ndarray | None = None,
                 t: int | None = None) -> FilterModel:
    """Linear-interpolation update for frame ``t`` (default: the frame after
    ``model.frame_index``). At ``t == 1`` the new filter replaces the model.
    Returns a new model; ``model`` is untouched.
    """
    if alphaf_new.shape != model.alphaf.shape:
        raise DimensionError(f"filter shape {alphaf_new.shape} != model shape {model.alphaf.shape}")
    template_new = model.template if template_new is None else _as_3d(template_new)
    if template_new.shape != model.template.shape:
        raise DimensionError(f"template shape {template_new.shape} != {model.template.shape}")
    t = model.frame_index + 1 if t is None else t
    if t == 1:
        return replace(model, alphaf=np.array(alphaf_new), template=np.array(template_new), frame_index=1)
    eta = model.eta
    alphaf = (1.0 - eta) * model.alphaf + eta * alphaf_new
    template = (1.0 - eta) * model.template + eta * template_new
    return replace(model, alphaf=alphaf, template=template, frame_index=t)


def detect_response(model: FilterModel, kf: np.ndarray) -> np.ndarray:
    """Real spatial response ``ifft(alphaf * kf)``."""
    if kf.shape != model.alphaf.shape:
        raise DimensionError(f"kernel spectrum {kf.shape} != model {model.alphaf.shape}")
    return np.real(ifft2(model.alphaf * kf))


def detect(model: FilterModel, z: np.ndarray) -> np.ndarray:
    z = _as_3d(z)
    kf = gaussian_kernel_correlation(model.template, z, model.kernel_sigma)
    return detect_response(model, kf)


def subpixel_peak(left: float, center: float, right: float) -> float:
    """Offset of the vertex of the parabola through three samples, in [-0.5, 0.5]."""
    divisor = 2.0 * center - left - right
    if abs(divisor) < 1e-12:
        return 0.0
    return float(np.clip(0.5 * (right - left) / divisor, -0.5, 0.5))
