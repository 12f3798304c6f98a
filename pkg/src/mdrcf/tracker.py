"""Tracking pipelines.

``MDRCF`` runs a HOG filter and a color-name filter (6-bin intensity channels
for grayscale input), merges their responses, estimates scale with a 1-D scale
filter and only updates the models when the merged response passes the PSMD
gate. The Staple-style variants merge a HOG filter with a color-histogram
response through a fixed or exponential adaptive merge factor.

Frame 1 trains the models. Frame 2 always updates them and fixes the adaptive
thresholds; the gate is consulted from frame 3 on.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace

import cv2
import numpy as np

from mdrcf import confidence as conf
from mdrcf import core_filter as cf
from mdrcf import scale as sc
from mdrcf.errors import DimensionError, InvalidParameterError, TrackingError
from mdrcf.features.color import (
    color_histogram,
    color_names,
    foreground_probability,
    intensity_channels,
    load_cn_table,
)
from mdrcf.features.hog import hog
from mdrcf.features.patch import extract_window, is_color, to_float_image
from mdrcf.fusion import eam_factor, fixed_merge, merge_tracker_responses
from mdrcf.types import BoundingBox

log = logging.getLogger(__name__)

VARIANTS = ("MDRCF", "EAMStaple", "EAMStaple_PSMD", "Staple_baseline", "always_update_ablation")
GATES = ("psmd", "psr", "apce", "none")
_DEFAULT_GATE = {
    "MDRCF": "psmd",
    "always_update_ablation": "none",
    "Staple_baseline": "none",
    "EAMStaple": "none",
    "EAMStaple_PSMD": "psmd",
}
_STAPLE_VARIANTS = ("EAMStaple", "EAMStaple_PSMD", "Staple_baseline")


@dataclass(frozen=True)
class TrackerConfig:
    variant: str = "MDRCF"
    # peak mask / adaptive gate / adaptive merge
    mask_half_width: int = 10
    mu: float = 1.06
    nu: float = 0.94
    h_hat: float = 0.38
    phi: float = 1.09
    epsilon: float = 2.0
    # translation filter
    eta: float = 0.02
    reg_lambda: float = 1e-4
    kernel_sigma: float = 0.5
    label_sigma_factor: float = 0.1
    padding: float = 1.5
    cell_size: int = 4
    model_area: float = 150.0**2
    hog_weight: float = 0.5
    color_weight: float = 0.5
    # scale filter
    num_scales: int = 17
    scale_step: float = 1.02
    scale_learning_rate: float = 0.025
    scale_label_sigma: float = 1.0
    scale_lambda: float = 1e-2
    scale_model_max_area: float = 512.0
    scale_interpolate: bool = False
    # color histogram learner (Staple variants)
    hist_bins: int = 32
    hist_learning_rate: float = 0.04
    staple_merge_factor: float = 0.3
    merge_factor_override: float | None = None
    # gate selection; None picks the variant's default
    gate: str | None = None
    psr_threshold: float = 7.0
    psr_exclusion: int = 11
    apce_threshold: float = 20.0
    cn_table_path: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"unknown variant {self.variant!r}; valid: {', '.join(VARIANTS)}")
        if self.gate is not None and self.gate not in GATES:
            raise InvalidParameterError(f"unknown gate {self.gate!r}; valid: {', '.join(GATES)}")
        if not conf.MASK_MIN <= self.mask_half_width <= conf.MASK_MAX:
            raise InvalidParameterError(f"N must lie in [2, 15], got {self.mask_half_width}")
        conf._check_mu_nu(self.mu, self.nu)
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError(f"eta must lie in [0, 1], got {self.eta}")
        if self.reg_lambda < 0 or self.kernel_sigma <= 0 or self.padding < 0 or self.cell_size < 1:
            raise InvalidParameterError("lambda >= 0, kernel_sigma > 0, padding >= 0 and cell_size >= 1 required")

    @property
    def effective_gate(self) -> str:
        return self.gate or _DEFAULT_GATE[self.variant]

    @property
    def is_staple(self) -> bool:
        return self.variant in _STAPLE_VARIANTS

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrackerConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "TrackerConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def snapshot_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class FrameRecord:
    frame: int
    x: float
    y: float
    w: float
    h: float
    scale: float
    v_m: float | None = None
    v_p: float | None = None
    v_s: float | None = None
    psmd: float | None = None
    update_flag: bool = True
    lambda_hat: float | None = None
    branch: str = ""

    @property
    def box(self) -> BoundingBox:
        return BoundingBox(self.x, self.y, self.w, self.h)


@dataclass
class TrackerState:
    frame_index: int
    frame_shape: tuple
    center: tuple[float, float]
    target_size: tuple[float, float]
    template_size: tuple[int, int]
    resize_ratio: float
    cos_window: np.ndarray
    yf: np.ndarray
    filters: dict = field(default_factory=dict)
    scale: sc.ScaleState | None = None
    thresholds: conf.AdaptiveThresholds | None = None
    fg_hist: np.ndarray | None = None
    bg_hist: np.ndarray | None = None

    @property
    def grid(self) -> tuple[int, int]:
        return self.cos_window.shape[1], self.cos_window.shape[0]

    @property
    def current_scale(self) -> float:
        return self.scale.current_scale if self.scale is not None else 1.0

    def window_size(self) -> tuple[float, float]:
        f = self.resize_ratio * self.current_scale
        return (self.template_size[0] * f, self.template_size[1] * f)

    def box(self) -> BoundingBox:
        s = self.current_scale
        return BoundingBox.from_center(*self.center, self.target_size[0] * s, self.target_size[1] * s)


def _template_geometry(target_size, padding, model_area, cell_size):
    ww = target_size[0] * (1.0 + padding)
    wh = target_size[1] * (1.0 + padding)
    ratio = np.sqrt(ww * wh / model_area)
    tw = max(2 * cell_size, int(round(ww / ratio / cell_size)) * cell_size)
    th = max(2 * cell_size, int(round(wh / ratio / cell_size)) * cell_size)
    return (tw, th), float(ratio)


class Tracker:
    """One tracker instance per sequence."""

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config or TrackerConfig()
        self.state: TrackerState | None = None
        self._cn_table = None

    # -- features -----------------------------------------------------------

    def _channel_names(self, color: bool) -> tuple[str, ...]:
        if self.config.is_staple:
            return ("hog",)
        return ("hog", "cn" if color else "ic")

    def _features(self, patch: np.ndarray) -> dict:
        cell = self.config.cell_size
        win = self.state.cos_window[:, :, None]
        out = {}
        for name in self._channel_names(is_color(patch)):
            if name == "hog":
                f = hog(patch, cell)
            elif name == "cn":
                f = color_names(patch, cell, self._cn_table)
            else:
                f = intensity_channels(patch, cell)
            out[name] = f * win
        return out

    def _train_filters(self, feats: dict) -> dict:
        c = self.config
        alphas = {}
        for name, x in feats.items():
            kf = cf.gaussian_kernel_correlation(x, x, c.kernel_sigma)
            alphas[name] = cf.train_filter(kf, self.state.yf, c.reg_lambda)
        return alphas

    def _target_mask(self) -> np.ndarray:
        tw, th = self.state.template_size
        fw = self.state.target_size[0] / (self.state.resize_ratio)
        fh = self.state.target_size[1] / (self.state.resize_ratio)
        x0 = int(round((tw - fw) / 2.0))
        y0 = int(round((th - fh) / 2.0))
        mask = np.zeros((th, tw), dtype=bool)
        mask[max(0, y0):min(th, y0 + int(round(fh))), max(0, x0):min(tw, x0 + int(round(fw)))] = True
        return mask

    def _histograms(self, patch):
        mask = self._target_mask()
        bins = self.config.hist_bins
        return color_histogram(patch, mask, bins), color_histogram(patch, ~mask, bins)

    def _color_response(self, patch) -> tuple[np.ndarray, object]:
        s = self.state
        alpha = foreground_probability(patch, s.fg_hist, s.bg_hist, self.config.hist_bins)
        cell = self.config.cell_size
        gw, gh = s.grid
        cells = alpha.alpha[:gh * cell, :gw * cell].reshape(gh, cell, gw, cell).mean(axis=(1, 3))
        kw = max(1, int(round(gw / (1.0 + self.config.padding))))
        kh = max(1, int(round(gh / (1.0 + self.config.padding))))
        resp = cv2.boxFilter(cells, -1, (kw, kh), normalize=True, borderType=cv2.BORDER_CONSTANT)
        return resp, alpha

    # -- public API -----------------------------------------------------------

    def init(self, frame: np.ndarray, box: BoundingBox) -> FrameRecord:
        c = self.config
        frame = to_float_image(frame)
        H, W = frame.shape[:2]
        if box.x >= W or box.y >= H or box.x + box.w <= 0 or box.y + box.h <= 0:
            raise InvalidParameterError(f"initial box {box.as_tuple()} lies outside the {W}x{H} frame")
        if is_color(frame) and not c.is_staple:
            self._cn_table = load_cn_table(c.cn_table_path)

        template_size, ratio = _template_geometry((box.w, box.h), c.padding, c.model_area, c.cell_size)
        gw, gh = template_size[0] // c.cell_size, template_size[1] // c.cell_size
        sigma = c.label_sigma_factor * np.sqrt(gw * gh)
        y = cf.gaussian_label(gw, gh, sigma, (gw // 2, gh // 2))
        self.state = TrackerState(
            frame_index=1,
            frame_shape=frame.shape,
            center=box.center,
            target_size=(float(box.w), float(box.h)),
            template_size=template_size,
            resize_ratio=ratio,
            cos_window=cf.hann_window(gw, gh),
            yf=cf.fft2(y),
        )
        s = self.state
        patch = extract_window(frame, s.center, s.window_size(), template_size)
        feats = self._features(patch)
        for name, alphaf in self._train_filters(feats).items():
            s.filters[name] = cf.FilterModel(alphaf, feats[name], c.kernel_sigma, c.reg_lambda, c.eta)
        if c.num_scales > 1:
            s.scale = sc.init_scale_state(
                frame.shape, s.target_size, c.num_scales, c.scale_step, c.scale_learning_rate,
                c.scale_lambda, c.scale_label_sigma, c.scale_model_max_area, c.cell_size, c.scale_interpolate)
            s.scale = sc.update_scale_filter(s.scale, sc.scale_sample(frame, s.center, s.scale))
        if c.is_staple:
            s.fg_hist, s.bg_hist = self._histograms(patch)
        b = s.box()
        return FrameRecord(1, b.x, b.y, b.w, b.h, s.current_scale)

    def track(self, frame: np.ndarray) -> FrameRecord:
        if self.state is None:
            raise TrackingError("tracker is not initialized; call init() first")
        c = self.config
        s = self.state
        frame = to_float_image(frame)
        if frame.shape != s.frame_shape:
            raise DimensionError(f"frame shape {frame.shape} differs from the first frame {s.frame_shape}")
        t = s.frame_index + 1

        # translation
        patch = extract_window(frame, s.center, s.window_size(), s.template_size)
        feats = self._features(patch)
        responses = {name: cf.detect(s.filters[name], z) for name, z in feats.items()}
        lam_hat = None
        if c.is_staple:
            r_ch, alpha = self._color_response(patch)
            if c.merge_factor_override is not None:
                lam_hat, branch = c.merge_factor_override, "fixed"
            elif c.variant == "Staple_baseline":
                lam_hat, branch = c.staple_merge_factor, "fixed"
            else:
                mf = eam_factor(alpha, c.h_hat, c.phi, c.epsilon)
                lam_hat, branch = mf.lambda_hat, mf.branch
            response = fixed_merge(responses["hog"], r_ch, lam_hat)
        else:
            branch = ""
            response = merge_tracker_responses(list(responses.values()), [c.hog_weight, c.color_weight])

        report = conf.confidence(response, c.mask_half_width)
        gw, gh = s.grid
        pw, ph = report.primary
        dw = pw - gw // 2 + cf.subpixel_peak(response[ph, (pw - 1) % gw], response[ph, pw], response[ph, (pw + 1) % gw])
        dh = ph - gh // 2 + cf.subpixel_peak(response[(ph - 1) % gh, pw], response[ph, pw], response[(ph + 1) % gh, pw])
        px = c.cell_size * s.resize_ratio * s.current_scale
        s.center = (s.center[0] + dw * px, s.center[1] + dh * px)

        # scale
        if s.scale is not None:
            s.scale, _ = sc.estimate_scale(sc.scale_sample(frame, s.center, s.scale), s.scale)

        # gate
        gate = c.effective_gate
        if t == 2:
            s.thresholds = conf.adaptive_thresholds(report, c.mu, c.nu)
            flag = True
        elif gate == "psmd":
            flag = conf.update_gate(report, s.thresholds)
        elif gate == "psr":
            flag = conf.psr(response, c.psr_exclusion) >= c.psr_threshold
        elif gate == "apce":
            flag = conf.apce(response) >= c.apce_threshold
        else:
            flag = True

        if flag:
            self._update_models(frame, t)
        s.frame_index = t
        b = s.box()
        return FrameRecord(t, b.x, b.y, b.w, b.h, s.current_scale, report.v_m, report.v_p, report.v_s,
                           report.psmd, bool(flag), lam_hat, branch)

    def _update_models(self, frame, t):
        s = self.state
        patch = extract_window(frame, s.center, s.window_size(), s.template_size)
        feats = self._features(patch)
        for name, alphaf in self._train_filters(feats).items():
            s.filters[name] = cf.update_model(s.filters[name], alphaf, feats[name], t=t)
        if s.scale is not None:
            s.scale = sc.update_scale_filter(s.scale, sc.scale_sample(frame, s.center, s.scale))
        if self.config.is_staple:
            fg, bg = self._histograms(patch)
            lr = self.config.hist_learning_rate
            s.fg_hist = (1.0 - lr) * s.fg_hist + lr * fg
            s.bg_hist = (1.0 - lr) * s.bg_hist + lr * bg


def run_sequence(frames, init_box: BoundingBox, config: TrackerConfig | None = None) -> list[FrameRecord]:
    """Track ``init_box`` through ``frames`` (arrays or image paths); one record per frame."""
    from mdrcf.bench.dataset import read_frame

    tracker = Tracker(config)
    records = []
    for i, frame in enumerate(frames):
        if isinstance(frame, (str, bytes)) or hasattr(frame, "__fspath__"):
            frame = read_frame(frame)
        if i == 0:
            records.append(tracker.init(frame, init_box))
            records[0] = replace(records[0], x=init_box.x, y=init_box.y, w=init_box.w, h=init_box.h)
        else:
            records.append(tracker.track(frame))
    if not records:
        raise InvalidParameterError("cannot track an empty sequence")
    return records
