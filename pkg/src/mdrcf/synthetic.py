"""Synthetic sequences with analytic ground truth, used by tests and the demo dataset."""
from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from mdrcf.bench.dataset import format_groundtruth
from mdrcf.types import BoundingBox


def smooth_texture(size, seed=0, blur=3.0, color=True) -> np.ndarray:
    """Random blurred texture in [0, 1] of ``size=(w, h)``."""
    rng = np.random.default_rng(seed)
    w, h = size
    shape = (h, w, 3) if color else (h, w)
    tex = rng.random(shape).astype(np.float32)
    tex = cv2.GaussianBlur(tex, (0, 0), blur)
    lo, hi = tex.min(), tex.max()
    return (tex - lo) / max(hi - lo, 1e-6)


def _paste(frame, patch, x, y):
    """Paste ``patch`` with top-left at integer ``(x, y)``, clipped to the frame."""
    H, W = frame.shape[:2]
    h, w = patch.shape[:2]
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(W, x + w), min(H, y + h)
    if x1 > x0 and y1 > y0:
        frame[y0:y1, x0:x1] = patch[y0 - y:y1 - y, x0 - x:x1 - x]


def translating_square(num_frames=50, frame_size=(320, 240), side=40, step=(2, 0), start=(40, 100)):
    """White square on black moving ``step`` pixels per frame."""
    W, H = frame_size
    frames, boxes = [], []
    for t in range(num_frames):
        x = start[0] + step[0] * t
        y = start[1] + step[1] * t
        f = np.zeros((H, W, 3), np.float32)
        f[y:y + side, x:x + side] = 1.0
        frames.append(f)
        boxes.append(BoundingBox(float(x), float(y), float(side), float(side)))
    return frames, boxes


def zoom_sequence(num_frames=30, frame_size=(320, 240), side=40, factor=1.02, seed=1):
    """Textured square growing by ``factor`` per frame, centered on a textured background."""
    W, H = frame_size
    background = 0.5 * smooth_texture((W, H), seed=seed + 100, blur=4.0)
    target = smooth_texture((4 * side, 4 * side), seed=seed, blur=6.0)
    cx, cy = W / 2.0, H / 2.0
    frames, boxes = [], []
    for t in range(num_frames):
        s = side * factor**t
        n = int(round(s))
        patch = cv2.resize(target, (n, n), interpolation=cv2.INTER_AREA)
        f = background.copy()
        x, y = int(round(cx - n / 2.0)), int(round(cy - n / 2.0))
        _paste(f, patch, x, y)
        frames.append(f)
        boxes.append(BoundingBox(float(x), float(y), float(n), float(n)))
    return frames, boxes


def occlusion_sequence(num_frames=50, frame_size=(320, 240), side=40, occluded=(20, 30), seed=2,
                       step=(1, 0), start=(120, 100), margin=0, static_occluder=False):
    """Textured target drifting on a textured background; a solid occluder of a
    distinct color covers it completely on the 1-based frames ``occluded[0]..occluded[1]``.

    The occluder either follows the target (box grown by ``margin`` px) or, with
    ``static_occluder``, is one fixed block spanning the target's path while hidden.
    """
    W, H = frame_size
    background = 0.4 * smooth_texture((W, H), seed=seed + 100, blur=3.0)
    target = smooth_texture((side, side), seed=seed, blur=2.0)
    color = np.array([0.1, 0.9, 0.2], np.float32)
    t0, t1 = occluded[0] - 1, occluded[1] - 1
    xs = [start[0] + step[0] * t for t in (t0, t1)]
    ys = [start[1] + step[1] * t for t in (t0, t1)]
    block = (min(xs) - margin, min(ys) - margin, max(xs) + side + margin, max(ys) + side + margin)
    frames, boxes = [], []
    for t in range(num_frames):
        x = start[0] + step[0] * t
        y = start[1] + step[1] * t
        f = background.copy()
        _paste(f, target, x, y)
        if t0 <= t <= t1:
            if static_occluder:
                f[block[1]:block[3], block[0]:block[2]] = color
            else:
                f[y - margin:y + side + margin, x - margin:x + side + margin] = color
        frames.append(f)
        boxes.append(BoundingBox(float(x), float(y), float(side), float(side)))
    return frames, boxes


def textured_frames(num_frames=20, frame_size=(640, 360), side=60, seed=3):
    """Textured target translating diagonally on a textured background (throughput runs)."""
    W, H = frame_size
    background = 0.5 * smooth_texture((W, H), seed=seed + 100)
    target = smooth_texture((side, side), seed=seed)
    frames, boxes = [], []
    for t in range(num_frames):
        x, y = 200 + 2 * t, 120 + t
        f = background.copy()
        _paste(f, target, x, y)
        frames.append(f)
        boxes.append(BoundingBox(float(x), float(y), float(side), float(side)))
    return frames, boxes


def write_sequence(directory, frames, boxes, attributes=None) -> Path:
    """Write an OTB-layout sequence: ``img/0001.png ...`` plus ``groundtruth_rect.txt``."""
    directory = Path(directory)
    (directory / "img").mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(frames, 1):
        img = np.clip(np.rint(np.asarray(f) * 255.0), 0, 255).astype(np.uint8)
        if img.ndim == 3:
            img = cv2.cvtColor(img, cv2.COLOR_RGB2BGR)
        cv2.imwrite(str(directory / "img" / f"{i:04d}.png"), img)
    (directory / "groundtruth_rect.txt").write_text(format_groundtruth(boxes), encoding="utf-8")
    return directory


def write_toy_dataset(root, num_frames=30) -> Path:
    """Small two-sequence dataset with an attribute manifest."""
    import json

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    write_sequence(root / "square", *translating_square(num_frames))
    write_sequence(root / "zoom", *zoom_sequence(num_frames))
    (root / "attributes.json").write_text(json.dumps({"square": ["FM"], "zoom": ["SV", "BC"]}), encoding="utf-8")
    return root
