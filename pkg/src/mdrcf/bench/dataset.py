"""OTB-layout sequence loading."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from mdrcf.errors import SequenceFormatError
from mdrcf.types import BoundingBox

ATTRIBUTES = ("IV", "OPR", "SV", "OCC", "DEF", "MB", "FM", "IPR", "OV", "BC", "LR")
IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp")
GT_NAMES = ("groundtruth_rect.txt", "groundtruth.txt")
MANIFEST_NAME = "attributes.json"
_SPLIT = re.compile(r"[,\t ]+")


@dataclass
class Sequence:
    name: str
    frames: list[Path]
    boxes: list[BoundingBox | None]  # None where the annotation is absent
    attributes: tuple[str, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.frames)

    @property
    def init_box(self) -> BoundingBox:
        if self.boxes[0] is None:
            raise SequenceFormatError(f"{self.name}: first frame has no annotation")
        return self.boxes[0]


def read_frame(path) -> np.ndarray:
    """Read an image as float32 RGB (or gray) in [0, 1]."""
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise FileNotFoundError(f"cannot read image {path}")
    if img.ndim == 3:
        if img.shape[2] == 4:
            img = img[:, :, :3]
        if np.array_equal(img[:, :, 0], img[:, :, 1]) and np.array_equal(img[:, :, 1], img[:, :, 2]):
            img = img[:, :, 0]
        else:
            img = cv2.cvtColor(img, cv2.COLOR_BGR2RGB)
    scale = 65535.0 if img.dtype == np.uint16 else 255.0
    return img.astype(np.float32) / scale


def _frame_key(path: Path):
    digits = re.findall(r"\d+", path.stem)
    return (int(digits[-1]) if digits else -1, path.name)


def parse_groundtruth(path) -> list[BoundingBox | None]:
    """One ``x,y,w,h`` box per line (1-based); returned boxes are 0-based.

    Lines with non-positive size or NaN entries are kept as ``None``.
    """
    boxes = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = [p for p in _SPLIT.split(line) if p]
            try:
                x, y, w, h = (float(p) for p in parts)
            except ValueError:
                raise SequenceFormatError(f"{path}:{lineno}: expected 4 numbers, got {line!r}") from None
            if not (w > 0 and h > 0) or any(np.isnan(v) for v in (x, y)):
                boxes.append(None)
            else:
                boxes.append(BoundingBox(x - 1.0, y - 1.0, w, h))
    return boxes


def format_groundtruth(boxes) -> str:
    lines = []
    for b in boxes:
        lines.append("0,0,0,0" if b is None else f"{b.x + 1:g},{b.y + 1:g},{b.w:g},{b.h:g}")
    return "\n".join(lines) + "\n"


def load_sequence(directory, attributes=()) -> Sequence:
    directory = Path(directory)
    img_dir = directory / "img"
    if not img_dir.is_dir():
        raise SequenceFormatError(f"{directory}: missing img/ directory")
    frames = sorted((p for p in img_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES), key=_frame_key)
    gt_path = next((directory / n for n in GT_NAMES if (directory / n).is_file()), None)
    if gt_path is None:
        raise SequenceFormatError(f"{directory}: missing ground-truth file ({' or '.join(GT_NAMES)})")
    boxes = parse_groundtruth(gt_path)
    if len(boxes) != len(frames):
        raise SequenceFormatError(
            f"{directory.name}: {len(frames)} frames but {len(boxes)} ground-truth boxes")
    unknown = set(attributes) - set(ATTRIBUTES)
    if unknown:
        raise SequenceFormatError(f"{directory.name}: unknown attribute tags {sorted(unknown)}")
    return Sequence(directory.name, frames, boxes, tuple(attributes))


def load_dataset(root) -> list[Sequence]:
    """Every sequence directory under ``root``, sorted by name, tagged from ``attributes.json``."""
    root = Path(root)
    if not root.is_dir():
        raise SequenceFormatError(f"dataset directory {root} does not exist")
    manifest = {}
    if (root / MANIFEST_NAME).is_file():
        with open(root / MANIFEST_NAME, encoding="utf-8") as fh:
            manifest = json.load(fh)
    seqs = [
        load_sequence(d, manifest.get(d.name, ()))
        for d in sorted(root.iterdir())
        if d.is_dir() and (d / "img").is_dir()
    ]
    if not seqs:
        raise SequenceFormatError(f"no sequences found under {root}")
    return seqs
