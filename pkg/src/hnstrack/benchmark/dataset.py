"""OTB-layout sequences: ``<seq>/img/*``, ``<seq>/groundtruth_rect.txt``, optional ``attributes.txt``."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..imgproc import BoundingBox, rgb_to_luma

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp"}
GT_FILE = "groundtruth_rect.txt"
ATTR_FILE = "attributes.txt"
OCCLUSION_FILE = "occlusion.txt"


class DatasetError(ValueError):
    pass


def read_image(path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I", "F"):
            arr = np.asarray(im.convert("F"), dtype=np.float64)
            return np.clip(arr / (65535.0 if im.mode == "I;16" else 255.0), 0.0, 1.0)
        return rgb_to_luma(np.asarray(im.convert("RGB")))


class LazyFrames:
    """Indexable view over image files, decoding each frame on access."""

    def __init__(self, paths):
        self.paths = list(paths)

    def __len__(self):
        return len(self.paths)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return LazyFrames(self.paths[i])
        return read_image(self.paths[i])


@dataclass
class Sequence:
    name: str
    frames: object  # list of arrays or LazyFrames
    groundtruth: list[BoundingBox]
    attributes: tuple[str, ...] = ()
    occluded: list[bool] | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.groundtruth) != len(self.frames):
            raise DatasetError(
                f"{self.name}: {len(self.frames)} frames vs {len(self.groundtruth)} boxes"
            )
        self.attributes = tuple(sorted(set(self.attributes)))

    def __len__(self):
        return len(self.frames)


_SPLIT = re.compile(r"[,\s]+")


def parse_rect_line(line: str) -> BoundingBox:
    """``x,y,w,h`` corner rectangle (comma, tab or space separated) -> center box.

    The 1-based corner ``x`` spans continuous ``[x - 1, x]``, so the center is
    ``(x - 1) + w / 2 + 0.5 = x + (w - 1) / 2`` on the 0-based pixel-center grid
    used for frames: ``10,20,30,40`` becomes center ``(24.5, 39.5)``.
    """
    parts = [p for p in _SPLIT.split(line.strip()) if p]
    if len(parts) != 4:
        raise DatasetError(f"expected 4 values, got {line!r}")
    x, y, w, h = (float(p) for p in parts)
    return BoundingBox.from_corner(x, y, w, h)


def format_rect(box: BoundingBox) -> str:
    """Inverse of :func:`parse_rect_line`."""
    return ",".join(f"{v:.10g}" for v in box.to_corner())


def load_otb_sequence(path) -> Sequence:
    root = Path(path)
    gt_path = root / GT_FILE
    if not gt_path.is_file():
        raise DatasetError(f"{root}: missing {GT_FILE}")
    img_dir = root / "img"
    if not img_dir.is_dir():
        raise DatasetError(f"{root}: missing img/ folder")
    frames = sorted(p for p in img_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not frames:
        raise DatasetError(f"{root}: no images in img/")
    lines = [ln for ln in gt_path.read_text().splitlines() if ln.strip()]
    gt = [parse_rect_line(ln) for ln in lines]
    if len(gt) < len(frames):
        log.warning("%s: %d frames but %d boxes; truncating frames", root.name, len(frames), len(gt))
        frames = frames[: len(gt)]
    elif len(gt) > len(frames):
        raise DatasetError(f"{root}: {len(gt)} boxes for {len(frames)} frames")
    attrs: tuple[str, ...] = ()
    if (root / ATTR_FILE).is_file():
        attrs = tuple(t.strip() for t in (root / ATTR_FILE).read_text().splitlines() if t.strip())
    occluded = None
    if (root / OCCLUSION_FILE).is_file():
        flags = (root / OCCLUSION_FILE).read_text().split()
        occluded = [f == "1" for f in flags[: len(frames)]]
    return Sequence(root.name, LazyFrames(frames), gt, attrs, occluded)


def load_dataset(path) -> list[Sequence]:
    """Every sub-directory holding a ground-truth file, sorted by name, or ``path`` itself."""
    root = Path(path)
    if (root / GT_FILE).is_file():
        return [load_otb_sequence(root)]
    if not root.is_dir():
        raise DatasetError(f"{root}: not a directory")
    seqs = [load_otb_sequence(d) for d in sorted(root.iterdir()) if (d / GT_FILE).is_file()]
    if not seqs:
        raise DatasetError(f"{root}: no sequences found")
    return seqs


def write_sequence(seq: Sequence, out_dir) -> Path:
    """Write ``seq`` in OTB layout (8-bit grayscale PNG frames)."""
    root = Path(out_dir)
    img_dir = root / "img"
    img_dir.mkdir(parents=True, exist_ok=True)
    for i in range(len(seq)):
        frame = np.asarray(seq.frames[i])
        px = np.round(np.clip(frame, 0.0, 1.0) * 255.0).astype(np.uint8)
        Image.fromarray(px).save(img_dir / f"{i + 1:04d}.png")
    (root / GT_FILE).write_text("".join(format_rect(b) + "\n" for b in seq.groundtruth))
    (root / ATTR_FILE).write_text("".join(a + "\n" for a in seq.attributes))
    if seq.occluded is not None:
        (root / OCCLUSION_FILE).write_text("".join(("1" if o else "0") + "\n" for o in seq.occluded))
    return root
