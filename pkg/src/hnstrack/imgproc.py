"""Image and box primitives shared by the tracker and the benchmark.

Images are plain 2-D float numpy arrays (rows = y, columns = x) with values
in [0, 1]. Pixel ``i`` covers the continuous interval ``[i - 0.5, i + 0.5]``,
so a box whose 0-based corner is ``x`` and width ``w`` has its center at
``x + (w - 1) / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

EMPTY_FILL = 0.5


class InvalidBoxError(ValueError):
    pass


def as_image(data) -> np.ndarray:
    """Validate and return ``data`` as a float64 intensity image."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image intensities must lie in [0, 1]")
    return img


def rgb_to_luma(rgb: np.ndarray) -> np.ndarray:
    """ITU-R BT.601 luminance of an ``(H, W, 3)`` uint8/float array, scaled to [0, 1]."""
    rgb = np.asarray(rgb)
    scale = 255.0 if np.issubdtype(rgb.dtype, np.integer) else 1.0
    luma = rgb.astype(np.float64) @ np.array([0.299, 0.587, 0.114]) / scale
    return np.clip(luma, 0.0, 1.0)


@dataclass(frozen=True)
class BoundingBox:
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise InvalidBoxError(f"box size must be positive, got {self.w}x{self.h}")

    @classmethod
    def from_corner(cls, x: float, y: float, w: float, h: float) -> "BoundingBox":
        """Build from a 0-based top-left corner."""
        return cls(x + (w - 1) / 2.0, y + (h - 1) / 2.0, w, h)

    def to_corner(self) -> tuple[float, float, float, float]:
        return (self.cx - (self.w - 1) / 2.0, self.cy - (self.h - 1) / 2.0, self.w, self.h)

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)

    @property
    def area(self) -> float:
        return self.w * self.h

    def moved(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.cx + dx, self.cy + dy, self.w, self.h)

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.w, self.h], dtype=np.float64)


@dataclass(frozen=True)
class Patch:
    image: np.ndarray
    source_box: BoundingBox
    context_factor: float

    @property
    def side(self) -> int:
        return self.image.shape[0]

    @property
    def region_side(self) -> float:
        return self.context_factor * max(self.source_box.w, self.source_box.h)

    @property
    def stride(self) -> float:
        """Frame pixels per patch pixel."""
        return self.region_side / self.side


def boxes_to_array(boxes) -> np.ndarray:
    """Stack boxes into an ``(N, 4)`` array of ``cx, cy, w, h``."""
    if isinstance(boxes, np.ndarray):
        return boxes.reshape(-1, 4).astype(np.float64)
    return np.array([b.as_array() for b in boxes], dtype=np.float64).reshape(-1, 4)


def iou_many(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise IoU of two ``(N, 4)`` center-format box arrays."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    ix = np.minimum(a[:, 0] + a[:, 2] / 2, b[:, 0] + b[:, 2] / 2) - np.maximum(
        a[:, 0] - a[:, 2] / 2, b[:, 0] - b[:, 2] / 2
    )
    iy = np.minimum(a[:, 1] + a[:, 3] / 2, b[:, 1] + b[:, 3] / 2) - np.maximum(
        a[:, 1] - a[:, 3] / 2, b[:, 1] - b[:, 3] / 2
    )
    inter = np.clip(ix, 0.0, None) * np.clip(iy, 0.0, None)
    union = a[:, 2] * a[:, 3] + b[:, 2] * b[:, 3] - inter
    return np.clip(inter / union, 0.0, 1.0)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    return float(iou_many(a.as_array(), b.as_array())[0])


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    return math.hypot(a.cx - b.cx, a.cy - b.cy)


def _axis_taps(start: float, step: float, n: int):
    # Sample centers with half-pixel alignment, then the two bilinear taps.
    u = start + (np.arange(n) + 0.5) * step
    i0 = np.floor(u).astype(np.int64)
    frac = u - i0
    return i0, i0 + 1, frac


def crop_resize(frame: np.ndarray, box: BoundingBox, context_factor: float, out_side: int) -> Patch:
    """Square crop of side ``context_factor * max(w, h)`` around ``box``, resampled bilinearly.

    Samples falling outside the frame take the mean of the in-frame part of the
    region (0.5 if the region misses the frame entirely).
    """
    if not (box.w > 0 and box.h > 0):
        raise InvalidBoxError("degenerate box")
    if out_side < 8:
        raise ValueError("out_side must be >= 8")
    if context_factor < 1:
        raise ValueError("context_factor must be >= 1")
    H, W = frame.shape
    side = context_factor * max(box.w, box.h)
    left = box.cx - side / 2.0
    top = box.cy - side / 2.0
    step = side / out_side

    # Pixels whose centers fall inside the region.
    x0 = max(0, math.ceil(left))
    x1 = min(W, math.ceil(left + side))
    y0 = max(0, math.ceil(top))
    y1 = min(H, math.ceil(top + side))
    if x1 > x0 and y1 > y0:
        fill = float(frame[y0:y1, x0:x1].mean())
    else:
        fill = EMPTY_FILL

    # Continuous coordinates coincide with pixel indices at pixel centers.
    xa, xb, fx = _axis_taps(left, step, out_side)
    ya, yb, fy = _axis_taps(top, step, out_side)

    lo_x, hi_x = int(xa[0]), int(xb[-1])
    lo_y, hi_y = int(ya[0]), int(yb[-1])
    if lo_x >= 0 and hi_x < W and lo_y >= 0 and hi_y < H:
        src = frame
        ox = oy = 0
    else:
        # Window covering every tap, fill value outside the frame.
        src = np.full((hi_y - lo_y + 1, hi_x - lo_x + 1), fill)
        cx0, cx1 = max(0, lo_x), min(W, hi_x + 1)
        cy0, cy1 = max(0, lo_y), min(H, hi_y + 1)
        if cx1 > cx0 and cy1 > cy0:
            src[cy0 - lo_y : cy1 - lo_y, cx0 - lo_x : cx1 - lo_x] = frame[cy0:cy1, cx0:cx1]
        ox, oy = lo_x, lo_y

    xa, xb = xa - ox, xb - ox
    ya, yb = ya - oy, yb - oy
    top_row = src[ya[:, None], xa[None, :]] * (1 - fx) + src[ya[:, None], xb[None, :]] * fx
    bot_row = src[yb[:, None], xa[None, :]] * (1 - fx) + src[yb[:, None], xb[None, :]] * fx
    out = top_row * (1 - fy)[:, None] + bot_row * fy[:, None]
    return Patch(out, box, context_factor)


@lru_cache(maxsize=64)
def _hann_1d(n: int) -> np.ndarray:
    if n == 1:
        return np.ones(1)
    w = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / (n - 1)))
    # Enforce exact mirror symmetry against rounding.
    w = 0.5 * (w + w[::-1])
    w[0] = w[-1] = 0.0
    return w


@lru_cache(maxsize=64)
def _hann_2d(h: int, w: int) -> np.ndarray:
    win = np.outer(_hann_1d(h), _hann_1d(w))
    win.flags.writeable = False
    return win


def hann_window_2d(h: int, w: int) -> np.ndarray:
    """Outer product of 1-D Hann windows; the returned array is read-only and cached."""
    if h < 1 or w < 1:
        raise ValueError("window dimensions must be >= 1")
    return _hann_2d(int(h), int(w))
