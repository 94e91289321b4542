"""Heatmap confidence: dominant-peak extraction and the nearest-neighbour distance ratio test."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import Heatmap

DEFAULT_THRESHOLD = 0.9


class DegenerateHeatmapError(ValueError):
    pass


@dataclass(frozen=True)
class Peak:
    x: int
    y: int
    height: float


@dataclass(frozen=True)
class ConfidenceVerdict:
    primary: Peak
    secondary: Peak | None
    ratio: float
    ambiguous: bool


def _data(h) -> np.ndarray:
    return h.data if isinstance(h, Heatmap) else np.asarray(h, dtype=np.float64)


def project_profiles(h) -> tuple[np.ndarray, np.ndarray]:
    """Max-projections: ``x_profile[i]`` is the max of column ``i``, ``y_profile[j]`` of row ``j``."""
    d = _data(h)
    if d.size == 0:
        raise DegenerateHeatmapError("empty heatmap")
    return d.max(axis=0), d.max(axis=1)


def _profile_peak_mask(p: np.ndarray) -> np.ndarray:
    mask = np.zeros(p.shape, dtype=bool)
    if p.size < 3:
        return mask
    d1 = np.diff(p)
    d2 = d1[1:] - d1[:-1]
    mask[1:-1] = (d1[:-1] > 0) & (d1[1:] <= 0) & (d2 < 0)
    return mask


def find_profile_peaks(p) -> list[tuple[int, float]]:
    """Interior local maxima of a 1-D profile, highest first (ties by index).

    A peak is where the first difference turns from positive to non-positive
    with a negative second difference; a plateau reports its first index.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.size < 3:
        raise ValueError("profile needs at least 3 samples")
    idx = np.flatnonzero(_profile_peak_mask(p))
    order = np.lexsort((idx, -p[idx]))
    return [(int(idx[k]), float(p[idx[k]])) for k in order]


def local_maxima_mask(d: np.ndarray) -> np.ndarray:
    """Cells strictly greater than all of their (up to 8) in-bounds neighbours."""
    d = np.asarray(d, dtype=np.float64)
    H, W = d.shape
    p = np.full((H + 2, W + 2), -np.inf)
    p[1:-1, 1:-1] = d
    # Separable 3x3 max that leaves out the center cell.
    sides = np.maximum(p[:, :-2], p[:, 2:])
    rows = np.maximum(sides, p[:, 1:-1])
    ring = np.maximum(np.maximum(rows[:-2], rows[2:]), sides[1:-1])
    return d > ring


def top_two_peaks(h, min_separation: int | None = None) -> tuple[Peak, Peak | None]:
    """Global argmax plus the strongest well-separated secondary peak.

    Secondary candidates are strict 2-D local maxima at Chebyshev distance
    ``>= min_separation`` from the primary whose column is a peak of the
    x-profile or whose row is a peak of the y-profile. ``min_separation``
    defaults to a quarter of the heatmap side.
    """
    d = _data(h)
    if min_separation is None:
        min_separation = max(1, min(d.shape) // 4)
    if min_separation < 1:
        raise ValueError("min_separation must be >= 1")
    flat = int(np.argmax(d))
    py, px = divmod(flat, d.shape[1])
    primary = Peak(px, py, float(d[py, px]))

    xprof, yprof = project_profiles(d)
    cand = local_maxima_mask(d)
    cand &= _profile_peak_mask(xprof)[None, :] | _profile_peak_mask(yprof)[:, None]
    r = min_separation - 1
    cand[max(0, py - r) : py + r + 1, max(0, px - r) : px + r + 1] = False
    if not cand.any():
        return primary, None
    # argmax is row-major, so equal heights resolve to the first candidate.
    sy, sx = divmod(int(np.argmax(np.where(cand, d, -np.inf))), d.shape[1])
    return primary, Peak(sx, sy, float(d[sy, sx]))


def evaluate_confidence(h, threshold: float = DEFAULT_THRESHOLD, min_separation: int | None = None) -> ConfidenceVerdict:
    if not 0.0 < threshold:
        raise ValueError("threshold must be positive")
    d = _data(h)
    if d.size == 0 or not np.all(np.isfinite(d)) or d.max() <= 0.0:
        raise DegenerateHeatmapError("heatmap has no positive peak")
    primary, secondary = top_two_peaks(d, min_separation)
    if secondary is None:
        return ConfidenceVerdict(primary, None, 0.0, False)
    # Same test as ratio > threshold, but free of the division's rounding, so
    # rescaling the map cannot move a boundary case across the threshold.
    ambiguous = secondary.height > threshold * primary.height
    return ConfidenceVerdict(primary, secondary, secondary.height / primary.height, ambiguous)
