"""Per-sequence accuracy metrics over box lists."""
from __future__ import annotations

import numpy as np

from ..imgproc import boxes_to_array, iou_many

PRECISION_THRESHOLD = 20.0
SUCCESS_THRESHOLDS = np.arange(21) / 20.0


def _pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    if len(pred) != len(gt):
        raise ValueError(f"length mismatch: {len(pred)} predictions vs {len(gt)} ground-truth boxes")
    if len(pred) == 0:
        raise ValueError("empty box lists")
    return boxes_to_array(pred), boxes_to_array(gt)


def center_errors(pred, gt) -> np.ndarray:
    p, g = _pair(pred, gt)
    return np.hypot(p[:, 0] - g[:, 0], p[:, 1] - g[:, 1])


def overlaps(pred, gt) -> np.ndarray:
    p, g = _pair(pred, gt)
    return iou_many(p, g)


def precision_at(pred, gt, threshold: float = PRECISION_THRESHOLD) -> float:
    """Fraction of frames whose center error is at most ``threshold`` pixels."""
    return float(np.mean(center_errors(pred, gt) <= threshold))


def success_curve(pred, gt) -> np.ndarray:
    o = overlaps(pred, gt)
    return (o[None, :] > SUCCESS_THRESHOLDS[:, None]).mean(axis=1)


def success_auc(pred, gt) -> float:
    """Mean over t = 0, 0.05, ..., 1 of the fraction of frames with IoU > t."""
    return float(success_curve(pred, gt).mean())
