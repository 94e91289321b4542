"""One-pass and temporal-robustness evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..imgproc import BoundingBox
from ..tracker import StepDiagnostics, TrackerConfig, run_sequence
from .dataset import Sequence
from .metrics import precision_at, success_auc

TRE_TRIALS = 20
MIN_SEGMENT = 20


@dataclass
class EvalResult:
    sequence: str
    start: int
    boxes: list[BoundingBox] = field(repr=False)
    precision20: float
    success_auc: float
    fps: float
    diagnostics: list[StepDiagnostics] | None = field(default=None, repr=False)

    @property
    def n_frames(self) -> int:
        return len(self.boxes)


def _evaluate(seq: Sequence, cfg: TrackerConfig, start: int, keep_diagnostics: bool) -> EvalResult:
    frames = seq.frames[start:]
    gt = seq.groundtruth[start:]
    boxes, diags, fps = run_sequence(frames, gt[0], cfg)
    return EvalResult(
        seq.name, start, boxes, precision_at(boxes, gt), success_auc(boxes, gt), fps,
        diags if keep_diagnostics else None,
    )


def run_ope(seq: Sequence, cfg: TrackerConfig | None = None, keep_diagnostics: bool = False) -> EvalResult:
    if len(seq) < 2:
        raise ValueError(f"{seq.name}: need at least 2 frames")
    return _evaluate(seq, cfg or TrackerConfig(), 0, keep_diagnostics)


def tre_starts(n: int, trials: int = TRE_TRIALS, min_segment: int = MIN_SEGMENT) -> list[int]:
    """Equispaced restart indices ``round(k (n - min_segment) / (trials - 1))``, halves rounded up."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n < min_segment or trials == 1:
        return [0]
    if n < trials:
        raise ValueError(f"sequence of {n} frames is shorter than {trials} trials")
    span, d = n - min_segment, trials - 1
    # Integer round-half-up keeps the indices exact.
    return [(2 * k * span + d) // (2 * d) for k in range(trials)]


def run_tre(seq: Sequence, cfg: TrackerConfig | None = None, trials: int = TRE_TRIALS) -> list[EvalResult]:
    if len(seq) < 2:
        raise ValueError(f"{seq.name}: need at least 2 frames")
    cfg = cfg or TrackerConfig()
    return [_evaluate(seq, cfg, s, False) for s in tre_starts(len(seq), trials)]


def weighted_scores(results: list[EvalResult]) -> dict[str, float]:
    """Trial metrics averaged with frame-count weights."""
    if not results:
        raise ValueError("no results to aggregate")
    w = np.array([r.n_frames for r in results], dtype=np.float64)
    p = np.array([r.precision20 for r in results])
    s = np.array([r.success_auc for r in results])
    return {"precision20": float(w @ p / w.sum()), "success_auc": float(w @ s / w.sum())}
