"""Confidence-gated control loop on top of the correlation backend.

Per frame the query model is correlated with the search window. A confident
heatmap moves the box to its peak and refreshes the query model. An ambiguous
one puts the tracker in failure mode: the peak is ignored, the model is frozen,
the box comes from the variant's fallback and the next search window doubles.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .backend import SIMPLE, SMOOTH, Heatmap, correlate, extract_features, init_query, update_query, QueryModel
from .census import CensusTemplate
from .confidence import ConfidenceVerdict, DegenerateHeatmapError, evaluate_confidence
from .imgproc import BoundingBox, InvalidBoxError, crop_resize

log = logging.getLogger(__name__)

VARIANTS = ("baseline", "hns0", "hns1", "hns", "hnssa")
NORMAL = "normal"
FAILURE = "failure"


@dataclass(frozen=True)
class TrackerConfig:
    variant: str = "hns"
    confidence_threshold: float = 0.9
    alpha: float = 0.005
    # Search-window side in heatmap cells at normal scale.
    instance_side: int = 96
    # Exemplar crop side is context_factor * max(w, h) ...
    context_factor: float = 2.0
    # ... and the search region is search_factor times larger.
    search_factor: float = 2.0
    # Cells between primary and secondary peak; None means a quarter of the heatmap side.
    min_peak_separation: int | None = 4
    smooth_update_form: str = "normalized"
    max_failure_frames: int | None = None
    # Backup matches scoring below this (out of 4) leave the box in place.
    census_min_score: float = 1.0
    # Backup search runs this many times coarser than the correlation grid.
    census_downsample: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if not self.confidence_threshold > 0:
            raise ValueError("confidence_threshold must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.instance_side < 16:
            raise ValueError("instance_side must be >= 16")
        if self.context_factor < 1:
            raise ValueError("context_factor must be >= 1")
        if self.search_factor < 1:
            raise ValueError("search_factor must be >= 1")
        if self.census_downsample < 1:
            raise ValueError("census_downsample must be >= 1")
        if self.exemplar_side < 16:
            raise ValueError("exemplar side (instance_side / search_factor) must be >= 16")

    @property
    def exemplar_side(self) -> int:
        return int(round(self.instance_side / self.search_factor))

    @property
    def update_mode(self) -> str:
        return SMOOTH if self.variant == "hnssa" else SIMPLE

    @property
    def gated(self) -> bool:
        return self.variant != "baseline"


@dataclass
class TrackerState:
    cfg: TrackerConfig
    box: BoundingBox
    query: QueryModel
    mode: str = NORMAL
    prev_box: BoundingBox | None = None
    search_scale: int = 1
    census_template: CensusTemplate | None = None
    frame_index: int = 0
    failure_frames: int = 0
    last_confident_frame: np.ndarray | None = field(default=None, repr=False)
    last_confident_box: BoundingBox | None = None


@dataclass
class StepDiagnostics:
    verdict: ConfidenceVerdict | None
    mode_after: str
    heatmap: Heatmap | None
    source: str
    search_scale: int = 1

    @property
    def nndr_ratio(self) -> float:
        return float("nan") if self.verdict is None else self.verdict.ratio


def extrapolate(prev: BoundingBox, prev2: BoundingBox) -> BoundingBox:
    """Constant-velocity guess from the last two boxes; size taken from ``prev``."""
    return BoundingBox(2 * prev.cx - prev2.cx, 2 * prev.cy - prev2.cy, prev.w, prev.h)


def _exemplar(frame, box, cfg: TrackerConfig):
    patch = crop_resize(frame, box, cfg.context_factor, cfg.exemplar_side)
    return patch, extract_features(patch)


def _search_patch(frame, box, cfg: TrackerConfig, scale: int = 1):
    # Same frame-pixel stride as the exemplar, so heatmap cells map back uniformly.
    factor = cfg.context_factor * cfg.instance_side / cfg.exemplar_side * scale
    return crop_resize(frame, box, factor, cfg.instance_side * scale)


def init(frame: np.ndarray, b0: BoundingBox, cfg: TrackerConfig | None = None) -> TrackerState:
    cfg = cfg or TrackerConfig()
    if not (b0.w > 0 and b0.h > 0):
        raise InvalidBoxError("degenerate initial box")
    frame = np.asarray(frame, dtype=np.float64)
    _, f1 = _exemplar(frame, b0, cfg)
    query = init_query(f1, cfg.alpha, cfg.update_mode, cfg.smooth_update_form)
    return TrackerState(cfg, b0, query, last_confident_frame=frame, last_confident_box=b0)


def _census_template(state: TrackerState) -> CensusTemplate:
    cfg = state.cfg
    side = max(8, int(round(cfg.exemplar_side / cfg.context_factor / cfg.census_downsample)))
    return CensusTemplate(crop_resize(state.last_confident_frame, state.last_confident_box, 1.0, side).image)


def _backup_box(state: TrackerState, frame: np.ndarray) -> tuple[BoundingBox, float]:
    cfg = state.cfg
    if state.census_template is None:
        state.census_template = _census_template(state)
    # The doubled search window, resampled onto the census grid.
    factor = cfg.context_factor * cfg.instance_side / cfg.exemplar_side * 2
    side = max(state.census_template.shape[0] + 3, 2 * cfg.instance_side // cfg.census_downsample)
    search = crop_resize(frame, state.box, factor, side)
    (dx, dy), score = state.census_template.match(search.image)
    if score < cfg.census_min_score:
        return state.box, score
    return state.box.moved(dx * search.stride, dy * search.stride), score


def step(state: TrackerState, frame: np.ndarray) -> tuple[TrackerState, BoundingBox, StepDiagnostics]:
    cfg = state.cfg
    frame = np.asarray(frame, dtype=np.float64)
    scale = state.search_scale
    patch = _search_patch(frame, state.box, cfg, scale)
    feats = extract_features(patch)
    heat = correlate(state.query, feats, patch.stride)

    verdict = None
    if cfg.gated:
        try:
            verdict = evaluate_confidence(heat, cfg.confidence_threshold, cfg.min_peak_separation)
            ambiguous = verdict.ambiguous
        except DegenerateHeatmapError:
            ambiguous = True
        if ambiguous and cfg.max_failure_frames is not None and state.failure_frames >= cfg.max_failure_frames:
            log.debug("frame %d: failure cap reached, trusting the heatmap", state.frame_index + 1)
            ambiguous = False
    else:
        ambiguous = False

    if not ambiguous:
        if verdict is not None:
            px, py = verdict.primary.x, verdict.primary.y
        else:
            py, px = divmod(int(np.argmax(heat.data)), heat.data.shape[1])
        cx, cy = heat.center
        new_box = state.box.moved((px - cx) * heat.cell_stride, (py - cy) * heat.cell_stride)
        state.mode = NORMAL
        state.search_scale = 1
        state.failure_frames = 0
        _, f_new = _exemplar(frame, new_box, cfg)
        state.query = update_query(state.query, f_new)
        state.last_confident_frame = frame
        state.last_confident_box = new_box
        state.census_template = None
        source = "main"
    else:
        if cfg.variant == "hns0":
            new_box, source = state.box, "frozen"
        elif cfg.variant == "hns1":
            if state.prev_box is None:
                new_box = state.box
            else:
                new_box = extrapolate(state.box, state.prev_box)
            source = "extrapolated"
        else:
            new_box, _ = _backup_box(state, frame)
            source = "backup"
        if state.mode == NORMAL:
            log.debug("frame %d: entering failure mode", state.frame_index + 1)
        state.mode = FAILURE
        state.search_scale = 2
        state.failure_frames += 1

    state.prev_box = state.box
    state.box = new_box
    state.frame_index += 1
    return state, new_box, StepDiagnostics(verdict, state.mode, heat, source, state.search_scale)


def run_sequence(frames, b0: BoundingBox, cfg: TrackerConfig | None = None, keep_heatmaps: bool = False):
    """Track ``b0`` through ``frames``; returns ``(boxes, diagnostics, fps)``.

    ``frames`` may be any indexable sequence (e.g. a lazy loader); frame
    loading is excluded from the fps measurement.
    """
    n = len(frames)
    if n == 0:
        raise ValueError("empty sequence")
    cfg = cfg or TrackerConfig()
    first = frames[0]
    elapsed = 0.0
    t0 = time.perf_counter()
    state = init(first, b0, cfg)
    elapsed += time.perf_counter() - t0
    boxes = [b0]
    diags = [StepDiagnostics(None, NORMAL, None, "init", 1)]
    for i in range(1, n):
        frame = frames[i]
        t0 = time.perf_counter()
        state, box, diag = step(state, frame)
        elapsed += time.perf_counter() - t0
        if not keep_heatmaps:
            diag.heatmap = None
        boxes.append(box)
        diags.append(diag)
    fps = n / elapsed if elapsed > 0 else float("inf")
    return boxes, diags, fps
