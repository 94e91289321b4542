"""Seeded synthetic tracking sequences with exact ground truth.

A noise-textured target moves at constant velocity (bouncing off the frame
edges) over a noise background of the same statistics. During an occlusion
interval the target holds still behind a sliding textured block (or simply
vanishes); when it reappears it may be displaced by a fixed jump. Distractors
paste copies of the target texture.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from ..imgproc import BoundingBox
from .dataset import Sequence


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Distractor:
    offset: tuple[float, float]  # relative to the target center
    frames: tuple[int, int]  # [start, end)


@dataclass(frozen=True)
class SynthSpec:
    frame_size: tuple[int, int] = (128, 128)  # width, height
    n_frames: int = 120
    target_size: tuple[int, int] = (24, 24)
    start: tuple[float, float] | None = None  # top-left corner; None centers the target
    velocity: tuple[float, float] = (1.0, 0.5)
    occlusions: tuple[tuple[int, int], ...] = ()
    jump: tuple[float, float] = (0.0, 0.0)
    distractors: tuple[Distractor, ...] = ()
    blur_frames: int = 0
    blur_sigma: float = 2.5
    target_contrast: float = 0.15
    background_contrast: float = 0.15
    target_sigma: float = 0.7
    background_sigma: float = 0.7
    # "vanish": hidden target leaves bare background; "block": a textured
    # occluder slides across it at occluder_velocity px/frame.
    occluder: str = "block"
    occluder_velocity: tuple[float, float] = (1.0, 1.0)
    occluder_margin: int = 4
    name: str = "synth"

    def __post_init__(self):
        if self.n_frames < 1:
            raise ScenarioError("n_frames must be >= 1")
        w, h = self.target_size
        W, H = self.frame_size
        if not (0 < w < W and 0 < h < H):
            raise ScenarioError("target must fit inside the frame")
        for a, b in self.occlusions:
            if not (0 < a < b <= self.n_frames):
                raise ScenarioError(f"occlusion [{a}, {b}) outside frames 1..{self.n_frames - 1}")
        if self.occluder not in ("vanish", "block"):
            raise ScenarioError(f"unknown occluder {self.occluder!r}")
        for d in self.distractors:
            a, b = d.frames
            if not (0 <= a < b <= self.n_frames):
                raise ScenarioError(f"distractor frames [{a}, {b}) outside the sequence")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
        tuples = ("frame_size", "target_size", "start", "velocity", "jump", "occluder_velocity")
        for k in tuples:
            if d.get(k) is not None:
                d[k] = tuple(d[k])
        if "occlusions" in d:
            d["occlusions"] = tuple(tuple(o) for o in d["occlusions"])
        if "distractors" in d:
            d["distractors"] = tuple(
                Distractor(tuple(x["offset"]), tuple(x["frames"])) for x in d["distractors"]
            )
        try:
            return cls(**d)
        except TypeError as exc:
            raise ScenarioError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "SynthSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ScenarioError(f"malformed scenario {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)


def _texture(rng, shape, sigma, contrast):
    t = gaussian_filter(rng.standard_normal(shape), sigma, mode="wrap")
    t = (t - t.mean()) / (t.std() + 1e-12)
    return np.clip(0.5 + contrast * t, 0.0, 1.0)


def _paste(frame, tex, x, y):
    H, W = frame.shape
    h, w = tex.shape
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(W, x + w), min(H, y + h)
    if x1 > x0 and y1 > y0:
        frame[y0:y1, x0:x1] = tex[y0 - y : y1 - y, x0 - x : x1 - x]


def _path(spec: SynthSpec) -> tuple[list[tuple[int, int]], list[bool]]:
    W, H = spec.frame_size
    w, h = spec.target_size
    occluded = [any(a <= i < b for a, b in spec.occlusions) for i in range(spec.n_frames)]
    reappear = {b for _, b in spec.occlusions if b < spec.n_frames}
    if spec.start is None:
        x, y = (W - w) / 2.0, (H - h) / 2.0
    else:
        x, y = map(float, spec.start)
    vx, vy = map(float, spec.velocity)
    corners = []
    for i in range(spec.n_frames):
        if i > 0 and not occluded[i]:
            x, y = x + vx, y + vy
            if i in reappear:
                # Mirror a jump component that would leave the frame.
                jx, jy = spec.jump
                x = x + jx if 0 <= x + jx <= W - w else x - jx
                y = y + jy if 0 <= y + jy <= H - h else y - jy
            # Bounce so the target stays in view.
            if x < 0 or x > W - w:
                vx = -vx
                x = min(max(x, 0.0), W - w)
            if y < 0 or y > H - h:
                vy = -vy
                y = min(max(y, 0.0), H - h)
        corners.append((int(round(x)), int(round(y))))
    return corners, occluded


def _occluder_blocks(spec: SynthSpec, corners, rng) -> dict:
    """Frame index -> (texture, x, y) for sliding occluders that keep the target covered."""
    if spec.occluder != "block":
        return {}
    w, h = spec.target_size
    ux, uy = spec.occluder_velocity
    m = spec.occluder_margin
    blocks = {}
    for a, b in spec.occlusions:
        n = b - a
        bw = int(np.ceil(w + 2 * m + abs(ux) * (n - 1)))
        bh = int(np.ceil(h + 2 * m + abs(uy) * (n - 1)))
        tex = _texture(rng, (bh, bw), spec.background_sigma, spec.background_contrast)
        x0, y0 = corners[a]
        # Lead edge starts just past the target on the side the block moves away from.
        sx = x0 - m - (abs(ux) * (n - 1) if ux > 0 else 0)
        sy = y0 - m - (abs(uy) * (n - 1) if uy > 0 else 0)
        for k in range(n):
            blocks[a + k] = (tex, int(round(sx + ux * k)), int(round(sy + uy * k)))
    return blocks


def synth_sequence(spec: SynthSpec, seed: int = 0) -> Sequence:
    rng = np.random.default_rng(seed)
    W, H = spec.frame_size
    w, h = spec.target_size
    background = _texture(rng, (H, W), spec.background_sigma, spec.background_contrast)
    target = _texture(rng, (h, w), spec.target_sigma, spec.target_contrast)
    blurred = gaussian_filter(target, spec.blur_sigma, mode="nearest") if spec.blur_frames else target

    corners, occluded = _path(spec)
    blocks = _occluder_blocks(spec, corners, rng)
    frames, gt = [], []
    for i, (x, y) in enumerate(corners):
        frame = background.copy()
        for d in spec.distractors:
            if d.frames[0] <= i < d.frames[1]:
                _paste(frame, target, int(round(x + d.offset[0])), int(round(y + d.offset[1])))
        if not occluded[i]:
            _paste(frame, blurred if i < spec.blur_frames else target, x, y)
        elif i in blocks:
            _paste(frame, *blocks[i])
        frames.append(frame)
        # Occluded frames keep the last visible box; the target holds still while hidden.
        gt.append(BoundingBox.from_corner(x, y, w, h))

    attrs = set()
    if spec.occlusions:
        attrs.update({"occlusion", "out-of-view"})
    if spec.distractors:
        attrs.add("background-clutter")
    if spec.blur_frames:
        attrs.add("degraded-init")
    return Sequence(spec.name, frames, gt, tuple(attrs), occluded)


def recovery_spec(rng: np.random.Generator, name: str = "recovery") -> SynthSpec:
    """128x128, 120 frames, 10-frame full occlusion, reappearance jump of 1.5 target widths."""
    w = 24
    angle = rng.uniform(0, 2 * np.pi)
    jump = (1.5 * w * np.cos(angle), 1.5 * w * np.sin(angle))
    speed = rng.uniform(0.3, 1.0)
    heading = rng.uniform(0, 2 * np.pi)
    occ_start = int(rng.integers(40, 70))
    return SynthSpec(
        frame_size=(128, 128),
        n_frames=120,
        target_size=(w, w),
        start=(float(rng.uniform(40, 64)), float(rng.uniform(40, 64))),
        velocity=(speed * np.cos(heading), speed * np.sin(heading)),
        occlusions=((occ_start, occ_start + 10),),
        jump=jump,
        name=name,
    )
