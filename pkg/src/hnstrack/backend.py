"""Classical correlation backend: features, heatmaps and the running-average query model.

Feature maps are ``(C, S, S)`` float arrays. The reference extractor yields three
channels (mean-subtracted intensity, horizontal and vertical gradient), each
tapered by a 2-D Hann window. Any callable with the same output contract can
stand in for it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .imgproc import Patch, hann_window_2d

SIMPLE = "simple"
SMOOTH = "smooth"
SMOOTH_FORMS = ("normalized", "unnormalized")


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Heatmap:
    data: np.ndarray
    cell_stride: float = 1.0

    @property
    def side(self) -> int:
        return self.data.shape[0]

    @property
    def center(self) -> tuple[int, int]:
        """Cell ``(x, y)`` holding zero displacement."""
        return (self.data.shape[1] // 2, self.data.shape[0] // 2)


def extract_features(patch) -> np.ndarray:
    img = patch.image if isinstance(patch, Patch) else np.asarray(patch, dtype=np.float64)
    side = img.shape[0]
    if img.ndim != 2 or img.shape[1] != side or side < 16:
        raise ShapeError(f"need a square patch of side >= 16, got {img.shape}")
    gy, gx = np.gradient(img)
    # Offsetting by one pixel first keeps a constant patch exactly zero.
    centered = img - img[0, 0]
    feats = np.stack([centered - centered.mean(), gx, gy])
    feats *= hann_window_2d(side, side)
    return feats


def pad_features(f: np.ndarray, side: int) -> np.ndarray:
    """Zero-pad a feature map to ``side`` keeping its center cell at ``side // 2``."""
    c, s, _ = f.shape
    if side == s:
        return f
    if side < s:
        raise ShapeError(f"cannot pad side {s} down to {side}")
    off = side // 2 - s // 2
    out = np.zeros((c, side, side))
    out[:, off : off + s, off : off + s] = f
    return out


def raw_correlation(template: np.ndarray, f: np.ndarray, template_fft: np.ndarray | None = None) -> np.ndarray:
    """Channel-summed circular cross-correlation, zero displacement at the center cell.

    ``out[side//2 + dy, side//2 + dx] = sum_c sum_x template[c, x] * f[c, x + d]``.
    """
    if template.shape != f.shape:
        raise ShapeError(f"template {template.shape} vs features {f.shape}")
    if template_fft is None:
        template_fft = sfft.rfft2(template)
    spec = (np.conj(template_fft) * sfft.rfft2(f)).sum(axis=0)
    side = f.shape[-1]
    corr = sfft.irfft2(spec, s=f.shape[-2:])
    return np.roll(corr, (f.shape[-2] // 2, side // 2), axis=(0, 1))


@dataclass(frozen=True)
class QueryModel:
    template: np.ndarray
    n: int = 1
    alpha: float = 0.005
    mode: str = SIMPLE
    smooth_form: str = "normalized"
    _fft: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.template.shape

    def template_fft(self, side: int) -> np.ndarray:
        # The template is immutable per instance, so the spectrum can be memoised.
        if side not in self._fft:
            self._fft[side] = sfft.rfft2(pad_features(self.template, side))
        return self._fft[side]


def init_query(f1: np.ndarray, alpha: float = 0.005, mode: str = SIMPLE, smooth_form: str = "normalized") -> QueryModel:
    if mode not in (SIMPLE, SMOOTH):
        raise ValueError(f"unknown update mode {mode!r}")
    if smooth_form not in SMOOTH_FORMS:
        raise ValueError(f"unknown smooth form {smooth_form!r}")
    return QueryModel(np.array(f1, dtype=np.float64), 1, float(alpha), mode, smooth_form)


def simple_gain(alpha: float) -> float:
    return alpha


def smooth_gain(n: int, alpha: float) -> float:
    """Weight on the new feature map when updating a model that has seen ``n`` frames.

    Written type-generically so ``Fraction`` arguments give exact rationals.
    """
    return 1 / (2 * n) + alpha


def _check(q: QueryModel, f: np.ndarray):
    if q.template.shape != f.shape:
        raise ShapeError(f"query {q.template.shape} vs features {f.shape}")


def update_query_simple(q: QueryModel, f: np.ndarray) -> QueryModel:
    _check(q, f)
    a = q.alpha
    return replace(q, template=q.template * (1.0 - a) + a * f, n=q.n + 1, _fft={})


def update_query_smooth(q: QueryModel, f: np.ndarray) -> QueryModel:
    """Bootstrapped running average; the gain decays as ``0.5 / n`` towards ``alpha``.

    The gain uses the counter before the update, so the first update after
    initialisation (``n = 1``) blends with weight ``0.5 + alpha``. The ``unnormalized``
    form keeps ``1 - alpha - 0.5/n`` on the old template but drops ``alpha``
    from the new-frame weight, so its coefficients sum to ``1 - alpha``.
    """
    _check(q, f)
    n = q.n
    g = smooth_gain(n, q.alpha)
    if q.smooth_form == "normalized":
        template = q.template * (1.0 - g) + g * f
    else:
        template = q.template * (1.0 - g) + (0.5 / n) * f
    return replace(q, template=template, n=n + 1, _fft={})


def update_query(q: QueryModel, f: np.ndarray) -> QueryModel:
    if q.mode == SMOOTH:
        return update_query_smooth(q, f)
    return update_query_simple(q, f)


def correlate(q: QueryModel, f: np.ndarray, cell_stride: float = 1.0) -> Heatmap:
    """Windowed, non-negative correlation heatmap of ``q`` against search features ``f``.

    A template smaller than ``f`` is zero-padded first (enlarged search window).
    """
    side = f.shape[-1]
    if f.ndim != 3 or f.shape[-2] != side or f.shape[0] != q.template.shape[0] or side < q.template.shape[-1]:
        raise ShapeError(f"query {q.template.shape} vs features {f.shape}")
    corr = raw_correlation(pad_features(q.template, side), f, q.template_fft(side))
    corr *= hann_window_2d(side, side)
    corr -= corr.min()
    return Heatmap(corr, cell_stride)
