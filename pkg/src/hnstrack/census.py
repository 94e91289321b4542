"""Census-transform backup tracker.

Each interior pixel gets an 8-bit code; bit ``k`` (most significant first) is set
when the ``k``-th neighbour, walking clockwise from the top-left, is strictly
darker than the center. Border pixels carry code 0.
"""
from __future__ import annotations

import numpy as np
import scipy.fft as sfft

# (dy, dx) clockwise from top-left.
NEIGHBOURS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))
ROTATIONS = (0, 2, 4, 6)


class CensusSizeError(ValueError):
    pass


def census_transform(img) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise CensusSizeError(f"census needs at least 3x3 pixels, got {img.shape}")
    H, W = img.shape
    center = img[1:-1, 1:-1]
    codes = np.zeros((H, W), dtype=np.uint8)
    inner = np.zeros(center.shape, dtype=np.uint8)
    for k, (dy, dx) in enumerate(NEIGHBOURS):
        nb = img[1 + dy : H - 1 + dy, 1 + dx : W - 1 + dx]
        inner |= (nb < center).astype(np.uint8) << np.uint8(7 - k)
    codes[1:-1, 1:-1] = inner
    return codes


def rotl8(codes: np.ndarray, r: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.uint8)
    r %= 8
    if r == 0:
        return codes.copy()
    return ((codes << np.uint8(r)) | (codes >> np.uint8(8 - r))).astype(np.uint8)


def census_channels(codes, scale: bool = True) -> np.ndarray:
    """Stack of the codes left-rotated by 0, 2, 4 and 6 bits, shape ``(4, H, W)``.

    With ``scale`` the channels are divided by 255.
    """
    ch = np.stack([rotl8(codes, r) for r in ROTATIONS])
    if scale:
        return ch.astype(np.float64) / 255.0
    return ch


def _window_sums(a: np.ndarray, th: int, tw: int) -> np.ndarray:
    # Sum over every th x tw window, (..., H - th + 1, W - tw + 1).
    c = np.zeros(a.shape[:-2] + (a.shape[-2] + 1, a.shape[-1] + 1))
    c[..., 1:, 1:] = a.cumsum(-2).cumsum(-1)
    return c[..., th:, tw:] - c[..., :-th, tw:] - c[..., th:, :-tw] + c[..., :-th, :-tw]


def _template_terms(template_ch: np.ndarray):
    t = template_ch - template_ch.mean(axis=(1, 2), keepdims=True)
    return t, np.sqrt((t * t).sum(axis=(1, 2)))


def ncc_scores(template_ch: np.ndarray, search_ch: np.ndarray, template_spectrum: np.ndarray | None = None) -> np.ndarray:
    """Per-channel zero-mean NCC at every valid placement, summed over channels.

    Channels whose template or search window has no variance contribute 0.
    ``template_spectrum`` may carry a cached transform of the flipped,
    zero-mean template padded to the search shape.
    """
    C, th, tw = template_ch.shape
    _, sh, sw = search_ch.shape
    n = th * tw
    t, t_norm = _template_terms(template_ch)
    if template_spectrum is None:
        template_spectrum = sfft.rfft2(t[:, ::-1, ::-1], s=(sh, sw))
    full = sfft.irfft2(sfft.rfft2(search_ch) * template_spectrum, s=(sh, sw))
    num = full[:, th - 1 :, tw - 1 :]

    s1 = _window_sums(search_ch, th, tw)
    s2 = _window_sums(search_ch * search_ch, th, tw)
    var = np.clip(s2 - s1 * s1 / n, 0.0, None)
    denom = t_norm[:, None, None] * np.sqrt(var)
    # Cumulative-sum cancellation error grows with the channel's total energy.
    tol = 1e-12 * (search_ch * search_ch).sum(axis=(1, 2))[:, None, None] + 1e-300
    valid = (var > tol) & (t_norm[:, None, None] > 1e-12)
    out = np.zeros_like(num)
    np.divide(num, denom, out=out, where=valid)
    return np.clip(out, -1.0, 1.0).sum(axis=0)


def best_displacement(scores: np.ndarray) -> tuple[tuple[int, int], float]:
    """Argmax relative to the centered placement; ties go to the smallest Chebyshev offset."""
    oh, ow = scores.shape
    cy, cx = (oh - 1) // 2, (ow - 1) // 2
    best = scores.max()
    ys, xs = np.nonzero(scores == best)
    cheb = np.maximum(np.abs(xs - cx), np.abs(ys - cy))
    k = int(np.argmin(cheb))  # first minimum keeps row-major order
    return (int(xs[k] - cx), int(ys[k] - cy)), float(best)


def _stripped_channels(img) -> np.ndarray:
    # Border codes are 0 by definition; dropping the ring on both template and
    # search keeps placements (and hence displacements) unchanged.
    return census_channels(census_transform(img))[:, 1:-1, 1:-1]


class CensusTemplate:
    """A template prepared once and matched against many search images."""

    def __init__(self, image):
        self.image = np.asarray(image, dtype=np.float64)
        self.channels = _stripped_channels(self.image)
        self._spectra: dict[tuple[int, int], np.ndarray] = {}

    @property
    def shape(self) -> tuple[int, int]:
        return self.image.shape

    def _spectrum(self, shape) -> np.ndarray:
        if shape not in self._spectra:
            t, _ = _template_terms(self.channels)
            self._spectra[shape] = sfft.rfft2(t[:, ::-1, ::-1], s=shape)
        return self._spectra[shape]

    def match(self, search) -> tuple[tuple[int, int], float]:
        search = np.asarray(search, dtype=np.float64)
        th, tw = self.image.shape
        if not (search.shape[0] > th and search.shape[1] > tw):
            raise CensusSizeError(f"search {search.shape} must exceed template {self.image.shape}")
        sch = _stripped_channels(search)
        return best_displacement(ncc_scores(self.channels, sch, self._spectrum(sch.shape[1:])))


def census_match(template, search) -> tuple[tuple[int, int], float]:
    """Locate ``template`` inside ``search`` by census-channel correlation.

    Returns ``((dx, dy), score)`` where the displacement is measured from the
    placement that centers the template in the search image and the score lies
    in ``[-4, 4]``.
    """
    template = np.asarray(template, dtype=np.float64)
    if template.ndim != 2 or min(template.shape) < 3:
        raise CensusSizeError(f"census needs at least 3x3 pixels, got {template.shape}")
    return CensusTemplate(template).match(search)
