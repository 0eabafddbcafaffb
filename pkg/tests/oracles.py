"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written as plain loops from the documented
behavior, sharing no code with the package: brute-force nearest-palette
lookup and error diffusion, and a direct (non-separable) windowed-sinc
resampler with exact rational tap geometry.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def nearest_index(pixel, palette: np.ndarray) -> int:
    """Lowest palette index at minimum squared RGB distance."""
    d = ((palette.astype(np.float64) - np.asarray(pixel, dtype=np.float64)) ** 2).sum(axis=1)
    return int(np.argmin(d))


def brute_dither(pixels: np.ndarray, palette: np.ndarray, scale: float) -> np.ndarray:
    """Row-major error diffusion, returning palette indices per pixel."""
    h, w = pixels.shape[0], pixels.shape[1]
    work = pixels[:, :, :3].astype(np.float64)
    palf = palette.astype(np.float64)
    out = np.zeros((h, w), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            v = np.clip(work[y, x], 0.0, 255.0)
            bi = nearest_index(v, palf)
            out[y, x] = bi
            err = (v - palf[bi]) * scale
            if x + 1 < w:
                work[y, x + 1] += err * 7 / 16
            if y + 1 < h:
                if x > 0:
                    work[y + 1, x - 1] += err * 3 / 16
                work[y + 1, x] += err * 5 / 16
                if x + 1 < w:
                    work[y + 1, x + 1] += err * 1 / 16
    return out


def lanczos3_reference(x: float) -> float:
    """Windowed sinc, a=3: sinc(x) * sinc(x/3) on |x| < 3, else 0."""
    ax = abs(x)
    if ax >= 3.0:
        return 0.0
    if ax == 0.0:
        return 1.0
    pix = math.pi * ax
    return 3.0 * math.sin(pix) * math.sin(pix / 3.0) / (pix * pix)


def _axis_taps(n_in: int, n_out: int) -> list[tuple[list[int], list[float]]]:
    """Per output index: source indices (clamped) and normalized weights."""
    ratio = Fraction(n_in, n_out)
    stretch = ratio if ratio > 1 else Fraction(1)
    radius = 3 * stretch
    taps = []
    for j in range(n_out):
        centre = Fraction(2 * j + 1) * ratio / 2 - Fraction(1, 2)
        lo = math.ceil(centre - radius)
        hi = math.floor(centre + radius)
        idx = []
        wts = []
        for i in range(lo, hi + 1):
            dist = float((Fraction(i) - centre) / stretch)
            weight = lanczos3_reference(dist)
            if weight != 0.0:
                idx.append(min(max(i, 0), n_in - 1))
                wts.append(weight)
        total = sum(wts)
        wts = [w / total for w in wts]
        taps.append((idx, wts))
    return taps


def direct_resize_values(pixels: np.ndarray, factor: Fraction) -> np.ndarray:
    """Non-separable reference: full 2-D weighted sum per output pixel,
    returned clipped to [0, 255] but before integer rounding."""
    h, w, ch = pixels.shape
    out_w = math.floor(w * factor + Fraction(1, 2))
    out_h = math.floor(h * factor + Fraction(1, 2))
    row_taps = _axis_taps(h, out_h)
    col_taps = _axis_taps(w, out_w)
    src = pixels.astype(np.float64)
    out = np.zeros((out_h, out_w, ch), dtype=np.float64)
    for oy in range(out_h):
        ridx, rwts = row_taps[oy]
        for ox in range(out_w):
            cidx, cwts = col_taps[ox]
            for c in range(ch):
                acc = 0.0
                for ti, wy in zip(ridx, rwts):
                    inner = 0.0
                    for tj, wx in zip(cidx, cwts):
                        inner += wx * src[ti, tj, c]
                    acc += wy * inner
                out[oy, ox, c] = acc
    return np.clip(out, 0.0, 255.0)


def half_boundary_mask(values: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Samples so close to a .5 rounding boundary that float64 summation
    order legitimately decides the rounded result.  Symmetric tap layouts
    can put the exact value of an integer image precisely on such a
    boundary (e.g. an even average of two samples with an odd sum)."""
    return np.abs(values - np.floor(values) - 0.5) < tol


def direct_resize(pixels: np.ndarray, factor: Fraction) -> np.ndarray:
    return np.floor(direct_resize_values(pixels, factor) + 0.5).astype(np.uint8)
