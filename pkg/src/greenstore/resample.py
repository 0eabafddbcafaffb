"""Separable Lanczos3 resampling.

Resizing runs a horizontal pass then a vertical pass over float64 data;
rounding happens once, at the final output.  Tap positions and kernel
arguments are derived with exact rational arithmetic and every weighted
sum is accumulated in a centre-symmetric pair order, which makes
mirroring the input and mirroring the output bit-identical operations.

Downscaling stretches the kernel by the inverse scale so it acts as a
low-pass filter; edges are handled by clamping source indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InvalidConfig, TooSmall
from .raster import RasterImage

SCALE_FACTOR = 4
_RADIUS = 3


def lanczos3_kernel(x: float) -> float:
    """Windowed sinc: sinc(x) * sinc(x/3) for |x| < 3, else 0."""
    ax = abs(float(x))
    if ax >= 3.0:
        return 0.0
    if ax == 0.0:
        return 1.0
    px = math.pi * ax
    return 3.0 * math.sin(px) * math.sin(px / 3.0) / (px * px)


@dataclass(frozen=True)
class ResampleSpec:
    """A resize request: output_dim = round(input_dim * factor)."""

    factor: Fraction

    def __post_init__(self):
        try:
            f = Fraction(self.factor)
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad resample factor {self.factor!r}") from exc
        if f <= 0:
            raise InvalidConfig("resample factor must be positive")
        object.__setattr__(self, "factor", f)


def _paired_total(values: np.ndarray) -> float:
    """Sum in centre-symmetric pair order (stable under reversal)."""
    k = len(values)
    total = 0.0
    for p in range(k // 2):
        total += values[p] + values[k - 1 - p]
    if k % 2:
        total += values[k // 2]
    return total


@lru_cache(maxsize=128)
def _axis_plan(n_in: int, n_out: int):
    """Output positions grouped by shared weight vector.

    Centres whose output indices differ by the reduced ratio's denominator
    are an exact integer apart in source space, so their kernel arguments,
    and therefore their weights, are identical.  Each group carries
    (output indices, per-output clamped tap indices, weights).
    """
    ratio = Fraction(n_in, n_out)
    stretch = ratio if ratio > 1 else Fraction(1)
    radius = _RADIUS * stretch
    period = ratio.denominator
    shift = ratio.numerator
    groups = []
    for r in range(min(period, n_out)):
        js = np.arange(r, n_out, period, dtype=np.int64)
        centre = (2 * r + 1) * ratio / 2 - Fraction(1, 2)
        lo = math.ceil(centre - radius)
        hi = math.floor(centre + radius)
        w = np.array(
            [lanczos3_kernel(float(abs(t - centre) / stretch)) for t in range(lo, hi + 1)],
            dtype=np.float64,
        )
        w /= _paired_total(w)
        starts = lo + (js - r) // period * shift
        idx = starts[:, None] + np.arange(hi - lo + 1, dtype=np.int64)[None, :]
        np.clip(idx, 0, n_in - 1, out=idx)
        groups.append((js, idx, w))
    return tuple(groups)


def _resample_axis(arr: np.ndarray, n_out: int, axis: int) -> np.ndarray:
    work = np.moveaxis(arr, axis, 0)
    out = np.empty((n_out,) + work.shape[1:], dtype=np.float64)
    for js, idx, w in _axis_plan(work.shape[0], n_out):
        k = len(w)
        acc = np.zeros((len(js),) + work.shape[1:], dtype=np.float64)
        # Centre-symmetric pair order keeps mirrored inputs bit-identical.
        for p in range(k // 2):
            acc += work[idx[:, p]] * w[p] + work[idx[:, k - 1 - p]] * w[k - 1 - p]
        if k % 2:
            m = k // 2
            acc += work[idx[:, m]] * w[m]
        out[js] = acc
    return np.moveaxis(out, 0, axis)


def _resize_to(img: RasterImage, out_w: int, out_h: int) -> RasterImage:
    data = img.pixels.astype(np.float64)
    data = _resample_axis(data, out_w, axis=1)
    data = _resample_axis(data, out_h, axis=0)
    out = np.floor(np.clip(data, 0.0, 255.0) + 0.5).astype(np.uint8)
    return RasterImage(out)


def resize(img: RasterImage, spec: ResampleSpec) -> RasterImage:
    """Resize by a rational factor with the Lanczos3 kernel."""
    f = spec.factor
    out_w = math.floor(img.width * f + Fraction(1, 2))
    out_h = math.floor(img.height * f + Fraction(1, 2))
    if out_w < 1 or out_h < 1:
        raise InvalidConfig(f"factor {f} collapses {img.width}x{img.height} to nothing")
    return _resize_to(img, out_w, out_h)


def downscale_4x(img: RasterImage) -> RasterImage:
    """Quarter each dimension (ceil division); needs at least 4x4 input."""
    if img.width < SCALE_FACTOR or img.height < SCALE_FACTOR:
        raise TooSmall(f"{img.width}x{img.height} is below {SCALE_FACTOR}x{SCALE_FACTOR}")
    return _resize_to(img, -(-img.width // SCALE_FACTOR), -(-img.height // SCALE_FACTOR))


def upscale_4x(img: RasterImage) -> RasterImage:
    """Quadruple each dimension."""
    return _resize_to(img, img.width * SCALE_FACTOR, img.height * SCALE_FACTOR)
