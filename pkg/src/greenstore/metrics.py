"""Fidelity metrics and report records.

PSNR is computed jointly over every sample of every channel against the
8-bit peak; identical inputs give float('inf'), reported with an "inf"
sentinel rather than a made-up number.  SSIM follows the standard
single-scale form on BT.601 luma: 11x11 Gaussian window (sigma 1.5),
stability constants (0.01*255)^2 and (0.03*255)^2, valid-region windows
only, mean over the SSIM map.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DivideByZero, ShapeMismatch, TooSmall
from .raster import RasterImage

_PEAK_SQ = 255.0 * 255.0
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2
_WINDOW = 11
_SIGMA = 1.5


def _check_pair(a: RasterImage, b: RasterImage):
    if (a.width, a.height, a.channels) != (b.width, b.height, b.channels):
        raise ShapeMismatch(
            f"{a.width}x{a.height}x{a.channels} vs {b.width}x{b.height}x{b.channels}"
        )


def psnr(a: RasterImage, b: RasterImage) -> float:
    """Peak signal-to-noise ratio in dB; inf for identical images."""
    _check_pair(a, b)
    da = a.pixels.astype(np.float64)
    db = b.pixels.astype(np.float64)
    mse = float(np.mean((da - db) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(_PEAK_SQ / mse)


def _gaussian_window() -> np.ndarray:
    offsets = np.arange(_WINDOW, dtype=np.float64) - (_WINDOW - 1) / 2
    g = np.exp(-(offsets**2) / (2.0 * _SIGMA * _SIGMA))
    return g / g.sum()


def _luma(img: RasterImage) -> np.ndarray:
    px = img.pixels[:, :, :3].astype(np.float64)
    return 0.299 * px[:, :, 0] + 0.587 * px[:, :, 1] + 0.114 * px[:, :, 2]


def _windowed_mean(field: np.ndarray, g: np.ndarray) -> np.ndarray:
    m = _WINDOW // 2
    out = correlate1d(field, g, axis=1, mode="constant")
    out = correlate1d(out, g, axis=0, mode="constant")
    return out[m:-m, m:-m]


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean structural similarity over valid 11x11 windows of the luma plane."""
    _check_pair(a, b)
    if min(a.width, a.height) < _WINDOW:
        raise TooSmall(f"ssim needs both dimensions >= {_WINDOW}")
    la = _luma(a)
    lb = _luma(b)
    g = _gaussian_window()
    mu_a = _windowed_mean(la, g)
    mu_b = _windowed_mean(lb, g)
    e_aa = _windowed_mean(la * la, g)
    e_bb = _windowed_mean(lb * lb, g)
    e_ab = _windowed_mean(la * lb, g)
    var_a = e_aa - mu_a * mu_a
    var_b = e_bb - mu_b * mu_b
    cov = e_ab - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + _C1) * (2.0 * cov + _C2)
    den = (mu_a * mu_a + mu_b * mu_b + _C1) * (var_a + var_b + _C2)
    return float(np.mean(num / den))


def compression_percentage(original_bytes: int, stored_bytes: int) -> float:
    """Size reduction as a percentage of the original byte count."""
    if original_bytes == 0:
        raise DivideByZero("original byte count is zero")
    return 100.0 * (1.0 - stored_bytes / original_bytes)


@dataclass(frozen=True)
class QualityReport:
    """One evaluation row: fidelity plus byte accounting."""

    psnr_db: float
    ssim: float
    original_bytes: int
    stored_bytes: int
    compression_pct: float

    @classmethod
    def build(cls, psnr_db: float, ssim_value: float, original_bytes: int, stored_bytes: int):
        return cls(
            psnr_db=psnr_db,
            ssim=ssim_value,
            original_bytes=int(original_bytes),
            stored_bytes=int(stored_bytes),
            compression_pct=compression_percentage(original_bytes, stored_bytes),
        )

    def to_json_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.psnr_db):
            d["psnr_db"] = "inf"
        return d


def format_quality_table(records, columns) -> str:
    """Plain-text table; records are mappings, columns (key, heading) pairs."""
    headings = [h for _, h in columns]
    body = []
    for rec in records:
        row = []
        for key, _ in columns:
            v = rec.get(key, "")
            row.append(v if isinstance(v, str) else f"{v}")
        body.append(row)
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(headings)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headings, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines)
