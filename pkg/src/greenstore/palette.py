"""Palette construction and error-diffusion quantization.

median_cut builds a palette over the image's RGB histogram by repeatedly
splitting the box with the widest channel range at its weighted median;
each final colour is the weighted mean of its box.  dither_floyd_steinberg
walks pixels left-to-right, top-to-bottom, snaps each one to the nearest
palette colour (squared Euclidean distance, ties to the lowest index) and
diffuses the clamped error to the classic four neighbours with weights
7/16, 3/16, 5/16, 1/16, each scaled by a strength in [0, 1].  Strength 0
degenerates to plain per-pixel nearest-colour quantization.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidConfig
from .raster import RasterImage

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None


@dataclass(frozen=True)
class Palette:
    """Ordered RGB triples, 1..256 entries, no duplicates."""

    colors: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        colors = tuple(tuple(int(v) for v in c) for c in self.colors)
        if not 1 <= len(colors) <= 256:
            raise InvalidConfig(f"palette must hold 1..256 colours, got {len(colors)}")
        for c in colors:
            if len(c) != 3 or any(not 0 <= v <= 255 for v in c):
                raise InvalidConfig(f"bad palette entry {c!r}")
        if len(set(colors)) != len(colors):
            raise InvalidConfig("palette contains duplicate entries")
        object.__setattr__(self, "colors", colors)

    def __len__(self) -> int:
        return len(self.colors)

    def as_array(self) -> np.ndarray:
        return np.array(self.colors, dtype=np.uint8)


@dataclass(frozen=True)
class DitherConfig:
    """Pipeline quantization settings."""

    scale: float = 1.0
    palette_size: int = 256

    def __post_init__(self):
        if not 0.0 <= float(self.scale) <= 1.0:
            raise InvalidConfig(f"dither scale must be in [0, 1], got {self.scale}")
        if not 2 <= int(self.palette_size) <= 256:
            raise InvalidConfig(f"palette size must be in [2, 256], got {self.palette_size}")
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "palette_size", int(self.palette_size))


def _box_stats(cols: np.ndarray) -> tuple[int, int]:
    """(widest range, channel index) for one box; ties pick R before G before B."""
    spread = cols.max(axis=0) - cols.min(axis=0)
    ch = int(np.argmax(spread))
    return int(spread[ch]), ch


def median_cut(img: RasterImage, n: int) -> Palette:
    """Palette of at most n colours (n in [2, 256]) from the image histogram.

    An image with at most n distinct colours gets exactly that colour set.
    """
    if not 2 <= int(n) <= 256:
        raise InvalidConfig(f"palette size must be in [2, 256], got {n}")
    px = img.pixels[:, :, :3].reshape(-1, 3).astype(np.uint32)
    packed = px[:, 0] << 16 | px[:, 1] << 8 | px[:, 2]
    uniq, counts = np.unique(packed, return_counts=True)
    cols = np.stack([uniq >> 16 & 255, uniq >> 8 & 255, uniq & 255], axis=1).astype(np.int64)

    boxes = [(cols, counts, *_box_stats(cols))]
    while len(boxes) < n:
        best = -1
        best_spread = 0
        for i, (_, _, spread, _) in enumerate(boxes):
            if spread > best_spread:
                best, best_spread = i, spread
        if best < 0:
            break  # every box is a single colour
        bcols, bcounts, _, ch = boxes[best]
        order = np.argsort(bcols[:, ch], kind="stable")
        bcols = bcols[order]
        bcounts = bcounts[order]
        cum = np.cumsum(bcounts)
        half = cum[-1] / 2
        split = int(np.searchsorted(cum, half))
        split = min(split, len(bcols) - 2)
        lo = (bcols[: split + 1], bcounts[: split + 1])
        hi = (bcols[split + 1 :], bcounts[split + 1 :])
        boxes[best] = (*lo, *_box_stats(lo[0]))
        boxes.append((*hi, *_box_stats(hi[0])))

    out: list[tuple[int, int, int]] = []
    for bcols, bcounts, _, _ in boxes:
        total = bcounts.sum()
        mean = (bcols * bcounts[:, None]).sum(axis=0) / total
        color = tuple(int(v) for v in np.floor(mean + 0.5).astype(np.int64))
        if color not in out:
            out.append(color)
    return Palette(tuple(out))


# Bucket grid resolution; the kernel's >> 3 bucket math assumes exactly 32.
_BUCKETS = 32


def _nearest_table(pal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-bucket candidate lists covering every possible nearest palette entry.

    RGB space is cut into 32x32x32 buckets of side 8.  A bucket keeps entry p
    when dist(center, p) <= dist(center, nearest) + bucket diagonal: for any
    query q in the bucket the true nearest n satisfies
    dist(q, n) <= dist(q, c) + dist(c, nearest), so every entry tied with or
    beating n lies within that radius of the center.  Lists hold ascending
    palette indices, flattened CSR-style.
    """
    side = 256.0 / _BUCKETS
    ax = (np.arange(_BUCKETS, dtype=np.float64) + 0.5) * side
    centers = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    d2 = (centers * centers).sum(axis=1)[:, None] - 2.0 * centers @ pal.T + (pal * pal).sum(axis=1)[None, :]
    np.maximum(d2, 0.0, out=d2)
    reach = np.sqrt(d2.min(axis=1)) + np.sqrt(3.0) * side
    keep = d2 <= reach[:, None] ** 2 + 1e-9
    offsets = np.zeros(keep.shape[0] + 1, dtype=np.int64)
    np.cumsum(keep.sum(axis=1), out=offsets[1:])
    return offsets, np.nonzero(keep)[1].astype(np.int64)


def _dither_scan_impl(work, pal, offsets, cand, scale, idx_out):
    # work: (h, w, 3) float64 accumulation buffer, consumed destructively.
    # offsets/cand come from _nearest_table; scanning a bucket's candidates in
    # ascending palette order with a strict less-than update keeps exact
    # squared-distance comparison and lowest-index tie-breaking.
    h, w = work.shape[0], work.shape[1]
    for y in range(h):
        for x in range(w):
            r = min(max(work[y, x, 0], 0.0), 255.0)
            g = min(max(work[y, x, 1], 0.0), 255.0)
            b = min(max(work[y, x, 2], 0.0), 255.0)
            bucket = ((int(r) >> 3) * _BUCKETS + (int(g) >> 3)) * _BUCKETS + (int(b) >> 3)
            best = np.inf
            bi = 0
            for t in range(offsets[bucket], offsets[bucket + 1]):
                p = cand[t]
                dr = r - pal[p, 0]
                d = dr * dr
                if d >= best:
                    continue
                dg = g - pal[p, 1]
                d += dg * dg
                if d >= best:
                    continue
                db = b - pal[p, 2]
                d += db * db
                if d < best:
                    best = d
                    bi = p
            idx_out[y, x] = bi
            er = (r - pal[bi, 0]) * scale
            eg = (g - pal[bi, 1]) * scale
            eb = (b - pal[bi, 2]) * scale
            if x + 1 < w:
                work[y, x + 1, 0] += er * 0.4375  # 7/16
                work[y, x + 1, 1] += eg * 0.4375
                work[y, x + 1, 2] += eb * 0.4375
            if y + 1 < h:
                if x > 0:
                    work[y + 1, x - 1, 0] += er * 0.1875  # 3/16
                    work[y + 1, x - 1, 1] += eg * 0.1875
                    work[y + 1, x - 1, 2] += eb * 0.1875
                work[y + 1, x, 0] += er * 0.3125  # 5/16
                work[y + 1, x, 1] += eg * 0.3125
                work[y + 1, x, 2] += eb * 0.3125
                if x + 1 < w:
                    work[y + 1, x + 1, 0] += er * 0.0625  # 1/16
                    work[y + 1, x + 1, 1] += eg * 0.0625
                    work[y + 1, x + 1, 2] += eb * 0.0625


if njit is not None:
    _dither_scan = njit(cache=True)(_dither_scan_impl)
else:  # pragma: no cover
    _dither_scan = _dither_scan_impl


@lru_cache(maxsize=8)
def _palette_search_data(palette: Palette) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pal = palette.as_array().astype(np.float64)
    offsets, cand = _nearest_table(pal)
    return pal, offsets, cand


def dither_floyd_steinberg(img: RasterImage, palette: Palette, scale: float = 1.0) -> RasterImage:
    """Snap an image onto a palette with scaled Floyd-Steinberg diffusion.

    An alpha channel passes through untouched.  Every output RGB value is
    an exact palette member.
    """
    if not 0.0 <= float(scale) <= 1.0:
        raise InvalidConfig(f"dither scale must be in [0, 1], got {scale}")
    if not isinstance(palette, Palette):
        raise InvalidConfig("palette must be a Palette")
    work = img.pixels[:, :, :3].astype(np.float64)
    pal, offsets, cand = _palette_search_data(palette)
    idx = np.zeros((img.height, img.width), dtype=np.int64)
    _dither_scan(work, pal, offsets, cand, float(scale), idx)
    rgb = palette.as_array()[idx]
    if img.channels == 4:
        rgb = np.concatenate([rgb, img.pixels[:, :, 3:]], axis=2)
    return RasterImage(rgb)


def quantize_for_storage(img: RasterImage, cfg: DitherConfig) -> tuple[RasterImage, Palette]:
    """Derive a palette from the image and dither onto it."""
    pal = median_cut(img, cfg.palette_size)
    return dither_floyd_steinberg(img, pal, cfg.scale), pal
