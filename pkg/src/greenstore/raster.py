"""In-memory raster images and a self-contained PNG codec.

The codec covers the subset an archival pipeline needs: 8-bit greyscale,
greyscale+alpha, RGB, RGBA and indexed-colour images, non-interlaced only.
Greyscale variants are promoted to RGB/RGBA on decode so the rest of the
package only ever sees 3- or 4-channel data.  Encoding supports truecolor
and indexed output with the five standard row filters; the adaptive
strategy picks, per row, the filter with the smallest sum of absolute
filtered bytes (bytes read as signed values, the usual PNG heuristic).
Stream compression is RFC 1950/1951 deflate via zlib.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import CorruptInput, InvalidConfig, PaletteMismatch, Unsupported

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

_SIGNATURE = b"\x89PNG\r\n\x1a\n"
FILTER_NAMES = ("none", "sub", "up", "average", "paeth")
_COLOR_CHANNELS = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit interleaved image: pixels has shape (height, width, 3 or 4)."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.dtype != np.uint8:
            raise InvalidConfig(f"pixels must be uint8, got {arr.dtype}")
        if arr.ndim != 3 or arr.shape[2] not in (3, 4):
            raise InvalidConfig(f"pixels must be (h, w, 3|4), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidConfig("image must be at least 1x1")
        if not arr.flags.c_contiguous:
            arr = np.ascontiguousarray(arr)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def data(self) -> np.ndarray:
        """Flat row-major sample view, length width*height*channels."""
        return self.pixels.reshape(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True)
class EncodeParams:
    """Encoder knobs.

    filter_strategy: "adaptive" or one fixed filter name.
    compression_effort: deflate effort 1 (fast) .. 9 (small).
    palette_mode: emit indexed colour when a palette is supplied.
    """

    filter_strategy: str = "adaptive"
    compression_effort: int = 6
    palette_mode: bool = True

    def __post_init__(self):
        if self.filter_strategy not in ("adaptive",) + FILTER_NAMES:
            raise InvalidConfig(f"unknown filter strategy {self.filter_strategy!r}")
        if not 1 <= int(self.compression_effort) <= 9:
            raise InvalidConfig("compression_effort must be in [1, 9]")


def measure_sizes(original, stored) -> tuple[int, int]:
    """Byte counts of the original and stored representations."""
    return len(original), len(stored)


# ---------------------------------------------------------------------------
# row filtering


def _filter_candidates(rows: np.ndarray, bpp: int) -> np.ndarray:
    """All five filtered versions of every row, shape (5, h, rowbytes).

    Filters are defined on the raw bytes of the current and previous row,
    so every row can be produced independently.
    """
    prior = np.zeros_like(rows)
    prior[1:] = rows[:-1]
    left = np.zeros_like(rows)
    left[:, bpp:] = rows[:, :-bpp]
    upleft = np.zeros_like(rows)
    upleft[1:, bpp:] = rows[:-1, :-bpp]

    avg_pred = ((left.astype(np.uint16) + prior.astype(np.uint16)) >> 1).astype(np.uint8)

    a = left.astype(np.int16)
    b = prior.astype(np.int16)
    c = upleft.astype(np.int16)
    p = a + b - c
    pa = np.abs(p - a)
    pb = np.abs(p - b)
    pc = np.abs(p - c)
    paeth_pred = np.where((pa <= pb) & (pa <= pc), a, np.where(pb <= pc, b, c)).astype(np.uint8)

    return np.stack(
        [rows, rows - left, rows - prior, rows - avg_pred, rows - paeth_pred]
    )


def _filter_cost(cand: np.ndarray) -> np.ndarray:
    """Per-row heuristic: sum of |byte| with bytes read as signed, (5, h)."""
    mag = np.minimum(cand, -cand)  # two's-complement magnitude, stays uint8
    return mag.sum(axis=2, dtype=np.int64)


def _filter_rows(rows: np.ndarray, bpp: int, strategy: str) -> np.ndarray:
    """Serialize rows with filter bytes, shape (h, 1 + rowbytes)."""
    cand = _filter_candidates(rows, bpp)
    if strategy == "adaptive":
        choice = np.argmin(_filter_cost(cand), axis=0).astype(np.uint8)
    else:
        choice = np.full(rows.shape[0], FILTER_NAMES.index(strategy), dtype=np.uint8)
    out = np.empty((rows.shape[0], rows.shape[1] + 1), dtype=np.uint8)
    out[:, 0] = choice
    out[:, 1:] = np.take_along_axis(cand, choice[None, :, None].astype(np.intp), axis=0)[0]
    return out


def _unfilter_rows_impl(rows, ftypes, bpp):
    # rows: (h, rowbytes) uint8, filtered in, reconstructed in place.
    h, rb = rows.shape
    for y in range(h):
        ft = ftypes[y]
        if ft == 0:
            continue
        if ft == 1:
            for i in range(bpp, rb):
                rows[y, i] = np.uint8((np.int32(rows[y, i]) + np.int32(rows[y, i - bpp])) & 0xFF)
        elif ft == 2:
            if y > 0:
                for i in range(rb):
                    rows[y, i] = np.uint8((np.int32(rows[y, i]) + np.int32(rows[y - 1, i])) & 0xFF)
        elif ft == 3:
            for i in range(rb):
                a = np.int32(rows[y, i - bpp]) if i >= bpp else 0
                b = np.int32(rows[y - 1, i]) if y > 0 else 0
                rows[y, i] = np.uint8((np.int32(rows[y, i]) + ((a + b) >> 1)) & 0xFF)
        else:
            for i in range(rb):
                a = np.int32(rows[y, i - bpp]) if i >= bpp else 0
                b = np.int32(rows[y - 1, i]) if y > 0 else 0
                c = np.int32(rows[y - 1, i - bpp]) if (y > 0 and i >= bpp) else 0
                p = a + b - c
                pa = abs(p - a)
                pb = abs(p - b)
                pc = abs(p - c)
                if pa <= pb and pa <= pc:
                    pred = a
                elif pb <= pc:
                    pred = b
                else:
                    pred = c
                rows[y, i] = np.uint8((np.int32(rows[y, i]) + pred) & 0xFF)


if njit is not None:
    _unfilter_rows = njit(cache=True)(_unfilter_rows_impl)
else:  # pragma: no cover
    _unfilter_rows = _unfilter_rows_impl


# ---------------------------------------------------------------------------
# container


def _chunk(ctype: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(ctype + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + ctype + payload + struct.pack(">I", crc)


def _iter_chunks(data: bytes):
    if data[:8] != _SIGNATURE:
        raise CorruptInput("not a PNG byte stream")
    pos = 8
    end = len(data)
    while True:
        if pos + 8 > end:
            raise CorruptInput("truncated chunk header")
        (length,) = struct.unpack_from(">I", data, pos)
        ctype = data[pos + 4 : pos + 8]
        body_end = pos + 8 + length
        if body_end + 4 > end:
            raise CorruptInput("truncated chunk body")
        payload = data[pos + 8 : body_end]
        (crc,) = struct.unpack_from(">I", data, body_end)
        if zlib.crc32(ctype + payload) & 0xFFFFFFFF != crc:
            raise CorruptInput(f"CRC mismatch in {ctype!r} chunk")
        yield ctype, payload
        pos = body_end + 4
        if ctype == b"IEND":
            return


def decode_png(data: bytes) -> RasterImage:
    """Decode a PNG byte stream.

    Greyscale images come back as RGB, greyscale+alpha as RGBA, indexed
    images as their RGB expansion.  16-bit depths and interlacing are
    rejected as unsupported; malformed streams raise CorruptInput.
    """
    header = None
    palette = None
    idat = []
    saw_end = False
    for ctype, payload in _iter_chunks(bytes(data)):
        if header is None and ctype != b"IHDR":
            raise CorruptInput("first chunk must be IHDR")
        if ctype == b"IHDR":
            if header is not None:
                raise CorruptInput("duplicate IHDR")
            if len(payload) != 13:
                raise CorruptInput("bad IHDR length")
            header = struct.unpack(">IIBBBBB", payload)
        elif ctype == b"PLTE":
            if len(payload) % 3 or not payload:
                raise CorruptInput("bad PLTE length")
            palette = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3)
        elif ctype == b"IDAT":
            idat.append(payload)
        elif ctype == b"IEND":
            saw_end = True
        elif ctype[0] & 0x20 == 0:
            # critical chunk we do not know
            raise Unsupported(f"unsupported critical chunk {ctype.decode('latin1')}")
        # ancillary chunks are dropped

    if header is None or not saw_end:
        raise CorruptInput("missing IHDR or IEND")
    width, height, depth, color, comp, filt, interlace = header
    if width == 0 or height == 0:
        raise CorruptInput("zero image dimension")
    if comp != 0 or filt != 0:
        raise CorruptInput("unknown compression or filter method")
    if interlace != 0:
        raise Unsupported("interlaced PNG is not supported")
    if color not in _COLOR_CHANNELS:
        raise Unsupported(f"unsupported colour type {color}")
    if depth != 8:
        raise Unsupported(f"unsupported bit depth {depth}")
    if color == 3 and palette is None:
        raise CorruptInput("indexed image without PLTE")
    if not idat:
        raise CorruptInput("missing IDAT")

    ch = _COLOR_CHANNELS[color]
    rowbytes = width * ch
    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as exc:
        raise CorruptInput(f"bad deflate stream: {exc}") from exc
    if len(raw) != height * (rowbytes + 1):
        raise CorruptInput("pixel data length mismatch")

    stream = np.frombuffer(raw, dtype=np.uint8).reshape(height, rowbytes + 1)
    ftypes = np.ascontiguousarray(stream[:, 0])
    if ftypes.max(initial=0) > 4:
        raise CorruptInput("unknown row filter type")
    rows = stream[:, 1:].copy()  # frombuffer memory is read-only; kernel writes in place
    _unfilter_rows(rows, ftypes, ch)

    if color == 3:
        idx = rows.reshape(height, width)
        if int(idx.max()) >= palette.shape[0]:
            raise CorruptInput("palette index out of range")
        return RasterImage(palette[idx])
    arr = rows.reshape(height, width, ch)
    if color == 0:
        arr = np.repeat(arr, 3, axis=2)
    elif color == 4:
        arr = np.concatenate([np.repeat(arr[:, :, :1], 3, axis=2), arr[:, :, 1:]], axis=2)
    return RasterImage(arr)


def encode_png(img: RasterImage, palette=None, params: EncodeParams | None = None) -> bytes:
    """Encode an image to PNG bytes.

    With a palette (and palette_mode on) the output is indexed colour;
    every pixel must then be an exact palette member or PaletteMismatch
    is raised.  Otherwise output is truecolor RGB/RGBA.
    """
    params = params or EncodeParams()
    indexed = palette is not None and params.palette_mode

    if indexed:
        if img.channels != 3:
            raise InvalidConfig("indexed output requires a 3-channel image")
        pal = palette.as_array()
        packed_pal = (
            pal[:, 0].astype(np.uint32) << 16
            | pal[:, 1].astype(np.uint32) << 8
            | pal[:, 2].astype(np.uint32)
        )
        order = np.argsort(packed_pal, kind="stable")
        px = img.pixels.astype(np.uint32)
        packed_px = (px[:, :, 0] << 16 | px[:, :, 1] << 8 | px[:, :, 2]).reshape(-1)
        slot = np.searchsorted(packed_pal[order], packed_px)
        slot = np.clip(slot, 0, len(order) - 1)
        idx = order[slot]
        if not np.array_equal(packed_pal[idx], packed_px):
            raise PaletteMismatch("image contains colours outside the palette")
        rows = idx.astype(np.uint8).reshape(img.height, img.width)
        color, bpp = 3, 1
    else:
        rows = img.pixels.reshape(img.height, img.width * img.channels)
        color, bpp = (2, 3) if img.channels == 3 else (6, 4)

    stream = _filter_rows(np.ascontiguousarray(rows), bpp, params.filter_strategy)
    compressed = zlib.compress(stream.tobytes(), params.compression_effort)

    parts = [
        _SIGNATURE,
        _chunk(b"IHDR", struct.pack(">IIBBBBB", img.width, img.height, 8, color, 0, 0, 0)),
    ]
    if indexed:
        parts.append(_chunk(b"PLTE", palette.as_array().tobytes()))
    parts.append(_chunk(b"IDAT", compressed))
    parts.append(_chunk(b"IEND", b""))
    return b"".join(parts)
