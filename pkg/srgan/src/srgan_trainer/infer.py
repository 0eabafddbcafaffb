"""Inference command conforming to greenstore's external upscaler protocol.

Usage: srgan-infer <in.png> <out.png> --checkpoint DIR

The checkpoint may come from --checkpoint or the SRGAN_CHECKPOINT
environment variable.  When the caller sets GREENSTORE_SCALE it must be
4, the only factor this model family produces.  Exit codes match the
protocol: 0 success, 1 usage or scale mismatch, 2 unreadable input or
unwritable output, 3 missing or unloadable checkpoint.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np
import torch
from greenstore import GreenstoreError, RasterImage, decode_png, encode_png

from .checkpoint import load_generator
from .errors import CheckpointError, ShapeError
from .models import SCALE, Generator


def upscale_image(pixels: np.ndarray, generator: Generator) -> np.ndarray:
    """Upscale one uint8 HxWx3 array to exactly 4x each axis."""
    rgb = np.ascontiguousarray(pixels[:, :, :3])
    x = torch.from_numpy(rgb).permute(2, 0, 1).float().div(255.0).unsqueeze(0)
    with torch.no_grad():
        y = generator(x)
    out = y.squeeze(0).permute(1, 2, 0).clamp(0.0, 1.0).numpy()
    return np.floor(out * 255.0 + 0.5).astype(np.uint8)


class _Parser(argparse.ArgumentParser):
    # exit 1 on bad usage; argparse's native exit code is 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="srgan-infer",
                description="Upscale one PNG 4x with a trained checkpoint.")
    p.add_argument("input", help="PNG file to upscale")
    p.add_argument("output", help="PNG file to write")
    p.add_argument("--checkpoint", default=None,
                   help="checkpoint directory (default: $SRGAN_CHECKPOINT)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    scale = os.environ.get("GREENSTORE_SCALE")
    if scale is not None and scale != str(SCALE):
        print(f"error: this model upscales {SCALE}x, caller asked for "
              f"GREENSTORE_SCALE={scale}", file=sys.stderr)
        return 1

    ckpt = args.checkpoint or os.environ.get("SRGAN_CHECKPOINT")
    if not ckpt:
        print("error: no checkpoint given (--checkpoint or SRGAN_CHECKPOINT)",
              file=sys.stderr)
        return 3
    try:
        generator = load_generator(ckpt)
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    try:
        img = decode_png(Path(args.input).read_bytes())
        out_px = upscale_image(img.pixels, generator)
    except (OSError, GreenstoreError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        Path(args.output).write_bytes(encode_png(RasterImage(out_px)))
    except (OSError, GreenstoreError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
