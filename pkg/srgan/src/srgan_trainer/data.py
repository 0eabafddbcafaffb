"""Training pairs: full-resolution PNGs and their 4x-downscaled partners.

Low-resolution images are produced by greenstore's resampler, the same
filter the archival pipeline applies before storage, so the trainer
learns to invert exactly the degradation retrieval has to undo.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from greenstore import RasterImage, decode_png, downscale_4x

from .errors import EmptyDataset, ShapeError
from .models import SCALE


def _load_pair(path: Path) -> tuple[np.ndarray, np.ndarray]:
    img = decode_png(path.read_bytes())
    px = img.pixels[:, :, :3]
    h = px.shape[0] - px.shape[0] % SCALE
    w = px.shape[1] - px.shape[1] % SCALE
    if h == 0 or w == 0:
        raise ShapeError(f"{path.name}: smaller than {SCALE}x{SCALE}")
    hr = np.ascontiguousarray(px[:h, :w])
    lr = downscale_4x(RasterImage(hr)).pixels
    return hr, lr


def _to_chw(px: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(px).permute(2, 0, 1).float() / 255.0


class PairedCrops:
    """Serves aligned random crops from an in-memory image directory.

    `crop` is the full-resolution crop edge; the paired low-resolution
    crop is a quarter of it, cut from the same spot of the downscaled
    image.  All randomness flows through the generator handed to
    `batch`, so sampling is checkpointable.
    """

    def __init__(self, root: str | Path, crop: int):
        if crop % SCALE != 0 or crop < SCALE:
            raise ValueError(f"crop must be a positive multiple of {SCALE}, got {crop}")
        self.crop = crop
        paths = sorted(Path(root).glob("*.png"))
        if not paths:
            raise EmptyDataset(f"no .png files under {root}")
        self.hr: list[torch.Tensor] = []
        self.lr: list[torch.Tensor] = []
        for path in paths:
            hr, lr = _load_pair(path)
            if hr.shape[0] < crop or hr.shape[1] < crop:
                raise ShapeError(
                    f"{path.name}: {hr.shape[1]}x{hr.shape[0]} cannot fit a {crop} crop"
                )
            self.hr.append(_to_chw(hr))
            self.lr.append(_to_chw(lr))

    def __len__(self) -> int:
        return len(self.hr)

    def batch(self, n: int, rng: torch.Generator) -> tuple[torch.Tensor, torch.Tensor]:
        cl = self.crop // SCALE
        hr_out, lr_out = [], []
        for which in torch.randint(len(self.hr), (n,), generator=rng).tolist():
            lr = self.lr[which]
            ly = int(torch.randint(lr.shape[1] - cl + 1, (1,), generator=rng))
            lx = int(torch.randint(lr.shape[2] - cl + 1, (1,), generator=rng))
            lr_out.append(lr[:, ly:ly + cl, lx:lx + cl])
            hy, hx = ly * SCALE, lx * SCALE
            hr_out.append(self.hr[which][:, hy:hy + self.crop, hx:hx + self.crop])
        return torch.stack(hr_out), torch.stack(lr_out)
