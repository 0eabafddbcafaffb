"""Loss terms for adversarial upscaler training.

The generator objective is a weighted sum of a content term (mean
squared distance between feature maps of the generated and reference
images) and an adversarial term derived from discriminator predictions:

    total = content + 1e-3 * adversarial

Feature maps come from a pluggable extractor.  The identity extractor
scores content in pixel space; the VGG19 extractor scores it in conv
feature space at a configurable depth.
"""

from __future__ import annotations

from typing import NamedTuple

import torch
from torch import nn

from .errors import ShapeError

ADVERSARIAL_WEIGHT = 1e-3
# keeps log() finite when the discriminator saturates
_PROB_EPS = 1e-7


class LossParts(NamedTuple):
    content: torch.Tensor
    adversarial: torch.Tensor
    total: torch.Tensor


def content_loss(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Mean squared distance between two feature tensors of equal shape."""
    if a.shape != b.shape:
        raise ShapeError(f"feature shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")
    return torch.mean((a - b) ** 2)


def generator_adversarial_loss(d_pred: torch.Tensor) -> torch.Tensor:
    """How confidently the discriminator rejected the generated batch."""
    p = d_pred.clamp(_PROB_EPS, 1.0 - _PROB_EPS)
    return -torch.log(p).mean()


def discriminator_loss(d_real: torch.Tensor, d_fake: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy against real=1, generated=0."""
    real = d_real.clamp(_PROB_EPS, 1.0 - _PROB_EPS)
    fake = d_fake.clamp(_PROB_EPS, 1.0 - _PROB_EPS)
    return -(torch.log(real).mean() + torch.log1p(-fake).mean())


class PixelFeatures(nn.Module):
    """Identity extractor: content loss becomes image-space MSE."""

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x


class VggFeatures(nn.Module):
    """Frozen VGG19 conv stack truncated after a named conv layer.

    Without a weights file the stack keeps torchvision's random
    initialization: a fixed random projection that exercises the loss
    mechanics end to end but carries no learned perceptual prior
    (pretrained weights need a network download, so they are opt-in via
    a locally supplied state-dict file).
    """

    # layer name -> end of the module slice in torchvision's vgg19().features
    LAYERS = {"conv2_2": 8, "conv3_4": 17, "conv4_4": 26, "conv5_4": 35}

    def __init__(self, layer: str = "conv5_4", weights_file: str | None = None):
        super().__init__()
        if layer not in self.LAYERS:
            raise ValueError(f"layer must be one of {sorted(self.LAYERS)}, got {layer!r}")
        from torchvision.models import vgg19

        net = vgg19(weights=None)
        if weights_file is not None:
            net.load_state_dict(torch.load(weights_file, map_location="cpu"))
        self.stack = net.features[: self.LAYERS[layer]]
        self.stack.eval()
        for p in self.stack.parameters():
            p.requires_grad_(False)

    def train(self, mode: bool = True):
        # frozen extractor stays in eval mode regardless of the parent
        return super().train(False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.stack(x)


class PerceptualLoss(nn.Module):
    """Combines feature-space content with the adversarial term."""

    def __init__(self, extractor: nn.Module | None = None):
        super().__init__()
        self.extractor = extractor if extractor is not None else PixelFeatures()

    def forward(self, sr: torch.Tensor, hr: torch.Tensor,
                d_pred: torch.Tensor) -> LossParts:
        if sr.shape != hr.shape:
            raise ShapeError(f"image shapes differ: {tuple(sr.shape)} vs {tuple(hr.shape)}")
        content = content_loss(self.extractor(sr), self.extractor(hr))
        adversarial = generator_adversarial_loss(d_pred)
        return LossParts(content, adversarial,
                         content + ADVERSARIAL_WEIGHT * adversarial)
