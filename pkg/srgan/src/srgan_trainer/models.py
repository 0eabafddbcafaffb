"""Generator and discriminator networks for adversarial 4x upscaling.

The generator maps an NCHW batch of RGB images to one exactly four times
as large on each spatial axis (two pixel-shuffle x2 stages).  The
discriminator maps an RGB batch to a per-image probability of being a
real full-resolution image rather than a generated one.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ShapeError

SCALE = 4
MIN_INPUT_EDGE = 16


@dataclass(frozen=True)
class GeneratorConfig:
    """Width and depth knobs; the 4x scale itself is fixed."""

    features: int = 64
    residual_blocks: int = 16

    def __post_init__(self):
        if self.features < 1:
            raise ValueError("features must be positive")
        if self.residual_blocks < 1:
            raise ValueError("need at least one residual block")


def _check_image_batch(x: torch.Tensor, min_edge: int = 1) -> None:
    if x.dim() != 4:
        raise ShapeError(f"expected NCHW input, got {x.dim()} dims")
    if x.shape[1] != 3:
        raise ShapeError(f"expected 3 channels, got {x.shape[1]}")
    if x.shape[2] < min_edge or x.shape[3] < min_edge:
        raise ShapeError(
            f"input {x.shape[2]}x{x.shape[3]} is below the {min_edge}-pixel minimum"
        )


class ResidualBlock(nn.Module):
    """conv-BN-PReLU-conv-BN plus an identity skip.

    With all conv weights and biases zeroed the block is exactly the
    identity map: both batch norms see all-zero activations and emit
    zeros under default affine parameters, so the skip passes through.
    """

    def __init__(self, features: int):
        super().__init__()
        self.conv1 = nn.Conv2d(features, features, 3, padding=1)
        self.bn1 = nn.BatchNorm2d(features)
        self.act = nn.PReLU()
        self.conv2 = nn.Conv2d(features, features, 3, padding=1)
        self.bn2 = nn.BatchNorm2d(features)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.bn2(self.conv2(self.act(self.bn1(self.conv1(x)))))
        return x + y


class UpsampleBlock(nn.Module):
    """conv to 4x the channels, pixel-shuffle into 2x the resolution."""

    def __init__(self, features: int):
        super().__init__()
        self.conv = nn.Conv2d(features, features * 4, 3, padding=1)
        self.shuffle = nn.PixelShuffle(2)
        self.act = nn.PReLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.act(self.shuffle(self.conv(x)))


class Generator(nn.Module):
    """Residual upscaler: 9x9 head, residual trunk, two x2 shuffles, 9x9 tail."""

    def __init__(self, config: GeneratorConfig | None = None):
        super().__init__()
        self.config = config or GeneratorConfig()
        f = self.config.features
        self.head_conv = nn.Conv2d(3, f, 9, padding=4)
        self.head_act = nn.PReLU()
        self.blocks = nn.Sequential(
            *[ResidualBlock(f) for _ in range(self.config.residual_blocks)]
        )
        self.post_conv = nn.Conv2d(f, f, 3, padding=1)
        self.post_bn = nn.BatchNorm2d(f)
        self.up1 = UpsampleBlock(f)
        self.up2 = UpsampleBlock(f)
        self.tail = nn.Conv2d(f, 3, 9, padding=4)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_image_batch(x, MIN_INPUT_EDGE)
        head = self.head_act(self.head_conv(x))
        y = self.post_bn(self.post_conv(self.blocks(head))) + head
        return self.tail(self.up2(self.up1(y)))


class Discriminator(nn.Module):
    """Real-vs-generated classifier emitting one probability per image.

    Eight 3x3 conv stages double the feature maps and halve resolution
    in alternation (64 through 512); adaptive pooling makes the dense
    head size-independent, so any input of MIN_INPUT_EDGE or more works.
    """

    def __init__(self):
        super().__init__()
        stages: list[nn.Module] = [
            nn.Conv2d(3, 64, 3, padding=1),
            nn.LeakyReLU(0.2),
        ]
        channels = [(64, 64, 2), (64, 128, 1), (128, 128, 2), (128, 256, 1),
                    (256, 256, 2), (256, 512, 1), (512, 512, 2)]
        for c_in, c_out, stride in channels:
            stages += [
                nn.Conv2d(c_in, c_out, 3, stride=stride, padding=1),
                nn.BatchNorm2d(c_out),
                nn.LeakyReLU(0.2),
            ]
        self.features = nn.Sequential(*stages)
        self.pool = nn.AdaptiveAvgPool2d((6, 6))
        self.dense1 = nn.Linear(512 * 6 * 6, 1024)
        self.act = nn.LeakyReLU(0.2)
        self.dense2 = nn.Linear(1024, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_image_batch(x)
        y = self.pool(self.features(x)).flatten(1)
        logit = self.dense2(self.act(self.dense1(y)))
        return torch.sigmoid(logit).squeeze(1)
