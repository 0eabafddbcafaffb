"""Adversarially trained 4x upscaler pluggable into greenstore retrieval."""

from .checkpoint import load_generator, load_metadata, save_checkpoint
from .data import PairedCrops
from .errors import (CheckpointError, EmptyDataset, ShapeError, TrainerError,
                     TrainingDiverged)
from .losses import (ADVERSARIAL_WEIGHT, LossParts, PerceptualLoss,
                     PixelFeatures, VggFeatures, content_loss,
                     discriminator_loss, generator_adversarial_loss)
from .models import (MIN_INPUT_EDGE, SCALE, Discriminator, Generator,
                     GeneratorConfig, ResidualBlock, UpsampleBlock)
from .train import TrainConfig, train

__all__ = [
    "ADVERSARIAL_WEIGHT", "CheckpointError", "Discriminator", "EmptyDataset",
    "Generator", "GeneratorConfig", "LossParts", "MIN_INPUT_EDGE",
    "PairedCrops", "PerceptualLoss", "PixelFeatures", "ResidualBlock",
    "SCALE", "ShapeError", "TrainConfig", "TrainerError", "TrainingDiverged",
    "UpsampleBlock", "VggFeatures", "content_loss", "discriminator_loss",
    "generator_adversarial_loss", "load_generator", "load_metadata",
    "save_checkpoint", "train",
]
