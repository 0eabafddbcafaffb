"""Exception types raised across the trainer."""


class TrainerError(Exception):
    """Base class for everything this package raises on purpose."""


class ShapeError(TrainerError):
    """Tensor has the wrong rank, channel count, or mismatched dims."""


class EmptyDataset(TrainerError):
    """The training directory contains no usable images."""


class CheckpointError(TrainerError):
    """Checkpoint directory is missing, incomplete, or unloadable."""


class TrainingDiverged(TrainerError):
    """A logged loss went non-finite; training aborts with diagnostics."""
