"""Power-aware image archival.

Archive PNGs as palette-dithered, 4x-downscaled thumbnails and retrieve
them through a 4x upscaler; score fidelity with PSNR/SSIM and account for
the yearly storage energy and carbon the shrunken footprint saves.
"""

from .energy import (
    EnergyReport,
    EnergyScenario,
    ProjectionReport,
    annual_energy_kwh,
    projection,
    savings_report,
)
from .errors import (
    AmbiguousName,
    BackendFailure,
    CorruptInput,
    DivideByZero,
    EmptyDataset,
    GreenstoreError,
    InvalidConfig,
    NotFound,
    PaletteMismatch,
    ShapeMismatch,
    StorageError,
    TooSmall,
    Unsupported,
)
from .metrics import QualityReport, compression_percentage, psnr, ssim
from .palette import (
    DitherConfig,
    Palette,
    dither_floyd_steinberg,
    median_cut,
    quantize_for_storage,
)
from .raster import EncodeParams, RasterImage, decode_png, encode_png, measure_sizes
from .resample import (
    ResampleSpec,
    downscale_4x,
    lanczos3_kernel,
    resize,
    upscale_4x,
)
from .store import (
    ArchiveManifest,
    ArchiveStore,
    DatasetRow,
    UpscalerBackend,
    evaluate_dataset,
    parse_backend,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousName",
    "ArchiveManifest",
    "ArchiveStore",
    "BackendFailure",
    "CorruptInput",
    "DatasetRow",
    "DitherConfig",
    "DivideByZero",
    "EmptyDataset",
    "EncodeParams",
    "EnergyReport",
    "EnergyScenario",
    "GreenstoreError",
    "InvalidConfig",
    "NotFound",
    "Palette",
    "PaletteMismatch",
    "ProjectionReport",
    "QualityReport",
    "RasterImage",
    "ResampleSpec",
    "ShapeMismatch",
    "StorageError",
    "TooSmall",
    "Unsupported",
    "UpscalerBackend",
    "annual_energy_kwh",
    "compression_percentage",
    "decode_png",
    "dither_floyd_steinberg",
    "downscale_4x",
    "encode_png",
    "evaluate_dataset",
    "lanczos3_kernel",
    "measure_sizes",
    "median_cut",
    "parse_backend",
    "projection",
    "psnr",
    "quantize_for_storage",
    "resize",
    "savings_report",
    "ssim",
    "upscale_4x",
]
