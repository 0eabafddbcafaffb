"""Exception types shared across the package."""


class GreenstoreError(Exception):
    """Base class for every error this package raises deliberately."""


class CorruptInput(GreenstoreError):
    """Byte stream is not a well-formed PNG (bad magic, CRC, or truncation)."""


class Unsupported(GreenstoreError):
    """Well-formed PNG using a feature outside the supported subset."""


class PaletteMismatch(GreenstoreError):
    """A pixel is not an exact member of the supplied palette."""


class InvalidConfig(GreenstoreError, ValueError):
    """Parameter outside its documented range."""


class TooSmall(GreenstoreError):
    """Image is below the minimum size the operation needs."""


class ShapeMismatch(GreenstoreError):
    """Operands differ in dimensions or channel count."""


class DivideByZero(GreenstoreError, ZeroDivisionError):
    """Ratio against a zero denominator (e.g. empty original file)."""


class StorageError(GreenstoreError):
    """Store I/O failed; no partial manifest row was committed."""


class NotFound(GreenstoreError):
    """No stored object matches the reference."""


class AmbiguousName(GreenstoreError):
    """A source name matches more than one stored object."""


class BackendFailure(GreenstoreError):
    """External upscaler violated the protocol (exit code, dims, or output)."""


class EmptyDataset(GreenstoreError):
    """Dataset directory contains no usable images."""
