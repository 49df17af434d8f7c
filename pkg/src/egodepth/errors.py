"""Exception types raised across the package.

Everything derives from EgodepthError so callers (the service layer in
particular) can catch domain failures without swallowing programming errors.
"""

from __future__ import annotations


class EgodepthError(Exception):
    """Base class for all domain errors."""


class BadMagic(EgodepthError):
    """Flow file does not start with the expected magic number."""


class TruncatedFile(EgodepthError):
    """File ended before the declared payload was read."""


class DimensionOverflow(EgodepthError):
    """Declared image dimensions are non-positive or implausibly large."""


class IoFailure(EgodepthError):
    """Generic read/write failure (missing file, undecodable image, ...)."""


class DimensionMismatch(EgodepthError):
    """Two arrays that must share a shape do not."""


class EmptyIndex(EgodepthError):
    """Frame index holds fewer than two frames, so no pairs exist."""


class UncoveredPixel(EgodepthError):
    """Scene primitives cover no pixel at all."""


class TooSmallForPyramid(EgodepthError):
    """Image too small for the requested number of pyramid levels."""


class InsufficientTranslation(EgodepthError):
    """Flow field carries too little translational signal to fit a direction."""


class NoConvergence(EgodepthError):
    """Refinement ran out of its evaluation budget."""


class DegenerateDirection(EgodepthError):
    """Translation direction has (near) zero norm."""


class NoValidPixels(EgodepthError):
    """Depth map has an empty valid mask."""


class EmptySupport(EgodepthError):
    """Two maps share no valid pixels."""


class ConfigInvalid(EgodepthError):
    """Pipeline configuration failed validation."""


class InputEmpty(EgodepthError):
    """Input directory yields no frame pairs."""
