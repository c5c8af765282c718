"""Exception types shared across the package."""


class CurveSigError(Exception):
    """Base class for all errors raised by curvesig."""


class DecodeError(CurveSigError):
    """A file could not be decoded (bad image, bad CRV header, truncated payload)."""


class DimensionMismatchError(CurveSigError):
    """Frames, masks, or backgrounds disagree on their dimensions."""


class TooShortError(CurveSigError):
    """A sequence has fewer samples than the operation requires."""


class DegenerateCurveError(CurveSigError):
    """The curve carries no usable geometry (zero length, or no valid tangents)."""


class ManifestError(CurveSigError):
    """A dataset manifest is malformed or violates pipeline preconditions."""


class ModelFormatError(CurveSigError):
    """A serialized forest model could not be parsed or has an unsupported version."""
