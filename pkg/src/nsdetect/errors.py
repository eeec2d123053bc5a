"""Exception types shared across the package."""


class NsDetectError(Exception):
    """Base class for all nsdetect errors."""


class PreconditionError(NsDetectError, ValueError):
    """An operation was called with inputs that violate its preconditions."""


class DataFormatError(NsDetectError, ValueError):
    """Malformed input data (bad CSV cell, ragged row, bad label value)."""


class ShapeMismatchError(NsDetectError, ValueError):
    """Dimensionality of an input does not match the model or normalizer."""


class TrainingError(NsDetectError, RuntimeError):
    """Training diverged or otherwise failed after it started."""


class UnsupportedCapabilityError(NsDetectError, TypeError):
    """The model kind does not support the requested operation."""
