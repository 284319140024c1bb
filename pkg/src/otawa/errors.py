"""Exception types shared across the package."""


class ChangePointError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfig(ChangePointError):
    """A configuration object or argument combination is invalid."""


class IntervalTooShort(ChangePointError):
    """An interval is shorter than the model's minimum fit/eval length."""


class SeriesTooShort(ChangePointError):
    """The series is too short for the requested operation."""


class Infeasible(ChangePointError):
    """No segmentation satisfies the given constraints."""


class TooLarge(ChangePointError):
    """The instance exceeds the brute-force enumeration guard."""


class MismatchedLength(ChangePointError):
    """Two segmentations refer to different series lengths."""


class EmptySet(ChangePointError):
    """A set-distance metric is undefined because one side has no change points."""


class ParseError(ChangePointError):
    """A file could not be parsed; the message names the offending location."""


class NonFinite(ChangePointError):
    """Data contains NaN or infinite entries."""


class UnstableCoefficients(ChangePointError):
    """Autoregressive coefficients are not stationary (spectral radius >= 1)."""
