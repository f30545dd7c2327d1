"""Exception types shared across the package."""


class WpirError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(WpirError, ValueError):
    """Invalid scheme parameters, indices, or argument shapes."""


class DistributionError(WpirError, ValueError):
    """A probability vector is malformed (negative mass, wrong length, sum != 1)."""


class SupportViolationError(WpirError, ValueError):
    """A divergence is undefined because the reference misses mass of the argument."""


class UndefinedNormalizationError(WpirError, ValueError):
    """Normalized leakage is undefined because the reference entropy is zero."""


class CostRangeError(WpirError, ValueError):
    """A target download cost lies outside the feasible range."""


class ConvergenceError(WpirError, RuntimeError):
    """The numeric solver hit its iteration cap before reaching tolerance.

    Carries the last iterate and its residuals for post-mortem inspection.
    """

    def __init__(self, message, last_iterate=None, residuals=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residuals = residuals or {}


class DecodeError(WpirError, RuntimeError):
    """A query option cannot be decoded; signals a corrupted structure."""
