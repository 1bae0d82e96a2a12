"""Exception vocabulary shared across the package.

Every error raised deliberately by coldgp derives from ColdGPError, so callers
can catch one base class at the boundary (the CLI maps them to exit codes).
"""


class ColdGPError(Exception):
    """Base class for all coldgp errors."""


class DimensionMismatchError(ColdGPError):
    """Array shapes are incompatible with the operation."""


class LengthMismatchError(DimensionMismatchError):
    """Paired sequences (predictions/targets, probs/labels) differ in length."""


class EmptyInputError(ColdGPError):
    """An operation that needs at least one element got none."""


class NonFiniteInputError(ColdGPError):
    """NaN or infinity where finite values are required."""


class NotSymmetricError(ColdGPError):
    """Matrix fails the symmetry check for an SPD factorization."""


class NotPositiveDefiniteError(ColdGPError):
    """Cholesky failed at every rung of the jitter ladder."""


class NonPositiveScaleError(ColdGPError):
    """Kernel scale factors must be strictly positive."""


class NonPositiveTemperatureError(ColdGPError):
    """Temperatures must be strictly positive."""


class ZeroVarianceError(ColdGPError):
    """A variance that must be strictly positive is zero (or negative)."""


class LabelOutOfRangeError(ColdGPError):
    """A class label lies outside [0, class_count)."""


class NonFiniteLikelihoodError(ColdGPError):
    """A log-likelihood evaluation produced NaN."""


class IndexOutOfRangeError(ColdGPError, IndexError):
    """An index into a dataset or sample set is out of bounds."""


class QuadratureNotConvergedError(ColdGPError):
    """Refinement exhausted without meeting the requested tolerance."""


class MalformedRecordError(ColdGPError):
    """A binary data file violates the documented record layout."""


class SchemaMismatchError(ColdGPError):
    """A results file does not match the schema expected for the figure."""


class ConfigError(ColdGPError):
    """Experiment config is malformed: unknown/missing keys or bad values."""


__all__ = [
    "ColdGPError",
    "DimensionMismatchError",
    "LengthMismatchError",
    "EmptyInputError",
    "NonFiniteInputError",
    "NotSymmetricError",
    "NotPositiveDefiniteError",
    "NonPositiveScaleError",
    "NonPositiveTemperatureError",
    "ZeroVarianceError",
    "LabelOutOfRangeError",
    "NonFiniteLikelihoodError",
    "IndexOutOfRangeError",
    "QuadratureNotConvergedError",
    "MalformedRecordError",
    "SchemaMismatchError",
    "ConfigError",
]
