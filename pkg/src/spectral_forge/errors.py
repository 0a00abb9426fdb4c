"""Exception types raised by the spectral_forge package."""

__all__ = [
    "SpectralForgeError",
    "DimensionMismatch",
    "NonFiniteValue",
    "NotHermitian",
    "NotNormal",
    "NotPositiveDefinite",
    "NoConvergence",
    "NotCommuting",
    "ScaleLimit",
    "BadSpec",
    "FileError",
    "ParseError",
    "SingularWeightWarning",
]


class SpectralForgeError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(SpectralForgeError):
    """Operands act on spaces of different dimension."""


class NonFiniteValue(SpectralForgeError):
    """A matrix entry, weight, or function value is NaN or infinite."""


class NotHermitian(SpectralForgeError):
    """Input fails the Hermitian test at the requested tolerance."""


class NotNormal(SpectralForgeError):
    """Input fails the normality test at the requested tolerance."""


class NotPositiveDefinite(SpectralForgeError):
    """A factorization pivot fell below the positivity threshold."""


class NoConvergence(SpectralForgeError):
    """An iterative solver exhausted its rotation budget."""


class NotCommuting(SpectralForgeError):
    """Two spectral measures (or their projections) fail to commute."""


class ScaleLimit(SpectralForgeError):
    """Operator norm exceeds the pipeline conditioning limit."""


class BadSpec(SpectralForgeError):
    """An operator specification is malformed or incomplete."""


class FileError(SpectralForgeError):
    """A file could not be read or written."""


class ParseError(SpectralForgeError):
    """A document is not valid JSON or violates the expected schema."""


class SingularWeightWarning(UserWarning):
    """The reciprocal weight hit its singular branch on a nonzero atom."""
