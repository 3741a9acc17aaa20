"""
Exception hierarchy.

NumericalFailure subclasses map to CLI exit code 1, everything else
rooted at SimdJacError to exit code 2.
"""


class SimdJacError(Exception):
    """Base class for all simdjac errors."""


class NumericalFailure(SimdJacError):
    """The computation cannot produce a meaningful result."""


class NonFiniteInputError(NumericalFailure, ValueError):
    """NaN or infinity found where finite values are required."""


class ZeroNormError(NumericalFailure):
    """A column has zero norm (matrix not of full column rank)."""


class ZeroMatrixError(NumericalFailure):
    """The input matrix is zero, nothing to decompose."""


class ColumnNormOverflow(NumericalFailure):
    """A column norm overflowed and rescaling did not help."""


class InvariantViolation(NumericalFailure):
    """A debug-mode consistency check failed."""


class StrategyError(SimdJacError, ValueError):
    """Invalid pivot strategy request."""


class UnknownBackendError(SimdJacError, ValueError):
    """No lane backend registered under the requested name."""


class FormatError(SimdJacError):
    """Malformed, foreign or mismatched data file."""
