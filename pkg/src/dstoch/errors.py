"""Exception hierarchy shared by every module.

All errors derive from :class:`DStochError`, which is itself a ``ValueError``
so callers that only care about "bad input" can catch the builtin.
"""


class DStochError(ValueError):
    """Base class for all library errors."""


class ValidationError(DStochError):
    """An input failed structural validation."""


class NegativeComponent(ValidationError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"component {index} is negative ({value!r})")


class SumMismatch(ValidationError):
    def __init__(self, total):
        self.total = total
        self.residual = total - 1.0
        super().__init__(f"components sum to {total!r}, expected 1")


class NegativeEntry(ValidationError):
    def __init__(self, row, col, value):
        self.index = (row, col)
        self.value = value
        super().__init__(f"entry ({row}, {col}) is negative ({value!r})")


class RowSumMismatch(ValidationError):
    def __init__(self, index, residual):
        self.index = index
        self.residual = residual
        super().__init__(f"row {index} sum deviates from 1 by {residual!r}")


class ColSumMismatch(ValidationError):
    def __init__(self, index, residual):
        self.index = index
        self.residual = residual
        super().__init__(f"column {index} sum deviates from 1 by {residual!r}")


class DimensionMismatch(ValidationError):
    pass


class NotSquare(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class TraceMismatch(ValidationError):
    pass


class NonDiagonalInput(ValidationError):
    pass


class IndexOutOfRange(DStochError, IndexError):
    pass


class EigenSolverFailure(DStochError):
    pass


class NoPerfectMatching(DStochError):
    """The support of a residual matrix admits no permutation.

    For a genuinely doubly stochastic input this only happens when round-off
    has corrupted the residual.
    """


class TermBoundExceeded(DStochError):
    pass


class ExplosionGuard(DStochError):
    pass


class MonteCarloUnsupported(DStochError):
    pass


class NotMixing(DStochError):
    pass


class DimensionTooLarge(DStochError):
    pass


class SolverFailure(DStochError):
    pass


class RegimeViolation(DStochError):
    pass
