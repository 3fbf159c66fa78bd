"""Exception hierarchy."""


class FlagFlowError(Exception):
    """Base class for all errors raised by flagflow."""


class PreconditionError(FlagFlowError, ValueError):
    """An input violates a documented precondition."""


class ContextMismatchError(PreconditionError):
    """Operands belong to different algebra contexts."""


class GenericityError(PreconditionError):
    """A height function is not generic enough for enumeration."""


class DegeneracyError(FlagFlowError):
    """A matrix expected to have full column rank does not.

    ``column`` is the index of the first column found to be dependent on
    the preceding ones.
    """

    def __init__(self, message, column):
        super().__init__(message)
        self.column = column


class GroupingAmbiguityError(FlagFlowError):
    """Eigenvalue gaps too close to the grouping tolerance to decide blocks."""

    def __init__(self, message, gaps=None, tolerance=None):
        super().__init__(message)
        self.gaps = gaps
        self.tolerance = tolerance


class StiffnessError(FlagFlowError):
    """Adaptive step size underflowed during integration."""

    def __init__(self, message, t, h, state):
        super().__init__(message)
        self.t = t
        self.h = h
        self.state = state
