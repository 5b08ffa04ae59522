"""Exception types shared across the package.

The CLI maps these onto exit codes: usage/parse problems exit 1, numeric
precondition failures exit 2, convergence failures exit 3.
"""


class CliffharmError(Exception):
    """Base class for all package errors."""


class ParseError(CliffharmError, ValueError):
    pass


class DimensionError(CliffharmError, ValueError):
    pass


class PreconditionError(CliffharmError, ValueError):
    pass


class DomainError(PreconditionError):
    """A point or radius lies outside the region where an operation is defined."""


class SingularityError(PreconditionError, ZeroDivisionError):
    pass


class RankError(PreconditionError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class BoundaryError(DomainError):
    """A finite-difference stencil would leave the field's domain."""


class ConvergenceError(CliffharmError, ArithmeticError):
    pass
