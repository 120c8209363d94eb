"""Exception hierarchy shared by all modules."""


class ImplicitDDError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(ImplicitDDError, ValueError):
    """Multi-indices or points of different dimension were combined."""


class CoincidentNodesError(ImplicitDDError, ValueError):
    """Two nodes of a divided difference are (numerically) equal.

    ``pair`` holds the two offending node values when known.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class SingularConfigurationError(ImplicitDDError, ArithmeticError):
    """A quotient of divided differences has a vanishing denominator."""


class ExprError(ImplicitDDError, ValueError):
    """Malformed expression source.  ``pos`` is a 0-based character offset."""

    def __init__(self, message, pos=None):
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)
        self.pos = pos


class DomainError(ImplicitDDError, ArithmeticError):
    """An expression was evaluated outside its domain."""


class SolverError(ImplicitDDError, RuntimeError):
    """The implicit equation could not be solved at a point."""


class InconsistentPointError(ImplicitDDError, ValueError):
    """A point (x, y) does not satisfy g(x, y) = 0 to the required accuracy."""
