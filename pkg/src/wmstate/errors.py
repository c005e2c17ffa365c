"""Exception hierarchy.

Errors raised because a numerical guard tripped derive from
:class:`NumericGuardError`; the CLI maps those to exit status 3.
"""


class NumericGuardError(ArithmeticError):
    """A numerical precondition (truncation, convergence, ...) failed."""


class TruncationError(NumericGuardError):
    """The Fock cutoff is too small for the requested state or operator."""


class ConvergenceError(NumericGuardError):
    """A series could not reach the requested tolerance."""


class DegenerateError(NumericGuardError):
    """The quantity is undefined for the given parameters."""


class OrthogonalPostselectionError(NumericGuardError):
    """Pre- and post-selected states are orthogonal; weak values diverge."""


class ModeMismatchError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class UnknownFigureError(KeyError):
    pass


class RangeError(ValueError):
    pass
