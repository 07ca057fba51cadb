class QEntangleError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(QEntangleError, ValueError):
    pass


class SizeError(ArgumentError):
    pass


class NormalizationError(ArgumentError):
    pass


class DegenerateSuperpositionError(ArgumentError):
    pass


class BracketError(ArgumentError):
    pass


class FitError(ArgumentError):
    pass


class ValidityRangeError(ArgumentError):
    """A closed-form expression was requested outside its range of validity."""


class ClosedFormSingularityError(ArgumentError):
    """A closed-form expression is singular at the requested parameters.

    Callers should fall back to the numeric eigensolver.
    """


class NumericConsistencyError(QEntangleError, ArithmeticError):
    pass
