"""Exception hierarchy.

Validation problems (bad input files, violated preconditions) derive from
:class:`ValidationError`; failures of the numerical machinery derive from
:class:`NumericalError`. The CLI maps the two families to distinct exit codes.
"""


class StarSpecError(Exception):
    """Base class for all package errors."""


class ValidationError(StarSpecError, ValueError):
    """Input does not satisfy a documented precondition."""


class NumericalError(StarSpecError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class OrderTooHigh(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class ShellOverflow(ValidationError):
    """A shell of a numbered spectrum did not receive exactly ``m`` entries."""


class InsufficientShells(ValidationError):
    pass


class AdmissibilityError(ValidationError):
    """Coefficients ``h`` are outside the class an operation requires."""


class SplitFailure(ValidationError):
    pass


class RootFindingFailure(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    pass


class RootCountMismatch(NumericalError):
    pass


class ContourError(NumericalError):
    """Argument-principle contour passes (numerically) through a zero."""


class SmallDenominator(NumericalError):
    pass


class CaseDetectionAmbiguous(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass
