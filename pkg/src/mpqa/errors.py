"""Exception types raised by the package."""


class MPQAError(Exception):
    """Base class for all errors raised here."""


class DomainError(MPQAError, ValueError):
    """Argument outside the domain of the operation."""


class NumericOverflowError(MPQAError, OverflowError):
    """Result is not representable as a double."""


class ConvergenceError(MPQAError, ArithmeticError):
    """A series or iteration did not reach its tolerance."""


class SingularityError(MPQAError, ArithmeticError):
    """Evaluation hit a pole of a closed-form expression."""


class DefectError(MPQAError, ValueError):
    """Approximant parameters are inadmissible (q <= 0 or lambda <= 0)."""


class NoAdmissibleLambdaError(DefectError):
    """No lambda in the search range gives q > 0."""


class ConvergenceWarning(UserWarning):
    """Quadrature result changed noticeably when the node count was doubled."""
