"""Exception hierarchy."""


class KextError(Exception):
    """Base class for all package errors."""


class DomainError(KextError, ValueError):
    """A parameter lies outside the admissible domain."""


class PreconditionError(KextError, ValueError):
    """Inputs are valid individually but violate a method's precondition."""


class SingularMapError(KextError, ArithmeticError):
    """A coordinate map was evaluated at one of its singular points."""


class DivergenceError(KextError, ArithmeticError):
    """A quantity diverges at the requested parameter."""


class IntegrationError(KextError, RuntimeError):
    """The ODE integrator stopped before reaching the requested end point.

    Attributes
    ----------
    y : float
        Independent variable at which integration stopped.
    """

    def __init__(self, message, y):
        super().__init__(message)
        self.y = y
