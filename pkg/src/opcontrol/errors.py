"""Exception types raised across the package."""


class OpcError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(OpcError, ValueError):
    pass


class ShapeError(OpcError, ValueError):
    pass


class ModeError(OpcError, ValueError):
    """Raised when a snapshot set lacks the matrices a fitting mode needs."""


class IntegrationError(OpcError, ArithmeticError):
    """Non-finite value encountered while stepping an ODE."""

    def __init__(self, message, t=None, member=None):
        super().__init__(message)
        self.t = t
        self.member = member


class SingularityError(OpcError, ArithmeticError):
    """A matrix that must be inverted is singular (A has eigenvalue +1 or -1)."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class DependencyError(OpcError, FileNotFoundError):
    """A CLI command needs an artifact that an earlier command produces."""


class ConfigError(OpcError, ValueError):
    pass


class NumericalError(OpcError, ArithmeticError):
    """A dense linear-algebra routine failed to converge."""
