"""Exception hierarchy shared by all modules.

Numerical failures derive from :class:`NumericalError` so the command line
front end can map them to a single exit status.
"""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConvergenceError(NumericalError):
    """A series or iteration did not reach its tolerance within its budget."""


class ToleranceNotMetError(NumericalError):
    """Adaptive quadrature could not certify the requested accuracy."""


class InstabilityError(NumericalError):
    """A forward recurrence lost too many significant digits."""


class BracketError(NumericalError):
    """A root could not be isolated on the requested branch."""

    def __init__(self, message, branch=None):
        super().__init__(message)
        self.branch = branch


class ExtrapolationError(NumericalError):
    """Successive extrapolated estimates failed to contract."""


class InvariantViolation(NumericalError):
    """A computed object violates an invariant that should always hold."""
