"""Localized vibration modes of line defects in a square mass-spring lattice.

Modules
-------
specfun
    Elliptic integrals, Bessel functions, digamma and hypergeometric series.
greens
    Stop-band lattice Green's function in four representations.
modes
    Toeplitz eigenproblem for a finite line of light masses.
asymptotics
    Far-field and band-edge forms of the Green's function and mode fields.
waveguide
    Dispersion relation of the infinite line defect and the large-N envelope.
oracle
    Truncated-lattice eigensolver and tensor quadrature used for validation.
cli
    Command-line front end (``latdefect``).
reproduce
    Plot-ready data files for the figure set.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BracketError,
    ConvergenceError,
    DomainError,
    ExtrapolationError,
    InstabilityError,
    InvariantViolation,
    NumericalError,
    ToleranceNotMetError,
)
from .greens import FrequencyPoint, GreensIndex, greens_auto  # noqa: F401
from .modes import DefectConfig, ModeSolution, find_modes  # noqa: F401
