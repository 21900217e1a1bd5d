"""Infinite line defect and the large-N bridge.

When every mass on the row ``n2 = 0`` equals ``r``, Bloch waves
``u_{n1,n2} = U lambda^{|n2|} exp(i kappa n1)`` decouple the problem. Away
from the row the lattice equation fixes the transverse factor ``lambda`` as
the root of ``lambda + 1/lambda = 2 Omega_1`` with ``|lambda| < 1``; on the
row it must equal ``Omega_r``. Eliminating ``lambda`` gives a biquadratic in
``omega`` with one admissible root ``omega^(-)(kappa)``.

A long finite defect has its frequencies inside ``[omega^(-)(0),
omega^(-)(pi)]``; a string-on-foundation envelope describes its lowest
in-phase mode.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvariantViolation

__all__ = [
    "DispersionSample",
    "EnvelopeModel",
    "BracketReport",
    "omega_beta",
    "transverse_lambda",
    "dispersion_omega_minus",
    "dispersion_omega_plus",
    "dispersion_sweep",
    "biquadratic_residual",
    "reject_omega_plus",
    "standing_wave_frequencies",
    "skew_symmetric_waveguide_solution",
    "envelope",
    "finite_vs_infinite_bracket",
]

DEFAULT_KAPPA_SAMPLES = 512


def _check_r(r):
    if not (0.0 < r < 1.0):
        raise DomainError(f"mass ratio must lie in (0, 1), got {r}")


@dataclass(frozen=True)
class DispersionSample:
    """Point on the defect-mode dispersion curve.

    ``omega1 = 2|sin(kappa/2)|`` and ``omega2 = 2 sqrt(1 + sin^2(kappa/2))``
    bound the admissible frequencies.
    """

    kappa: float
    omega_minus: float
    lam: float
    omega1: float
    omega2: float


@dataclass(frozen=True)
class EnvelopeModel:
    """Homogenized envelope of a long finite defect."""

    lambda_est: float
    mode_number_q: int
    n_defects: int
    r: float
    omega: float
    wavenumber: float
    profile: np.ndarray = field(compare=False)


@dataclass
class BracketReport:
    """Finite-defect frequencies against the infinite-defect band."""

    n_defects: int
    r: float
    band: tuple
    omegas: list
    contained: list
    dist_lo: list
    dist_hi: list
    edge_counts: tuple
    modes: list = field(default_factory=list)

    @property
    def all_contained(self) -> bool:
        return all(self.contained)

    def to_dict(self) -> dict:
        return {
            "n_defects": self.n_defects,
            "r": self.r,
            "band": [float(self.band[0]), float(self.band[1])],
            "omega_min": float(min(self.omegas)) if self.omegas else None,
            "omega_max": float(max(self.omegas)) if self.omegas else None,
            "modes": [
                {
                    "omega": float(w),
                    "contained": bool(c),
                    "distance_to_lower_edge": float(a),
                    "distance_to_upper_edge": float(b),
                }
                for w, c, a, b in zip(self.omegas, self.contained, self.dist_lo, self.dist_hi)
            ],
            "edge_counts": [int(self.edge_counts[0]), int(self.edge_counts[1])],
            "contained": self.all_contained,
        }


def omega_beta(beta: float, kappa: float, omega: float) -> float:
    """``Omega_beta(kappa, i omega) = 1 + 2 sin^2(kappa/2) - beta omega^2 / 2``."""
    return 1.0 + 2.0 * math.sin(0.5 * kappa) ** 2 - 0.5 * beta * omega * omega


def transverse_lambda(kappa: float, omega: float):
    """Transverse factor ``lambda`` with its case tag.

    Returns
    -------
    (float or complex, str)
        ``"decaying"`` when ``|Omega_1| > 1`` (real, ``|lambda| < 1``),
        ``"unit"`` when ``Omega_1 = +-1`` (``lambda = Omega_1``) and
        ``"propagating"`` when ``|Omega_1| < 1`` (unimodular complex).
    """
    big = omega_beta(1.0, kappa, omega)
    if abs(big) > 1.0:
        # root of smaller modulus, written without cancellation
        return big - math.copysign(math.sqrt((big - 1.0) * (big + 1.0)), big), "decaying"
    if abs(big) == 1.0:
        return big, "unit"
    return complex(big, math.sqrt(1.0 - big * big)), "propagating"


def _omega_pm(kappa, r, sign):
    s2 = math.sin(0.5 * kappa) ** 2
    root = math.sqrt(1.0 + 4.0 * (1.0 - r) ** 2 * s2 * (1.0 + s2))
    bracket = 1.0 + 2.0 * s2 + sign * root
    return math.sqrt(max(2.0 / (r * (2.0 - r)) * bracket, 0.0))


def biquadratic_residual(kappa: float, omega: float, r: float) -> float:
    """``r(r-2) omega^4/4 + (1 + 2 s^2) omega^2 - 4 s^2 (1 + s^2)``, ``s = sin(kappa/2)``."""
    s2 = math.sin(0.5 * kappa) ** 2
    w2 = omega * omega
    return 0.25 * r * (r - 2.0) * w2 * w2 + (1.0 + 2.0 * s2) * w2 - 4.0 * s2 * (1.0 + s2)


def dispersion_omega_plus(kappa: float, r: float) -> float:
    """The second root ``omega^(+)`` of the biquadratic (not a defect mode)."""
    _check_r(r)
    return _omega_pm(kappa, r, -1.0)


def dispersion_omega_minus(kappa: float, r: float) -> DispersionSample:
    """Defect-mode frequency of the infinite line at Bloch parameter ``kappa``.

    ``omega^2 = 2/(r(2-r)) [1 + 2 s^2 + sqrt(1 + 4 (1-r)^2 s^2 (1 + s^2))]``
    with ``s = sin(kappa/2)``. The admissibility conditions are checked on
    every call.

    Raises
    ------
    InvariantViolation
        If the sample breaks a bound, has ``|lambda| >= 1``, mismatches
        ``Omega_r`` or leaves a biquadratic residual above ``1e-10``.
    """
    _check_r(r)
    w = _omega_pm(kappa, r, 1.0)
    s = abs(math.sin(0.5 * kappa))
    omega1 = 2.0 * s
    omega2 = 2.0 * math.sqrt(1.0 + s * s)
    lam, case = transverse_lambda(kappa, w)
    inv = 1.0 / math.sqrt(r)
    problems = []
    if not (inv * omega1 < w < inv * omega2):
        problems.append("omega1/sqrt(r) < omega < omega2/sqrt(r)")
    if not w > omega2:
        problems.append("omega > omega2")
    if case != "decaying":
        problems.append("|lambda| < 1")
    elif abs(lam - omega_beta(r, kappa, w)) > 1e-10:
        problems.append("lambda = Omega_r")
    if abs(biquadratic_residual(kappa, w, r)) > 1e-10:
        problems.append("biquadratic residual")
    if problems:
        raise InvariantViolation(f"dispersion sample at kappa={kappa}, r={r} violates: {', '.join(problems)}")
    return DispersionSample(float(kappa), w, float(lam), omega1, omega2)


def dispersion_sweep(r: float, samples: int = DEFAULT_KAPPA_SAMPLES) -> list:
    """``samples`` uniformly spaced points of the dispersion curve on ``[0, pi]``."""
    return [dispersion_omega_minus(k, r) for k in np.linspace(0.0, math.pi, int(samples))]


def reject_omega_plus(kappa: float, r: float):
    """Show that ``omega^(+)`` violates the lower admissibility bound.

    Returns
    -------
    (bool, dict)
        ``True`` when ``omega^(+) < omega1 / sqrt(r)``, with the two numbers.
    """
    w_plus = dispersion_omega_plus(kappa, r)
    bound = 2.0 * abs(math.sin(0.5 * kappa)) / math.sqrt(r)
    rejected = w_plus < bound or (w_plus == 0.0 and bound == 0.0)
    return rejected, {"omega_plus": w_plus, "lower_bound": bound, "inequality": "omega_plus < omega1/sqrt(r)"}


def standing_wave_frequencies(r: float):
    """In-phase (``kappa = 0``) and out-of-phase (``kappa = pi``) frequencies.

    ``sqrt(4/(r(2-r)))`` and ``sqrt(2/(r(2-r)) [3 + sqrt(1 + 8(1-r)^2)])``.
    """
    _check_r(r)
    c = 2.0 / (r * (2.0 - r))
    return math.sqrt(2.0 * c), math.sqrt(c * (3.0 + math.sqrt(1.0 + 8.0 * (1.0 - r) ** 2)))


def skew_symmetric_waveguide_solution() -> dict:
    """Skew-symmetric modes of the infinite line defect.

    A mode odd in ``n2`` vanishes on the defect row, so each half-plane sees
    an intact lattice with a clamped boundary. In the stop band the only such
    solution is zero; the infinite defect carries a single symmetric branch
    per Bloch parameter.
    """
    return {
        "family": "skew_symmetric",
        "solution": "trivial",
        "reason": "zero displacement on the defect row leaves a clamped intact half-lattice "
        "with no stop-band solution",
        "modes_per_kappa": 1,
    }


def _sinpi(x):
    """``sin(pi x)`` that is exactly zero at integers."""
    x = np.asarray(x, dtype=float)
    red = np.mod(x, 2.0)
    out = np.sin(np.pi * red)
    out[red == np.round(red)] = 0.0
    return out


def envelope(n_defects: int, r: float, omega: float, q: int = 1) -> EnvelopeModel:
    """String-on-elastic-foundation envelope of a long finite defect.

    ``lambda_est = 1 + [(q pi/(N-1))^2 - r omega^2] / 2`` and
    ``u(eta) = u0 sin(sqrt(r omega^2 - 2 (1 - lambda_est)) eta)`` at
    ``eta = 0..N-1``. The radicand equals ``(q pi/(N-1))^2``, so the
    wavenumber is taken as ``q pi/(N-1)`` and the profile vanishes exactly at
    both ends. ``u0`` normalizes the samples.
    """
    n = int(n_defects)
    if n < 5:
        raise DomainError("envelope requires N >= 5")
    _check_r(r)
    q = int(q)
    if q < 1 or q % 2 == 0:
        raise DomainError(f"q must be an odd positive integer, got {q}")
    lam = 1.0 + 0.5 * ((q * math.pi / (n - 1)) ** 2 - r * omega * omega)
    radicand = r * omega * omega - 2.0 * (1.0 - lam)
    if not radicand > 0.0:
        raise DomainError("envelope radicand r omega^2 - 2(1 - lambda) is not positive")
    eta = np.arange(n, dtype=float)
    profile = _sinpi(q * eta / (n - 1))
    profile = profile / np.linalg.norm(profile)
    return EnvelopeModel(lam, q, n, float(r), float(omega), q * math.pi / (n - 1), profile)


def finite_vs_infinite_bracket(n_defects: int, r: float, modes=None) -> BracketReport:
    """Compare finite-defect frequencies with the infinite-defect band.

    Parameters
    ----------
    n_defects : int
        ``N >= 2``.
    r : float
    modes : list of ModeSolution, optional
        Precomputed modes; computed with :func:`latdefect.modes.find_modes`
        otherwise.

    Notes
    -----
    Frequencies outside the band trigger a warning rather than an error.
    ``edge_counts`` counts the frequencies within 10% of the band width of
    the lower and the upper edge.
    """
    from .modes import DefectConfig, find_modes

    if int(n_defects) < 2:
        raise DomainError("bracket report requires N >= 2")
    if modes is None:
        modes = find_modes(DefectConfig(int(n_defects), r))
    lo, hi = standing_wave_frequencies(r)
    omegas = [m.omega for m in modes]
    contained = [lo <= w <= hi for w in omegas]
    width = hi - lo
    report = BracketReport(
        n_defects=int(n_defects),
        r=float(r),
        band=(lo, hi),
        omegas=omegas,
        contained=contained,
        dist_lo=[w - lo for w in omegas],
        dist_hi=[hi - w for w in omegas],
        edge_counts=(
            sum(1 for w in omegas if abs(w - lo) <= 0.1 * width),
            sum(1 for w in omegas if abs(hi - w) <= 0.1 * width),
        ),
        modes=list(modes),
    )
    if not report.all_contained:
        warnings.warn(
            f"{contained.count(False)} of {len(omegas)} finite-defect frequencies lie outside "
            f"the infinite-defect band [{lo:.6f}, {hi:.6f}]",
            RuntimeWarning,
            stacklevel=2,
        )
    return report
