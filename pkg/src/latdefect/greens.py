"""Stop-band Green's function of the square mass-spring lattice.

The shifted Green's matrix ``g(m, n2; omega)`` is the response at offset
``(m, n2)`` to a unit point excitation of the intact lattice (unit masses and
unit springs) vibrating at frequency ``omega``. Inside the stop band
``omega**2 > 8`` it is real and decays exponentially. Four equivalent
representations are provided:

* a double integral over the first quarter of the Brillouin zone,
* a single integral obtained after one contour integration,
* a Laplace transform of a product of modified Bessel functions,
* a regularized 4F3 series in ``4 / alpha**2``.

with ``alpha = omega**2 / 2 - 2``. Every representation canonicalizes its
index to ``(max(|m|,|n2|), min(|m|,|n2|))`` first, which enforces the
reflection and exchange symmetries exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, InstabilityError, ToleranceNotMetError
from .specfun import (
    DEFAULT_SERIES,
    SeriesControl,
    bessel_i_scaled_table,
    elliptic_e,
    elliptic_k,
    hyp_4f3_series,
)

__all__ = [
    "FrequencyPoint",
    "GreensIndex",
    "greens_double_integral",
    "greens_single_integral",
    "greens_bessel_integral",
    "greens_hypergeometric",
    "greens_auto",
    "greens_row_recurrence",
    "greens_closed_forms",
    "HYPERGEOMETRIC_ALPHA_MIN",
]

#: Below this alpha ``greens_auto`` switches from the series to quadrature.
HYPERGEOMETRIC_ALPHA_MIN = 2.2

_AUTO_ABS_TOL = 1e-12


@dataclass(frozen=True)
class FrequencyPoint:
    """A frequency together with its derived lattice parameter.

    Construct with :meth:`from_omega`, :meth:`from_omega2` or
    :meth:`from_alpha`; the stored pair ``(omega2, alpha)`` always satisfies
    ``alpha == omega2 / 2 - 2`` up to rounding of the constructor input.

    Attributes
    ----------
    omega2 : float
        Squared frequency.
    alpha : float
        ``omega2 / 2 - 2``.
    """

    omega2: float
    alpha: float

    def __post_init__(self):
        if not (self.omega2 > 0 and math.isfinite(self.omega2)):
            raise DomainError(f"omega must be positive and finite, got omega^2={self.omega2}")
        expected = 0.5 * self.omega2 - 2.0
        if abs(self.alpha - expected) > 8 * math.ulp(max(abs(expected), 1.0)):
            raise DomainError("alpha is inconsistent with omega^2/2 - 2")

    @classmethod
    def from_omega(cls, omega: float) -> "FrequencyPoint":
        w2 = float(omega) ** 2
        if not omega > 0:
            raise DomainError(f"omega must be positive, got {omega}")
        return cls(w2, 0.5 * w2 - 2.0)

    @classmethod
    def from_omega2(cls, omega2: float) -> "FrequencyPoint":
        w2 = float(omega2)
        return cls(w2, 0.5 * w2 - 2.0)

    @classmethod
    def from_alpha(cls, alpha: float) -> "FrequencyPoint":
        a = float(alpha)
        return cls(2.0 * (a + 2.0), a)

    @property
    def omega(self) -> float:
        return math.sqrt(self.omega2)

    @property
    def in_stop_band(self) -> bool:
        return self.alpha > 2.0


@dataclass(frozen=True)
class GreensIndex:
    """Offset ``(m, n2)`` of one Green's matrix entry, ``m = n1 - p``."""

    m: int
    n2: int

    def canonical(self) -> "GreensIndex":
        a, b = abs(int(self.m)), abs(int(self.n2))
        return GreensIndex(max(a, b), min(a, b))


def _as_index(idx) -> GreensIndex:
    if isinstance(idx, GreensIndex):
        return idx.canonical()
    m, n2 = idx
    return GreensIndex(int(m), int(n2)).canonical()


def _require_stop_band(f: FrequencyPoint):
    if not f.in_stop_band:
        raise DomainError(f"frequency omega^2={f.omega2} is not in the stop band omega^2 > 8")


# ---------------------------------------------------------------------------
# Double integral


def greens_double_integral(idx, f: FrequencyPoint, abs_tol: float = 1e-11) -> float:
    r"""Green's function from the double Fourier integral.

    .. math::

        g = \frac{1}{\pi^2}\int_0^\pi\!\!\int_0^\pi
        \frac{\cos m\xi_1 \cos n_2\xi_2}{\omega^2 - 4 + 2\cos\xi_1 + 2\cos\xi_2}
        \, d\xi_1 d\xi_2

    The integrand is even, periodic and analytic in both variables, so the
    tensor trapezoid rule converges geometrically. The grid is doubled until
    successive estimates agree to ``abs_tol``.

    Parameters
    ----------
    idx : GreensIndex or tuple
    f : FrequencyPoint
    abs_tol : float

    Returns
    -------
    float
    """
    _require_stop_band(f)
    ix = _as_index(idx)
    shift = f.omega2 - 4.0
    previous = None
    n = 16
    while n <= 8192:
        xi = np.linspace(0.0, math.pi, n + 1)
        w = np.full(n + 1, 1.0 / n)
        w[0] = w[-1] = 0.5 / n
        c = np.cos(xi)
        num1 = np.cos(ix.m * xi) * w
        num2 = np.cos(ix.n2 * xi) * w
        kernel = 1.0 / (shift + 2.0 * c[:, None] + 2.0 * c[None, :])
        value = float(num1 @ kernel @ num2)
        if previous is not None and abs(value - previous) <= abs_tol:
            return value
        previous = value
        n *= 2
    raise ToleranceNotMetError(
        f"double integral for ({ix.m},{ix.n2}) at omega^2={f.omega2} did not reach {abs_tol}"
    )


# ---------------------------------------------------------------------------
# Single integral


def _single_kernel(xi, m, n2, alpha):
    """(sqrt(a^2-1) - a)^m / sqrt(a^2-1) * cos(n2 xi), a = alpha + cos xi."""
    half = np.cos(0.5 * xi)
    a_minus = (alpha - 2.0) + 2.0 * half * half
    a = alpha + np.cos(xi)
    root = np.sqrt(a_minus * (a + 1.0))
    # sqrt(a^2-1) - a = -1/(a + sqrt(a^2-1)), avoiding cancellation
    base = -1.0 / (a + root)
    return base**m / root * np.cos(n2 * xi)


def greens_single_integral(idx, f: FrequencyPoint, abs_tol: float = 1e-12) -> float:
    r"""Green's function from the single-integral representation.

    .. math::

        g = \frac{1}{2\pi}\int_0^\pi
        \frac{(\sqrt{a^2-1} - a)^{|m|}}{\sqrt{a^2-1}} \cos(n_2\xi)\, d\xi,
        \qquad a = \alpha + \cos\xi

    Adaptive Gauss-Kronrod quadrature is used. Close to the band edge the
    integrand concentrates near ``xi = pi`` on a width of order
    ``sqrt(alpha - 2)`` and the interval is pre-split there.

    Parameters
    ----------
    idx : GreensIndex or tuple
    f : FrequencyPoint
    abs_tol : float

    Returns
    -------
    float
    """
    _require_stop_band(f)
    ix = _as_index(idx)
    alpha = f.alpha
    width = math.sqrt(2.0 * (alpha - 2.0))
    cuts = [math.pi - width * s for s in (300.0, 30.0, 3.0, 1.0, 0.3) if width * s < 0.5 * math.pi]
    edges = [0.0] + sorted(cuts) + [math.pi]
    total = 0.0
    err = 0.0
    limit = 200 + 4 * (ix.m + ix.n2)
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(
                _single_kernel,
                lo,
                hi,
                args=(ix.m, ix.n2, alpha),
                epsabs=0.25 * abs_tol / len(edges),
                epsrel=1e-14,
                limit=limit,
            )
        total += val
        err += e
    total /= 2.0 * math.pi
    err /= 2.0 * math.pi
    if err > abs_tol:
        raise ToleranceNotMetError(
            f"single integral for ({ix.m},{ix.n2}) at alpha={alpha}: error estimate {err:.2e} > {abs_tol:.2e}"
        )
    return total


# ---------------------------------------------------------------------------
# Bessel-function integral

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _panel_rule(edges):
    lo = edges[:-1, None]
    hi = edges[1:, None]
    x = 0.5 * (hi - lo) * _GL_NODES[None, :] + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * _GL_WEIGHTS[None, :]
    return x.ravel(), w.ravel()


def greens_bessel_integral(idx, f: FrequencyPoint, abs_tol: float = 1e-12) -> float:
    r"""Green's function as a Laplace transform of Bessel products.

    .. math::

        g = \frac{(-1)^{m+n_2}}{2}\int_0^\infty I_m(x) I_{n_2}(x) e^{-\alpha x}\,dx

    The integrand is bounded by ``exp((2 - alpha) x)``, which fixes the
    truncation point. Composite Gauss-Legendre panels on a geometric mesh are
    halved until two successive estimates agree.

    Parameters
    ----------
    idx : GreensIndex or tuple
    f : FrequencyPoint
    abs_tol : float

    Returns
    -------
    float
    """
    _require_stop_band(f)
    ix = _as_index(idx)
    decay = f.alpha - 2.0
    tail_tol = 0.1 * abs_tol
    upper = math.log(1.0 / (2.0 * tail_tol * decay)) / decay
    upper = max(upper, 1.0)
    edges = [0.0, 0.5]
    while edges[-1] < upper:
        edges.append(min(2.0 * edges[-1], upper))
    edges = np.asarray(edges)
    previous = None
    for _ in range(8):
        x, w = _panel_rule(edges)
        table = bessel_i_scaled_table(ix.m, x)
        vals = table[ix.m] * table[ix.n2] * np.exp(-decay * x)
        value = 0.5 * float(np.dot(w, vals))
        if previous is not None and abs(value - previous) <= 0.5 * abs_tol:
            sign = -1.0 if (ix.m + ix.n2) % 2 else 1.0
            return sign * value
        previous = value
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mids]))
    raise ToleranceNotMetError(
        f"Bessel integral for ({ix.m},{ix.n2}) at alpha={f.alpha} did not reach {abs_tol}"
    )


# ---------------------------------------------------------------------------
# Hypergeometric series


def greens_hypergeometric(idx, f: FrequencyPoint, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    r"""Green's function from the regularized 4F3 series.

    .. math::

        g = \frac{(-1)^s (s!)^2}{(2\alpha)^{1+s}}\,
        {}_4\mathbf{F}_3\!\left(\tfrac{1+s}{2},\tfrac{1+s}{2},
        \tfrac{2+s}{2},\tfrac{2+s}{2}; 1+m, 1+n_2, 1+s; \tfrac{4}{\alpha^2}\right)

    with ``s = m + n2``. The regularization is folded into the binomial
    prefactor ``C(s, m) / (2 alpha)**(1+s)`` to avoid overflow for large
    indices. The series converges for any ``alpha > 2`` but slows down
    as ``alpha -> 2``; :func:`greens_auto` only calls it for
    ``alpha >= 2.2``.

    Raises
    ------
    ConvergenceError
        If ``ctl.max_terms`` is exhausted.
    """
    _require_stop_band(f)
    ix = _as_index(idx)
    s = ix.m + ix.n2
    alpha = f.alpha
    z = 4.0 / (alpha * alpha)
    series = hyp_4f3_series(0.5 * (1 + s), 0.5 * (2 + s), 1.0 + ix.m, 1.0 + ix.n2, 1.0 + s, z, ctl)
    log_coeff = (
        math.lgamma(s + 1.0) - math.lgamma(ix.m + 1.0) - math.lgamma(ix.n2 + 1.0)
        - (1.0 + s) * math.log(2.0 * alpha)
    )
    sign = -1.0 if s % 2 else 1.0
    return sign * math.exp(log_coeff) * series


# ---------------------------------------------------------------------------
# Dispatcher and closed forms


def greens_auto(idx, f: FrequencyPoint) -> float:
    """Green's function through the cheapest reliable representation.

    The hypergeometric series is used for ``alpha >= 2.2`` and the single
    integral with a ``1e-12`` absolute tolerance closer to the band edge.
    """
    _require_stop_band(f)
    if f.alpha >= HYPERGEOMETRIC_ALPHA_MIN:
        return greens_hypergeometric(idx, f)
    return greens_single_integral(idx, f, abs_tol=_AUTO_ABS_TOL)


def greens_closed_forms(f: FrequencyPoint):
    """Elliptic-integral closed forms of ``g(0,0)``, ``g(1,0)`` and ``g(2,0)``.

    Returns
    -------
    tuple of float
        ``(g00, g10, g20)`` with
        ``g00 = K/(alpha pi)``, ``g10 = 1/4 - alpha g00 / 2`` and
        ``g20 = g00 - alpha/2 + (alpha/pi) E``, where ``K`` and ``E`` take
        the parameter ``4 / alpha**2``.
    """
    _require_stop_band(f)
    alpha = f.alpha
    p = 4.0 / (alpha * alpha)
    g00 = elliptic_k(p) / (alpha * math.pi)
    g10 = 0.25 - 0.5 * alpha * g00
    g20 = g00 - 0.5 * alpha + alpha / math.pi * elliptic_e(p)
    return g00, g10, g20


def greens_row_recurrence(max_m: int, f: FrequencyPoint) -> list:
    """Row ``g(0,0), g(1,0), ..., g(max_m,0)`` by forward recurrence.

    With ``T_m = g(m, 0)`` and ``U_m = g(m, 1)`` the lattice equation on the
    defect row and integration by parts of the single integral give

    ``T_{m+1} = -T_{m-1} - 2 alpha T_m - 2 U_m``

    ``(m+1) U_{m+1} = -2 m T_m - 2 alpha m U_m - (m-1) U_{m-1}``

    seeded by the elliptic closed forms of ``T_0, T_1, T_2`` and by
    ``U_0 = T_1``. The recurrence is unstable (errors grow roughly like
    ``(alpha + sqrt(alpha^2 - 4))^m``), so the last entry is re-checked
    against :func:`greens_auto`.

    Raises
    ------
    InstabilityError
        If the last entry disagrees with the direct evaluation by more than
        six digits or by more than ``1e-10`` absolutely.
    """
    _require_stop_band(f)
    max_m = int(max_m)
    if max_m < 0 or max_m > 64:
        raise DomainError(f"max_m must lie in [0, 64], got {max_m}")
    alpha = f.alpha
    t0, t1, t2 = greens_closed_forms(f)
    if max_m <= 2:
        return [t0, t1, t2][: max_m + 1]
    T = [t0, t1, t2]
    U = [t1, -0.5 * (t2 + t0 + 2.0 * alpha * t1)]
    for m in range(2, max_m):
        U.append((-2.0 * (m - 1) * T[m - 1] - 2.0 * alpha * (m - 1) * U[m - 1] - (m - 2) * U[m - 2]) / m)
        T.append(-T[m - 1] - 2.0 * alpha * T[m] - 2.0 * U[m])
    reference = greens_auto((max_m, 0), f)
    error = abs(T[max_m] - reference)
    if error > 1e-10 or error > 1e-6 * abs(reference) + 1e-12:
        raise InstabilityError(
            f"forward recurrence to m={max_m} at alpha={alpha} drifted by {error:.2e} "
            f"(reference {reference:.6e})"
        )
    return T
