"""Special functions used by the lattice Green's function representations.

The kernel is self-contained: complete elliptic integrals by the
arithmetic-geometric mean, modified Bessel functions by Miller's backward
recurrence, the digamma function, Pochhammer symbols and the two
hypergeometric families needed by the stop-band and band-edge series.

Elliptic integrals take the *parameter* ``m = k**2`` rather than the modulus,
so that ``elliptic_k(4 / alpha**2)`` is the quantity entering the on-site
Green's function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControl",
    "elliptic_k",
    "elliptic_e",
    "bessel_i",
    "bessel_i_scaled_table",
    "digamma",
    "pochhammer",
    "hyp_4f3_series",
    "hyp_4f3_regularized",
    "hyp_3f2_terminating",
]

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for slowly convergent hypergeometric series.

    Parameters
    ----------
    rel_tol : float
        Stop once the estimated remainder falls below ``rel_tol`` times the
        partial sum. Must lie in ``(0, 1e-3)``.
    max_terms : int
        Hard cap on the number of terms, at least 100.
    """

    rel_tol: float = 1e-13
    max_terms: int = 10000

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1e-3):
            raise DomainError(f"rel_tol must lie in (0, 1e-3), got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 100:
            raise DomainError(f"max_terms must be an integer >= 100, got {self.max_terms}")


DEFAULT_SERIES = SeriesControl()


# ---------------------------------------------------------------------------
# Complete elliptic integrals


def _agm_sequence(m):
    """Run the AGM on (1, sqrt(1-m)) and return (a_final, sum 2^(n-1) c_n^2)."""
    a = 1.0
    b = math.sqrt(1.0 - m)
    c2_sum = 0.5 * m
    power = 0.5
    c = math.sqrt(m)
    for _ in range(64):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        # c_{n+1} = c_n^2 / (4 a_{n+1}) avoids the cancellation in (a - b) / 2
        c = c * c / (4.0 * a)
        power *= 2.0
        c2_sum += power * c * c
        if power * c * c <= 1e-17 * c2_sum or c == 0.0:
            break
    return a, c2_sum


def elliptic_k(param: float) -> float:
    r"""Complete elliptic integral of the first kind.

    .. math:: K(m) = \int_0^{\pi/2} \frac{d\theta}{\sqrt{1 - m \sin^2\theta}}

    Parameters
    ----------
    param : float
        Parameter ``m = k**2`` in ``[0, 1)``.

    Returns
    -------
    float
        ``K(m)``, computed as ``pi / (2 AGM(1, sqrt(1-m)))``.
    """
    m = float(param)
    if not (0.0 <= m < 1.0):
        raise DomainError(f"elliptic_k requires 0 <= m < 1, got {param}")
    a, _ = _agm_sequence(m)
    return math.pi / (2.0 * a)


def elliptic_e(param: float) -> float:
    r"""Complete elliptic integral of the second kind.

    .. math:: E(m) = \int_0^{\pi/2} \sqrt{1 - m \sin^2\theta}\, d\theta

    Parameters
    ----------
    param : float
        Parameter ``m = k**2`` in ``[0, 1]``.

    Returns
    -------
    float
        ``E(m)`` from the AGM with the Gauss-Legendre correction sum.
    """
    m = float(param)
    if not (0.0 <= m <= 1.0):
        raise DomainError(f"elliptic_e requires 0 <= m <= 1, got {param}")
    if m == 1.0:
        return 1.0
    a, c2_sum = _agm_sequence(m)
    return math.pi / (2.0 * a) * (1.0 - c2_sum)


# ---------------------------------------------------------------------------
# Modified Bessel functions of the first kind


def _bessel_series_scaled(nmax, x):
    """exp(-x) I_k(x), k = 0..nmax, from the ascending series (small x)."""
    out = np.zeros((nmax + 1, x.size))
    q = 0.25 * x * x
    lead = np.ones_like(x)
    for k in range(nmax + 1):
        if k > 0:
            lead = lead * (0.5 * x) / k
        term = lead.copy()
        total = lead.copy()
        for j in range(1, 60):
            term = term * q / (j * (j + k))
            total = total + term
            if np.all(term <= 1e-17 * total):
                break
        out[k] = total
    return out * np.exp(-x)


def _bessel_miller_scaled(nmax, x):
    """exp(-x) I_k(x), k = 0..nmax, by normalized backward recurrence."""
    start = nmax + 20 + int(math.sqrt(80.0 * float(x.max()))) + 10
    out = np.zeros((nmax + 1, x.size))
    b_next = np.zeros_like(x)
    b_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        if k <= nmax:
            out[k] = b_cur
        norm += 2.0 * b_cur
        b_prev = b_next + (2.0 * k / x) * b_cur
        b_next, b_cur = b_cur, b_prev
        big = b_cur > 1e200
        if np.any(big):
            scale = np.where(big, 1e-200, 1.0)
            b_cur = b_cur * scale
            b_next = b_next * scale
            norm = norm * scale
            out *= scale
    out[0] = b_cur
    norm += b_cur
    return out / norm


def bessel_i_scaled_table(nmax: int, x) -> np.ndarray:
    """Exponentially scaled Bessel functions ``exp(-x) I_k(x)`` for all orders.

    Parameters
    ----------
    nmax : int
        Highest order required.
    x : array_like
        Nonnegative arguments.

    Returns
    -------
    ndarray, shape (nmax + 1, x.size)
        Row ``k`` holds ``exp(-x) I_k(x)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if np.any(x < 0):
        raise DomainError("bessel arguments must be nonnegative")
    out = np.zeros((nmax + 1, x.size))
    zero = x == 0.0
    out[0, zero] = 1.0
    small = (x > 0.0) & (x < 2.0)
    large = x >= 2.0
    if np.any(small):
        out[:, small] = _bessel_series_scaled(nmax, x[small])
    if np.any(large):
        out[:, large] = _bessel_miller_scaled(nmax, x[large])
    return out


def bessel_i(order: int, x: float) -> float:
    """Modified Bessel function of the first kind ``I_n(x)`` of integer order.

    Parameters
    ----------
    order : int
        Order ``0 <= n <= 200``.
    x : float
        Argument ``0 <= x <= 700``.

    Returns
    -------
    float
        ``I_n(x)``.

    Raises
    ------
    OverflowError
        If the result is not representable.
    """
    n = int(order)
    if n != order or n < 0 or n > 200:
        raise DomainError(f"bessel_i order must be an integer in [0, 200], got {order}")
    x = float(x)
    if x < 0.0:
        raise DomainError(f"bessel_i requires x >= 0, got {x}")
    if x > 700.0:
        raise OverflowError(f"I_{n}({x}) exceeds the representable range")
    scaled = bessel_i_scaled_table(n, x)[n, 0]
    value = scaled * math.exp(x)
    if not math.isfinite(value):
        raise OverflowError(f"I_{n}({x}) exceeds the representable range")
    return value


# ---------------------------------------------------------------------------
# Digamma and Pochhammer

_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Digamma function ``psi(x) = Gamma'(x) / Gamma(x)`` for ``x > 0``.

    Small arguments are shifted above 10 with ``psi(x+1) = psi(x) + 1/x`` and
    the asymptotic Bernoulli series finishes the evaluation.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"digamma requires x > 0, got {x}")
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    power = inv2
    for coeff in _DIGAMMA_ASYMPTOTIC:
        tail += coeff * power
        power *= inv2
    return shift + math.log(x) - 0.5 / x - tail


def pochhammer(a: float, k: int) -> float:
    """Rising factorial ``(a)_k = a (a+1) ... (a+k-1)``, with ``(a)_0 = 1``."""
    k = int(k)
    if k < 0:
        raise DomainError("pochhammer requires k >= 0")
    result = 1.0
    for i in range(k):
        result *= a + i
        if result == 0.0:
            return 0.0
        if not math.isfinite(result):
            raise OverflowError(f"pochhammer({a}, {k}) overflows")
    return result


# ---------------------------------------------------------------------------
# Hypergeometric series


def hyp_4f3_series(a1, a2, b1, b2, b3, z, ctl: SeriesControl = DEFAULT_SERIES):
    """Normalized series of 4F3(a1, a1, a2, a2; b1, b2, b3; z).

    The first term is 1. Summation stops once the remainder, bounded with the
    running term ratio, drops below ``ctl.rel_tol`` times the partial sum.

    Returns
    -------
    float
        The (unregularized) series value.
    """
    if not abs(z) < 1.0:
        raise DomainError(f"series requires |z| < 1, got z={z}")
    for b in (b1, b2, b3):
        if b <= 0 and float(b).is_integer():
            raise DomainError(f"bottom parameter {b} is a nonpositive integer")
    term = 1.0
    total = 1.0
    zabs = abs(z)
    for j in range(ctl.max_terms):
        ratio = ((a1 + j) * (a2 + j)) ** 2 / ((j + 1.0) * (b1 + j) * (b2 + j) * (b3 + j)) * z
        term *= ratio
        total += term
        rho = max(abs(ratio), zabs)
        if term == 0.0:
            return total
        if rho < 1.0 and abs(term) * rho / (1.0 - rho) <= ctl.rel_tol * abs(total):
            return total
    raise ConvergenceError(
        f"4F3 series did not reach rel_tol={ctl.rel_tol} within {ctl.max_terms} terms (z={z})"
    )


def hyp_4f3_regularized(a1, a2, b1, b2, b3, z, ctl: SeriesControl = DEFAULT_SERIES):
    r"""Regularized 4F3 with doubled top parameters.

    .. math::

        \mathbf{F}(z) = \sum_{j\ge 0}
        \frac{(a_1)_j^2 (a_2)_j^2}{\Gamma(b_1+j)\Gamma(b_2+j)\Gamma(b_3+j)}
        \frac{z^j}{j!}

    Parameters
    ----------
    a1, a2 : float
        Top parameters, each repeated twice.
    b1, b2, b3 : float
        Bottom parameters, all positive.
    z : float
        Argument with ``|z| < 1``.
    ctl : SeriesControl
        Truncation policy.

    Returns
    -------
    float
    """
    for b in (b1, b2, b3):
        if b <= 0:
            raise DomainError(f"bottom parameters must be positive, got {b}")
    series = hyp_4f3_series(a1, a2, b1, b2, b3, z, ctl)
    return series * math.exp(-(math.lgamma(b1) + math.lgamma(b2) + math.lgamma(b3)))


def hyp_3f2_terminating(m_half: float, k: int, b1: float, b2: float) -> float:
    """Terminating series 3F2(a, a, -k; b1, b2; 1) with ``a = m_half``.

    The ``k + 1`` terms are summed directly.

    Raises
    ------
    DomainError
        If ``b1 + j`` or ``b2 + j`` vanishes for some ``j < k``.
    """
    k = int(k)
    if k < 0:
        raise DomainError("hyp_3f2_terminating requires k >= 0")
    a = float(m_half)
    term = 1.0
    total = 1.0
    for j in range(k):
        den = (b1 + j) * (b2 + j)
        if den == 0.0:
            raise DomainError(
                f"bottom parameter hits zero at term {j} before termination (b1={b1}, b2={b2})"
            )
        term *= (a + j) * (a + j) * (j - k) / (den * (j + 1.0))
        total += term
    return total
