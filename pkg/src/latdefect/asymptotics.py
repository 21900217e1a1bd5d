"""Asymptotic forms of the stop-band Green's function.

Two regimes are covered.

Far field. For large offsets at fixed frequency the single integral is
dominated by a neighbourhood of ``xi = pi`` and Laplace's method gives
Gaussian-modulated geometric decay with base ``sqrt(c^2 - 1) - c``,
``c = omega^2/2 - 3``.

Band edge. As ``alpha -> 2+`` the 4F3 series sits on the boundary of its
disc of convergence. Its zero-balanced continuation is a double series in
``w = 1 - 4/alpha^2`` with a ``log w`` singularity,

    g = P sum_j ((A)_j / j!)^2 w^j [ sum_{k<=j} (-j)_k F_k / (A)_k^2
            (psi(1+j-k) + psi(1+j) - 2 psi(A+j) - log w)
        + (-1)^j j! sum_{k>j} (k-j-1)! F_k / (A)_k^2 ],

with ``P = (-4)^s / (pi (2 alpha)^(1+s))``, ``s = m + n2``,
``A = (1+s)/2`` and coefficients ``F_k`` given by a terminating 3F2.
The ``j = 0`` term is the leading band-edge behaviour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, DomainError
from .greens import FrequencyPoint, GreensIndex, _as_index
from .specfun import EULER_GAMMA, digamma, hyp_3f2_terminating, pochhammer

__all__ = [
    "FarFieldParams",
    "greens_far_parallel",
    "greens_far_perpendicular",
    "far_field_relative_correction",
    "field_far_parallel",
    "field_far_perpendicular",
    "frak_f",
    "greens_band_edge_continuation",
    "greens_band_edge_leading",
    "band_edge_ray_forms",
    "field_band_edge",
    "BAND_EDGE_ALPHA_MAX",
]

#: Upper end of the window where band-edge forms are offered.
BAND_EDGE_ALPHA_MAX = 2.2

DEFAULT_J_MAX = 40
DEFAULT_K_MAX = 4000


@dataclass(frozen=True)
class FarFieldParams:
    """Far-field constants ``c = omega^2/2 - 3`` and ``sqrt(c^2-1) - c``."""

    c: float
    decay_base: float

    @classmethod
    def from_frequency(cls, f: FrequencyPoint) -> "FarFieldParams":
        if not f.in_stop_band:
            raise DomainError(f"omega^2={f.omega2} is not in the stop band")
        c = 0.5 * f.omega2 - 3.0
        root = math.sqrt((c - 1.0) * (c + 1.0))
        return cls(c, -1.0 / (c + root))

    @property
    def root(self) -> float:
        return math.sqrt((self.c - 1.0) * (self.c + 1.0))


# ---------------------------------------------------------------------------
# Far field


def far_field_relative_correction(distance: int, f: FrequencyPoint) -> float:
    """Next-order relative correction ``(c^2 - c - 1) / (8 |d| sqrt(c^2-1))``.

    Carrying Laplace's method one order further multiplies the leading far
    field by ``1 +`` this quantity; its magnitude is the error estimate
    attached to the far-field forms.
    """
    p = FarFieldParams.from_frequency(f)
    return (p.c * p.c - p.c - 1.0) / (8.0 * abs(distance) * p.root)


def greens_far_parallel(m: int, f: FrequencyPoint, return_error: bool = False, corrected: bool = False):
    r"""Far-field Green's function along the defect row.

    .. math::

        g(m, 0) \sim \frac{(\sqrt{c^2-1} - c)^{|m|}}
        {\sqrt{8\pi\sqrt{c^2-1}}\,\sqrt{|m|}}

    Parameters
    ----------
    m : int
        Offset along the row, ``|m| >= 1``.
    f : FrequencyPoint
    return_error : bool
        Also return the magnitude of the next-order term.
    corrected : bool
        Include the next-order factor ``1 + far_field_relative_correction``.
        Close to the band edge ``sqrt(c^2 - 1)`` is small and the leading
        form needs ``|m|`` in the hundreds for percent accuracy.
    """
    if abs(m) < 1:
        raise DomainError("far-field form requires |m| >= 1")
    p = FarFieldParams.from_frequency(f)
    value = p.decay_base ** abs(m) / (math.sqrt(8.0 * math.pi * p.root) * math.sqrt(abs(m)))
    if corrected:
        value *= 1.0 + far_field_relative_correction(m, f)
    if return_error:
        return value, abs(value * far_field_relative_correction(m, f))
    return value


def greens_far_perpendicular(
    p_prime: int, n2: int, p: int, f: FrequencyPoint, return_error: bool = False, corrected: bool = False
):
    r"""Far-field Green's function across the defect row.

    .. math::

        g(p'-p, n_2) \sim (-1)^{p'-p}
        \frac{(\sqrt{c^2-1} - c)^{|n_2|}}{\sqrt{8\pi\sqrt{c^2-1}}\sqrt{|n_2|}}
        \exp\!\left[-\frac{(p'-p)^2\sqrt{c^2-1}}{2|n_2|}\right]

    ``corrected`` applies the same next-order factor as
    :func:`greens_far_parallel`.
    """
    if abs(n2) < 1:
        raise DomainError("perpendicular far-field form requires |n2| >= 1")
    d = int(p_prime) - int(p)
    par = FarFieldParams.from_frequency(f)
    sign = -1.0 if d % 2 else 1.0
    value = (
        sign
        * par.decay_base ** abs(n2)
        * math.exp(-d * d * par.root / (2.0 * abs(n2)))
        / (math.sqrt(8.0 * math.pi * par.root) * math.sqrt(abs(n2)))
    )
    if corrected:
        value *= 1.0 + far_field_relative_correction(n2, f)
    if return_error:
        return value, abs(value * far_field_relative_correction(n2, f))
    return value


def field_far_parallel(cfg, mode, n1: int, corrected: bool = False) -> float:
    """Far-field displacement on the defect row at ``n1 >= N + 5``."""
    if n1 < cfg.n_defects + 5:
        raise DomainError(f"n1 must be at least N + 5 = {cfg.n_defects + 5}")
    f = FrequencyPoint.from_omega(mode.omega)
    scale = (1.0 - cfg.mass_ratio) * f.omega2
    return scale * sum(
        u * greens_far_parallel(n1 - p, f, corrected=corrected) for p, u in enumerate(mode.eigenvector)
    )


def field_far_perpendicular(cfg, mode, p_prime: int, n2: int, corrected: bool = False) -> float:
    """Far-field displacement at ``(p_prime, n2)`` with ``|n2| >= 5``."""
    if abs(n2) < 5:
        raise DomainError("|n2| must be at least 5")
    f = FrequencyPoint.from_omega(mode.omega)
    scale = (1.0 - cfg.mass_ratio) * f.omega2
    return scale * sum(
        u * greens_far_perpendicular(p_prime, n2, p, f, corrected=corrected)
        for p, u in enumerate(mode.eigenvector)
    )


# ---------------------------------------------------------------------------
# Band-edge continuation


def frak_f(m: int, n2: int, k: int) -> float:
    """Continuation coefficient ``F(m, n2, k)``.

    ``F = (m)_k (n2)_k / k! * 3F2(s/2, s/2, -k; m, n2; 1)`` with
    ``s = m + n2``. When ``m`` or ``n2`` is zero the 3F2 has a vanishing
    lower parameter, so the product is expanded termwise instead:
    ``F = sum_i (s/2)_i^2 (-k)_i / i! (m+i)_{k-i} (n2+i)_{k-i} / k!``.
    """
    m, n2, k = abs(int(m)), abs(int(n2)), int(k)
    if k < 0:
        raise DomainError("k must be nonnegative")
    half = 0.5 * (m + n2)
    if m > 0 and n2 > 0:
        return pochhammer(m, k) * pochhammer(n2, k) / math.factorial(k) * hyp_3f2_terminating(half, k, m, n2)
    total = 0.0
    for i in range(k + 1):
        total += (
            pochhammer(half, i) ** 2 * pochhammer(-k, i) / math.factorial(i)
            * pochhammer(m + i, k - i) * pochhammer(n2 + i, k - i)
        )
    return total / math.factorial(k)


def _scaled_coefficients(m, n2, k_max):
    """``c_k`` with ``F_k = (k-1)! c_k`` for ``k = 1..k_max`` (``c_0`` unused).

    ``F_k`` is the Cauchy product of ``(-d)_l (d)_l / l!`` with
    ``d = (n2 - m)/2`` and ``(s/2)_p (l)_p / p!``; factoring ``(k-1)!`` turns
    it into a plain convolution of two slowly varying sequences.
    """
    d = 0.5 * (n2 - m)
    s = m + n2
    u = np.zeros(k_max + 1)
    if d != 0.0:
        u[1] = -d * d
        for ell in range(1, k_max):
            u[ell + 1] = u[ell] * (ell - d) * (ell + d) / ((ell + 1.0) * ell)
    v = np.zeros(k_max + 1)
    v[0] = 1.0
    for p in range(k_max):
        v[p + 1] = v[p] * (0.5 * s + p) / (p + 1.0)
    return np.convolve(u, v)[: k_max + 1]


def _log_poch(a, k):
    return gammaln(a + k) - gammaln(a)


def _tail_estimate(terms, k_values):
    """Power-law remainder of a slowly converging positive or negative series."""
    last = terms[-1]
    if last == 0.0 or terms.size < 8:
        return 0.0
    half = terms[terms.size // 2]
    if half == 0.0 or np.sign(half) != np.sign(last):
        return 0.0
    ratio = abs(half / last)
    span = k_values[-1] / k_values[terms.size // 2]
    expo = math.log(ratio) / math.log(span)
    if expo <= 1.05:
        raise ConvergenceError("band-edge coefficient tail decays too slowly for a remainder estimate")
    kk = k_values[-1]
    return last * (kk / (expo - 1.0) - 0.5)


def _continuation_terms(ix: GreensIndex, f: FrequencyPoint, j_max: int, k_max: int):
    """Terms of the outer sum over ``j``, their error estimates and the prefactor."""
    m, n2 = ix.m, ix.n2
    s = m + n2
    a = 0.5 * (1.0 + s)
    alpha = f.alpha
    w = 1.0 - 4.0 / (alpha * alpha)
    if not w > 0.0:
        raise DomainError("continuation requires alpha > 2")
    log_w = math.log(w)
    pref = (-4.0) ** s / (math.pi * (2.0 * alpha) ** (1 + s))
    c = _scaled_coefficients(m, n2, k_max)
    ks = np.arange(1, k_max + 1, dtype=float)
    # log of ((k-1)! / (A)_k)^2, k >= 1
    log_r2 = 2.0 * (gammaln(ks) - _log_poch(a, ks))
    psi_a = [digamma(a + j) for j in range(j_max + 1)]
    psi_int = [digamma(1.0 + j) for j in range(j_max + 1)]
    terms = []
    errors = []
    for j in range(j_max + 1):
        head = psi_int[j] + psi_int[j] - 2.0 * psi_a[j] - log_w
        for k in range(1, j + 1):
            if c[k] == 0.0:
                continue
            log_mag = gammaln(j + 1.0) - gammaln(j - k + 1.0) + gammaln(k) - 2.0 * _log_poch(a, k)
            sign = -1.0 if k % 2 else 1.0
            head += sign * math.exp(log_mag) * c[k] * (
                psi_int[j - k] + psi_int[j] - 2.0 * psi_a[j] - log_w
            )
        sel = ks > j
        kk = ks[sel]
        log_binom = gammaln(kk) - gammaln(j + 1.0) - gammaln(kk - j)
        tail_terms = np.exp(log_r2[sel] - log_binom) * c[1:][sel]
        body = float(np.sum(tail_terms))
        remainder = _tail_estimate(tail_terms, kk) if tail_terms.size else 0.0
        sign_j = -1.0 if j % 2 else 1.0
        outer = math.exp(2.0 * (_log_poch(a, j) - gammaln(j + 1.0))) * w**j
        terms.append(outer * (head + sign_j * (body + remainder)))
        errors.append(outer * (0.05 * abs(remainder) + 2.0 * abs(tail_terms[-1]) if tail_terms.size else 0.0))
    return pref, np.asarray(terms), np.asarray(errors)


def greens_band_edge_continuation(
    idx, f: FrequencyPoint, j_max: int = DEFAULT_J_MAX, k_max: int = DEFAULT_K_MAX
):
    """Band-edge continuation of the Green's function.

    Parameters
    ----------
    idx : GreensIndex or tuple
    f : FrequencyPoint
        Any stop-band frequency; convergence in ``j`` is geometric in
        ``w = 1 - 4/alpha^2`` and therefore fastest near the edge.
    j_max : int
        Last retained outer index.
    k_max : int
        Number of coefficients ``F_k`` in the inner tails. These decay only
        algebraically; a power-law remainder is added to each tail.

    Returns
    -------
    (float, float)
        The value and an error estimate built from the last retained outer
        term and the tail remainders.

    Raises
    ------
    ConvergenceError
        If the outer terms fail to decrease.
    """
    ix = _as_index(idx)
    if not f.in_stop_band:
        raise DomainError(f"omega^2={f.omega2} is not in the stop band")
    pref, terms, errors = _continuation_terms(ix, f, int(j_max), int(k_max))
    tail = np.abs(terms[-3:])
    if terms.size > 6 and not (tail[-1] <= np.max(np.abs(terms[:4])) * 1e-3 or tail[-1] < 1e-14):
        raise ConvergenceError(
            f"continuation outer terms do not decrease (alpha={f.alpha}, j_max={j_max})"
        )
    value = pref * float(np.sum(terms))
    err = abs(pref) * (float(np.sum(errors)) + abs(terms[-1]))
    return value, err


def _check_window(f: FrequencyPoint):
    if not (2.0 < f.alpha <= BAND_EDGE_ALPHA_MAX):
        raise DomainError(f"band-edge forms require alpha in (2, {BAND_EDGE_ALPHA_MAX}], got {f.alpha}")


def _leading(ix: GreensIndex, f: FrequencyPoint, far_field: bool = False):
    pref, terms, errors = _continuation_terms(ix, f, 1, DEFAULT_K_MAX)
    value = pref * terms[0]
    if far_field:
        s = ix.m + ix.n2
        a = 0.5 * (1.0 + s)
        if s == 0:
            raise DomainError("far-field band-edge form needs m + n2 >= 1")
        value += pref * 2.0 * (digamma(a) - math.log(0.5 * s))
    return value, abs(pref * terms[1]) + abs(pref * errors[0])


def greens_band_edge_leading(idx, f: FrequencyPoint, return_error: bool = False):
    """Leading band-edge form of the Green's function (``j = 0`` term).

    ``P [-2 gamma - 2 psi(A) - log(1 - 4/alpha^2) + sum_{k>=1} (k-1)! F_k / (A)_k^2]``.

    Parameters
    ----------
    idx : GreensIndex or tuple
    f : FrequencyPoint
        Must satisfy ``2 < alpha <= 2.2``.
    return_error : bool
        Also return the magnitude of the ``j = 1`` term.
    """
    _check_window(f)
    value, err = _leading(_as_index(idx), f)
    return (value, err) if return_error else value


def _printed_ray(ray, k, f):
    alpha = f.alpha
    log_w = math.log(1.0 - 4.0 / (alpha * alpha))
    if ray == "bond":
        return (-4.0) ** (1 + k) / (math.pi * (2.0 * alpha) ** (1 + k)) * (
            2.0 * EULER_GAMMA + digamma(0.5 * (1 + k)) + log_w
        )
    return -(16.0**k) / (math.pi * (2.0 * alpha) ** (1 + 2 * k)) * (
        2.0 * EULER_GAMMA + digamma(0.5 + k) + log_w
    )


def band_edge_ray_forms(ray: str, k: int, f: FrequencyPoint, variant: str = "corrected", far_field: bool = False) -> float:
    """Band-edge Green's function along a bond line or a diagonal.

    ``bond`` evaluates the entry ``(0, k)`` (equivalently ``(k, 0)``) and
    ``diag`` the entry ``(k, k)``. Both carry the prefactor ``(-4)^s``:
    along bond lines ``s = k`` and neighbouring masses move out of phase,
    along diagonals ``s = 2k`` and they move in phase.

    Parameters
    ----------
    ray : {"bond", "diag"}
    k : int
    f : FrequencyPoint
        Must satisfy ``2 < alpha <= 2.2``.
    variant : {"corrected", "printed"}
        ``corrected`` is the ``j = 0`` term of the continuation (with
        ``2 psi(A)`` and the coefficient sum, which vanishes on diagonals).
        ``printed`` is the historical closed form with a single digamma and,
        on bond lines, an extra factor ``-4``; it has the right sign pattern
        but not the right magnitude and is kept for comparison.
    far_field : bool
        Replace ``psi((1+s)/2)`` by ``log(s/2)`` (large ``k``).
    """
    if ray not in ("bond", "diag"):
        raise DomainError(f"ray must be 'bond' or 'diag', got {ray!r}")
    k = int(k)
    if k < 0:
        raise DomainError("k must be nonnegative")
    _check_window(f)
    if variant == "printed":
        value = _printed_ray(ray, k, f)
        if far_field:
            s = k if ray == "bond" else 2 * k
            a = 0.5 * (1.0 + s)
            value -= (
                (-4.0) ** (1 + k) / (math.pi * (2.0 * f.alpha) ** (1 + k))
                if ray == "bond"
                else -(16.0**k) / (math.pi * (2.0 * f.alpha) ** (1 + 2 * k))
            ) * (digamma(a) - math.log(0.5 * s))
        return value
    if variant != "corrected":
        raise DomainError(f"variant must be 'corrected' or 'printed', got {variant!r}")
    ix = GreensIndex(k, 0) if ray == "bond" else GreensIndex(k, k)
    return _leading(ix.canonical(), f, far_field=far_field)[0]


def field_band_edge(cfg, mode, ray: str, k: int, variant: str = "corrected", order: str = "leading") -> float:
    """Band-edge approximation of the mode field along a ray.

    The ray starts at the last defect site ``p = N - 1``: ``bond`` is the
    point ``(N - 1 + k, 0)`` on the defect row and ``diag`` the point
    ``(N - 1 + k, k)``. The field is ``(1-r) omega^2 sum_p U_p g(n1 - p, n2)``
    with ``g`` replaced by its band-edge form.

    Parameters
    ----------
    order : {"leading", "continuation"}
        ``leading`` uses the ``j = 0`` form, ``continuation`` the full
        double series.
    variant : {"corrected", "printed"}
        Only used with ``order="leading"``; ``printed`` is available for
        ``N = 1`` on diagonals and for any ``N`` on the defect row.
    """
    f = FrequencyPoint.from_omega(mode.omega)
    _check_window(f)
    k = int(k)
    n = cfg.n_defects
    n1 = n - 1 + k
    n2 = 0 if ray == "bond" else k
    if ray not in ("bond", "diag"):
        raise DomainError(f"ray must be 'bond' or 'diag', got {ray!r}")
    total = 0.0
    for p, u in enumerate(mode.eigenvector):
        m = n1 - p
        if order == "continuation":
            g = greens_band_edge_continuation((m, n2), f)[0]
        elif order != "leading":
            raise DomainError(f"order must be 'leading' or 'continuation', got {order!r}")
        elif variant == "printed":
            if n2 == 0:
                g = band_edge_ray_forms("bond", abs(m), f, variant="printed")
            elif abs(m) == n2:
                g = band_edge_ray_forms("diag", n2, f, variant="printed")
            else:
                raise DomainError("printed ray forms only cover exact bond or diagonal offsets")
        else:
            g = _leading(_as_index((m, n2)), f)[0]
        total += u * g
    return (1.0 - cfg.mass_ratio) * f.omega2 * total
