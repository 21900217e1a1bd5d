"""Brute-force validators independent of the Green's function machinery.

``truncated_spectrum`` builds a finite patch of the lattice with clamped
boundary, places the light masses on it and solves the sparse generalized
eigenproblem ``K u = omega^2 M u`` near the window of interest.
``greens_quadrature_reference`` integrates the double Fourier integral with
tensor Gauss-Legendre panels and Richardson extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .errors import DomainError, ToleranceNotMetError
from .greens import FrequencyPoint, _as_index

__all__ = [
    "TruncatedLattice",
    "OracleMode",
    "truncated_spectrum",
    "greens_quadrature_reference",
    "match_frequencies",
]

LOCALIZATION_RADIUS = 5
LOCALIZED_SCORE = 0.9


@dataclass(frozen=True)
class TruncatedLattice:
    """Square patch ``[-L, N-1+L] x [-L, L]`` with clamped outer boundary.

    Parameters
    ----------
    half_width : int
        ``L >= 15``.
    n_defects : int
    mass_ratio : float
        Mass of the defect sites; ``1`` gives the intact lattice.
    boundary : str
        Only ``"fixed"`` is supported.
    """

    half_width: int
    n_defects: int
    mass_ratio: float
    boundary: str = "fixed"

    def __post_init__(self):
        if self.half_width < 15:
            raise DomainError("half_width must be at least 15")
        if self.boundary != "fixed":
            raise DomainError("only the fixed boundary is supported")
        if not (0.0 < self.mass_ratio <= 1.0):
            raise DomainError("mass_ratio must lie in (0, 1]")
        if self.n_defects < 1:
            raise DomainError("n_defects must be positive")

    @property
    def shape(self):
        return self.n_defects + 2 * self.half_width, 2 * self.half_width + 1


@dataclass(frozen=True)
class OracleMode:
    """Eigenpair of the truncated lattice restricted to the defect window."""

    omega: float
    score: float
    parity: str
    defect_amplitudes: tuple

    def to_dict(self) -> dict:
        return {"omega": self.omega, "score": self.score, "parity": self.parity}


def _operators(lat: TruncatedLattice):
    nx, ny = lat.shape
    lap_x = sparse.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(nx, nx))
    lap_y = sparse.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(ny, ny))
    stiff = sparse.kron(lap_x, sparse.identity(ny)) + sparse.kron(sparse.identity(nx), lap_y)
    mass = np.ones(nx * ny)
    row = lat.half_width
    defect_sites = [(lat.half_width + p) * ny + row for p in range(lat.n_defects)]
    mass[defect_sites] = lat.mass_ratio
    return stiff.tocsc(), mass, defect_sites


def truncated_spectrum(lat: TruncatedLattice, omega_window=None) -> list:
    """Eigenfrequencies of the truncated lattice inside a stop-band window.

    Parameters
    ----------
    lat : TruncatedLattice
    omega_window : (float, float), optional
        Frequencies ``(lo, hi)`` with ``lo >= sqrt(8)``; the default is
        ``(sqrt 8, 1.05 sqrt(8/r))``.

    Returns
    -------
    list of OracleMode
        Sorted by frequency. ``score`` is the fraction of kinetic energy
        within distance 5 of the defect row; intact-lattice eigenvalues never
        exceed 8, so every returned frequency belongs to the defect.
    """
    if omega_window is None:
        omega_window = (math.sqrt(8.0), 1.05 * math.sqrt(8.0 / lat.mass_ratio))
    lo, hi = float(omega_window[0]), float(omega_window[1])
    if lo < math.sqrt(8.0) - 1e-12 or hi <= lo:
        raise DomainError("omega window must lie inside the stop band omega > sqrt(8)")
    stiff, mass, defect_sites = _operators(lat)
    # symmetric form M^{-1/2} K M^{-1/2}
    scale = sparse.diags(1.0 / np.sqrt(mass))
    op = (scale @ stiff @ scale).tocsc()
    n = op.shape[0]
    # shift above the window: the intact-lattice spectrum piles up just below
    # omega^2 = 8, and a shift inside the window stalls the Lanczos iteration
    sigma = 1.1 * hi * hi + 1.0
    k = min(n - 2, lat.n_defects + 4)
    while True:
        vals, vecs = splinalg.eigsh(op, k=k, sigma=sigma, which="LM")
        # the k eigenvalues nearest sigma are the k largest, so the window is
        # covered once one of them falls below it
        if vals.min() < lo * lo or k >= n - 2:
            break
        k = min(n - 2, 2 * k)
    inside = (vals >= lo * lo) & (vals <= hi * hi)
    nx, ny = lat.shape
    rows = np.arange(ny) - lat.half_width
    near = np.abs(rows) <= LOCALIZATION_RADIUS
    out = []
    for lam, vec in zip(vals[inside], vecs[:, inside].T):
        u = vec / np.sqrt(mass)
        energy = (mass * u * u).reshape(nx, ny)
        score = float(energy[:, near].sum() / energy.sum())
        amps = u[defect_sites]
        amps = amps / np.linalg.norm(amps)
        if np.allclose(amps, amps[::-1], atol=1e-6):
            parity = "symmetric"
        elif np.allclose(amps, -amps[::-1], atol=1e-6):
            parity = "skew_symmetric"
        else:
            parity = "mixed"
        out.append(OracleMode(float(math.sqrt(lam)), score, parity, tuple(float(a) for a in amps)))
    out.sort(key=lambda m: m.omega)
    return out


def match_frequencies(reference, candidates, gate: float = 5e-2):
    """Nearest-neighbour pairing of frequencies within ``gate``.

    Returns
    -------
    list of (float, float or None)
        Each reference value with its closest candidate, or ``None``.
    """
    pairs = []
    cands = list(candidates)
    for w in reference:
        if not cands:
            pairs.append((w, None))
            continue
        best = min(cands, key=lambda c: abs(c - w))
        pairs.append((w, best if abs(best - w) <= gate else None))
    return pairs


# ---------------------------------------------------------------------------
# Quadrature reference

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)


def _tensor_panels(m, n2, shift, panels):
    edges = np.linspace(0.0, math.pi, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = (0.5 * (hi - lo) * _NODES + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * _WEIGHTS).ravel()
    c = np.cos(x)
    kernel = 1.0 / (shift + 2.0 * c[:, None] + 2.0 * c[None, :])
    return float((w * np.cos(m * x)) @ kernel @ (w * np.cos(n2 * x))) / math.pi**2


def greens_quadrature_reference(idx, f: FrequencyPoint, tol: float = 1e-11) -> float:
    """Green's function by tensor Gauss-Legendre quadrature.

    The panel count is doubled until the Richardson-extrapolated estimates of
    two successive levels agree to ``tol``.
    """
    if not f.in_stop_band:
        raise DomainError(f"omega^2={f.omega2} is not in the stop band")
    ix = _as_index(idx)
    shift = f.omega2 - 4.0
    panels = 2
    prev = _tensor_panels(ix.m, ix.n2, shift, panels)
    prev_extrap = None
    while panels <= 256:
        panels *= 2
        cur = _tensor_panels(ix.m, ix.n2, shift, panels)
        # Gauss-Legendre panels of 16 points: error ratio at least 2^32 per halving
        extrap = cur + (cur - prev) / (2.0**32 - 1.0)
        if prev_extrap is not None and abs(extrap - prev_extrap) <= tol:
            return extrap
        prev, prev_extrap = cur, extrap
    raise ToleranceNotMetError(f"tensor quadrature for ({ix.m},{ix.n2}) did not reach {tol}")
