"""Localized modes of a finite line of light masses.

``N`` consecutive masses ``r < 1`` sit on the row ``n2 = 0`` of the unit-mass
square lattice. A stop-band mode at frequency ``omega`` exists exactly when
the defect-site amplitudes ``U`` satisfy the fixed point

    U = (1 - r) omega**2 G(omega) U,

where ``G`` is the symmetric Toeplitz matrix of Green's function values along
the defect row. The solver tracks the eigenvalues of
``(1 - r) omega**2 G(omega)`` inside each parity class and finds where they
cross 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from ._parallel import pmap
from .errors import BracketError, DomainError, ExtrapolationError, InstabilityError
from .greens import FrequencyPoint, greens_auto, greens_row_recurrence

__all__ = [
    "DefectConfig",
    "GreensMatrix",
    "ModeSolution",
    "FieldGrid",
    "BranchTable",
    "assemble_greens_matrix",
    "solvability_determinant",
    "find_modes",
    "search_interval",
    "r_of_omega_branches",
    "branch_band_edge_limit",
    "reconstruct_field",
    "field_values",
    "total_force",
    "isolated_chain_frequencies",
    "isolated_chain_r",
    "printed_r32_expression",
    "parity_bases",
]

SYMMETRIC = "symmetric"
SKEW = "skew_symmetric"

_EDGE_OFFSET = 1e-6
_ROOT_XTOL = 1e-10


@dataclass(frozen=True)
class DefectConfig:
    """Finite line defect of ``n_defects`` masses with mass ratio ``mass_ratio``."""

    n_defects: int
    mass_ratio: float

    def __post_init__(self):
        if int(self.n_defects) != self.n_defects or not (1 <= self.n_defects <= 64):
            raise DomainError(f"n_defects must be an integer in [1, 64], got {self.n_defects}")
        if not (0.0 < self.mass_ratio < 1.0):
            raise DomainError(f"mass_ratio must lie in (0, 1), got {self.mass_ratio}")


@dataclass(frozen=True)
class GreensMatrix:
    """Symmetric Toeplitz Green's matrix stored by its first row."""

    size: int
    entries: tuple
    omega: FrequencyPoint

    def full(self) -> np.ndarray:
        return linalg.toeplitz(np.asarray(self.entries, dtype=float))


@dataclass
class ModeSolution:
    """One localized mode.

    Attributes
    ----------
    omega : float
        Eigenfrequency in the stop band.
    eigenvector : ndarray
        Unit-norm defect-site amplitudes; the first entry larger than
        ``1e-6`` in magnitude is positive.
    symmetry : str
        ``"symmetric"`` or ``"skew_symmetric"`` under reversal of the sites.
    branch_index : int
        Rank ``i`` (1-based) of the eigenvalue crossing 1, which is also the
        index of the branch ``r_{N,i}`` carrying the mode.
    residual : float
        ``max |U - (1-r) omega^2 G U|``.
    degenerate : bool
        True if another root lies within ``1e-8`` in frequency.
    """

    omega: float
    eigenvector: np.ndarray
    symmetry: str
    branch_index: int
    residual: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "omega": float(self.omega),
            "symmetry": self.symmetry,
            "branch_index": int(self.branch_index),
            "eigenvector": [float(v) for v in self.eigenvector],
            "residual": float(self.residual),
            "degenerate": bool(self.degenerate),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModeSolution":
        return cls(
            omega=float(data["omega"]),
            eigenvector=np.asarray(data["eigenvector"], dtype=float),
            symmetry=data["symmetry"],
            branch_index=int(data["branch_index"]),
            residual=float(data["residual"]),
            degenerate=bool(data.get("degenerate", False)),
        )

    def __eq__(self, other):
        if not isinstance(other, ModeSolution):
            return NotImplemented
        return (
            self.omega == other.omega
            and self.symmetry == other.symmetry
            and self.branch_index == other.branch_index
            and self.residual == other.residual
            and self.degenerate == other.degenerate
            and np.array_equal(self.eigenvector, other.eigenvector)
        )


@dataclass
class FieldGrid:
    """Displacement field on ``[-W1, N-1+W1] x [-W2, W2]``.

    ``values[i, j]`` is the displacement at ``(n1[i], n2[j])``.
    """

    window: tuple
    n1: np.ndarray
    n2: np.ndarray
    values: np.ndarray

    def at(self, n1: int, n2: int) -> float:
        i, j = n1 - self.n1[0], n2 - self.n2[0]
        if not (0 <= i < self.n1.size and 0 <= j < self.n2.size):
            raise DomainError(f"site ({n1}, {n2}) lies outside the field window")
        return float(self.values[i, j])


@dataclass
class BranchTable:
    """Branch values ``r_{N,i}(omega)`` on a frequency grid.

    ``r[k, i-1]`` is branch ``i`` at ``omega[k]``; entries outside ``(0, 1)``
    are NaN.
    """

    omega: np.ndarray
    r: np.ndarray
    labels: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Green's matrix and parity bases


def _greens_row(n: int, f: FrequencyPoint) -> list:
    if n - 1 <= 6:
        try:
            return greens_row_recurrence(n - 1, f)
        except InstabilityError:
            pass
    return [greens_auto((k, 0), f) for k in range(n)]


def assemble_greens_matrix(n_defects: int, f: FrequencyPoint) -> GreensMatrix:
    """Toeplitz Green's matrix ``[G]_{ij} = g(i - j, 0; omega)``.

    Short rows come from the verified forward recurrence; longer rows, or rows
    where the recurrence is rejected, fall back to :func:`greens_auto`.
    """
    if not f.in_stop_band:
        raise DomainError(f"omega^2={f.omega2} is not in the stop band")
    row = _greens_row(int(n_defects), f)
    return GreensMatrix(int(n_defects), tuple(float(v) for v in row), f)


def parity_bases(n: int):
    """Orthonormal bases of the reversal-symmetric and antisymmetric vectors.

    Returns
    -------
    (ndarray, ndarray)
        Matrices of shape ``(n, ceil(n/2))`` and ``(n, floor(n/2))``.
    """
    half = n // 2
    sym = np.zeros((n, n - half))
    skew = np.zeros((n, half))
    c = 1.0 / math.sqrt(2.0)
    for i in range(half):
        sym[i, i] = sym[n - 1 - i, i] = c
        skew[i, i] = c
        skew[n - 1 - i, i] = -c
    if n % 2:
        sym[half, half] = 1.0
    return sym, skew


def _system_matrix(cfg: DefectConfig, f: FrequencyPoint) -> np.ndarray:
    g = assemble_greens_matrix(cfg.n_defects, f).full()
    return (1.0 - cfg.mass_ratio) * f.omega2 * g


def solvability_determinant(cfg: DefectConfig, f: FrequencyPoint) -> float:
    """``det[I - (1 - r) omega^2 G(omega)]``; zero exactly at a mode."""
    a = _system_matrix(cfg, f)
    return float(np.linalg.det(np.eye(cfg.n_defects) - a))


# ---------------------------------------------------------------------------
# Mode search


def search_interval(mass_ratio: float):
    """Frequency bracket ``(sqrt(8) + 1e-6, sqrt(8 / r))`` for the root search."""
    return math.sqrt(8.0) + _EDGE_OFFSET, math.sqrt(8.0 / mass_ratio)


def _class_eigs(cfg, omega, bases):
    a = _system_matrix(cfg, FrequencyPoint.from_omega(omega))
    out = []
    for basis in bases:
        if basis.shape[1] == 0:
            out.append((np.empty(0), np.empty((cfg.n_defects, 0))))
            continue
        block = basis.T @ a @ basis
        w, v = np.linalg.eigh(0.5 * (block + block.T))
        out.append((w, basis @ v))
    return a, out


def _search_grid(lo, hi):
    d_lo, d_hi = lo * lo - 8.0, hi * hi - 8.0
    geo = np.sqrt(8.0 + np.geomspace(d_lo, d_hi, 40))
    lin = np.linspace(lo, hi, 41)
    grid = np.unique(np.concatenate([geo, lin, [lo, hi]]))
    return grid[(grid >= lo) & (grid <= hi)]


def _fix_sign(u):
    for value in u:
        if abs(value) > 1e-6:
            return u if value > 0 else -u
    return u


def find_modes(cfg: DefectConfig) -> list:
    """All localized modes of the defect in ``(sqrt 8, sqrt(8/r)]``.

    The eigenvalues of ``(1-r) omega^2 G`` are computed separately on the
    symmetric and skew-symmetric subspaces, sampled on a frequency grid that
    is geometric in ``omega**2 - 8``, and every sign change of
    ``mu_j - 1`` is refined with Brent's method to ``1e-10`` in ``omega``.
    A Rayleigh-quotient Newton step polishes each root.

    Returns
    -------
    list of ModeSolution
        Sorted by frequency.
    """
    lo, hi = search_interval(cfg.mass_ratio)
    grid = _search_grid(lo, hi)
    bases = parity_bases(cfg.n_defects)
    samples = pmap(lambda w: _class_eigs(cfg, w, bases)[1], grid)
    roots = []
    for cls_id, name in enumerate((SYMMETRIC, SKEW)):
        count = bases[cls_id].shape[1]
        for j in range(count):
            h = np.array([s[cls_id][0][j] - 1.0 for s in samples])
            changes = np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) <= 0)[0]
            seen = set()
            for c in changes:
                if h[c] == 0.0 and c - 1 in seen:
                    continue
                seen.add(c)
                a, b = grid[c], grid[c + 1]

                def fn(w, j=j, cls_id=cls_id):
                    return _class_eigs(cfg, w, bases)[1][cls_id][0][j] - 1.0

                try:
                    w0 = optimize.brentq(fn, a, b, xtol=_ROOT_XTOL, rtol=1e-15)
                except ValueError as exc:
                    raise BracketError(f"branch {j + 1} ({name}): {exc}", branch=j + 1) from exc
                roots.append(_finish_mode(cfg, w0, cls_id, j, bases))
    roots.sort(key=lambda m: m.omega)
    for a, b in zip(roots[:-1], roots[1:]):
        if abs(a.omega - b.omega) < 1e-8:
            a.degenerate = b.degenerate = True
    return roots


def _finish_mode(cfg, omega, cls_id, j, bases):
    a, eigs = _class_eigs(cfg, omega, bases)
    u = eigs[cls_id][1][:, j]
    # Rayleigh-quotient Newton polish; accepted only if it reduces |rho - 1|
    rho = float(u @ a @ u)
    step = 1e-7 * omega
    a_plus = _system_matrix(cfg, FrequencyPoint.from_omega(omega + step))
    slope = (float(u @ a_plus @ u) - rho) / step
    if slope != 0.0:
        candidate = omega - (rho - 1.0) / slope
        lo, hi = search_interval(cfg.mass_ratio)
        if lo < candidate <= hi and abs(candidate - omega) < 1e-8:
            a2, eigs2 = _class_eigs(cfg, candidate, bases)
            u2 = eigs2[cls_id][1][:, j]
            if abs(float(u2 @ a2 @ u2) - 1.0) < abs(rho - 1.0):
                omega, a, u = candidate, a2, u2
    u = _fix_sign(u / np.linalg.norm(u))
    residual = float(np.max(np.abs(u - a @ u)))
    all_eigs = np.sort(np.concatenate([e[0] for e in eigs]))
    mu = eigs[cls_id][0][j]
    rank = int(np.argmin(np.abs(all_eigs - mu))) + 1
    return ModeSolution(
        omega=float(omega),
        eigenvector=u,
        symmetry=SYMMETRIC if cls_id == 0 else SKEW,
        branch_index=rank,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# Branch curves r_{N,i}(omega)


def _branch_values(n, f: FrequencyPoint):
    g = assemble_greens_matrix(n, f).full()
    mu = np.linalg.eigvalsh(g)
    with np.errstate(divide="ignore"):
        r = 1.0 - 1.0 / (f.omega2 * mu)
    r[(r <= 0.0) | (r >= 1.0) | ~np.isfinite(r)] = np.nan
    return r


def r_of_omega_branches(n_defects: int, omega_grid) -> BranchTable:
    """Branches ``r_{N,i}(omega)`` of the solvability condition.

    ``det[I - (1-r) omega^2 G]`` is a polynomial of degree ``N`` in ``r``
    whose roots are ``r_i = 1 - 1 / (omega^2 mu_i)`` with ``mu_i`` the
    eigenvalues of ``G``. Branch ``i`` follows the ``i``-th smallest
    eigenvalue, which is continuous in ``omega``; roots outside ``(0, 1)``
    are reported as NaN.

    Parameters
    ----------
    n_defects : int
    omega_grid : sequence of FrequencyPoint or float
        Frequencies (floats are read as ``omega``).
    """
    points = [p if isinstance(p, FrequencyPoint) else FrequencyPoint.from_omega(p) for p in omega_grid]
    for p in points:
        if not p.in_stop_band:
            raise DomainError(f"omega^2={p.omega2} is not in the stop band")
    rows = pmap(lambda p: _branch_values(n_defects, p), points)
    return BranchTable(
        omega=np.array([p.omega for p in points]),
        r=np.array(rows).reshape(len(points), n_defects),
        labels=[f"r_{n_defects},{i + 1}" for i in range(n_defects)],
    )


def branch_band_edge_limit(n_defects: int, branch: int) -> float:
    """Band-edge limit ``lim r_{N,i}(omega)`` as ``omega**2 -> 8+``.

    The Green's matrix diverges like ``log(omega**2 - 8)`` at the edge, so the
    branch is sampled at ``omega**2 = 8 + 10**-k`` (``k = 3..11``) and
    extrapolated to ``t = 1 / g(0,0) -> 0`` with Neville's algorithm. The
    order whose estimate moves least from the previous order is returned.

    Raises
    ------
    ExtrapolationError
        If no two successive orders agree to ``1e-4``.
    """
    if not (1 <= branch <= n_defects):
        raise DomainError(f"branch must lie in [1, {n_defects}], got {branch}")
    ks = range(11, 2, -1)
    t, y = [], []
    for k in ks:
        f = FrequencyPoint.from_omega2(8.0 + 10.0**-k)
        g = assemble_greens_matrix(n_defects, f)
        mu = np.linalg.eigvalsh(g.full())
        t.append(1.0 / g.entries[0])
        y.append(1.0 - 1.0 / (f.omega2 * mu[branch - 1]))
    t = np.asarray(t)
    level = np.asarray(y)
    estimates = [level[0]]
    for d in range(1, len(t)):
        level = (t[d:] * level[:-1] - t[:-d] * level[1:]) / (t[d:] - t[:-d])
        estimates.append(level[0])
    diffs = np.abs(np.diff(estimates))
    best = int(np.argmin(diffs))
    if diffs[best] > 1e-4:
        raise ExtrapolationError(
            f"band-edge extrapolation for N={n_defects}, branch {branch} did not contract "
            f"(smallest change {diffs[best]:.2e})"
        )
    return float(estimates[best + 1])


def printed_r32_expression() -> float:
    """The printed closed form ``7/8 - 1/(8 - 4 pi)`` for the second triplet branch.

    It exceeds 1 and is reported for comparison only; the computed limit is
    ``1 - 1/(8 - 16/pi)``.
    """
    return 7.0 / 8.0 - 1.0 / (8.0 - 4.0 * math.pi)


# ---------------------------------------------------------------------------
# Fields


class _GreensCache:
    """Per-call memo of canonical Green's function entries."""

    def __init__(self, f: FrequencyPoint):
        self.f = f
        self.store = {}

    def __call__(self, m, n2):
        a, b = abs(m), abs(n2)
        key = (a, b) if a >= b else (b, a)
        value = self.store.get(key)
        if value is None:
            value = greens_auto(key, self.f)
            self.store[key] = value
        return value


def reconstruct_field(cfg: DefectConfig, mode: ModeSolution, window=(5, 5)) -> FieldGrid:
    """Displacement field ``u_n = (1-r) omega^2 sum_p U_p g(n1 - p, n2)``.

    Parameters
    ----------
    cfg : DefectConfig
    mode : ModeSolution
    window : (int, int)
        Half-widths ``(W1, W2)``; the grid spans ``[-W1, N-1+W1] x [-W2, W2]``.
    """
    w1, w2 = (int(v) for v in window)
    if w1 < 0 or w2 < 0:
        raise DomainError("window half-widths must be nonnegative")
    if mode.residual > 1e-8:
        raise DomainError(f"mode residual {mode.residual:.2e} exceeds 1e-8")
    f = FrequencyPoint.from_omega(mode.omega)
    cache = _GreensCache(f)
    n = cfg.n_defects
    n1 = np.arange(-w1, n + w1)
    n2 = np.arange(0, w2 + 1)
    m_values = np.arange(-(n - 1) - w1, n + w1)
    table = {(int(m), int(q)): cache(int(m), int(q)) for m in m_values for q in n2}
    scale = (1.0 - cfg.mass_ratio) * f.omega2
    upper = np.empty((n1.size, n2.size))
    for i, a in enumerate(n1):
        for j, q in enumerate(n2):
            upper[i, j] = scale * sum(mode.eigenvector[p] * table[(int(a) - p, int(q))] for p in range(n))
    values = np.concatenate([upper[:, :0:-1], upper], axis=1)
    return FieldGrid(window=(w1, w2), n1=n1, n2=np.arange(-w2, w2 + 1), values=values)


def field_values(cfg: DefectConfig, mode: ModeSolution, points) -> np.ndarray:
    """Exact mode displacement at arbitrary lattice points ``(n1, n2)``."""
    f = FrequencyPoint.from_omega(mode.omega)
    cache = _GreensCache(f)
    scale = (1.0 - cfg.mass_ratio) * f.omega2
    out = []
    for n1, n2 in points:
        out.append(scale * sum(u * cache(int(n1) - p, int(n2)) for p, u in enumerate(mode.eigenvector)))
    return np.asarray(out)


def total_force(cfg: DefectConfig, mode: ModeSolution) -> float:
    """Net force ``F = sum_p (u_{p-1,0} + u_{p+1,0} + 2 u_{p,1})`` on the lattice."""
    grid = reconstruct_field(cfg, mode, window=(1, 1))
    total = 0.0
    for p in range(cfg.n_defects):
        total += grid.at(p - 1, 0) + grid.at(p + 1, 0) + 2.0 * grid.at(p, 1)
    return float(total)


# ---------------------------------------------------------------------------
# Isolated chain comparison


def isolated_chain_frequencies(n_defects: int, r_star: float) -> list:
    """Eigenfrequencies of a free chain of ``N`` masses ``r*`` tied to rigid walls.

    ``omega_j = sqrt((4 - 2 cos(j pi / (N + 1))) / r*)``, ascending.
    """
    if not r_star > 0:
        raise DomainError("r_star must be positive")
    n = int(n_defects)
    return [math.sqrt((4.0 - 2.0 * math.cos(j * math.pi / (n + 1))) / r_star) for j in range(1, n + 1)]


def isolated_chain_r(n_defects: int, omega: float) -> list:
    """Mass ratios ``r*_{N,j} = (4 - 2 cos(j pi/(N+1))) / omega^2``, ascending."""
    n = int(n_defects)
    return [(4.0 - 2.0 * math.cos(j * math.pi / (n + 1))) / omega**2 for j in range(1, n + 1)]
