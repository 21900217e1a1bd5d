import math

import numpy as np
import pytest

from latdefect.errors import DomainError
from latdefect.greens import FrequencyPoint, greens_auto
from latdefect.modes import (
    SKEW,
    SYMMETRIC,
    DefectConfig,
    ModeSolution,
    assemble_greens_matrix,
    branch_band_edge_limit,
    field_values,
    find_modes,
    isolated_chain_frequencies,
    isolated_chain_r,
    printed_r32_expression,
    parity_bases,
    r_of_omega_branches,
    reconstruct_field,
    search_interval,
    solvability_determinant,
    total_force,
)
from latdefect.specfun import elliptic_e, elliptic_k

from conftest import k49_over_3pi


def r11(w):
    w2 = w * w
    return 1 + math.pi * (2 / w2 - 0.5) / elliptic_k(16 / (w2 - 4) ** 2)


def r21(w):
    w2 = w * w
    k = elliptic_k(16 / (w2 - 4) ** 2)
    return 1 - 4 * math.pi * (w2 - 4) / (math.pi * w2 * (w2 - 4) - 2 * w2 * (w2 - 8) * k)


def r22(w):
    w2 = w * w
    k = elliptic_k(16 / (w2 - 4) ** 2)
    return 1 + 4 * math.pi * (w2 - 4) / (math.pi * w2 * (w2 - 4) - 2 * w2 * w2 * k)


def test_config_validation():
    with pytest.raises(DomainError):
        DefectConfig(0, 0.5)
    with pytest.raises(DomainError):
        DefectConfig(65, 0.5)
    with pytest.raises(DomainError):
        DefectConfig(2, 1.0)
    with pytest.raises(DomainError):
        DefectConfig(2, 0.0)


def test_matrix_entries_at_omega2_10():
    f = FrequencyPoint.from_omega2(10.0)
    assert assemble_greens_matrix(1, f).full()[0, 0] == pytest.approx(k49_over_3pi(), abs=1e-12)
    g2 = assemble_greens_matrix(2, f).full()
    assert g2[0, 1] == pytest.approx(0.25 - elliptic_k(4 / 9) / (2 * math.pi), abs=1e-12)
    g3 = assemble_greens_matrix(3, f).full()
    a = f.alpha
    assert g3[0, 2] == pytest.approx(g3[0, 0] - a / 2 + a / math.pi * elliptic_e(4 / a**2), abs=1e-12)
    assert np.allclose(g3, g3.T)


def test_long_matrix_is_toeplitz():
    f = FrequencyPoint.from_omega2(9.0)
    g = assemble_greens_matrix(12, f).full()
    for k in range(12):
        assert np.allclose(np.diag(g, k), greens_auto((k, 0), f), atol=1e-12)


def test_parity_bases_orthonormal():
    for n in range(1, 8):
        sym, skew = parity_bases(n)
        assert sym.shape == (n, (n + 1) // 2) and skew.shape == (n, n // 2)
        q = np.hstack([sym, skew])
        assert np.allclose(q.T @ q, np.eye(n))
        assert np.allclose(sym[::-1], sym) and np.allclose(skew[::-1], -skew)


def test_determinant_limits():
    cfg = DefectConfig(2, 1 - 1e-12)
    assert solvability_determinant(cfg, FrequencyPoint.from_omega2(10.0)) == pytest.approx(1.0, abs=1e-9)
    cfg1 = DefectConfig(1, 0.8)
    assert solvability_determinant(cfg1, FrequencyPoint.from_omega(2.8300)) * solvability_determinant(
        cfg1, FrequencyPoint.from_omega(2.8312)
    ) < 0
    cfg2 = DefectConfig(2, 0.49)
    for w in np.linspace(2.85, 3.34, 12):
        assert abs(solvability_determinant(cfg2, FrequencyPoint.from_omega(w))) > 1e-4


def test_search_interval():
    lo, hi = search_interval(0.5)
    assert lo == pytest.approx(math.sqrt(8) + 1e-6)
    assert hi == pytest.approx(4.0)


def test_single_defect(modes_n1):
    _, modes = modes_n1
    assert len(modes) == 1
    assert modes[0].omega == pytest.approx(2.83, abs=0.01)
    assert modes[0].symmetry == SYMMETRIC
    # the root solves the scalar condition exactly
    assert r11(modes[0].omega) == pytest.approx(0.8, abs=1e-9)


def test_pair(modes_n2):
    _, modes = modes_n2
    assert [m.symmetry for m in modes] == [SYMMETRIC, SKEW]
    assert modes[0].omega == pytest.approx(2.84, abs=0.01)
    assert modes[1].omega == pytest.approx(3.35, abs=0.01)
    assert r21(modes[0].omega) == pytest.approx(0.49, abs=1e-9)
    assert r22(modes[1].omega) == pytest.approx(0.49, abs=1e-9)


def test_triplet(modes_n3):
    _, modes = modes_n3
    assert [m.symmetry for m in modes] == [SYMMETRIC, SKEW, SYMMETRIC]
    for m, ref in zip(modes, (2.83, 3.33, 3.77)):
        assert m.omega == pytest.approx(ref, abs=0.01)
    assert [m.branch_index for m in modes] == [1, 2, 3]


@pytest.mark.parametrize("fixture", ["modes_n1", "modes_n2", "modes_n3", "modes_n20"])
def test_mode_invariants(fixture, request):
    cfg, modes = request.getfixturevalue(fixture)
    n = cfg.n_defects
    omegas = [m.omega for m in modes]
    assert omegas == sorted(omegas)
    for m in modes:
        assert m.residual <= 1e-8
        assert np.linalg.norm(m.eigenvector) == pytest.approx(1.0, abs=1e-12)
        sign = 1.0 if m.symmetry == SYMMETRIC else -1.0
        assert np.allclose(m.eigenvector[::-1], sign * m.eigenvector, atol=1e-8)
        first = next(v for v in m.eigenvector if abs(v) > 1e-6)
        assert first > 0
        g = assemble_greens_matrix(n, FrequencyPoint.from_omega(m.omega)).full()
        u = m.eigenvector
        assert np.max(np.abs(u - (1 - cfg.mass_ratio) * m.omega**2 * g @ u)) <= 1e-8


def test_parity_counts(modes_n3, modes_n20):
    for cfg, modes in (modes_n3, modes_n20):
        n = cfg.n_defects
        assert sum(m.symmetry == SYMMETRIC for m in modes) == (n + 1) // 2
        assert sum(m.symmetry == SKEW for m in modes) == n // 2


def test_no_symmetric_pair_mode_above_half():
    modes = find_modes(DefectConfig(2, 0.6))
    assert [m.symmetry for m in modes] == [SKEW]


def test_mode_roundtrip(modes_n3):
    for m in modes_n3[1]:
        assert ModeSolution.from_dict(m.to_dict()) == m


def test_branches_closed_forms():
    grid = [FrequencyPoint.from_omega2(w2) for w2 in (8.05, 8.5, 9.0, 12.0, 20.0)]
    t1 = r_of_omega_branches(1, grid)
    t2 = r_of_omega_branches(2, grid)
    for k, w in enumerate(t1.omega):
        assert t1.r[k, 0] == pytest.approx(r11(w), abs=1e-10)
        assert t2.r[k, 0] == pytest.approx(r21(w), abs=1e-10)
        assert t2.r[k, 1] == pytest.approx(r22(w), abs=1e-10)


def test_branch_count_never_exceeds_n():
    grid = np.sqrt(np.linspace(8.01, 40, 25))
    for n in (1, 2, 3, 5):
        table = r_of_omega_branches(n, grid)
        assert table.r.shape == (25, n)
        assert np.all(np.sum(~np.isnan(table.r), axis=1) <= n)


def test_high_frequency_coalescence():
    w = 30.0
    for n in (1, 2, 3):
        table = r_of_omega_branches(n, [w])
        star = isolated_chain_r(n, w)
        for i in range(n):
            assert table.r[0, i] == pytest.approx(star[i], rel=1e-2)
            # dashed curves approach from below
            assert star[i] < table.r[0, i]


def test_single_branch_large_omega():
    for w in (20.0, 50.0):
        table = r_of_omega_branches(1, [w])
        assert table.r[0, 0] * w * w == pytest.approx(4.0, rel=2e-2)


def test_band_edge_limits():
    assert branch_band_edge_limit(1, 1) == pytest.approx(1.0, abs=1e-3)
    assert branch_band_edge_limit(2, 1) == pytest.approx(0.5, abs=1e-3)
    assert branch_band_edge_limit(3, 1) == pytest.approx(1 - 3 * math.pi / 16, abs=1e-3)
    assert branch_band_edge_limit(3, 2) == pytest.approx(1 - 1 / (8 - 16 / math.pi), abs=1e-3)
    assert printed_r32_expression() > 1.0
    with pytest.raises(DomainError):
        branch_band_edge_limit(2, 3)


def test_isolated_chain():
    w = 7.0
    (w1,) = isolated_chain_frequencies(1, 4 / w**2)
    assert w1 == pytest.approx(w)
    assert isolated_chain_r(2, w) == pytest.approx([3 / w**2, 5 / w**2])
    assert isolated_chain_r(3, w) == pytest.approx([(4 - math.sqrt(2)) / w**2, 4 / w**2, (4 + math.sqrt(2)) / w**2])


def test_field_reconstruction(modes_n2):
    cfg, modes = modes_n2
    for m in modes:
        grid = reconstruct_field(cfg, m, (4, 6))
        assert grid.values.shape == (2 + 8, 13)
        assert grid.at(0, 0) == pytest.approx(m.eigenvector[0], abs=1e-10)
        assert grid.at(1, 0) == pytest.approx(m.eigenvector[1], abs=1e-10)
        assert np.allclose(grid.values, grid.values[:, ::-1])
    skew = modes[1]
    grid = reconstruct_field(cfg, skew, (3, 6))
    for q in range(-6, 7):
        assert grid.at(0, q) == pytest.approx(-grid.at(1, q), abs=1e-12)
    pts = [(0, 3), (4, -2)]
    assert np.allclose(field_values(cfg, skew, pts), [grid.at(0, 3), grid.at(4, -2)], atol=1e-14)


def test_field_decays_away_from_row():
    # single defect tuned so that its mode sits at omega^2 = 10
    cfg = DefectConfig(1, r11(math.sqrt(10.0)))
    modes = find_modes(cfg)
    assert modes[0].omega**2 == pytest.approx(10.0, abs=1e-8)
    grid = reconstruct_field(cfg, modes[0], (0, 10))
    column = np.abs([grid.at(0, q) for q in range(2, 11)])
    assert np.all(np.diff(column) < 0)


def test_total_force(modes_n1, modes_n2, modes_n3):
    cfg1, m1 = modes_n1
    assert abs(total_force(cfg1, m1[0])) > 1e-3
    cfg2, m2 = modes_n2
    assert abs(total_force(cfg2, m2[1])) <= 1e-8
    cfg3, m3 = modes_n3
    assert abs(total_force(cfg3, m3[1])) <= 1e-8
    assert abs(total_force(cfg3, m3[0])) > 1e-3


def test_field_window_bounds(modes_n1):
    cfg, modes = modes_n1
    grid = reconstruct_field(cfg, modes[0], (2, 2))
    with pytest.raises(DomainError):
        grid.at(3, 0)
