import math
import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latdefect.errors import DomainError, InvariantViolation
from latdefect.modes import field_values
from latdefect.waveguide import (
    biquadratic_residual,
    dispersion_omega_minus,
    dispersion_omega_plus,
    dispersion_sweep,
    envelope,
    finite_vs_infinite_bracket,
    omega_beta,
    reject_omega_plus,
    skew_symmetric_waveguide_solution,
    standing_wave_frequencies,
    transverse_lambda,
)

FIG6_R = (0.05, 0.25, 0.5, 0.75)


def test_omega_beta():
    assert omega_beta(1.0, 0.0, 0.0) == 1.0
    assert omega_beta(1.0, math.pi, 0.0) == pytest.approx(3.0)


def test_transverse_lambda_cases():
    lam, case = transverse_lambda(0.0, 3.0)
    assert case == "decaying" and abs(lam) < 1
    lam, case = transverse_lambda(0.0, 0.0)
    assert case == "unit" and lam == 1.0
    lam, case = transverse_lambda(1.0, 1.0)
    assert case == "propagating" and abs(lam) == pytest.approx(1.0, abs=1e-15)


def test_lambda_solves_quadratic():
    for kappa, w in ((0.3, 3.1), (2.0, 4.4)):
        lam, _ = transverse_lambda(kappa, w)
        big = omega_beta(1.0, kappa, w)
        assert lam * lam - 2 * big * lam + 1 == pytest.approx(0.0, abs=1e-12)


def test_standing_waves_quarter():
    lo, hi = standing_wave_frequencies(0.25)
    assert lo == pytest.approx(3.0237, abs=1e-4)
    assert hi == pytest.approx(4.9432, abs=1e-4)
    assert dispersion_omega_minus(0.0, 0.25).omega_minus == pytest.approx(lo, abs=1e-12)
    assert dispersion_omega_minus(math.pi, 0.25).omega_minus == pytest.approx(hi, abs=1e-12)


def test_standing_waves_heavy_limit():
    lo, hi = standing_wave_frequencies(1 - 1e-9)
    assert lo == pytest.approx(2.0, abs=1e-6)
    assert hi == pytest.approx(math.sqrt(8), abs=1e-6)


def test_omega_beta_at_in_phase_root():
    s = dispersion_omega_minus(0.0, 0.25)
    assert s.lam == pytest.approx(omega_beta(0.25, 0.0, s.omega_minus), abs=1e-12)
    assert abs(s.lam) < 1


def test_light_defect_limit():
    r, kappa = 1e-4, 1.1
    w = dispersion_omega_minus(kappa, r).omega_minus
    assert w * w == pytest.approx(2 / r * (1 + 2 * math.sin(kappa / 2) ** 2), rel=1e-3)


@pytest.mark.parametrize("r", FIG6_R)
def test_dispersion_property_suite(r):
    for s in dispersion_sweep(r, 200):
        w = s.omega_minus
        assert abs(biquadratic_residual(s.kappa, w, r)) <= 1e-10
        assert s.omega1 / math.sqrt(r) < w < s.omega2 / math.sqrt(r)
        assert w > s.omega2
        lam, case = transverse_lambda(s.kappa, w)
        assert case == "decaying" and abs(lam) < 1
        assert lam == pytest.approx(omega_beta(r, s.kappa, w), abs=1e-10)
        if s.kappa > 0:
            ok, witness = reject_omega_plus(s.kappa, r)
            assert ok and witness["omega_plus"] < witness["lower_bound"]


@pytest.mark.parametrize("r", FIG6_R)
def test_dispersion_monotone_and_even(r):
    w = [s.omega_minus for s in dispersion_sweep(r, 200)]
    assert np.all(np.diff(w) >= 0)
    for kappa in (0.4, 1.7, 2.9):
        assert dispersion_omega_minus(-kappa, r).omega_minus == pytest.approx(dispersion_omega_minus(kappa, r).omega_minus, rel=1e-15)


def test_reject_omega_plus_examples():
    ok, witness = reject_omega_plus(math.pi / 2, 0.25)
    assert ok and witness["omega_plus"] < witness["lower_bound"]
    assert dispersion_omega_plus(0.0, 0.3) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-3, max_value=math.pi), st.floats(min_value=1e-3, max_value=0.999))
def test_reject_omega_plus_random(kappa, r):
    assert reject_omega_plus(kappa, r)[0]


def test_dispersion_domain():
    with pytest.raises(DomainError):
        dispersion_omega_minus(0.0, 1.0)
    with pytest.raises(DomainError):
        standing_wave_frequencies(0.0)


def test_invariant_violation_is_numerical_error():
    assert issubclass(InvariantViolation, RuntimeError)


def test_skew_family_trivial():
    info = skew_symmetric_waveguide_solution()
    assert info["solution"] == "trivial"
    assert info["modes_per_kappa"] == 1


def test_dispersion_speed():
    t0 = time.perf_counter()
    for r in FIG6_R:
        dispersion_sweep(r, 200)
    assert time.perf_counter() - t0 < 5


def test_envelope_values(modes_n20):
    cfg, modes = modes_n20
    env = envelope(20, 0.25, modes[0].omega, q=1)
    assert env.lambda_est == pytest.approx(-0.1396, abs=1e-4)
    assert env.profile[0] == 0.0 and env.profile[-1] == 0.0
    assert np.linalg.norm(env.profile) == pytest.approx(1.0)
    assert env.wavenumber == pytest.approx(math.pi / 19)


def test_envelope_tracks_exact_mode(modes_n20):
    cfg, modes = modes_n20
    u = np.asarray(modes[0].eigenvector)
    u = u / np.linalg.norm(u) * np.sign(u[10])
    env = envelope(20, 0.25, modes[0].omega).profile
    central = slice(2, 18)
    assert np.max(np.abs(env[central] - u[central])) <= 0.10 * np.max(np.abs(u))


def test_mean_transverse_ratio(modes_n20):
    cfg, modes = modes_n20
    mode = modes[0]
    row0 = field_values(cfg, mode, [(p, 0) for p in range(20)])
    row1 = field_values(cfg, mode, [(p, 1) for p in range(20)])
    assert np.mean(row1 / row0) == pytest.approx(-0.1426, abs=5e-3)


def test_envelope_domain():
    with pytest.raises(DomainError):
        envelope(4, 0.25, 3.0)
    with pytest.raises(DomainError):
        envelope(20, 0.25, 3.0, q=2)


def test_bracket_n20(modes_n20):
    cfg, modes = modes_n20
    report = finite_vs_infinite_bracket(20, 0.25, modes=modes)
    assert min(report.omegas) == pytest.approx(3.0374, abs=5e-4)
    assert max(report.omegas) == pytest.approx(4.9344, abs=5e-4)
    assert report.band[0] == pytest.approx(3.0237, abs=1e-4)
    assert report.band[1] == pytest.approx(4.9432, abs=1e-4)
    assert len(report.omegas) == 20 and report.all_contained
    assert report.to_dict()["contained"] is True


def test_bracket_pair(modes_n2):
    _, modes = modes_n2
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        report = finite_vs_infinite_bracket(2, 0.49, modes=modes)
    assert report.all_contained


def test_bracket_warns_when_outside(modes_n2):
    from latdefect.modes import ModeSolution

    _, modes = modes_n2
    stray = ModeSolution(10.0, np.array([1.0, 1.0]) / math.sqrt(2), "symmetric", 3, 0.0)
    with pytest.warns(RuntimeWarning):
        report = finite_vs_infinite_bracket(2, 0.49, modes=list(modes) + [stray])
    assert not report.all_contained
    assert report.contained == [True, True, False]
