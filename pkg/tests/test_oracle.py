import math

import pytest

from latdefect.errors import DomainError
from latdefect.greens import FrequencyPoint, greens_auto, greens_single_integral
from latdefect.oracle import (
    TruncatedLattice,
    greens_quadrature_reference,
    match_frequencies,
    truncated_spectrum,
)

from conftest import k49_over_3pi

CASES = [(1, 0.8, "modes_n1"), (2, 0.49, "modes_n2"), (3, 0.4, "modes_n3")]


@pytest.fixture(scope="module")
def spectra():
    return {n: truncated_spectrum(TruncatedLattice(20, n, r)) for n, r, _ in CASES}


def test_lattice_validation():
    with pytest.raises(DomainError):
        TruncatedLattice(10, 1, 0.5)
    with pytest.raises(DomainError):
        TruncatedLattice(20, 1, 0.5, boundary="free")
    with pytest.raises(DomainError):
        TruncatedLattice(20, 1, 1.5)


@pytest.mark.parametrize("n,r,fixture", CASES)
def test_matches_find_modes(n, r, fixture, spectra, request):
    _, modes = request.getfixturevalue(fixture)
    oracle = spectra[n]
    assert len(oracle) == len(modes)
    pairs = match_frequencies([m.omega for m in modes], [o.omega for o in oracle])
    for (w, cand), mode in zip(pairs, modes):
        assert cand is not None and abs(cand - w) <= 1e-2
        match = min(oracle, key=lambda o: abs(o.omega - w))
        assert match.parity == mode.symmetry


def test_intact_lattice_has_no_stop_band_modes():
    lat = TruncatedLattice(20, 1, 1.0)
    modes = truncated_spectrum(lat, (math.sqrt(8), 4.0))
    assert not [m for m in modes if m.score > 0.9]


def test_convergence_in_width(spectra):
    for n, r, _ in CASES:
        wide = truncated_spectrum(TruncatedLattice(30, n, r))
        assert len(wide) == len(spectra[n])
        for a, b in zip(wide, spectra[n]):
            assert abs(a.omega - b.omega) <= 1e-3


def test_window_validation():
    with pytest.raises(DomainError):
        truncated_spectrum(TruncatedLattice(20, 1, 0.8), (2.0, 3.0))


def test_match_frequencies_gate():
    assert match_frequencies([1.0, 2.0], [1.01, 2.2]) == [(1.0, 1.01), (2.0, None)]
    assert match_frequencies([1.0], []) == [(1.0, None)]


def test_quadrature_reference():
    f10 = FrequencyPoint.from_omega2(10.0)
    assert greens_quadrature_reference((0, 0), f10) == pytest.approx(k49_over_3pi(), abs=1e-10)
    f12 = FrequencyPoint.from_omega2(12.0)
    assert greens_quadrature_reference((2, 1), f12) == pytest.approx(greens_auto((2, 1), f12), abs=1e-9)
    f85 = FrequencyPoint.from_omega2(8.5)
    assert greens_quadrature_reference((0, 5), f85) == pytest.approx(greens_single_integral((0, 5), f85), abs=1e-8)
