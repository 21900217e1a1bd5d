import math

import pytest

from latdefect.greens import FrequencyPoint
from latdefect.modes import DefectConfig, find_modes

STOP_BAND_OMEGA2 = (8.5, 10.0, 16.0, 32.0)


@pytest.fixture(scope="session")
def modes_n1():
    cfg = DefectConfig(1, 0.8)
    return cfg, find_modes(cfg)


@pytest.fixture(scope="session")
def modes_n2():
    cfg = DefectConfig(2, 0.49)
    return cfg, find_modes(cfg)


@pytest.fixture(scope="session")
def modes_n3():
    cfg = DefectConfig(3, 0.4)
    return cfg, find_modes(cfg)


@pytest.fixture(scope="session")
def modes_n20():
    cfg = DefectConfig(20, 0.25)
    return cfg, find_modes(cfg)


def k49_over_3pi():
    """``K(4/9) / (3 pi)`` from mpmath, parameter convention ``m = k^2``."""
    import mpmath as mp

    return float(mp.ellipk(mp.mpf(4) / 9) / (3 * mp.pi))


@pytest.fixture
def f10():
    return FrequencyPoint.from_omega2(10.0)


def rel(a, b):
    return abs(a - b) / abs(b)


def close(a, b, tol):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail=""):
    """Store a PASS/FAIL line for the terminal summary."""
    ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
    print(ACCEPTANCE_LINES[-1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
