import numpy as np
import pytest

import latdefect
from latdefect import errors
from latdefect._parallel import pmap, thread_count
from latdefect.modes import DefectConfig, find_modes


def test_error_hierarchy():
    for cls in (errors.ConvergenceError, errors.ToleranceNotMetError, errors.InstabilityError,
                errors.BracketError, errors.ExtrapolationError, errors.InvariantViolation):
        assert issubclass(cls, errors.NumericalError)
    assert issubclass(errors.DomainError, ValueError)
    assert not issubclass(errors.DomainError, errors.NumericalError)
    assert errors.BracketError("x", branch=2).branch == 2


def test_version():
    assert latdefect.__version__ == "0.1.0"


@pytest.mark.parametrize("raw,expected", [("", 1), ("4", 4), ("0", 1), ("junk", 1)])
def test_thread_count(monkeypatch, raw, expected):
    monkeypatch.setenv("LATTICE_DEFECT_THREADS", raw)
    assert thread_count() == expected


def test_parallel_results_identical(monkeypatch):
    cfg = DefectConfig(5, 0.3)
    monkeypatch.setenv("LATTICE_DEFECT_THREADS", "1")
    serial = find_modes(cfg)
    monkeypatch.setenv("LATTICE_DEFECT_THREADS", "4")
    parallel = find_modes(cfg)
    assert serial == parallel
    assert pmap(lambda x: x * x, range(10)) == [x * x for x in range(10)]
