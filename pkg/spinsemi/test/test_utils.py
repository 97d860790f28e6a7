# © spinsemi developers
#
# License: BSD (3-clause)

"""Tests for the integration, branch-tracking and parallelization helpers."""

import sys

import numpy as np
import pytest

from spinsemi.errors import BranchTrackingError, PoleError
from spinsemi.utils import (
    _continued_log,
    _continuous_sqrt,
    _evaluate_pieces,
    _integrate_segment,
    _parallel,
)


def _square(x):
    return x**2


def test_parallel_keeps_order():
    """Test that parallel results come in input order."""
    pytest.importorskip("joblib")
    assert _parallel(2, pow, range(6), 2) == [0, 1, 4, 9, 16, 25]


def test_parallel_without_joblib(monkeypatch):
    """Test the sequential fallback if joblib is missing."""
    monkeypatch.setitem(sys.modules, "joblib", None)
    with pytest.warns(RuntimeWarning, match="joblib not installed"):
        assert _parallel(2, _square, [3, 1]) == [9, 1]
    assert _parallel(1, _square, [3, 1]) == [9, 1]


def test_integrate_segment_stop():
    """Test leaving an integration when the stop condition fires."""

    def rhs(t, y):
        return np.array([1j * y[0]])

    kwargs = {"rel_tol": 1e-10, "abs_tol": 1e-12, "max_step": 0.1, "max_steps": 1000}
    full = _integrate_segment(rhs, 0.0, np.array([1 + 0j]), 2.0, **kwargs)
    assert not full.stopped
    assert np.isclose(full.ys[-1, 0], np.exp(2j))
    assert np.isclose(full(1.3)[0], np.exp(1.3j))

    stopped = _integrate_segment(
        rhs, 0.0, np.array([1 + 0j]), 2.0, stop=lambda t, y: y[0].imag > 0.5, **kwargs
    )
    assert stopped.stopped
    assert stopped.ts[-1] < 2.0
    assert stopped.ys[-1, 0].imag > 0.5

    empty = _integrate_segment(rhs, 1.0, np.array([1 + 0j]), 1.0, **kwargs)
    assert empty.n_steps == 0
    assert np.all(empty(np.array([1.0, 1.0])) == 1)


def test_evaluate_pieces():
    """Test evaluation of consecutive segments."""

    def rhs(t, y):
        return np.array([1.0 + 0j])

    kwargs = {"rel_tol": 1e-10, "abs_tol": 1e-12, "max_step": 0.5, "max_steps": 100}
    first = _integrate_segment(rhs, 0.0, np.array([0j]), 1.0, **kwargs)
    second = _integrate_segment(rhs, 1.0, np.array([10 + 0j]), 2.0, **kwargs)
    values = _evaluate_pieces([first, second], np.array([0.5, 1.0, 1.5]))
    assert values.shape == (3, 1)
    assert np.allclose(values[:, 0], [0.5, 10.0, 10.5])


def test_continuous_sqrt():
    """Test square roots continued along winding paths."""

    def winding(tau):
        return np.exp(2j * np.pi * tau)

    root, n = _continuous_sqrt(winding, 1.0, 1 + 0j)
    assert np.isclose(root, -1)
    assert n == 16

    def fast(tau):
        return np.exp(40j * np.pi * tau)

    root, n = _continuous_sqrt(fast, 1.0, 1 + 0j)
    assert np.isclose(root, 1)
    assert n > 16


def test_continuous_sqrt_through_zero():
    """Test that a root through zero cannot be followed."""
    with pytest.raises(BranchTrackingError):
        _continuous_sqrt(lambda tau: tau - 0.5, 1.0, 1j * np.sqrt(0.5), n_max=64)


def test_continued_log():
    """Test logarithms continued along sampled paths."""
    angles = np.linspace(0, 3 * np.pi, 50)
    assert np.isclose(_continued_log(2 * np.exp(1j * angles)), 3j * np.pi)
    assert np.isclose(_continued_log(np.linspace(1, np.e, 5)), 1)
    with pytest.raises(PoleError):
        _continued_log(np.array([1.0, 0.0, 1.0]))
    with pytest.raises(PoleError):
        _continued_log(np.array([1.0, np.inf]))
