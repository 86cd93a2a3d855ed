import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from unicycle_esc.errors import RejectedInputError
from unicycle_esc.metrics import (
    control_effort,
    convergence_time,
    convergence_times,
    oscillation_envelope,
    segments,
    segments_reached,
    trajectory_deviation,
)
from unicycle_esc.sim import TRAJECTORY_COLUMNS, Trajectory

COL = {n: i for i, n in enumerate(TRAJECTORY_COLUMNS)}


def make(t, x, y, sx=0.0, sy=0.0, v=None):
    t = np.asarray(t, float)
    data = np.full((len(t), len(TRAJECTORY_COLUMNS)), np.nan)
    data[:, COL["t"]] = t
    data[:, COL["x"]] = x
    data[:, COL["y"]] = y
    data[:, COL["source_x"]] = sx
    data[:, COL["source_y"]] = sy
    data[:, COL["v"]] = 0.0 if v is None else v
    return Trajectory(data)


T = np.arange(11) * 0.1


def test_convergence_examples():
    assert convergence_time(make(T, 0.01, 0.0), 0.1) == 0.0
    x = np.array([1, 0.05, 0.05, 1, 1, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05])
    assert_allclose(convergence_time(make(T, x, 0.0), 0.1), 0.5)
    assert convergence_time(make(T, 1.0, 0.0), 0.1) is None
    # leaving at the very end means no settling
    assert convergence_time(make(T, np.r_[np.zeros(10), 1.0], 0.0), 0.1) is None


def test_convergence_errors():
    with pytest.raises(RejectedInputError):
        convergence_time(make([], [], []), 0.1)
    with pytest.raises(RejectedInputError):
        convergence_time(make(T, 0.0, 0.0), 0.0)


def test_convergence_monotone_in_radius():
    rng = np.random.default_rng(0)
    x = np.abs(rng.normal(size=11)) * np.linspace(1, 0.05, 11)
    tr = make(T, x, 0.0)
    times = [convergence_time(tr, r) for r in (0.05, 0.1, 0.3, 0.6, 1.0, 5.0)]
    finite = [t if t is not None else math.inf for t in times]
    assert all(a >= b for a, b in zip(finite, finite[1:]))


def test_convergence_uses_source_function():
    tr = make(T, 1.0, 1.0)
    assert convergence_time(tr, 0.1, source=lambda t: (1.0, 1.0)) == 0.0


def test_segments_follow_source_moves():
    sx = np.r_[np.zeros(5), np.ones(6)]
    x = np.r_[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0]
    tr = make(T, x, 0.0, sx=sx)
    assert segments(tr) == [(0, 5), (5, 11)]
    assert convergence_times(tr, 0.1) == [0.0, pytest.approx(0.7)]
    assert segments_reached(tr, 0.1) == [True, True]
    tr2 = make(T, 0.0, 0.0, sx=sx)
    assert segments_reached(tr2, 0.1) == [True, False]


def test_envelope_constant_is_zero():
    _, env = oscillation_envelope(make(T, 0.3, -0.2), 0.3)
    assert np.all(env == 0.0)


def test_envelope_circle():
    r, n = 0.4, 400
    t = np.arange(3 * n + 1) / n  # unit period
    tr = make(t, r * np.cos(2 * math.pi * t), r * np.sin(2 * math.pi * t))
    te, env = oscillation_envelope(tr, 1.0)
    assert_allclose(env, 2 * r * math.sqrt(2), rtol=1e-4)
    assert te[0] == 1.0


def test_envelope_window_checks():
    with pytest.raises(RejectedInputError):
        oscillation_envelope(make(T, 0.0, 0.0), 0.15)
    te, env = oscillation_envelope(make(T, 0.0, 0.0), 5.0)
    assert te.size == 0 and env.size == 0


def test_deviation():
    a = make(T, np.linspace(0, 1, 11), 0.0)
    assert trajectory_deviation(a, a) == 0.0
    b = make(T, np.linspace(0, 1, 11) + 0.3, 0.4)
    assert_allclose(trajectory_deviation(a, b), 0.5)
    with pytest.raises(RejectedInputError):
        trajectory_deviation(a, make(T[:5], 0.0, 0.0))


def test_control_effort():
    assert_allclose(control_effort(make(T, 0.0, 0.0, v=-2.0)), 2.0)
