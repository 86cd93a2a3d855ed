"""Averaged (Lie bracket) reference dynamics.

Integrates::

    zx' = c a/2 df/dx(zx, zy) cos^2(Omega t)
    zy' = c a/2 df/dy(zx, zy) sin^2(Omega t)
    ze' = -h ze + f(zx, zy)

with the true gradient. This is a test oracle for the closed loop and is
never used by the controller. The heading factors are kept as written
rather than replaced by their rotation averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controller import EscParams, heading
from .errors import RejectedInputError
from .field import FieldModel, oracle_gradient, sample_field
from .sim import TRAJECTORY_COLUMNS, ScenarioConfig, Trajectory

_COL = {name: i for i, name in enumerate(TRAJECTORY_COLUMNS)}


@dataclass
class LbsState:
    zx: float
    zy: float
    ze: float
    t: float = 0.0


def lbs_rate(state: LbsState, a: float, field: FieldModel, p: EscParams) -> np.ndarray:
    gx, gy = oracle_gradient(field, (state.zx, state.zy), state.t)
    f = sample_field(field, (state.zx, state.zy), state.t)
    th = p.Omega * state.t
    return 0.5 * np.array([
        p.c * a * gx * math.cos(th) ** 2,
        p.c * a * gy * math.sin(th) ** 2,
        2.0 * (-state.ze * p.h + f),
    ])


def _amplitude(a_trace):
    if callable(a_trace):
        return a_trace
    if np.isscalar(a_trace):
        value = float(a_trace)
        return lambda t: value
    times, values = (np.asarray(v, dtype=float) for v in a_trace)
    return lambda t: float(np.interp(t, times, values))


def lbs_step(p: EscParams) -> float:
    """RK4 step: 200 per rotation, shrunk so it divides ``dt``."""
    n = math.ceil(p.dt_meas / (p.rotation_period / 200.0) - 1e-9)
    return p.dt_meas / max(n, 1)


def integrate_lbs(z0: LbsState, a_trace, horizon: float, p: EscParams, field: FieldModel, step: float | None = None) -> Trajectory:
    """Sample the averaged trajectory every ``dt`` up to ``horizon``.

    ``a_trace`` is a constant amplitude, a callable of time, or a
    ``(times, values)`` pair interpolated linearly (for replaying the
    amplitude log of a closed-loop run). ``step`` overrides the RK4 step;
    it is shrunk so that it divides ``dt``.
    """
    if not horizon > 0:
        raise RejectedInputError("horizon must be positive")
    amp = _amplitude(a_trace)
    n_windows = int(round(horizon / p.dt_meas))
    h = lbs_step(p) if step is None else step
    if not h > 0:
        raise RejectedInputError("step must be positive")
    n_inner = max(1, math.ceil(p.dt_meas / h - 1e-9))
    hs = p.dt_meas / n_inner
    z = np.array([z0.zx, z0.zy, z0.ze], dtype=float)
    t0 = z0.t

    def rate(z, t):
        return lbs_rate(LbsState(z[0], z[1], z[2], t), amp(t), field, p)

    rows = np.full((n_windows + 1, len(TRAJECTORY_COLUMNS)), math.nan)
    for k in range(n_windows + 1):
        t = t0 + k * p.dt_meas
        if k > 0:
            tw = t0 + (k - 1) * p.dt_meas
            for i in range(n_inner):
                ts = tw + i * hs
                k1 = rate(z, ts)
                k2 = rate(z + 0.5 * hs * k1, ts + 0.5 * hs)
                k3 = rate(z + 0.5 * hs * k2, ts + 0.5 * hs)
                k4 = rate(z + hs * k3, ts + hs)
                z = z + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        row = rows[k]
        row[_COL["t"]] = t
        row[_COL["x"]], row[_COL["y"]], row[_COL["e"]] = z
        row[_COL["theta"]] = heading(p.Omega, t)
        row[_COL["a"]] = amp(t)
        row[_COL["f_true"]] = sample_field(field, (z[0], z[1]), t)
        row[_COL["stopped"]] = 0.0
        row[_COL["source_x"]], row[_COL["source_y"]] = field.center(t)
    return Trajectory(rows)


def reference_for(config: ScenarioConfig, a_trace=None) -> Trajectory:
    """Averaged trajectory matching a scenario's start, washout state and horizon."""
    p = config.params
    x0, y0 = config.initial_position
    if config.initial_washout is not None:
        e0 = config.initial_washout
    else:
        e0 = sample_field(config.field, (x0, y0), 0.0) / p.h if p.h > 0 else 0.0
    return integrate_lbs(LbsState(x0, y0, e0), p.a0 if a_trace is None else a_trace, config.horizon, p, config.field)
