"""Post-run scoring of trajectories.

Everything here is a pure function of a :class:`~unicycle_esc.sim.Trajectory`,
so scores recomputed from a CSV file match the in-run values exactly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import RejectedInputError

DEFAULT_RADIUS_FIXED = 0.1
DEFAULT_RADIUS_MOVING = 0.2


def _distances(traj, source=None) -> np.ndarray:
    pos = traj.positions
    if source is None:
        src = traj.sources
    else:
        src = np.array([source(t) for t in traj["t"]], dtype=float)
    return np.hypot(pos[:, 0] - src[:, 0], pos[:, 1] - src[:, 1])


def segments(traj) -> list[tuple[int, int]]:
    """Index ranges ``[start, stop)`` over which the logged source is fixed."""
    src = traj.sources
    change = np.flatnonzero(np.any(src[1:] != src[:-1], axis=1)) + 1
    bounds = [0, *change.tolist(), len(traj)]
    return list(zip(bounds[:-1], bounds[1:]))


def _settle_time(t: np.ndarray, inside: np.ndarray) -> float | None:
    if not inside[-1]:
        return None
    outside = np.flatnonzero(~inside)
    return float(t[0] if outside.size == 0 else t[outside[-1] + 1])


def convergence_times(traj, radius: float, source=None) -> list[float | None]:
    """Settling time within each fixed-source segment.

    The time returned for a segment is the earliest sample from which the
    robot stays within ``radius`` until the segment ends.
    """
    if len(traj) == 0:
        raise RejectedInputError("empty trajectory")
    if not radius > 0:
        raise RejectedInputError("radius must be positive")
    d = _distances(traj, source)
    t = traj["t"]
    return [_settle_time(t[i:j], d[i:j] <= radius) for i, j in segments(traj)]


def convergence_time(traj, radius: float, source=None) -> float | None:
    """Settling time for the current (last) source position, or ``None``."""
    return convergence_times(traj, radius, source)[-1]


def segments_reached(traj, radius: float) -> list[bool]:
    """Whether the robot came within ``radius`` at some point in each segment."""
    d = _distances(traj)
    return [bool(np.any(d[i:j] <= radius)) for i, j in segments(traj)]


def oscillation_envelope(traj, window: float) -> tuple[np.ndarray, np.ndarray]:
    """Rolling spread of the position over the trailing ``window`` seconds.

    For each sample, take the max - min span of x and of y over the
    window and combine the two spans as a Euclidean norm.
    """
    t = traj["t"]
    if len(t) < 2:
        return t[:0], t[:0]
    dt = float(t[1] - t[0])
    if window < 2 * dt - 1e-12:
        raise RejectedInputError("window must cover at least two sample intervals")
    w = int(round(window / dt)) + 1
    if w > len(t):
        return t[:0], t[:0]
    pos = traj.positions
    spans = []
    for col in range(2):
        view = sliding_window_view(pos[:, col], w)
        spans.append(view.max(axis=1) - view.min(axis=1))
    return t[w - 1:], np.hypot(spans[0], spans[1])


def trajectory_deviation(traj_a, traj_b) -> float:
    """Largest pointwise position distance between two runs on one grid."""
    ta, tb = traj_a["t"], traj_b["t"]
    if ta.shape != tb.shape or not np.allclose(ta, tb, rtol=0.0, atol=1e-9):
        raise RejectedInputError("trajectories are not on the same sampling grid")
    diff = traj_a.positions - traj_b.positions
    return float(np.max(np.hypot(diff[:, 0], diff[:, 1])))


def control_effort(traj) -> float:
    """Left Riemann sum of ``|v| dt`` over the logged samples."""
    v = np.abs(traj["v"])
    return float(np.sum(v[:-1] * np.diff(traj["t"])))


@dataclass
class RunMetrics:
    convergence_time: float | None
    steady_state_error: float
    final_amplitude: float
    stop_time: float | None
    control_effort: float
    envelope_window: float
    envelope_tail_mean: float
    envelope_tail_max: float
    radius: float
    segments_reached: int
    segments_total: int

    @property
    def all_segments_reached(self) -> bool:
        return self.segments_reached == self.segments_total

    def to_dict(self) -> dict:
        out = asdict(self)
        out["all_segments_reached"] = self.all_segments_reached
        return out


def default_radius(traj) -> float:
    return DEFAULT_RADIUS_MOVING if len(segments(traj)) > 1 else DEFAULT_RADIUS_FIXED


def compute_metrics(traj, config, radius: float | None = None) -> RunMetrics:
    """Score a run. The envelope tail is the second half of the horizon."""
    if len(traj) == 0:
        raise RejectedInputError("empty trajectory")
    radius = default_radius(traj) if radius is None else radius
    window = config.params.rotation_period
    te, env = oscillation_envelope(traj, window)
    tail = env[te >= 0.5 * config.horizon]
    stopped = np.flatnonzero(traj["stopped"] > 0)
    reached = segments_reached(traj, radius)
    return RunMetrics(
        convergence_time=convergence_time(traj, radius),
        steady_state_error=float(_distances(traj)[-1]),
        final_amplitude=float(traj["a"][-1]),
        stop_time=float(traj["t"][stopped[0]]) if stopped.size else None,
        control_effort=control_effort(traj),
        envelope_window=window,
        envelope_tail_mean=float(np.mean(tail)) if tail.size else math.nan,
        envelope_tail_max=float(np.max(tail)) if tail.size else math.nan,
        radius=radius,
        segments_reached=sum(reached),
        segments_total=len(reached),
    )


def compare_runs(gekf, baseline, radius: float = 0.15) -> dict:
    """Paired comparison of an adaptive run against the frozen-amplitude baseline."""
    tg = convergence_time(gekf.trajectory, radius)
    tb = convergence_time(baseline.trajectory, radius)
    eg = gekf.metrics.envelope_tail_mean
    eb = baseline.metrics.envelope_tail_mean
    return {
        "radius": radius,
        "gekf_convergence_time": tg,
        "baseline_convergence_time": tb,
        "gekf_envelope_tail_mean": eg,
        "baseline_envelope_tail_mean": eb,
        "envelope_ratio": eb / eg if eg > 0 else math.inf,
        "gekf_stop_time": gekf.metrics.stop_time,
        "baseline_stop_time": baseline.metrics.stop_time,
        "gekf_final_amplitude": gekf.metrics.final_amplitude,
        "baseline_final_amplitude": baseline.metrics.final_amplitude,
    }
