"""The extremum-seeking velocity law, washout filter and amplitude adaptation.

The robot is a unicycle turning at a fixed rate ``Omega``. Only the
linear speed is commanded::

    v  = (f - e h) c sqrt(w) sin(w t) + a sqrt(w) cos(w t)
    x' = v cos(Omega t)
    y' = v sin(Omega t)
    e' = -h e + f
    a' = -lambda (a - J)

``J`` is built from the gradient estimate of the geometric EKF (see
:mod:`unicycle_esc.gekf`). It drives the dither amplitude ``a`` to zero
near the source, which is what lets the robot come to rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

PAIRINGS = ("consistent", "swapped")


@dataclass(frozen=True)
class EscParams:
    """Tuning constants for the controller and the estimator.

    ``q_scale`` and ``r_scale`` set ``Q = q_scale * I`` and ``R``; ``p0`` is
    the initial diagonal of the estimator covariance. ``pairing`` selects
    how the dither terms enter the measurement model (see
    :func:`unicycle_esc.gekf.predicted_measurement`); ``anchor`` resets the
    washout state to the last sample at the start of every window;
    ``covariance_step`` picks the covariance propagation of
    :func:`unicycle_esc.gekf.predict`.
    """

    omega: float
    c: float
    Omega: float
    lam: float
    h: float
    a0: float
    epsilon: float = 0.01
    dt_meas: float = 0.01
    n_substeps: int = 10
    q_scale: float = 0.0005
    r_scale: float = 0.00999
    p0: float = 4.0
    singular_guard: float = 0.05
    pairing: str = "consistent"
    anchor: bool = True
    covariance_step: str = "transition"

    def __post_init__(self):
        checks = [
            (self.omega > 0, "omega must be positive"),
            (self.lam > 0, "lambda must be positive"),
            (self.Omega > 0, "Omega must be positive"),
            (self.h >= 0, "h must be non-negative"),
            (self.epsilon > 0, "epsilon must be positive"),
            (self.dt_meas > 0, "dt must be positive"),
            (int(self.n_substeps) == self.n_substeps and self.n_substeps >= 1, "n_substeps must be an integer >= 1"),
            (self.omega > self.Omega, "omega must exceed Omega (time-scale separation)"),
            (self.a0 >= 0, "a0 must be non-negative"),
            (self.q_scale >= 0, "Q must be non-negative"),
            (self.r_scale > 0, "R must be positive"),
            (self.p0 >= 0, "P0 must be non-negative"),
            (0 <= self.singular_guard < 1, "singular_guard must lie in [0, 1)"),
            (self.pairing in PAIRINGS, f"pairing must be one of {PAIRINGS}"),
            (self.covariance_step in ("transition", "euler"), "covariance_step must be 'transition' or 'euler'"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        for name in ("omega", "c", "Omega", "lam", "h", "a0", "epsilon", "dt_meas", "q_scale", "r_scale", "p0"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @property
    def rotation_period(self) -> float:
        return 2.0 * math.pi / self.Omega

    @property
    def excitation_period(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass
class PlantState:
    x: float
    y: float
    e: float
    a: float
    t: float = 0.0
    stopped: bool = False


def heading(Omega: float, t: float) -> float:
    """Heading angle ``Omega t`` wrapped to ``[0, 2 pi)``."""
    return math.fmod(Omega * t, 2.0 * math.pi)


def excitation(t: float, omega: float) -> tuple[float, float]:
    return math.sin(omega * t), math.cos(omega * t)


@dataclass(frozen=True)
class ExcitationReport:
    zero_mean: bool
    periodic: bool
    bounded: bool
    mean: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.zero_mean and self.periodic and self.bounded


def validate_excitation(u, omega: float, n_samples: int = 4096, bound: float = 1e6) -> ExcitationReport:
    """Check a dither signal against the usual averaging requirements.

    ``u`` is a callable of time. It is sampled uniformly over two periods
    ``T = 2 pi / omega``; the first period gives the mean and the bound,
    the second is compared against the first for periodicity.
    """
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples per period")
    T = 2.0 * math.pi / omega
    ts = np.arange(2 * n_samples) * (T / n_samples)
    vals = np.array([u(t) for t in ts], dtype=float)
    first, second = vals[:n_samples], vals[n_samples:]
    peak = float(np.max(np.abs(first))) if np.all(np.isfinite(first)) else math.inf
    mean = float(np.mean(first))
    scale = max(peak, 1e-300)
    return ExcitationReport(
        zero_mean=abs(mean) < 1e-6 * scale,
        periodic=bool(np.allclose(first, second, rtol=0.0, atol=1e-9 * scale)),
        bounded=peak <= bound,
        mean=mean,
        bound=peak,
    )


def commanded_velocity(f_meas: float, state: PlantState, p: EscParams) -> float:
    if state.stopped:
        return 0.0
    sw = math.sqrt(p.omega)
    t = state.t
    return (f_meas - state.e * p.h) * p.c * sw * math.sin(p.omega * t) + state.a * sw * math.cos(p.omega * t)


def washout_rate(e: float, f_meas: float, h: float) -> float:
    return -h * e + f_meas


def amplitude_rate(a: float, J: float, lam: float) -> float:
    return -lam * (a - J)


def compute_J(xbar, a: float, p: EscParams) -> float:
    """Gradient-magnitude target for the amplitude law, before smoothing.

    The first two estimator states carry ``(c a / 2) * grad f`` weighted by
    ``cos^2`` and ``sin^2`` of the heading. Dividing their norm by
    ``c a / 2`` undoes the scaling; the amplitude is floored at ``epsilon``
    so the division stays bounded as ``a`` collapses.
    """
    return 2.0 / (p.c * max(a, p.epsilon)) * math.hypot(xbar[0], xbar[1])


class JSmoother:
    """First-order low-pass applied to :func:`compute_J`.

    Exact discretisation of ``J' = (raw - J) / tau`` with the raw value
    held over each step.
    """

    def __init__(self, tau: float, initial: float = 0.0):
        self.tau = tau
        self.value = initial

    def update(self, raw: float, dt: float) -> float:
        alpha = -math.expm1(-dt / self.tau)
        self.value = self.value + alpha * (raw - self.value)
        return self.value


def baseline_rates(state: PlantState, f_meas: float, p: EscParams) -> tuple[float, float, float]:
    """Plant rates of the comparison design: same law, amplitude frozen."""
    v = commanded_velocity(f_meas, state, p)
    th = p.Omega * state.t
    return v * math.cos(th), v * math.sin(th), washout_rate(state.e, f_meas, p.h)
