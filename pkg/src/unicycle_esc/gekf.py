"""Geometric extended Kalman filter for the averaged unicycle dynamics.

The five states are

====  ============================================================
x1    ``(c a / 2) df/dx cos^2(Omega t)`` at the window start
x2    ``(c a / 2) df/dy sin^2(Omega t)`` at the window start
x3    rate of x1
x4    rate of x2
x5    washout output ``f - e h`` at the window start
====  ============================================================

They are propagated with a constant-velocity model and corrected once
per measurement window using a first-order Chen-Fliess expansion of the
washout output across the window.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .controller import EscParams
from .errors import FilterNumericalError

#: Jacobian of the constant-velocity propagation model.
A = np.zeros((5, 5))
A[0, 2] = 1.0
A[1, 3] = 1.0

PSD_TOL = 1e-9
COVARIANCE_STEPS = ("transition", "euler")


class SingularGeometry(Exception):
    """The heading is too close to an axis for the measurement model.

    Raised instead of dividing by a vanishing ``cos`` or ``sin`` of the
    heading; the caller skips that update.
    """


def compute_K(omega: float, dt: float) -> float:
    """Window gain ``(2 / sqrt(omega)) sin(omega dt / 2)``.

    Equals the integral of ``sqrt(omega) sin(omega s)`` over a window of
    length ``dt``, up to the mid-window phase factor.
    """
    if omega <= 0 or dt <= 0:
        raise ValueError("omega and dt must be positive")
    if dt >= 2.0 * math.pi / omega:
        warnings.warn(
            f"measurement interval {dt} is not small against the excitation period "
            f"{2.0 * math.pi / omega:.4g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return 2.0 / math.sqrt(omega) * math.sin(omega * dt / 2.0)


@dataclass
class GekfEstimate:
    xbar: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    R: float
    last_update_time: float = 0.0
    innovation: float = math.nan
    skipped: bool = False

    @classmethod
    def initial(cls, p: EscParams, x5: float = 0.0) -> "GekfEstimate":
        xbar = np.zeros(5)
        xbar[4] = x5
        return cls(xbar=xbar, P=p.p0 * np.eye(5), Q=p.q_scale * np.eye(5), R=p.r_scale)

    def copy(self) -> "GekfEstimate":
        return replace(self, xbar=self.xbar.copy(), P=self.P.copy(), Q=self.Q.copy())


@dataclass(frozen=True)
class MeasurementContext:
    """Timing and trig factors for one measurement window ``[t1, t2]``.

    All trig factors are taken at the window midpoint. ``a`` is the
    amplitude at ``t1``, floored at ``epsilon``.
    """

    t1: float
    t2: float
    K: float
    a: float
    cos_W: float
    sin_W: float
    cos_w: float
    sin_w: float

    @property
    def t_mid(self) -> float:
        return 0.5 * (self.t1 + self.t2)

    @classmethod
    def for_window(cls, t1: float, a: float, p: EscParams) -> "MeasurementContext":
        t2 = t1 + p.dt_meas
        tm = 0.5 * (t1 + t2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            K = compute_K(p.omega, p.dt_meas)
        return cls(
            t1=t1,
            t2=t2,
            K=K,
            a=max(a, p.epsilon),
            cos_W=math.cos(p.Omega * tm),
            sin_W=math.sin(p.Omega * tm),
            cos_w=math.cos(p.omega * tm),
            sin_w=math.sin(p.omega * tm),
        )

    def singular(self, guard: float) -> bool:
        return abs(self.cos_W) < guard or abs(self.sin_W) < guard


def predict(est: GekfEstimate, dt: float, n_substeps: int, covariance_step: str = "transition") -> GekfEstimate:
    """``n_substeps`` steps of the constant-velocity model over ``dt``.

    The state step is plain Euler, which is exact here. The covariance
    step is ``Phi P Phi^T + h Q`` with ``Phi = I + h A`` by default;
    ``covariance_step="euler"`` uses ``P + h (A P + P A^T + Q)`` instead,
    which is not guaranteed to keep ``P`` positive semi-definite.
    """
    if covariance_step not in COVARIANCE_STEPS:
        raise ValueError(f"covariance_step must be one of {COVARIANCE_STEPS}")
    if dt <= 0 or n_substeps < 1:
        raise ValueError("dt must be positive and n_substeps >= 1")
    out = est.copy()
    exact = covariance_step == "transition"
    kernels.gekf_predict(out.xbar, out.P, np.ascontiguousarray(np.diag(est.Q)), dt, int(n_substeps), exact)
    out.P = 0.5 * (out.P + out.P.T)
    return out


def _weights(ctx: MeasurementContext, p: EscParams) -> tuple[float, float]:
    # (weight on the washout channel, weight on the amplitude channel).
    # In the velocity law the washout channel rides on sin(w t) and the
    # amplitude channel on cos(w t); integrating each across the window
    # keeps that pairing. "swapped" exchanges them.
    if p.pairing == "swapped":
        return ctx.cos_w, ctx.sin_w
    return ctx.sin_w, ctx.cos_w


def _check_geometry(ctx: MeasurementContext, p: EscParams):
    if ctx.singular(p.singular_guard):
        raise SingularGeometry(f"heading too close to an axis at t = {ctx.t_mid:.6g}")


def predicted_measurement(est: GekfEstimate, ctx: MeasurementContext, p: EscParams) -> float:
    """Expected washout output at ``t2`` given the estimate at ``t1``."""
    _check_geometry(ctx, p)
    x1, x2, _, _, x5 = est.xbar
    K, a, c = ctx.K, ctx.a, p.c
    w1, w2 = _weights(ctx, p)
    return (
        x5
        + 2 * K / (a * ctx.cos_W) * x1 * x5 * w1
        + 2 * K / (a * ctx.sin_W) * x2 * x5 * w1
        + 2 * K / (c * ctx.cos_W) * x1 * w2
        + 2 * K / (c * ctx.sin_W) * x2 * w2
    )


def measurement_jacobian(est: GekfEstimate, ctx: MeasurementContext, p: EscParams) -> np.ndarray:
    _check_geometry(ctx, p)
    x1, x2, _, _, x5 = est.xbar
    K, a, c = ctx.K, ctx.a, p.c
    w1, w2 = _weights(ctx, p)
    return np.array(
        [
            2 * K / (a * ctx.cos_W) * x5 * w1 + 2 * K / (c * ctx.cos_W) * w2,
            2 * K / (a * ctx.sin_W) * x5 * w1 + 2 * K / (c * ctx.sin_W) * w2,
            0.0,
            0.0,
            1 + 2 * K / (a * ctx.cos_W) * x1 * w1 + 2 * K / (a * ctx.sin_W) * x2 * w1,
        ]
    )


def min_eigenvalue(P: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(P)[0])


def update(est: GekfEstimate, y_meas: float, ctx: MeasurementContext, p: EscParams) -> GekfEstimate:
    """Scalar measurement update.

    The innovation uses the nonlinear prediction rather than ``C @ xbar``;
    the model is bilinear in ``(x1 x5, x2 x5)`` and the linear form would
    count those terms twice.
    """
    C = measurement_jacobian(est, ctx, p)
    y_hat = predicted_measurement(est, ctx, p)
    PC = est.P @ C
    S = est.R + C @ PC
    if not (S > 0.0 and math.isfinite(S)):
        raise FilterNumericalError(f"innovation variance {S!r} at t = {ctx.t2:.6g}")
    L = PC / S
    innovation = y_meas - y_hat
    out = est.copy()
    out.xbar = est.xbar + L * innovation
    # Joseph form: equal to (I - L C) P for this gain, but stays symmetric PSD.
    IKC = np.eye(5) - np.outer(L, C)
    P = IKC @ est.P @ IKC.T + est.R * np.outer(L, L)
    out.P = 0.5 * (P + P.T)
    if min_eigenvalue(out.P) < -PSD_TOL:
        raise FilterNumericalError(f"covariance lost positive semi-definiteness at t = {ctx.t2:.6g}")
    out.innovation = innovation
    out.last_update_time = ctx.t2
    out.skipped = False
    return out


def anchor_window(est: GekfEstimate, y_prev: float) -> GekfEstimate:
    """Re-anchor the washout state to the sample that opens the window.

    ``x5`` is defined at the window start, and that value is exactly the
    last measurement. It gets the measurement variance and no correlation
    with the gradient states.
    """
    out = est.copy()
    out.xbar[4] = y_prev
    out.P[4, :] = 0.0
    out.P[:, 4] = 0.0
    out.P[4, 4] = est.R
    return out
