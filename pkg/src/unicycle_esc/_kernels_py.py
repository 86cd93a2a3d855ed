"""Pure-Python versions of the hot loops.

Every expression is written in the same order as ``_kernels.pyx`` so the
two backends agree to the last bit on IEEE-754 hardware.
"""

import math

import numpy as np

from .field import field_value

_A = np.zeros((5, 5))
_A[0, 2] = 1.0
_A[1, 3] = 1.0


def _rates(x, y, e, a, t, sw, omega, c, Omega, lam, h, J, stopped, noise, fargs):
    f = field_value(fargs[0], fargs[1], fargs[2], fargs[3], fargs[4], fargs[5], fargs[6], x, y) + noise
    if stopped:
        v = 0.0
    else:
        v = (f - e * h) * c * sw * math.sin(omega * t) + a * sw * math.cos(omega * t)
    th = Omega * t
    return v * math.cos(th), v * math.sin(th), -h * e + f, -lam * (a - J)


def integrate_window(state, t0, n_sub, hs, omega, c, Omega, lam, h, J, stopped, noise,
                     kind, peak, cx, cy, s1, s2, poly):
    """Advance ``state = [x, y, e, a]`` in place by ``n_sub`` RK4 steps of size ``hs``.

    The measured field is the true field plus the constant ``noise``.
    """
    fargs = (kind, peak, cx, cy, s1, s2, [tuple(r) for r in poly])
    sw = math.sqrt(omega)
    x, y, e, a = float(state[0]), float(state[1]), float(state[2]), float(state[3])
    half = 0.5 * hs
    sixth = hs / 6.0
    args = (sw, omega, c, Omega, lam, h, J, stopped, noise, fargs)
    for i in range(n_sub):
        t = t0 + i * hs
        k1x, k1y, k1e, k1a = _rates(x, y, e, a, t, *args)
        k2x, k2y, k2e, k2a = _rates(x + half * k1x, y + half * k1y, e + half * k1e, a + half * k1a, t + half, *args)
        k3x, k3y, k3e, k3a = _rates(x + half * k2x, y + half * k2y, e + half * k2e, a + half * k2a, t + half, *args)
        k4x, k4y, k4e, k4a = _rates(x + hs * k3x, y + hs * k3y, e + hs * k3e, a + hs * k3a, t + hs, *args)
        x = x + sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y = y + sixth * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        e = e + sixth * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
        a = a + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
    state[0] = x
    state[1] = y
    state[2] = e
    state[3] = a


def gekf_predict(xbar, P, qdiag, dt, n_sub, exact=True):
    """Propagate the estimator state and covariance in place over ``n_sub`` substeps.

    Each substep applies ``Phi = I + h A``, which is the exact transition
    because ``A`` is nilpotent. The covariance step is ``Phi P Phi^T + h Q``:
    the plain Euler step (``exact=False``) drops the ``h^2 A P A^T`` term
    and can leave ``P`` indefinite right after a sharp update.
    """
    hstep = dt / n_sub
    Q = np.diag(qdiag)
    for _ in range(n_sub):
        xbar[0] = xbar[0] + hstep * xbar[2]
        xbar[1] = xbar[1] + hstep * xbar[3]
        if exact:
            P[:, :] = P + hstep * (_A @ P + P @ _A.T + Q) + (hstep * hstep) * (_A @ P @ _A.T)
        else:
            P[:, :] = P + hstep * (_A @ P + P @ _A.T + Q)
