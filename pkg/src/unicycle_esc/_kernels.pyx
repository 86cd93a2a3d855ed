# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_kernels_py``.

Expressions keep the exact evaluation order of the Python fallback.
"""

from libc.math cimport sin, cos, exp, sqrt, pow


cdef inline double _field(int kind, double peak, double cx, double cy, double s1, double s2,
                          double[:, ::1] poly, double x, double y) noexcept nogil:
    cdef double dx = x - cx
    cdef double dy = y - cy
    cdef double total
    cdef Py_ssize_t k
    if kind == 0:
        return peak - 0.5 * s1 * dx * dx - 0.5 * s2 * dy * dy
    if kind == 1:
        return peak * exp(-(dx * dx / (2.0 * s1 * s1) + dy * dy / (2.0 * s2 * s2)))
    total = peak
    for k in range(poly.shape[0]):
        total = total + poly[k, 2] * pow(dx, poly[k, 0]) * pow(dy, poly[k, 1])
    return total


cdef struct Rates:
    double x
    double y
    double e
    double a


cdef inline Rates _rates(double x, double y, double e, double a, double t, double sw,
                         double omega, double c, double Omega, double lam, double h, double J,
                         bint stopped, double noise, int kind, double peak, double cx, double cy,
                         double s1, double s2, double[:, ::1] poly) noexcept nogil:
    cdef Rates r
    cdef double f = _field(kind, peak, cx, cy, s1, s2, poly, x, y) + noise
    cdef double v
    cdef double th
    if stopped:
        v = 0.0
    else:
        v = (f - e * h) * c * sw * sin(omega * t) + a * sw * cos(omega * t)
    th = Omega * t
    r.x = v * cos(th)
    r.y = v * sin(th)
    r.e = -h * e + f
    r.a = -lam * (a - J)
    return r


def integrate_window(double[::1] state, double t0, int n_sub, double hs, double omega, double c,
                     double Omega, double lam, double h, double J, bint stopped, double noise,
                     int kind, double peak, double cx, double cy, double s1, double s2,
                     double[:, ::1] poly):
    """Advance ``state = [x, y, e, a]`` in place by ``n_sub`` RK4 steps of size ``hs``."""
    cdef double sw = sqrt(omega)
    cdef double x = state[0], y = state[1], e = state[2], a = state[3]
    cdef double half = 0.5 * hs
    cdef double sixth = hs / 6.0
    cdef double t
    cdef Rates k1, k2, k3, k4
    cdef int i
    with nogil:
        for i in range(n_sub):
            t = t0 + i * hs
            k1 = _rates(x, y, e, a, t, sw, omega, c, Omega, lam, h, J, stopped, noise,
                        kind, peak, cx, cy, s1, s2, poly)
            k2 = _rates(x + half * k1.x, y + half * k1.y, e + half * k1.e, a + half * k1.a, t + half,
                        sw, omega, c, Omega, lam, h, J, stopped, noise, kind, peak, cx, cy, s1, s2, poly)
            k3 = _rates(x + half * k2.x, y + half * k2.y, e + half * k2.e, a + half * k2.a, t + half,
                        sw, omega, c, Omega, lam, h, J, stopped, noise, kind, peak, cx, cy, s1, s2, poly)
            k4 = _rates(x + hs * k3.x, y + hs * k3.y, e + hs * k3.e, a + hs * k3.a, t + hs,
                        sw, omega, c, Omega, lam, h, J, stopped, noise, kind, peak, cx, cy, s1, s2, poly)
            x = x + sixth * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x)
            y = y + sixth * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)
            e = e + sixth * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e)
            a = a + sixth * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a)
    state[0] = x
    state[1] = y
    state[2] = e
    state[3] = a


def gekf_predict(double[::1] xbar, double[:, ::1] P, double[::1] qdiag, double dt, int n_sub, bint exact=True):
    """Propagate the estimator state and covariance in place (``Phi P Phi^T + h Q``).

    With ``exact`` false the ``h^2 A P A^T`` term is dropped (plain Euler).
    """
    cdef double hstep = dt / n_sub
    cdef double old[5][5]
    cdef double ap, pa, q, app
    cdef double h2 = hstep * hstep
    cdef int s, i, j
    with nogil:
        for s in range(n_sub):
            xbar[0] = xbar[0] + hstep * xbar[2]
            xbar[1] = xbar[1] + hstep * xbar[3]
            for i in range(5):
                for j in range(5):
                    old[i][j] = P[i, j]
            for i in range(5):
                for j in range(5):
                    ap = old[i + 2][j] if i < 2 else 0.0
                    pa = old[i][j + 2] if j < 2 else 0.0
                    q = qdiag[i] if i == j else 0.0
                    if exact:
                        app = old[i + 2][j + 2] if (i < 2 and j < 2) else 0.0
                        P[i, j] = old[i][j] + hstep * (ap + pa + q) + h2 * app
                    else:
                        P[i, j] = old[i][j] + hstep * (ap + pa + q)
