# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled closed-loop simulation kernel. Mirrors ``_simcore_py.simulate``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()

cdef Py_ssize_t NCOLS = 11


cdef inline void _rk4(double* x1, double* x2, double u, double g, double h1,
                      double h2, double den, double dt) noexcept nogil:
    cdef double half = 0.5 * dt
    cdef double a1, b1, a2, b2, a3, b3, a4, b4, y1, y2, sixth
    a1 = x2[0]
    b1 = (g * u - h2 * x2[0] - h1 * x1[0]) / den
    y1 = x1[0] + half * a1
    y2 = x2[0] + half * b1
    a2 = y2
    b2 = (g * u - h2 * y2 - h1 * y1) / den
    y1 = x1[0] + half * a2
    y2 = x2[0] + half * b2
    a3 = y2
    b3 = (g * u - h2 * y2 - h1 * y1) / den
    y1 = x1[0] + dt * a3
    y2 = x2[0] + dt * b3
    a4 = y2
    b4 = (g * u - h2 * y2 - h1 * y1) / den
    sixth = dt / 6.0
    x1[0] = x1[0] + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    x2[0] = x2[0] + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)


def simulate(plant, model, int mode, gains, adapt, pq, R, double dt,
             Py_ssize_t n_steps, double limit, bint record):
    cdef double gp = plant[0], h1p = plant[1], h2p = plant[2], denp = plant[3]
    cdef double gm = model[0], h1m = model[1], h2m = model[2], denm = model[3]
    cdef double kp = gains[0], ki = gains[1], kd = gains[2]
    cdef double kp0 = kp, kd0 = kd
    cdef double a21 = adapt[0], a22 = adapt[1], p21 = adapt[2], p22a = adapt[3]
    cdef double inv_gain = adapt[4]
    cdef double q11 = pq[0], q12 = pq[1], q22 = pq[2]
    cdef const double[::1] Rv = np.ascontiguousarray(R, dtype=np.float64)

    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr
    cdef double[:, ::1] out
    if record:
        out_arr = np.zeros((n_steps + 1, NCOLS))
        out = out_arr

    cdef double x1p = 0.0, x2p = 0.0, x1m = 0.0, x2m = 0.0
    cdef double integ = 0.0, acc_p = 0.0, acc_d = 0.0
    cdef double eps_prev = Rv[0] - x1p
    cdef double cost = 0.0
    cdef double r, ex, eth, eps, deriv, u, s
    cdef bint diverged = False
    cdef Py_ssize_t rows = 0, k

    with nogil:
        for k in range(n_steps + 1):
            r = Rv[k]
            ex = x1p - x1m
            eth = x2p - x2m
            eps = r - x1p
            if mode == 0:
                integ += eps * dt
                deriv = (eps - eps_prev) / dt
                u = kp * eps + ki * integ + kd * deriv
            else:
                u = kp * eps - kd * x2p
            eps_prev = eps
            if record:
                out[k, 0] = k * dt
                out[k, 1] = x1p
                out[k, 2] = x2p
                out[k, 3] = x1m
                out[k, 4] = x2m
                out[k, 5] = ex
                out[k, 6] = eth
                out[k, 7] = u
                out[k, 8] = kp
                out[k, 9] = ki if mode == 0 else 0.0
                out[k, 10] = kd
            rows = k + 1
            if k == n_steps:
                break
            cost += (q11 * ex * ex + 2.0 * q12 * ex * eth + q22 * eth * eth) * dt

            if mode == 1:
                s = p21 * ex + p22a * eth
                acc_p += s * eps * dt
                acc_d += s * x2p * dt
                kp = kp0 + (inv_gain / a21) * acc_p
                kd = kd0 - (inv_gain / a22) * acc_d

            _rk4(&x1p, &x2p, u, gp, h1p, h2p, denp, dt)
            _rk4(&x1m, &x2m, r - x1m, gm, h1m, h2m, denm, dt)
            if not (fabs(x1p) <= limit and fabs(x2p) <= limit
                    and fabs(x1m) <= limit and fabs(x2m) <= limit
                    and isfinite(kp) and isfinite(kd)):
                diverged = True
                break

    if record:
        return out_arr[:rows], rows, diverged, cost
    return None, rows, diverged, cost
