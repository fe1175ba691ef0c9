# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled random-walk Metropolis segment for radial Boltzmann targets."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, cosh, log1p, sqrt, INFINITY

cnp.import_array()


cdef inline double _g(double n4, int code, double p0, double p1) nogil:
    cdef double u
    if code == 0:
        return pow(n4, 0.25 * p0)
    if code == 1:
        return cosh(pow(n4, 0.25 * p0))
    if code == 2:
        return pow(n4, 0.25 * p0) * log1p(sqrt(sqrt(n4)))
    return p1 * pow(n4, 0.25 * p0)


def run_segment(double[::1] x0, double[::1] z0, const double[:, ::1] noise,
                const double[::1] log_u, double step, double zstep, double a,
                int code, double p0, double p1, bint record):
    """Advance the chain len(log_u) steps; returns (xs, zs, accepted)."""
    cdef Py_ssize_t n = x0.shape[0], m = z0.shape[0], iters = log_u.shape[0]
    cdef Py_ssize_t t, i
    cdef double[::1] x = x0.copy(), z = z0.copy()
    cdef double[::1] xp = np.empty(n), zp = np.empty(m)
    cdef Py_ssize_t rows = iters if record else 0
    xs_arr = np.empty((rows, n))
    zs_arr = np.empty((rows, m))
    cdef double[:, ::1] xs = xs_arr, zs = zs_arr
    cdef double rx, rz, n4, g_cur, g_new
    cdef long accepted = 0

    rx = 0.0
    for i in range(n):
        rx += x[i] * x[i]
    rz = 0.0
    for i in range(m):
        rz += z[i] * z[i]
    g_cur = _g(rx * rx + a * rz, code, p0, p1)

    with nogil:
        for t in range(iters):
            rx = 0.0
            for i in range(n):
                xp[i] = x[i] + step * noise[t, i]
                rx += xp[i] * xp[i]
            rz = 0.0
            for i in range(m):
                zp[i] = z[i] + zstep * noise[t, n + i]
                rz += zp[i] * zp[i]
            n4 = rx * rx + a * rz
            g_new = _g(n4, code, p0, p1)
            if log_u[t] < g_cur - g_new:
                for i in range(n):
                    x[i] = xp[i]
                for i in range(m):
                    z[i] = zp[i]
                g_cur = g_new
                accepted += 1
            if record:
                for i in range(n):
                    xs[t, i] = x[i]
                for i in range(m):
                    zs[t, i] = z[i]
    return xs_arr, zs_arr, int(accepted), np.asarray(x), np.asarray(z)
