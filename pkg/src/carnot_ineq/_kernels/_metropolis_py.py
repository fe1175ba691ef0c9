"""Pure-Python mirror of the compiled Metropolis segment.

Same arithmetic in the same order, so both backends follow the same chain
for a given noise stream.
"""

import math

import numpy as np


def _g(n4, code, p0, p1):
    if code == 0:
        return math.pow(n4, 0.25 * p0)
    if code == 1:
        try:
            return math.cosh(math.pow(n4, 0.25 * p0))
        except OverflowError:
            return math.inf
    if code == 2:
        return math.pow(n4, 0.25 * p0) * math.log1p(math.sqrt(math.sqrt(n4)))
    return p1 * math.pow(n4, 0.25 * p0)


def run_segment(x0, z0, noise, log_u, step, zstep, a, code, p0, p1, record):
    """Advance the chain len(log_u) steps; returns (xs, zs, accepted, x, z)."""
    x = [float(v) for v in x0]
    z = [float(v) for v in z0]
    n, m = len(x), len(z)
    iters = len(log_u)
    rows = iters if record else 0
    xs = np.empty((rows, n))
    zs = np.empty((rows, m))
    noise = noise.tolist()
    log_u = log_u.tolist()
    rx = sum(v * v for v in x)
    rz = sum(v * v for v in z)
    g_cur = _g(rx * rx + a * rz, code, p0, p1)
    accepted = 0
    for t in range(iters):
        row = noise[t]
        xp = [x[i] + step * row[i] for i in range(n)]
        zp = [z[i] + zstep * row[n + i] for i in range(m)]
        rx = 0.0
        for v in xp:
            rx += v * v
        rz = 0.0
        for v in zp:
            rz += v * v
        g_new = _g(rx * rx + a * rz, code, p0, p1)
        if log_u[t] < g_cur - g_new:
            x, z, g_cur = xp, zp, g_new
            accepted += 1
        if record:
            xs[t] = x
            zs[t] = z
    return xs, zs, accepted, np.array(x), np.array(z)
