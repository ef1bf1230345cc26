"""Independent reference computations used by the tests.

Nothing here imports the package's integrators, so agreement between the
two is a genuine cross-check.
"""

import math

import numpy as np


def rk4_fixed(rhs, t0, t1, y0, dt):
    """Classical fixed-step RK4; returns ``(t, y)`` on the uniform grid."""
    n = int(round((t1 - t0) / dt))
    h = (t1 - t0) / n
    y = np.array(y0, dtype=float)
    ts = [t0]
    ys = [y.copy()]
    t = t0
    for i in range(n):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * h
        ts.append(t)
        ys.append(y.copy())
    return np.array(ts), np.array(ys)


def wave_rhs(alpha, kappa):
    def rhs(t, y):
        f, g = y
        return np.array([-alpha * g, -kappa * (1 + t * t) * g + alpha * f + 2 * t / (1 + t * t) * g])

    return rhs


def mode_pair_rhs(alpha, kappa, k, xi):
    def rhs(t, y):
        w, j = y
        s = t - xi / k
        b = 2 * s / (1 + s * s) - kappa * k * k * (1 + s * s)
        return np.array([-alpha * k * j, b * j + alpha * k * w])

    return rhs


def log_product_sum(x, k_opt):
    """``sum_{k=1}^{k_opt} log(x / k^2)`` term by term."""
    return math.fsum(math.log(x / (k * k)) for k in range(1, k_opt + 1))


def coefficient_a_direct(k, t, xi, c):
    return c * xi / k**2 / (1 + (xi / k - t) ** 2)


def lattice_rhs_loops(alpha, kappa, c, xi, k_max):
    """Mode-by-mode evaluation of the lattice right-hand side on ``[w_1..w_K, j_1..j_K]``."""

    def a(k, t):
        if k < 1 or k > k_max:
            return 0.0
        return c * xi / k**2 / (1 + (xi / k - t) ** 2)

    def rhs(t, y):
        w = {k: y[k - 1] for k in range(1, k_max + 1)}
        j = {k: y[k_max + k - 1] for k in range(1, k_max + 1)}
        dw, dj = [], []
        for k in range(1, k_max + 1):
            s = t - xi / k
            b = 2 * s / (1 + s * s) - kappa * k * k * (1 + s * s)
            dw.append(-alpha * k * j[k] - a(k + 1, t) * w.get(k + 1, 0.0) + a(k - 1, t) * w.get(k - 1, 0.0))
            dj.append(b * j[k] + alpha * k * w[k])
        return np.array(dw + dj)

    return rhs
