"""Growth factor of the resonant mode on the core interval ``[-d, d]``.

The reduced pair

    u' = -j
    j' = (K/beta) u + (2s/(1+s^2) - K(1+s^2)) j

started from ``u(tau) = 1, j(tau) = 0`` has a propagator ``U(tau, s)``
whose supremum is bounded by the piecewise factor :func:`L_analytic`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import integrate, resonance_ceiling


def certifying_c_max(beta: float) -> float:
    """Largest ``c`` allowed by ``c <= (8 pi)^(-4/3) beta^(16/3)``."""
    return (8.0 * math.pi) ** (-4.0 / 3.0) * beta ** (16.0 / 3.0)


@dataclass(frozen=True)
class GrowthFactorQuery:
    beta: float
    K: float
    c: float

    def __post_init__(self):
        for name in ("beta", "K", "c"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def d(self) -> float:
        return 1.0 / self.c

    @property
    def certifying(self) -> bool:
        return self.c <= certifying_c_max(self.beta)


def L_analytic(q: GrowthFactorQuery) -> float:
    """Piecewise bound on ``sup |U|``; at a shared boundary the larger branch wins."""
    beta, K, c = q.beta, q.K, q.c
    low = 2.0 * math.pi / beta * c**3
    mid = 0.5 * c**0.75
    values = []
    if K >= 1.0:
        values.append(1.0)
    if mid <= K <= 1.0:
        values.append(math.sqrt(q.d))
    if low <= K <= mid:
        values.append(2.0 * (1.0 + math.pi / beta))
    if K <= low:
        values.append(1.0)
    if not values:  # unreachable for positive K, kept as a guard
        raise ValueError(f"no branch of L covers K = {K!r}")
    return max(values)


def _propagator_sup(beta: float, K: float, tau: float, d: float, rtol: float) -> float:
    def rhs(s, y):
        return np.array([-y[1], K / beta * y[0] + (2.0 * s / (1.0 + s * s) - K * (1.0 + s * s)) * y[1]])

    def jac(s, y=None):
        return np.array([[0.0, -1.0], [K / beta, 2.0 * s / (1.0 + s * s) - K * (1.0 + s * s)]])

    traj = integrate(rhs, tau, d, [1.0, 0.0], jac=jac, rtol=rtol, atol=1e-12, max_step=resonance_ceiling([0.0]))
    return float(np.abs(traj.y[:, 0]).max())


def U_sup_numeric(q: GrowthFactorQuery, grid: int = 9, *, rtol: float = 1e-8) -> float:
    """Max of ``|U(tau, s)|`` over ``grid`` equally spaced starts ``tau`` in ``[-d, d]`` and all ``s`` up to ``d``."""
    if grid < 8:
        raise ValueError(f"grid must be >= 8, got {grid}")
    d = q.d
    return max(_propagator_sup(q.beta, q.K, float(tau), d, rtol) for tau in np.linspace(-d, d, grid))
