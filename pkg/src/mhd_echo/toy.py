"""Four-variable resonance model on one interval ``(t_k, t_{k-1})``.

Only the resonant pair ``(w_k, j_k)`` and its lower neighbour
``(w_{k-1}, j_{k-1})`` are kept, and only the forcing of ``k - 1`` by ``k``:

    w_k'     = -alpha k j_k
    j_k'     = b(k, t) j_k + alpha k w_k
    w_{k-1}' = -alpha (k-1) j_{k-1} + a(k, t) w_k
    j_{k-1}' = -kappa (xi/k)^2 j_{k-1} + alpha (k-1) w_{k-1}
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import PhysParams, coefficient_a, coefficient_b, interval_boundary
from .integrate import Trajectory, integrate, resonance_ceiling


class ToyHypothesisWarning(UserWarning):
    """The run is outside the regime where the two-sided bracket is proven."""


@dataclass(frozen=True)
class ToyState:
    t: float
    w_k: float
    j_k: float
    w_km1: float
    j_km1: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.w_k, self.j_k, self.w_km1, self.j_km1)):
            raise ValueError(f"non-finite toy state {self!r}")


@dataclass
class ToyTrajectory:
    params: PhysParams
    k: int
    xi: float
    t: np.ndarray
    y: np.ndarray  # columns w_k, j_k, w_km1, j_km1
    raw: Trajectory
    certifying: bool
    violations: tuple[str, ...] = ()

    def __len__(self):
        return self.t.size

    @property
    def resonance(self) -> float:
        return self.xi / self.k

    @property
    def eta(self) -> float:
        return self.xi / self.k**2

    @property
    def terminal(self) -> ToyState:
        return ToyState(float(self.t[-1]), *map(float, self.y[-1]))

    def w_k(self, t):
        """Dense ``w_k`` at global time(s) ``t``."""
        return self.raw.sol(t)[0]

    def upper_bound(self) -> float:
        return 2.0 * math.pi * self.params.c * self.eta

    def lower_bound(self) -> float:
        return 0.5 * math.pi * self.params.c * self.eta

    def upper_quantity(self) -> float:
        """``|w_k| + |w_km1| + alpha k |j_k| + alpha (k-1) |j_km1|`` at the terminal time."""
        s = self.terminal
        a, k = self.params.alpha, self.k
        return abs(s.w_k) + abs(s.w_km1) + a * k * abs(s.j_k) + a * (k - 1) * abs(s.j_km1)


def toy_hypotheses(params: PhysParams, k: int, xi: float) -> list[str]:
    """Violated hypotheses of the two-sided bracket (empty when certifying)."""
    bad = []
    if params.alpha == 0 or params.beta < math.pi:
        bad.append("beta >= pi")
    if k < 2:
        bad.append("k >= 2")
    need = 10.0 * max(1.0 / params.kappa, k * k / params.c if params.c > 0 else math.inf)
    if xi < need:
        bad.append(f"xi >= {need:.6g}")
    return bad


class _ToyRhs:
    def __init__(self, params: PhysParams, k: int, xi: float):
        self.ak = params.alpha * k
        self.ak1 = params.alpha * (k - 1)
        self.k, self.xi, self.params = k, xi, params
        self.damp = params.kappa * (xi / k) ** 2

    def __call__(self, t, y):
        p, k, xi = self.params, self.k, self.xi
        a = coefficient_a(k, t, xi, p.c)
        b = coefficient_b(k, t, xi, p.kappa)
        return np.array(
            [
                -self.ak * y[1],
                b * y[1] + self.ak * y[0],
                -self.ak1 * y[3] + a * y[0],
                -self.damp * y[3] + self.ak1 * y[2],
            ]
        )

    def jac(self, t, y=None):
        p, k, xi = self.params, self.k, self.xi
        a = coefficient_a(k, t, xi, p.c)
        b = coefficient_b(k, t, xi, p.kappa)
        return np.array(
            [
                [0.0, -self.ak, 0.0, 0.0],
                [self.ak, b, 0.0, 0.0],
                [a, 0.0, 0.0, -self.ak1],
                [0.0, 0.0, self.ak1, -self.damp],
            ]
        )


def toy_trajectory(params: PhysParams, k: int, xi: float, *, rtol: float = 1e-9, atol: float = 1e-12) -> ToyTrajectory:
    """Integrate from ``t_k`` to ``t_{k-1}`` with ``w_k = 1`` and everything else zero.

    Outside the proven regime a :class:`ToyHypothesisWarning` is issued and
    the result is marked non-certifying, but the run still happens.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if not (xi > 0 and math.isfinite(xi)):
        raise ValueError(f"xi must be positive, got {xi!r}")
    violations = toy_hypotheses(params, k, xi)
    if violations:
        warnings.warn(f"toy model outside its proven regime: {', '.join(violations)}", ToyHypothesisWarning, stacklevel=2)
    rhs = _ToyRhs(params, k, xi)
    t0, t1 = interval_boundary(xi, k), interval_boundary(xi, k - 1)
    traj = integrate(
        rhs,
        t0,
        t1,
        np.array([1.0, 0.0, 0.0, 0.0]),
        jac=rhs.jac,
        rtol=rtol,
        atol=atol,
        max_step=resonance_ceiling([xi / k]),
        dense=True,
    )
    return ToyTrajectory(params, k, xi, traj.t, traj.y, traj, not violations, tuple(violations))


def evolve_toy(params: PhysParams, k: int, xi: float, **kwargs) -> ToyState:
    """Terminal state at ``t_{k-1}``."""
    return toy_trajectory(params, k, xi, **kwargs).terminal


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _graded_mesh(lo: float, hi: float, layer: float) -> np.ndarray:
    """Breakpoints on ``[lo, hi]`` refined near 0 (arcsinh grading) and geometrically near ``hi``."""
    u = np.arange(math.asinh(lo), math.asinh(hi), 0.1)
    pts = [np.sinh(u)]
    span = hi - lo
    if layer < span:
        m = np.arange(0, math.ceil(math.log2(span / layer)) + 1)
        pts.append(hi - layer * 2.0**m)
    mesh = np.concatenate(pts + [[lo, hi]])
    mesh = mesh[(mesh >= lo) & (mesh <= hi)]
    return np.unique(mesh)


def _relation_rhs(traj: ToyTrajectory, s: float, s0: float) -> float:
    """Right-hand side ``1 - (1/beta) int_{s0}^{s} w/(1+tau^2) (1 - exp(-K(...))) dtau``."""
    p = traj.params
    K = p.kappa * traj.k**2
    if s <= s0:
        return 1.0
    layer = 1.0 / (K * (1.0 + s * s))
    mesh = _graded_mesh(s0, s, layer)
    left, right = mesh[:-1, None], mesh[1:, None]
    half = 0.5 * (right - left)
    tau = (0.5 * (left + right) + half * _GL_X).ravel()
    weights = (half * _GL_W).ravel()
    gap = s - tau
    phase = K * gap * (1.0 + (s * s + s * tau + tau * tau) / 3.0)
    kernel = -np.expm1(-phase)
    w = traj.w_k(tau + traj.resonance)
    integral = float(np.sum(weights * w * kernel / (1.0 + tau * tau)))
    inv_beta = p.alpha**2 / p.kappa
    return 1.0 - inv_beta * integral


def toy_w_relation_residual(traj: ToyTrajectory, samples: int | None = 200) -> float:
    """Max ``|w_k(s) - RHS(s)|`` of the integral identity for the resonant mode.

    ``s`` runs over accepted step times (thinned to ``samples`` points if
    given).  The identity holds for any ``w_k`` produced by the model, so
    the residual measures integration and quadrature error only.
    """
    s_all = traj.t - traj.resonance
    s0 = s_all[0]
    idx = np.arange(1, s_all.size)
    if samples is not None and idx.size > samples:
        idx = idx[np.linspace(0, idx.size - 1, samples).round().astype(int)]
    worst = 0.0
    for i in idx:
        worst = max(worst, abs(traj.y[i, 0] - _relation_rhs(traj, float(s_all[i]), s0)))
    return worst
