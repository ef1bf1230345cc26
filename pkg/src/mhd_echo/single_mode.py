"""Decoupled (w, j) pair of one Fourier mode around the stationary state.

For fixed ``(k, xi)`` the linearisation reduces to

    w' = -alpha k j
    j' = b(k, t) j + alpha k w

whose energy ``w^2 + j^2`` only changes through ``2 b j^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ModeIndex, PhysParams
from .integrate import Trajectory, integrate, resonance_ceiling


@dataclass(frozen=True)
class SingleModeState:
    t: float
    w: float
    j: float
    energy: float = field(default=None)

    def __post_init__(self):
        recomputed = self.w * self.w + self.j * self.j
        if self.energy is None:
            object.__setattr__(self, "energy", recomputed)
        elif abs(self.energy - recomputed) > 1e-12 * max(1.0, recomputed):
            raise ValueError(f"tracked energy {self.energy!r} disagrees with w^2 + j^2 = {recomputed!r}")


@dataclass
class SingleModeTrajectory:
    t: np.ndarray
    w: np.ndarray
    j: np.ndarray
    raw: Trajectory | None = None

    @property
    def energy(self) -> np.ndarray:
        return self.w**2 + self.j**2

    def __len__(self):
        return self.t.size

    def __getitem__(self, i) -> SingleModeState:
        return SingleModeState(float(self.t[i]), float(self.w[i]), float(self.j[i]))


class ModePair:
    """Right-hand side of the (w, j) pair, vectorised over ``m`` columns.

    The state vector is ``[w_1..w_m, j_1..j_m]`` so a fundamental matrix can
    be propagated in one integration.  ``centre`` is the resonance time
    (``xi/k``), ``rate`` the dissipation ``kappa k^2`` and ``coupling`` the
    Alfven frequency ``alpha k``.
    """

    def __init__(self, coupling: float, rate: float, centre: float, columns: int = 1):
        self.coupling = coupling
        self.rate = rate
        self.centre = centre
        self.m = columns

    def b(self, t):
        s = t - self.centre
        return 2.0 * s / (1.0 + s * s) - self.rate * (1.0 + s * s)

    def rhs(self, t, y):
        m = self.m
        w, j = y[:m], y[m:]
        return np.concatenate([-self.coupling * j, self.b(t) * j + self.coupling * w])

    def jac(self, t, y=None):
        m = self.m
        eye = np.eye(m)
        return np.block([[np.zeros((m, m)), -self.coupling * eye], [self.coupling * eye, self.b(t) * eye]])

    def solve(self, t0, t1, w0, j0, rtol, atol, dense=False) -> Trajectory:
        y0 = np.concatenate([np.atleast_1d(w0), np.atleast_1d(j0)]).astype(float)
        return integrate(
            self.rhs,
            t0,
            t1,
            y0,
            jac=self.jac,
            rtol=rtol,
            atol=atol,
            max_step=resonance_ceiling([self.centre]),
            dense=dense,
        )


def _pair(mode: ModeIndex, params: PhysParams, columns: int = 1) -> ModePair:
    if mode.k < 1:
        raise ValueError("the single-mode system needs k >= 1")
    return ModePair(params.alpha * mode.k, params.kappa * mode.k**2, mode.resonance, columns)


def default_t_end(mode: ModeIndex, params: PhysParams) -> float:
    """Resonance time plus ten dissipation times; beyond it the energy can only decay."""
    return mode.resonance + 10.0 * (params.kappa * mode.k**2) ** (-1.0 / 3.0)


def evolve_single_mode(
    mode: ModeIndex,
    params: PhysParams,
    w0: float,
    j0: float,
    t_end: float,
    *,
    t0: float = 0.0,
    rtol: float = 1e-9,
    atol: float = 1e-13,
    dense: bool = False,
) -> SingleModeTrajectory:
    if t_end <= t0:
        raise ValueError("t_end must exceed the start time")
    traj = _pair(mode, params).solve(t0, t_end, w0, j0, rtol, atol, dense=dense)
    return SingleModeTrajectory(traj.t, traj.y[:, 0], traj.y[:, 1], raw=traj)


def stability_bound(params: PhysParams) -> float:
    return (1.0 + params.kappa ** (-2.0 / 3.0)) ** 2


def stability_ratio(
    mode: ModeIndex,
    params: PhysParams,
    samples: int = 16,
    t_end: float | None = None,
    *,
    t0: float = 0.0,
    rtol: float = 1e-9,
) -> float:
    """Largest ``energy(t)/energy(t0)`` over unit initial data on ``samples`` equally spaced angles.

    The system is linear, so all angles share one integration of the
    fundamental matrix and each trajectory is recovered by superposition.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if t_end is None:
        t_end = default_t_end(mode, params)
    pair = _pair(mode, params, columns=2)
    traj = pair.solve(t0, t_end, [1.0, 0.0], [0.0, 1.0], rtol, 1e-13, dense=True)
    # the sup may fall between accepted steps: sample the interpolant inside each
    frac = np.linspace(0.0, 1.0, 9)[:-1]
    t = np.append((traj.t[:-1, None] + np.diff(traj.t)[:, None] * frac).ravel(), traj.t[-1])
    phi = traj.sol(t).T
    # (w, j) response to unit w0 (column 0) and unit j0 (column 1)
    w_resp = phi[:, :2]
    j_resp = phi[:, 2:]
    angles = 2.0 * math.pi * np.arange(samples) / samples
    v = np.stack([np.cos(angles), np.sin(angles)])
    energy = (w_resp @ v) ** 2 + (j_resp @ v) ** 2
    return float(energy.max())
