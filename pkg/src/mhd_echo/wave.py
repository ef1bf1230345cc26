"""Amplitude ODE of the traveling wave.

    f' = -alpha g
    g' = -kappa (1 + t^2) g + alpha f + 2t/(1 + t^2) g

This is the mode pair with ``k = 1`` resonant at ``t = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PhysParams
from .integrate import IntegrationError, Trajectory
from .single_mode import ModePair


@dataclass(frozen=True)
class WaveState:
    t: float
    f: float
    g: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.f, self.g)):
            raise ValueError(f"non-finite wave state {self!r}")

    @property
    def energy(self) -> float:
        return self.f * self.f + self.g * self.g


@dataclass
class WaveTrajectory:
    t: np.ndarray
    f: np.ndarray
    g: np.ndarray
    raw: Trajectory | None = None

    @property
    def energy(self) -> np.ndarray:
        return self.f**2 + self.g**2

    @property
    def final(self) -> WaveState:
        return WaveState(float(self.t[-1]), float(self.f[-1]), float(self.g[-1]))

    def __len__(self):
        return self.t.size


def _pair(params: PhysParams) -> ModePair:
    return ModePair(params.alpha, params.kappa, 0.0)


def energy_rate(t, g, kappa):
    """Analytic ``d/dt (f^2 + g^2)``."""
    return 2.0 * g * g * (-kappa * (1.0 + t * t) + 2.0 * t / (1.0 + t * t))


def evolve_wave(
    initial: WaveState,
    params: PhysParams,
    t_end: float,
    rtol: float = 1e-10,
    *,
    atol: float = 1e-14,
    dense: bool = False,
) -> WaveTrajectory:
    if t_end <= initial.t:
        raise ValueError("t_end must exceed the initial time")
    traj = _pair(params).solve(initial.t, t_end, initial.f, initial.g, rtol, atol, dense=dense)
    return WaveTrajectory(traj.t, traj.y[:, 0], traj.y[:, 1], raw=traj)


def special_time(params: PhysParams) -> float:
    """Normalisation time ``t0 = 4/beta``."""
    return 4.0 / params.beta


def wave_special_data(params: PhysParams, rtol: float = 1e-12) -> WaveState:
    """Data at ``t = 0`` whose forward solution passes through ``(1, 0)`` at ``t0 = 4/beta``."""
    t0 = special_time(params)
    try:
        traj = _pair(params).solve(t0, 0.0, 1.0, 0.0, rtol, 1e-15)
    except IntegrationError as exc:
        raise IntegrationError(f"backward integration to t = 0 failed: {exc}") from exc
    f, g = traj.final
    return WaveState(0.0, float(f), float(g))


def decoupled_solution(t, f0: float, g0: float, kappa: float):
    """Closed form for ``alpha = 0`` starting at ``t = 0``: ``f`` constant, ``g`` from its integrating factor."""
    t = np.asarray(t, dtype=float)
    g = g0 * (1.0 + t * t) * np.exp(-kappa * (t + t**3 / 3.0))
    return np.full_like(t, f0), g
