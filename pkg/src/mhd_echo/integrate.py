"""Adaptive stiff time stepping for the linear mode systems.

All evolutions in this package are linear, ``y' = A(t) y``, with a current
damping rate that grows like ``kappa k^2 (t - xi/k)^2``.  Far from resonance
this reaches 1e8 and beyond, so the stepping is done with the L-stable
Radau IIA (order 5) pair from scipy, driven one step at a time so that a
time-dependent step ceiling can keep the O(1)-wide resonance cores resolved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import OdeSolution, Radau


class IntegrationError(RuntimeError):
    """Base class for failures of a time integration."""


class StepUnderflowError(IntegrationError):
    def __init__(self, t: float, detail: str = ""):
        self.t = t
        super().__init__(f"step size underflow at t = {t:.17g}" + (f" ({detail})" if detail else ""))


class NonFiniteStateError(IntegrationError):
    def __init__(self, t: float):
        self.t = t
        super().__init__(f"non-finite state at t = {t:.17g}")


@dataclass
class Trajectory:
    """States on the accepted steps, ``y[i]`` at time ``t[i]``."""

    t: np.ndarray
    y: np.ndarray
    sol: OdeSolution | None = None
    nfev: int = 0
    njev: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    def __len__(self):
        return self.t.size


def resonance_ceiling(centres, factor: float = 0.1) -> Callable[[float], float]:
    """Step ceiling ``factor * sqrt(1 + dist^2)`` with ``dist`` the distance to the nearest centre."""
    centres = np.atleast_1d(np.asarray(centres, dtype=float))

    def ceiling(t: float) -> float:
        dist = np.min(np.abs(centres - t))
        return factor * float(np.sqrt(1.0 + dist * dist))

    return ceiling


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    y0,
    *,
    jac: Callable[[float, np.ndarray], np.ndarray] | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-12,
    max_step: Callable[[float], float] | float | None = None,
    dense: bool = False,
    on_step: Callable[[float, np.ndarray], None] | None = None,
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` (either direction).

    The last accepted step lands exactly on ``t1``.  ``max_step`` may be a
    function of the current time; it is re-evaluated before every step.
    """
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise NonFiniteStateError(t0)
    if t1 == t0:
        return Trajectory(np.array([t0]), y0[None, :].copy())

    ceiling = max_step if callable(max_step) else None
    solver = Radau(
        rhs,
        t0,
        y0,
        t1,
        rtol=rtol,
        atol=atol,
        jac=jac,
        max_step=np.inf if max_step is None or ceiling else float(max_step),
    )
    ts = [t0]
    ys = [y0.copy()]
    interpolants = []
    while solver.status == "running":
        if ceiling is not None:
            solver.max_step = ceiling(solver.t)
        message = solver.step()
        if solver.status == "failed":
            raise StepUnderflowError(solver.t, message or "")
        if not np.all(np.isfinite(solver.y)):
            raise NonFiniteStateError(solver.t)
        ts.append(solver.t)
        ys.append(solver.y.copy())
        if dense:
            interpolants.append(solver.dense_output())
        if on_step is not None:
            on_step(solver.t, solver.y)

    t = np.array(ts)
    sol = OdeSolution(t, interpolants) if dense else None
    return Trajectory(t, np.array(ys), sol, nfev=solver.nfev, njev=solver.njev)

