"""Truncated tridiagonal mode lattice at fixed ``xi`` and the echo chain.

For ``1 <= k <= k_max``

    w(k)' = -alpha k j(k) - a(k+1, t) w(k+1) + a(k-1, t) w(k-1)
    j(k)' = b(k, t) j(k) + alpha k w(k)

with the average mode ``k = 0`` pinned to zero and ``w(k_max + 1) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import LOWER_SLACK, interval_envelopes
from .core import PhysParams, SpectralWeight, interval_boundary, x_norm
from .integrate import IntegrationError, integrate, resonance_ceiling

#: Number of highest modes watched by the truncation monitor.
TAIL_MODES = 3


class TruncationAlarm(IntegrationError):
    def __init__(self, t: float, share: float, threshold: float):
        self.t, self.share, self.threshold = t, share, threshold
        super().__init__(
            f"tail modes hold {share:.3g} of the weighted mass at t = {t:.17g} "
            f"(threshold {threshold:.3g}); increase k_max"
        )


@dataclass
class ModeLattice:
    """State at one ``xi``; ``w[k]``, ``j[k]`` for ``k = 0..k_max`` with ``k = 0`` pinned."""

    xi: float
    k_max: int
    t: float
    w: np.ndarray
    j: np.ndarray
    k_min: int = field(default=0, init=False)

    def __post_init__(self):
        if not (self.xi > 0 and math.isfinite(self.xi)):
            raise ValueError(f"xi must be positive, got {self.xi!r}")
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        self.w = np.asarray(self.w, dtype=float).copy()
        self.j = np.asarray(self.j, dtype=float).copy()
        n = self.k_max + 1
        if self.w.shape != (n,) or self.j.shape != (n,):
            raise ValueError(f"w and j need length k_max + 1 = {n}")
        if self.w[0] != 0 or self.j[0] != 0:
            raise ValueError("the k = 0 average mode is pinned to zero")

    @classmethod
    def delta(cls, xi: float, k_max: int, k0: int, t: float) -> ModeLattice:
        """``w = delta_{k0}``, ``j = 0``."""
        if not 1 <= k0 <= k_max:
            raise ValueError(f"k0 must lie in 1..{k_max}, got {k0}")
        w = np.zeros(k_max + 1)
        w[k0] = 1.0
        return cls(xi, k_max, t, w, np.zeros(k_max + 1))

    def vector(self) -> np.ndarray:
        return np.concatenate([self.w[1:], self.j[1:]])

    @classmethod
    def from_vector(cls, xi: float, k_max: int, t: float, y) -> ModeLattice:
        y = np.asarray(y, dtype=float)
        return cls(xi, k_max, t, np.concatenate([[0.0], y[:k_max]]), np.concatenate([[0.0], y[k_max:]]))


@dataclass(frozen=True)
class TruncationPolicy:
    k_max: int
    tail_monitor_threshold: float = 1e-8

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        if not 0 < self.tail_monitor_threshold < 1:
            raise ValueError("tail_monitor_threshold must lie in (0, 1)")

    @classmethod
    def default(cls, k_start: int) -> TruncationPolicy:
        return cls(k_start + 20)

    def check_start(self, k_start: int):
        if self.k_max < k_start + 5:
            raise ValueError(f"k_max = {self.k_max} must be >= k_start + 5 = {k_start + 5}")


class LatticeRhs:
    """Linear right-hand side on the unknown ``[w_1..w_K, j_1..j_K]``."""

    def __init__(self, params: PhysParams, xi: float, k_max: int):
        self.params, self.xi, self.K = params, xi, k_max
        self.k = np.arange(1, k_max + 1, dtype=float)
        self.ak = params.alpha * self.k
        self.centre = xi / self.k
        self.eta = xi / self.k**2

    def coefficients(self, t):
        s = t - self.centre
        s2 = s * s
        a = self.params.c * self.eta / (1.0 + s2)
        b = 2.0 * s / (1.0 + s2) - self.params.kappa * self.k**2 * (1.0 + s2)
        return a, b

    def __call__(self, t, y):
        K = self.K
        w, j = y[:K], y[K:]
        a, b = self.coefficients(t)
        aw = a * w
        dw = -self.ak * j
        dw[:-1] -= aw[1:]  # -a(k+1) w(k+1)
        dw[1:] += aw[:-1]  # +a(k-1) w(k-1); a(0) w(0) = 0
        return np.concatenate([dw, b * j + self.ak * w])

    def jac(self, t, y=None):
        K = self.K
        a, b = self.coefficients(t)
        J = np.zeros((2 * K, 2 * K))
        idx = np.arange(K)
        J[idx[:-1], idx[1:]] = -a[1:]
        J[idx[1:], idx[:-1]] = a[:-1]
        J[idx, K + idx] = -self.ak
        J[K + idx, idx] = self.ak
        J[K + idx, K + idx] = b
        return J


def _weighted_mass(y, lam, K):
    w, j = y[:K], y[K:]
    return lam * (w * w + j * j)


def evolve_lattice(
    state: ModeLattice,
    params: PhysParams,
    t_end: float,
    policy: TruncationPolicy,
    tol: float = 1e-8,
    *,
    weight: SpectralWeight | None = None,
    atol: float | None = None,
    record: bool = False,
):
    """Advance ``state`` to ``t_end`` and return the new :class:`ModeLattice`.

    With ``record=True`` the accepted steps are returned as well, as
    ``(lattice, Trajectory)``.  A :class:`TruncationAlarm` is raised as soon
    as the top modes carry more than the policy's share of the weighted mass.
    """
    if not t_end > state.t:
        raise ValueError("t_end must exceed the current time")
    if policy.k_max != state.k_max:
        raise ValueError(f"policy k_max {policy.k_max} differs from lattice k_max {state.k_max}")
    K = state.k_max
    lam = (weight if weight is not None else SpectralWeight.uniform(K)).lam
    if lam.size < K + 1:
        raise ValueError(f"weight covers k <= {lam.size - 1} but the lattice reaches {K}")
    lam = lam[1 : K + 1]
    rhs = LatticeRhs(params, state.xi, K)
    y0 = state.vector()
    if atol is None:
        atol = 1e-4 * tol * max(float(np.max(np.abs(y0))), 1e-300)
    threshold = policy.tail_monitor_threshold
    top = min(TAIL_MODES, K)

    def monitor(t, y):
        mass = _weighted_mass(y, lam, K)
        total = mass.sum()
        if total > 0:
            share = mass[K - top :].sum() / total
            if share > threshold:
                raise TruncationAlarm(t, float(share), threshold)

    if not np.any(y0):
        out = ModeLattice(state.xi, K, t_end, state.w, state.j)
        return (out, None) if record else out
    traj = integrate(
        rhs,
        state.t,
        t_end,
        y0,
        jac=rhs.jac,
        rtol=tol,
        atol=atol,
        max_step=resonance_ceiling(rhs.centre),
        on_step=monitor,
    )
    out = ModeLattice.from_vector(state.xi, K, t_end, traj.final)
    return (out, traj) if record else out


@dataclass(frozen=True)
class IntervalReport:
    k: int
    t_start: float
    t_end: float
    norm_in: float
    norm_out: float
    amplification: float
    eta: float
    envelope_upper: float
    envelope_lower: float
    lower_hypotheses_met: bool
    upper_hypotheses_met: bool
    w_in: float  # w(k, t_k)
    w_out: float  # w(k-1, t_{k-1})
    dominance: bool  # |w(k-1)| >= max over the other entries / 2 at t_{k-1}

    @property
    def upper_pass(self) -> bool:
        return self.amplification <= self.envelope_upper

    def lower_pass(self, slack: float = LOWER_SLACK) -> bool:
        """``|w(k-1, t_{k-1})| >= slack * lower * |w(k, t_k)|``."""
        return abs(self.w_out) >= slack * self.envelope_lower * abs(self.w_in)


@dataclass
class Snapshot:
    t: float
    w: list
    j: list


@dataclass
class EchoChain:
    """Reports per traversed interval, in the order ``k = k_start, k_start - 1, ...``."""

    xi: float
    k_start: int
    reports: list
    snapshots: list
    k_end: int  # mode reached at the final boundary
    terminal_w: float  # w(k_end, t_{k_end}) for unit initial data

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)

    def __getitem__(self, i):
        return self.reports[i]

    @property
    def terminal_amplification(self) -> float:
        return abs(self.terminal_w)


def _dominant(w, j, k):
    """Is ``|w(k)|`` at least half of every other ``|w(l)|`` and every ``|j(l)|``."""
    others = np.concatenate([np.delete(np.abs(w), k), np.abs(j)])
    return bool(abs(w[k]) >= 0.5 * others.max())


def run_echo_chain(
    params: PhysParams,
    xi: float,
    k_start: int,
    weight: SpectralWeight | None = None,
    policy: TruncationPolicy | None = None,
    tol: float = 1e-8,
    *,
    stop_at_lower_failure: bool = False,
    k_stop: int = 1,
    snapshots: bool = False,
) -> EchoChain:
    """Run the cascade from ``w = delta_{k_start}`` at ``t_{k_start}``.

    Intervals ``I^k = (t_k, t_{k-1})`` are traversed for
    ``k = k_start, ..., k_stop``; with ``stop_at_lower_failure`` the run
    ends before the first interval violating the lower-bound hypotheses.
    The state is renormalised at every boundary; reported norms and ``w``
    values carry the accumulated scale, so they refer to unit initial data.
    """
    if int(k_start) != k_start or k_start < 1:
        raise ValueError(f"k_start must be a positive integer, got {k_start!r}")
    if not 1 <= k_stop <= k_start:
        raise ValueError(f"k_stop must lie in 1..k_start, got {k_stop}")
    policy = policy if policy is not None else TruncationPolicy.default(k_start)
    policy.check_start(k_start)
    K = policy.k_max
    weight = weight if weight is not None else SpectralWeight.uniform(K)
    if weight.k_max < K:
        raise ValueError(f"weight covers k <= {weight.k_max} but k_max = {K}")

    state = ModeLattice.delta(xi, K, k_start, interval_boundary(xi, k_start))
    scale = 1.0
    reports, snaps = [], []
    if snapshots:
        snaps.append(Snapshot(state.t, state.w.tolist(), state.j.tolist()))
    k = k_start
    while k >= k_stop:
        env = interval_envelopes(params, weight, k, xi)
        if stop_at_lower_failure and not env.lower_hypotheses_met:
            break
        norm0 = x_norm(state, weight)
        unit = ModeLattice(xi, K, state.t, state.w / norm0, state.j / norm0)
        scale *= norm0
        w_in = unit.w[k] * scale
        out = evolve_lattice(unit, params, interval_boundary(xi, k - 1), policy, tol, weight=weight)
        norm1 = x_norm(out, weight)
        reports.append(
            IntervalReport(
                k=k,
                t_start=unit.t,
                t_end=out.t,
                norm_in=scale,
                norm_out=scale * norm1,
                amplification=norm1,
                eta=env.eta,
                envelope_upper=env.upper,
                envelope_lower=env.lower,
                lower_hypotheses_met=env.lower_hypotheses_met,
                upper_hypotheses_met=env.upper_hypotheses_met,
                w_in=w_in,
                w_out=out.w[k - 1] * scale,
                dominance=_dominant(out.w, out.j, k - 1) if k > 1 else False,
            )
        )
        state = out
        if snapshots:
            snaps.append(Snapshot(out.t, (out.w * scale).tolist(), (out.j * scale).tolist()))
        k -= 1
    k_end = k
    return EchoChain(xi, k_start, reports, snaps, k_end, float(state.w[k_end] * scale) if k_end >= 1 else 0.0)
