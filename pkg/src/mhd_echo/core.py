"""Shared parameters, coefficient functions, interval geometry and norms.

Everything here is immutable and cheap; the evolution modules build on it.
The current is stored in the relabelled real convention (``j -> -i j``), so
every field is a real number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: Upper bound on the neighbour ratio of admissible spectral weights.
MAX_LAMBDA_HAT = 10.0


@dataclass(frozen=True)
class PhysParams:
    """Physical constants of the linearised system.

    ``alpha`` is the background field strength, ``kappa`` the magnetic
    resistivity and ``c`` the wave amplitude.  ``c = 0`` is accepted (it
    switches the mode coupling off) but then ``d`` is infinite.
    """

    alpha: float
    kappa: float
    c: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "kappa", "c"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.c < 0:
            raise ValueError(f"c must be >= 0, got {self.c}")

    @property
    def beta(self) -> float:
        if self.alpha == 0:
            raise ValueError("beta = kappa/alpha^2 is undefined for alpha = 0")
        return self.kappa / self.alpha**2

    @property
    def d(self) -> float:
        return math.inf if self.c == 0 else 1.0 / self.c

    @property
    def gamma(self) -> GammaExponents:
        return GammaExponents.from_c(self.c)

    def upper_regime(self) -> bool:
        """True when ``c <= min(1e-3 beta^(16/3), 1e-4)``."""
        if self.alpha == 0 or self.c <= 0:
            return False
        return self.c <= min(1e-3 * self.beta ** (16 / 3), 1e-4)

    def lower_regime(self) -> bool:
        return self.upper_regime() and self.beta >= 0.2


@dataclass(frozen=True)
class ModeIndex:
    k: int
    xi: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"k must be a non-negative integer, got {self.k!r}")
        if not (self.xi > 0 and math.isfinite(self.xi)):
            raise ValueError(f"xi must be positive and finite, got {self.xi!r}")

    @property
    def resonance(self) -> float:
        """Time ``xi/k`` at which the mode is resonant."""
        return self.xi / self.k


@dataclass(frozen=True)
class GammaExponents:
    gamma: float
    gamma1: float
    gamma2: float

    @classmethod
    def from_c(cls, c: float) -> GammaExponents:
        if not 0 <= 8 * c * c <= 1:
            raise ValueError(f"gamma = sqrt(1 - 8c^2) needs c <= 1/sqrt(8), got {c}")
        gamma = math.sqrt(1.0 - 8.0 * c * c)
        # gamma2 = 2c^2/gamma1 avoids the cancellation in (1 - gamma)/2
        gamma1 = 0.5 * (1.0 + gamma)
        return cls(gamma, gamma1, 2.0 * c * c / gamma1)


@dataclass(frozen=True)
class SpectralWeight:
    """Weights ``lambda_k`` (k = 0, 1, ...) defining the X-norm."""

    lam: np.ndarray
    lambda_hat: float = field(init=False)

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim != 1 or lam.size < 2:
            raise ValueError("weight needs at least two entries")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise ValueError("all weights must be positive and finite")
        ratios = np.concatenate([lam[1:] / lam[:-1], lam[:-1] / lam[1:]])
        lambda_hat = float(ratios.max())
        if lambda_hat >= MAX_LAMBDA_HAT:
            raise ValueError(f"lambda_hat = {lambda_hat:.4g} must stay below {MAX_LAMBDA_HAT}")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "lambda_hat", lambda_hat)

    @classmethod
    def uniform(cls, k_max: int) -> SpectralWeight:
        return cls(np.ones(k_max + 1))

    @classmethod
    def sobolev(cls, k_max: int, s: float) -> SpectralWeight:
        k = np.arange(k_max + 1, dtype=float)
        return cls((1.0 + k * k) ** s)

    @property
    def k_max(self) -> int:
        return self.lam.size - 1


@dataclass(frozen=True)
class IntervalPartition:
    xi: float
    boundaries: np.ndarray  # t_0, t_1, ..., t_kmax
    intervals: tuple  # (k, t_k, t_{k-1}) for k = 1..kmax

    def t(self, k: int) -> float:
        return float(self.boundaries[k])

    def interval(self, k: int) -> tuple[float, float]:
        """Return ``(t_k, t_{k-1})``."""
        return float(self.boundaries[k]), float(self.boundaries[k - 1])


def interval_boundary(xi: float, k: int) -> float:
    """``t_k = (xi/2)(1/(k+1) + 1/k)`` for k >= 1 and ``t_0 = 2 xi``."""
    if k == 0:
        return 2.0 * xi
    return 0.5 * xi * (1.0 / (k + 1) + 1.0 / k)


def interval_partition(xi: float, k_max: int) -> IntervalPartition:
    if not (xi > 0 and math.isfinite(xi)):
        raise ValueError(f"xi must be positive, got {xi!r}")
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    t = np.array([interval_boundary(xi, k) for k in range(k_max + 1)])
    t.setflags(write=False)
    intervals = tuple((k, float(t[k]), float(t[k - 1])) for k in range(1, k_max + 1))
    return IntervalPartition(xi=float(xi), boundaries=t, intervals=intervals)


def coefficient_a(k, t, xi, c):
    """Coupling ``c (xi/k^2) / (1 + (xi/k - t)^2)``; zero for the pinned k = 0.

    Broadcasts over array ``k``.
    """
    k_arr = np.asarray(k, dtype=float)
    safe = np.where(k_arr == 0, 1.0, k_arr)
    shift = xi / safe - t
    a = c * (xi / safe**2) / (1.0 + shift * shift)
    a = np.where(k_arr == 0, 0.0, a)
    return a if a.ndim else float(a)


def coefficient_b(k, t, xi, kappa):
    """Current growth/damping rate at mode ``k`` and time ``t``."""
    k_arr = np.asarray(k, dtype=float)
    s = t - xi / k_arr
    b = 2.0 * s / (1.0 + s * s) - kappa * k_arr**2 * (1.0 + s * s)
    return b if b.ndim else float(b)


def log_integrating_factor(k, t, xi, kappa):
    """Antiderivative of :func:`coefficient_b` in ``t`` (up to a constant).

    ``ln(1 + s^2) - kappa k^2 (s + s^3/3)`` with ``s = t - xi/k``.
    """
    k_arr = np.asarray(k, dtype=float)
    s = t - xi / k_arr
    out = np.log1p(s * s) - kappa * k_arr**2 * (s + s**3 / 3.0)
    return out if out.ndim else float(out)


def x_norm(state, weight: SpectralWeight, params: PhysParams | None = None, rescaled: bool = False) -> float:
    """Weighted l2 norm ``sqrt(sum_k lambda_k (w_k^2 + j_k^2))`` of a lattice state.

    With ``rescaled=True`` the stored current is read as ``alpha k j`` and
    weighted by ``beta / (kappa k^2)``, which reproduces the unscaled norm of
    the original variables.
    """
    w = np.asarray(state.w, dtype=float)
    j = np.asarray(state.j, dtype=float)
    if weight.lam.size < w.size:
        raise ValueError(
            f"weight covers k <= {weight.k_max} but the state reaches k = {w.size - 1}"
        )
    lam = weight.lam[: w.size]
    if not rescaled:
        return float(math.sqrt(np.sum(lam * (w * w + j * j))))
    if params is None:
        raise ValueError("the rescaled norm needs PhysParams")
    k = np.arange(w.size, dtype=float)
    factor = np.zeros_like(k)
    factor[1:] = params.beta / (params.kappa * k[1:] ** 2)
    return float(math.sqrt(np.sum(lam * (w * w + factor * j * j))))


def gevrey_functional(per_xi_norms: Sequence[tuple[float, float]], C: float) -> float:
    """Trapezoidal approximation of ``int exp(C sqrt(xi)) norm(xi)^2 dxi``."""
    data = sorted((float(x), float(n)) for x, n in per_xi_norms)
    if len(data) < 2:
        raise ValueError("need at least 2 samples")
    xi = np.array([x for x, _ in data])
    norm = np.array([n for _, n in data])
    if np.any(xi <= 0) or np.any(np.diff(xi) <= 0):
        raise ValueError("xi samples must be distinct and positive")
    if np.any(norm < 0):
        raise ValueError("norms must be non-negative")
    return float(np.trapezoid(np.exp(C * np.sqrt(xi)) * norm**2, xi))
