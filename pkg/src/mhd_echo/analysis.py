"""Analytic envelopes, chain heuristics and the sqrt(xi) scaling fit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import PhysParams, SpectralWeight
from .growth import GrowthFactorQuery, L_analytic

# Lower-envelope tolerance.  The measured echo factor is beta(1 - exp(-pi/beta)),
# which sits slightly below min(beta, pi) for beta < pi.
LOWER_SLACK = 0.95


@dataclass(frozen=True)
class EnvelopeSpec:
    """Per-interval amplification envelopes at ``eta = xi/k^2``.

    ``upper = upper_constant (c eta)^exponent`` and
    ``lower = lower_constant (c eta)^exponent``.
    """

    k: int
    xi: float
    eta: float
    c_eta: float
    upper_constant: float
    exponent: float
    lower_constant: float
    L: float
    hyp_c: bool
    hyp_xi: bool
    hyp_eta: bool
    hyp_dissipation: bool
    hyp_beta: bool

    @property
    def upper(self) -> float:
        return self.upper_constant * self.c_eta**self.exponent

    @property
    def lower(self) -> float:
        return self.lower_constant * self.c_eta**self.exponent

    @property
    def upper_hypotheses_met(self) -> bool:
        return self.hyp_c and self.hyp_xi and self.hyp_eta

    @property
    def lower_hypotheses_met(self) -> bool:
        # k = 1 hands over to the pinned average mode, which cannot grow
        return self.upper_hypotheses_met and self.hyp_dissipation and self.hyp_beta and self.k >= 2


def growth_factor_for(params: PhysParams, k: int) -> float:
    """``L`` entering the upper envelope: 1 once ``beta >= pi``, else the piecewise factor at ``K = kappa k^2``."""
    if params.beta >= math.pi or params.c == 0:
        return 1.0
    return L_analytic(GrowthFactorQuery(params.beta, params.kappa * k * k, params.c))


def interval_envelopes(params: PhysParams, weight: SpectralWeight, k: int, xi: float) -> EnvelopeSpec:
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi!r}")
    beta, kappa, c = params.beta, params.kappa, params.c
    eta = xi / k**2
    L = growth_factor_for(params, k)
    return EnvelopeSpec(
        k=int(k),
        xi=float(xi),
        eta=eta,
        c_eta=c * eta,
        upper_constant=18.0 * math.pi * L * weight.lambda_hat,
        exponent=params.gamma.gamma,
        lower_constant=min(beta, math.pi),
        L=L,
        hyp_c=params.upper_regime(),
        hyp_xi=xi >= 10.0 / kappa * (1.0 + 1.0 / beta),
        hyp_eta=c > 0 and eta >= 10.0 * params.d,
        hyp_dissipation=c > 0 and kappa * k * k * min(beta, 1.0) >= 1.0 / c,
        hyp_beta=beta >= 0.2,
    )


@dataclass(frozen=True)
class ChainPrediction:
    x: float  # C' c xi
    k_opt: int
    log_product: float
    stirling: float

    @property
    def has_chain(self) -> bool:
        return self.k_opt >= 1


def chain_prediction(params: PhysParams, xi: float, C_prime: float) -> ChainPrediction:
    """Optimal chain length and ``log prod_{k<=k_opt} x/k^2`` with ``x = C' c xi``.

    The exact value uses log-factorials, ``k log x - 2 log k!``; ``stirling``
    is the heuristic ``sqrt(x)``.  ``k_opt = 0`` means there is no chain.
    """
    if not C_prime > 0:
        raise ValueError(f"C_prime must be positive, got {C_prime!r}")
    x = C_prime * params.c * xi
    k_opt = int(math.floor(math.sqrt(x) + 0.5))
    log_product = k_opt * math.log(x) - 2.0 * math.lgamma(k_opt + 1) if k_opt >= 1 else 0.0
    return ChainPrediction(x=x, k_opt=k_opt, log_product=log_product, stirling=math.sqrt(x))


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def fit_sqrt_scaling(results: Sequence[tuple[float, float]]) -> ScalingFit:
    """Least-squares fit of ``log A = slope sqrt(xi) + intercept``."""
    data = [(float(x), float(a)) for x, a in results]
    if len(data) < 4:
        raise ValueError(f"insufficient data points: need >= 4, got {len(data)}")
    xi = np.array([x for x, _ in data])
    amp = np.array([a for _, a in data])
    if np.any(~np.isfinite(amp)) or np.any(amp <= 0):
        raise ValueError("amplifications must be positive and finite")
    if np.any(xi <= 0):
        raise ValueError("xi must be positive")
    if np.ptp(xi) == 0:
        raise ValueError("degenerate design: all xi are equal")
    x = np.sqrt(xi)
    y = np.log(amp)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ScalingFit(float(slope), float(intercept), r2, len(data))
