"""Parallel map over independent xi values with an ordered reduction."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analysis import LOWER_SLACK, ScalingFit, fit_sqrt_scaling
from .core import PhysParams, SpectralWeight
from .lattice import TruncationPolicy, run_echo_chain

THREADS_ENV = "MHD_ECHO_THREADS"

SWEEP_COLUMNS = (
    "xi",
    "k_start",
    "k_end",
    "n_intervals",
    "terminal_amplification",
    "max_upper_ratio",
    "min_lower_ratio",
    "upper_pass",
    "lower_pass",
    "error",
)

INTERVAL_COLUMNS = (
    "xi",
    "k",
    "t_start",
    "t_end",
    "norm_in",
    "norm_out",
    "amplification",
    "envelope_upper",
    "envelope_lower",
    "hypotheses_met",
    "w_in",
    "w_out",
)


def default_k_start(c: float, xi: float) -> int:
    """Largest ``k`` with ``xi/k^2 >= 10/c``."""
    k = int(math.floor(math.sqrt(c * xi / 10.0)))
    while k > 0 and xi / k**2 < 10.0 / c:  # guard against rounding in the sqrt
        k -= 1
    return k


def make_weight(kind: str, k_max: int, s: float = 0.0) -> SpectralWeight:
    if kind == "uniform":
        return SpectralWeight.uniform(k_max)
    if kind == "sobolev":
        return SpectralWeight.sobolev(k_max, s)
    raise ValueError(f"unknown weight {kind!r} (expected uniform or sobolev)")


@dataclass(frozen=True)
class SweepSpec:
    xi_grid: tuple
    params: PhysParams
    k_start: int | None = None
    k_max_pad: int = 20
    tail_threshold: float = 1e-8
    tol: float = 1e-8
    weight: str = "uniform"
    weight_s: float = 0.0
    stop_at_lower_failure: bool = True
    worker_count: int = 1

    def __post_init__(self):
        grid = tuple(float(x) for x in self.xi_grid)
        if not grid:
            raise ValueError("xi_grid is empty")
        if any(not (x > 0 and math.isfinite(x)) for x in grid):
            raise ValueError("xi values must be positive and finite")
        if len(set(grid)) != len(grid):
            raise ValueError("xi values must be distinct")
        object.__setattr__(self, "xi_grid", grid)
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.k_max_pad < 5:
            raise ValueError("k_max_pad must be >= 5")
        if self.weight not in ("uniform", "sobolev"):
            raise ValueError(f"unknown weight {self.weight!r}")
        if self.params.c <= 0:
            raise ValueError("the sweep needs c > 0")

    @staticmethod
    def log_grid(xi_min: float, xi_max: float, n: int) -> tuple:
        if not 0 < xi_min < xi_max or n < 2:
            raise ValueError("log grid needs 0 < xi_min < xi_max and n >= 2")
        return tuple(float(x) for x in np.geomspace(xi_min, xi_max, n))

    def k_start_for(self, xi: float) -> int:
        return self.k_start if self.k_start is not None else default_k_start(self.params.c, xi)


@dataclass
class SweepRow:
    xi: float
    k_start: int
    k_end: int | None = None
    n_intervals: int = 0
    terminal_amplification: float | None = None
    max_upper_ratio: float | None = None
    min_lower_ratio: float | None = None
    upper_pass: bool | None = None
    lower_pass: bool | None = None
    error: str = ""
    intervals: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.error

    def cells(self) -> list:
        return [getattr(self, name) for name in SWEEP_COLUMNS]


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list
    fit: ScalingFit | None
    fit_error: str = ""

    @property
    def all_failed(self) -> bool:
        return not any(r.ok for r in self.rows)


def _chain_task(chain_fn: Callable, spec: SweepSpec, xi: float) -> SweepRow:
    k_start = spec.k_start_for(xi)
    row = SweepRow(xi=xi, k_start=k_start)
    try:
        if k_start < 1:
            raise ValueError(f"no resonant interval: k_start = {k_start}")
        k_max = k_start + spec.k_max_pad
        chain = chain_fn(
            spec.params,
            xi,
            k_start,
            make_weight(spec.weight, k_max, spec.weight_s),
            TruncationPolicy(k_max, spec.tail_threshold),
            spec.tol,
            stop_at_lower_failure=spec.stop_at_lower_failure,
        )
    except Exception as exc:  # recorded per row; the sweep goes on
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    reports = list(chain.reports)
    row.k_end = chain.k_end
    row.n_intervals = len(reports)
    row.terminal_amplification = float(chain.terminal_amplification)
    upper = [r.amplification / r.envelope_upper for r in reports]
    lower = [abs(r.w_out) / (r.envelope_lower * abs(r.w_in)) for r in reports if r.lower_hypotheses_met]
    row.max_upper_ratio = max(upper) if upper else None
    row.min_lower_ratio = min(lower) if lower else None
    row.upper_pass = all(u <= 1.0 for u in upper)
    row.lower_pass = all(v >= LOWER_SLACK for v in lower)
    row.intervals = [
        [
            xi,
            r.k,
            r.t_start,
            r.t_end,
            r.norm_in,
            r.norm_out,
            r.amplification,
            r.envelope_upper,
            r.envelope_lower,
            r.lower_hypotheses_met,
            r.w_in,
            r.w_out,
        ]
        for r in reports
    ]
    return row


def effective_workers(requested: int, tasks: int) -> int:
    n = max(1, min(requested, tasks))
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return n


def run_sweep(spec: SweepSpec, chain_fn: Callable = run_echo_chain) -> SweepResult:
    """Run one chain per xi and reduce in ascending xi order.

    Tasks always run in worker processes (even for one worker) so that the
    numerical environment, and hence every bit of the output, is the same
    for any worker count.  ``chain_fn`` must be picklable.
    """
    grid = sorted(spec.xi_grid)
    workers = effective_workers(spec.worker_count, len(grid))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {xi: pool.submit(_chain_task, chain_fn, spec, xi) for xi in grid}
        rows = [futures[xi].result() for xi in grid]
    ok = [(r.xi, r.terminal_amplification) for r in rows if r.ok and r.terminal_amplification]
    fit, fit_error = None, ""
    try:
        fit = fit_sqrt_scaling(ok)
    except ValueError as exc:
        fit_error = str(exc)
    return SweepResult(spec, rows, fit, fit_error)
