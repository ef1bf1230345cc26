"""End-to-end acceptance criteria A1-A9, one PASS/FAIL line each."""

import itertools
import math

import numpy as np
import pytest

from mhd_echo.cli import run_command
from mhd_echo.core import ModeIndex, PhysParams, SpectralWeight, interval_boundary, x_norm
from mhd_echo.growth import GrowthFactorQuery, L_analytic, U_sup_numeric, certifying_c_max
from mhd_echo.lattice import ModeLattice, TruncationPolicy, evolve_lattice, run_echo_chain
from mhd_echo.single_mode import evolve_single_mode, stability_bound, stability_ratio
from mhd_echo.sweep import SweepSpec, run_sweep
from mhd_echo.toy import toy_trajectory
from mhd_echo.wave import evolve_wave, special_time, wave_special_data

pytestmark = pytest.mark.acceptance


def test_a1_single_mode_stability(verdict):
    worst = 0.0
    for kappa, k, xi, alpha in itertools.product([1e-1, 1e-2, 1e-3], [1, 2, 4], [10.0, 100.0], [0.1, 1.0]):
        p = PhysParams(alpha, kappa)
        worst = max(worst, stability_ratio(ModeIndex(k, xi), p, 16) / stability_bound(p))
    verdict("A1", worst <= 1.001, f"worst ratio/bound = {worst:.4g}")


@pytest.fixture(scope="module")
def wave_run():
    p = PhysParams(0.05, 0.01)
    traj = evolve_wave(wave_special_data(p), p, 600.0, dense=True)
    return p, traj


def test_a2_i_tracking(verdict, wave_run):
    p, traj = wave_run
    t0 = special_time(p)
    gap = 1 - traj.f[traj.t >= t0]
    ok = gap.min() >= 0 and gap.max() <= 2 / (p.beta * t0) + 1e-3
    verdict("A2(i)", ok, f"1-f in [{gap.min():.3g}, {gap.max():.4g}], bound {2 / (p.beta * t0) + 1e-3:.4g}")


def test_a2_ii_current_decay(verdict, wave_run):
    p, traj = wave_run
    late = traj.t >= 10 * p.kappa ** (-1 / 3)
    ratio = np.max(traj.g[late] * p.kappa * traj.t[late] ** 2 / (4 * p.alpha))
    verdict("A2(ii)", ratio <= 1.05, f"max g kappa t^2/(4 alpha) = {ratio:.4g}")


def test_a2_iii_energy_monotone(verdict, wave_run):
    p, traj = wave_run
    t = np.linspace(p.kappa ** (-1 / 3), 600.0, 200001)
    energy = (traj.raw.sol(t) ** 2).sum(0)
    rise = float(np.max(np.diff(energy)))
    peak = t[np.argmax(energy)]
    b_turns = (2 / p.kappa) ** (1 / 3)
    detail = f"largest energy increment after kappa^(-1/3) = {rise:.3g}, energy peaks at t = {peak:.3g} (b > 0 until {b_turns:.3g})"
    verdict("A2(iii)", rise <= 0.0, detail)


def test_a3_toy_bracket(verdict):
    p = PhysParams(0.05, 0.01, 1e-4)
    traj = toy_trajectory(p, 2, 4e5)
    w = abs(traj.terminal.w_km1)
    lo, hi = 0.95 * traj.lower_bound(), 1.05 * traj.upper_bound()
    verdict("A3", traj.certifying and lo <= w <= hi, f"|w(k-1)| = {w:.5g} in [{lo:.4g}, {hi:.4g}]")


def test_a4_growth_factor(verdict):
    worst, flat_worst = 0.0, 0.0
    for beta, K in itertools.product(np.linspace(0.3, 4.0, 6), np.geomspace(1e-6, 2.0, 6)):
        q = GrowthFactorQuery(float(beta), float(K), min(certifying_c_max(beta), 1e-4))
        U = U_sup_numeric(q)
        worst = max(worst, U / L_analytic(q))
        if beta >= math.pi / 2 or K >= 1:
            flat_worst = max(flat_worst, U - 1)
    ok = worst <= 1.001 and flat_worst <= 1e-6
    verdict("A4", ok, f"max U/L = {worst:.4g}, max U-1 where no growth expected = {flat_worst:.3g}")


@pytest.mark.slow
def test_a5_interval_envelopes(verdict):
    p = PhysParams(9.0, 64.8, 1e-4)  # beta = 0.8
    chain = run_echo_chain(p, 3.6e7, 18)
    assert all(r.upper_hypotheses_met for r in chain)
    upper = max(r.amplification / r.envelope_upper for r in chain)
    lower_rows = [r for r in chain if r.lower_hypotheses_met]
    lower = min(abs(r.w_out) / (r.envelope_lower * abs(r.w_in)) for r in lower_rows)
    ok = all(r.upper_pass for r in chain) and all(r.lower_pass(0.95) for r in lower_rows)
    verdict("A5", ok, f"{len(chain)} intervals, max amp/upper = {upper:.4g}, min lower ratio = {lower:.4g} on {len(lower_rows)}")


@pytest.mark.slow
def test_a6_gevrey_scaling(verdict):
    spec = SweepSpec(SweepSpec.log_grid(2e7, 2e8, 5), PhysParams(9.0, 64.8, 1e-4), worker_count=5)
    result = run_sweep(spec)
    fit = result.fit
    ok = fit is not None and fit.slope > 0 and fit.r_squared >= 0.9
    detail = result.fit_error if fit is None else f"slope = {fit.slope:.4g}, R^2 = {fit.r_squared:.4f}"
    verdict("A6", ok, detail)


def test_a7_decoupling(verdict):
    p = PhysParams(0.6, 0.05, 0.0)
    xi, K = 60.0, 6
    rng = np.random.default_rng(7)
    w, j = np.zeros(K + 1), np.zeros(K + 1)
    w[1:], j[1:] = rng.normal(size=K), rng.normal(size=K)
    t0, t1 = interval_boundary(xi, 3), interval_boundary(xi, 2)
    out = evolve_lattice(ModeLattice(xi, K, t0, w, j), p, t1, TruncationPolicy(K, 1 - 1e-9), tol=1e-11, atol=1e-14)
    err = 0.0
    for k in range(1, K + 1):
        ref = evolve_single_mode(ModeIndex(k, xi), p, w[k], j[k], t1, t0=t0, rtol=1e-11, atol=1e-14)
        err = max(err, abs(out.w[k] - ref.w[-1]), abs(out.j[k] - ref.j[-1]))
    verdict("A7", err <= 1e-8, f"max componentwise difference = {err:.3g}")


def test_a8_rough_and_large_time(verdict):
    worst_rough, worst_large = 0.0, 0.0
    for seed, (kappa, c) in enumerate(itertools.product([0.05, 0.5], [1e-3, 2e-2])):
        rng = np.random.default_rng(seed)
        xi, K = 30.0, 8
        w, j = np.zeros(K + 1), np.zeros(K + 1)
        w[1:], j[1:] = rng.normal(size=K), rng.normal(size=K)
        p = PhysParams(0.8, kappa, c)
        uniform = SpectralWeight.uniform(K)
        policy = TruncationPolicy(K, 1 - 1e-9)
        start = ModeLattice(xi, K, 0.0, w, j)
        _, traj = evolve_lattice(start, p, 2 * xi, policy, 1e-10, record=True)
        n0 = x_norm(start, uniform)
        for t, y in zip(traj.t, traj.y):
            bound = math.exp(4 / 3 * kappa**-0.5) * math.exp(2 * c * xi * t) * n0
            worst_rough = max(worst_rough, x_norm(ModeLattice.from_vector(xi, K, t, y), uniform) / bound)
        sob = SpectralWeight.sobolev(K, 0.5)
        late = ModeLattice(xi, K, 2 * xi, w, j)
        _, traj = evolve_lattice(late, p, 8 * xi, policy, 1e-10, weight=sob, record=True)
        bound = x_norm(late, sob) / ((1 - 4 * c) * (1 - 2 * c * sob.lambda_hat))
        for t, y in zip(traj.t, traj.y):
            worst_large = max(worst_large, x_norm(ModeLattice.from_vector(xi, K, t, y), sob) / bound)
    ok = worst_rough <= 1.001 and worst_large <= 1.001
    verdict("A8", ok, f"max X/rough bound = {worst_rough:.4g}, max X/large-time bound = {worst_large:.4g}")


def test_a9_determinism(verdict, tmp_path):
    base = ["sweep", "--alpha", "125", "--kappa", "12500", "--c", "1e-4", "--xi-min", "1e6", "--xi-max", "3e6", "--n-xi", "5"]
    files = {}
    for workers in ("1", "4"):
        paths = [tmp_path / f"{name}_{workers}" for name in ("sweep.csv", "intervals.csv", "summary.json")]
        args = base + ["--workers", workers, "--out", str(paths[0]), "--intervals", str(paths[1]), "--summary", str(paths[2])]
        assert run_command(args) == 0
        files[workers] = [p.read_bytes() for p in paths]
    replay = tmp_path / "replay.csv"
    assert run_command(["sweep", "--config", str(tmp_path / "sweep.csv_1"), "--out", str(replay)]) == 0
    same_workers = files["1"] == files["4"]
    same_replay = replay.read_bytes() == files["1"][0]
    verdict("A9", same_workers and same_replay, f"workers 1 vs 4 identical: {same_workers}, header replay identical: {same_replay}")
