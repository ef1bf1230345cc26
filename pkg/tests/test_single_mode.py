import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mhd_echo.core import ModeIndex, PhysParams, coefficient_b
from mhd_echo.single_mode import (
    ModePair,
    SingleModeState,
    default_t_end,
    evolve_single_mode,
    stability_bound,
    stability_ratio,
)
from oracles import mode_pair_rhs, rk4_fixed


def test_state_energy_consistency():
    s = SingleModeState(0.0, 3.0, 4.0)
    assert s.energy == 25.0
    SingleModeState(0.0, 3.0, 4.0, energy=25.0)
    with pytest.raises(ValueError):
        SingleModeState(0.0, 3.0, 4.0, energy=25.0 + 1e-9)


def test_no_field_freezes_w():
    traj = evolve_single_mode(ModeIndex(2, 10.0), PhysParams(0.0, 0.1), 0.7, 0.3, 20.0)
    assert np.all(traj.w == 0.7)


def test_strong_dissipation_never_grows():
    p = PhysParams(1.0, 0.3)
    traj = evolve_single_mode(ModeIndex(2, 10.0), p, 1.0, 0.0, 30.0)
    assert np.all(np.diff(traj.energy) <= 1e-12)


def test_energy_identity():
    mode, p = ModeIndex(1, 5.0), PhysParams(0.5, 0.05)
    traj = evolve_single_mode(mode, p, 0.6, 0.8, 20.0, rtol=1e-11, dense=True)
    t = np.linspace(0.5, 19.5, 200)
    h = 1e-4
    y_plus, y_minus, y = traj.raw.sol(t + h), traj.raw.sol(t - h), traj.raw.sol(t)
    fd = ((y_plus**2).sum(0) - (y_minus**2).sum(0)) / (2 * h)
    exact = 2 * coefficient_b(mode.k, t, mode.xi, p.kappa) * y[1] ** 2
    assert np.max(np.abs(fd - exact)) < 1e-6


def test_matches_rk4_oracle():
    mode, p = ModeIndex(1, 3.0), PhysParams(0.8, 0.2)
    traj = evolve_single_mode(mode, p, 1.0, 0.0, 8.0, rtol=1e-11, dense=True)
    t_ref, y_ref = rk4_fixed(mode_pair_rhs(p.alpha, p.kappa, mode.k, mode.xi), 0.0, 8.0, [1.0, 0.0], 1e-3)
    got = traj.raw.sol(t_ref[::500])
    np.testing.assert_allclose(got.T, y_ref[::500], rtol=1e-7, atol=1e-9)


def test_time_shift_equivariance():
    p, k = PhysParams(0.7, 0.05), 2
    a = evolve_single_mode(ModeIndex(k, 10.0), p, 1.0, 0.5, 15.0, rtol=1e-11, dense=True)
    # xi = 30 with start 10 is the same problem shifted by 10
    b = evolve_single_mode(ModeIndex(k, 30.0), p, 1.0, 0.5, 25.0, t0=10.0, rtol=1e-11, dense=True)
    t = np.linspace(0.0, 15.0, 61)
    np.testing.assert_allclose(a.raw.sol(t), b.raw.sol(t + 10.0), rtol=1e-7, atol=1e-9)
    # resonance at zero with start -xi/k
    pair = ModePair(p.alpha * k, p.kappa * k * k, 0.0)
    c = pair.solve(-5.0, 10.0, 1.0, 0.5, 1e-11, 1e-13, dense=True)
    np.testing.assert_allclose(a.raw.sol(t), c.sol(t - 5.0), rtol=1e-7, atol=1e-9)


@settings(max_examples=15)
@given(
    st.sampled_from([0.05, 0.2, 1.0]),
    st.sampled_from([1, 2, 3]),
    st.floats(1.0, 50.0),
    st.floats(-1.0, 1.0),
)
def test_decay_past_dissipative_threshold(kappa, k, xi, theta):
    p = PhysParams(0.5, kappa)
    mode = ModeIndex(k, xi)
    traj = evolve_single_mode(mode, p, np.cos(theta), np.sin(theta), default_t_end(mode, p))
    threshold = mode.resonance + (2.0 / (kappa * k * k)) ** (1 / 3)
    tail = traj.energy[traj.t >= threshold]
    assert np.all(np.diff(tail) <= 1e-12 * tail[:-1])


class TestStabilityRatio:
    def test_unit_kappa(self):
        p = PhysParams(1.0, 1.0)
        assert stability_bound(p) == 4.0
        assert stability_ratio(ModeIndex(1, 10.0), p, 8) <= 4.0

    def test_strong_dissipation(self):
        assert stability_ratio(ModeIndex(2, 10.0), PhysParams(1.0, 0.5), 16) <= 1 + 1e-9

    def test_weak_dissipation(self):
        p = PhysParams(0.1, 1e-3)
        assert stability_bound(p) == pytest.approx(10201.0)
        ratio = stability_ratio(ModeIndex(1, 10.0), p, 16)
        assert 1.0 < ratio <= 10201.0

    def test_angles_agree_with_direct_runs(self):
        mode, p = ModeIndex(1, 10.0), PhysParams(0.3, 0.01)
        t_end = default_t_end(mode, p)
        ratio = stability_ratio(mode, p, 4, t_end)
        fine = np.linspace(0.0, t_end, 20001)
        direct = max(
            (evolve_single_mode(mode, p, w, j, t_end, dense=True).raw.sol(fine) ** 2).sum(0).max()
            for w, j in [(1, 0), (0, 1), (-1, 0), (0, -1)]
        )
        assert ratio == pytest.approx(direct, rel=1e-6)

    @settings(max_examples=10)
    @given(st.floats(1e-3, 1.0), st.sampled_from([1, 2, 4]), st.floats(5.0, 100.0), st.floats(0.05, 2.0))
    def test_bound_holds(self, kappa, k, xi, alpha):
        p = PhysParams(alpha, kappa)
        assert stability_ratio(ModeIndex(k, xi), p, 8) <= stability_bound(p) * 1.001

    def test_rejects(self):
        with pytest.raises(ValueError):
            stability_ratio(ModeIndex(1, 1.0), PhysParams(1.0, 1.0), 0)
        with pytest.raises(ValueError):
            evolve_single_mode(ModeIndex(0, 1.0), PhysParams(1.0, 1.0), 1.0, 0.0, 2.0)
        with pytest.raises(ValueError):
            evolve_single_mode(ModeIndex(1, 1.0), PhysParams(1.0, 1.0), 1.0, 0.0, 0.0)
