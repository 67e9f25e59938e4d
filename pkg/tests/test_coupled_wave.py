"""Coupled-wave simulator: bars, volatility, amplitudes."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spreadwave import (
    AmplitudeState,
    BarSample,
    CoupledWaveParams,
    DomainError,
    InsufficientDataError,
    LastPriceRule,
    PriceOperator2x2,
    VolumeConfig,
    bar_height_rayleigh_scale,
    eigen_decompose,
    evolve_amplitudes,
    evolve_fluctuating,
    impact_price,
    path_volatility,
    predicted_volatility,
    simulate_path,
    step_price,
    suggest_amplitude_dt,
)
from spreadwave.coupled_wave import path_rng

finite = st.floats(min_value=-50.0, max_value=50.0,
                   allow_nan=False, allow_infinity=False)


# --------------------------------------------------------------------------
# eigenstructure
# --------------------------------------------------------------------------

def test_eigen_decompose_frozen():
    # s11 = s22 = 10, s12 = 1.5: mid 10, gap 2|s12| = 3
    hi, lo, h, mid = eigen_decompose(PriceOperator2x2(10.0, 10.0, 1.5))
    assert mid == 10.0
    assert h == 3.0
    assert hi == 11.5 and lo == 8.5


def test_eigen_decompose_diagonal():
    hi, lo, h, mid = eigen_decompose(PriceOperator2x2(12.0, 8.0, 0.0))
    assert (hi, lo, h, mid) == (12.0, 8.0, 4.0, 10.0)


@given(s11=finite, s22=finite, s12=finite)
@settings(max_examples=200, deadline=None)
def test_eigen_decompose_matches_numpy(s11, s22, s12):
    hi, lo, h, mid = eigen_decompose(PriceOperator2x2(s11, s22, s12))
    w = np.linalg.eigvalsh(np.array([[s11, s12], [s12, s22]]))
    assert hi == pytest.approx(w[1], abs=1e-9)
    assert lo == pytest.approx(w[0], abs=1e-9)
    assert h == pytest.approx(w[1] - w[0], abs=1e-9)
    assert mid == pytest.approx(0.5 * (w[0] + w[1]), abs=1e-9)


# --------------------------------------------------------------------------
# one-step transition and paths
# --------------------------------------------------------------------------

def test_step_price_frozen_dynamics():
    # all randomness degenerate: the bar collapses onto the input price
    p = CoupledWaveParams(sigma_step=0.0, xi_mean=0.0, xi_std=0.0,
                          kappa_mean=0.0, kappa_std=0.0)
    bar = step_price(100.0, p, path_rng(0))
    assert bar == BarSample(s_mid=100.0, s_high=100.0, s_low=100.0,
                            s_last=100.0, h=0.0)


def test_step_price_deterministic_offsets():
    # sigma=0, fixed xi/kappa means: envelope is exactly mid +/- h/2
    p = CoupledWaveParams(sigma_step=0.0, xi_mean=3.0, xi_std=0.0,
                          kappa_mean=4.0, kappa_std=0.0)
    bar = step_price(100.0, p, path_rng(1))
    assert bar.h == pytest.approx(5.0)          # hypot(3, 4)
    assert bar.s_high == pytest.approx(102.5)
    assert bar.s_low == pytest.approx(97.5)
    assert bar.s_low <= bar.s_last <= bar.s_high  # uniform rule


def test_simulate_path_reproducible_and_ordered():
    p = CoupledWaveParams(sigma_step=1e-3, xi_std=0.2, kappa_std=0.2, seed=5)
    a = simulate_path(p, 50.0, 500)
    b = simulate_path(p, 50.0, 500)
    assert np.array_equal(a.s_last, b.s_last)
    assert np.all(a.s_high >= a.s_mid) and np.all(a.s_mid >= a.s_low)
    assert np.all(a.s_mid > 0.0) and np.all(a.s_last > 0.0)


def test_simulate_path_distinct_path_indices():
    p = CoupledWaveParams(sigma_step=1e-3, xi_std=0.2, kappa_std=0.2, seed=5)
    a = simulate_path(p, 50.0, 100, path_index=0)
    b = simulate_path(p, 50.0, 100, path_index=1)
    assert not np.array_equal(a.s_last, b.s_last)


def test_volume_modes_do_not_perturb_bars():
    p = CoupledWaveParams(sigma_step=1e-3, xi_std=0.2, kappa_std=0.2, seed=9)
    kw = dict(s0=80.0, n_steps=200)
    none = simulate_path(p, volume=VolumeConfig(mode="none"), **kw)
    imp = simulate_path(p, volume=VolumeConfig(mode="impact"), **kw)
    logn = simulate_path(p, volume=VolumeConfig(mode="lognormal"), **kw)
    assert np.array_equal(none.s_last, imp.s_last)
    assert np.array_equal(none.s_last, logn.s_last)
    assert np.all(none.volume == 0.0)
    assert np.all(logn.volume > 0.0)


def test_impact_volume_inverts_impact_price():
    # volume column is defined so that impact_price recovers the bar height
    p = CoupledWaveParams(sigma_step=0.0, xi_std=0.1, kappa_std=0.1,
                          tau0=0.5, seed=11)
    n = 250.0
    series = simulate_path(p, 60.0, 50,
                           volume=VolumeConfig(mode="impact", avg_trade_size=n))
    for i in range(len(series)):
        if series.volume[i] <= 0.0:
            continue
        tau = n / series.volume[i]
        assert impact_price(series.s_mid[i], tau, p.tau0) == pytest.approx(
            series.h[i], rel=1e-12)


def test_path_volatility_needs_data():
    p = CoupledWaveParams(sigma_step=1e-3, seed=1)
    series = simulate_path(p, 50.0, 10)
    with pytest.raises(InsufficientDataError):
        path_volatility(series)


def test_predicted_volatility_placement_coefficients():
    pu = CoupledWaveParams(sigma_step=0.0, xi_std=0.6, kappa_std=0.8,
                           last_price_rule=LastPriceRule.UNIFORM_IN_BAR)
    pn = CoupledWaveParams(sigma_step=0.0, xi_std=0.6, kappa_std=0.8,
                           last_price_rule=LastPriceRule.NORMAL_HALF_BAR)
    h_sq = 0.6 ** 2 + 0.8 ** 2
    assert predicted_volatility(pu, 100.0) == pytest.approx(
        math.sqrt(h_sq / 12.0), rel=1e-12)
    assert predicted_volatility(pn, 100.0) == pytest.approx(
        math.sqrt(h_sq / 4.0), rel=1e-12)


def test_rayleigh_scale_constant_heights():
    # all h = c gives sqrt(mean(h^2)/2) = c/sqrt(2)
    p = CoupledWaveParams(sigma_step=0.0, xi_mean=2.0, xi_std=0.0)
    series = simulate_path(p, 100.0, 50)
    assert bar_height_rayleigh_scale(series) == pytest.approx(
        2.0 / math.sqrt(2.0), rel=1e-12)


def test_redraw_counter_on_hostile_params():
    # sigma_step of 0.5 pushes the mid negative often; redraws must keep
    # every price positive instead of crashing.
    p = CoupledWaveParams(sigma_step=0.5, xi_std=0.0, kappa_std=0.0, seed=3)
    series = simulate_path(p, 1.0, 2000)
    assert series.redraws > 0
    assert np.all(series.s_mid > 0.0)
    assert np.all(series.s_last > 0.0)


# --------------------------------------------------------------------------
# amplitude evolution
# --------------------------------------------------------------------------

def rk4_evolution(state0, s_mid, xi, kappa, s, tau0, t_end, n_steps=20000):
    """Classical fixed-step RK4 for the two-level evolution equation."""
    op = np.array([[s_mid + 0.5 * xi, 0.5 * kappa],
                   [0.5 * kappa, s_mid - 0.5 * xi]], dtype=complex)

    def deriv(y):
        return (-1j / (tau0 * s)) * (op @ y)

    y = np.array([state0.psi_high, state0.psi_low], dtype=complex)
    dt = t_end / n_steps
    for _ in range(n_steps):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * dt * k1)
        k3 = deriv(y + 0.5 * dt * k2)
        k4 = deriv(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def test_closed_form_matches_rk4():
    state0 = AmplitudeState(psi_high=0.6 + 0.0j, psi_low=0.8 + 0.0j)
    s_mid, xi, kappa, s, tau0, t = 101.3, 0.7, 0.4, 100.0, 2.0, 37.0
    y = rk4_evolution(state0, s_mid, xi, kappa, s, tau0, t)
    cf = evolve_amplitudes(state0, s_mid, xi, kappa, s, tau0, t)
    assert abs(cf.psi_high - y[0]) < 1e-6
    assert abs(cf.psi_low - y[1]) < 1e-6


@given(
    re_h=st.floats(-1, 1), im_h=st.floats(-1, 1),
    re_l=st.floats(-1, 1), im_l=st.floats(-1, 1),
    xi=finite, kappa=finite, t=st.floats(0.0, 100.0),
)
@settings(max_examples=200, deadline=None)
def test_evolution_is_unitary(re_h, im_h, re_l, im_l, xi, kappa, t):
    state0 = AmplitudeState(complex(re_h, im_h), complex(re_l, im_l))
    out = evolve_amplitudes(state0, 100.0, xi, kappa, 100.0, 1.0, t)
    assert out.norm_sq() == pytest.approx(state0.norm_sq(), abs=1e-12)


def test_zero_gap_is_pure_phase():
    state0 = AmplitudeState(0.6 + 0.0j, 0.8 + 0.0j)
    out = evolve_amplitudes(state0, 50.0, 0.0, 0.0, 100.0, 1.0, 10.0)
    phase = cmath.exp(-1j * 50.0 * 10.0 / (1.0 * 100.0))
    assert abs(out.psi_high - phase * 0.6) < 1e-14
    assert abs(out.psi_low - phase * 0.8) < 1e-14
    assert out.populations() == pytest.approx(state0.populations(), abs=1e-15)


def test_population_oscillation_period():
    # xi=0: populations oscillate as cos^2(theta) with theta = h t / (2 tau0 s);
    # the state returns to the initial populations at theta = pi.
    s, tau0, kappa = 100.0, 1.0, 2.0
    t_period = 2.0 * math.pi * tau0 * s / abs(kappa)
    state0 = AmplitudeState(1.0 + 0.0j, 0.0j)
    out = evolve_amplitudes(state0, 100.0, 0.0, kappa, s, tau0, t_period)
    assert out.populations()[0] == pytest.approx(1.0, abs=1e-12)
    half = evolve_amplitudes(state0, 100.0, 0.0, kappa, s, tau0, 0.5 * t_period)
    assert half.populations()[1] == pytest.approx(1.0, abs=1e-12)


def test_evolve_fluctuating_trajectory_shape():
    p = CoupledWaveParams(sigma_step=1e-4, xi_std=0.3, kappa_std=0.3, seed=4)
    dt = suggest_amplitude_dt(p, 100.0)
    state0 = AmplitudeState(1.0 + 0.0j, 0.0j)
    state, traj = evolve_fluctuating(state0, p, 100.0, dt, 50,
                                     return_trajectory=True)
    assert traj.shape == (51, 2)
    assert traj[0] == pytest.approx([1.0, 0.0])
    assert np.all(traj >= 0.0)
    assert np.sum(traj[-1]) == pytest.approx(1.0, abs=1e-12)


def test_impact_price_frozen_values():
    assert impact_price(1.0, 2.0 * math.pi, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert impact_price(100.0, 1.0, 1.0 / (2.0 * math.pi)) == pytest.approx(
        100.0, rel=1e-12)


def test_validation_errors():
    with pytest.raises(DomainError):
        CoupledWaveParams(sigma_step=-0.1)
    with pytest.raises(DomainError):
        CoupledWaveParams(tau0=0.0)
    with pytest.raises(DomainError):
        step_price(-5.0, CoupledWaveParams(), path_rng(0))
    with pytest.raises(DomainError):
        evolve_amplitudes(AmplitudeState(1.0 + 0j, 0j), 1.0, 0.0, 1.0,
                          s=0.0, tau0=1.0, t=1.0)
