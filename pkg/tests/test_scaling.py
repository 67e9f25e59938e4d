"""Horizon scaling of spreads and the (T, v) spread surface."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spreadwave import (
    DomainError,
    PiecewiseConstantTable,
    SpreadSurfaceParams,
    bar_spread_dimensionless,
    bar_spread_with_volume,
    classical_scale,
    default_surface_grids,
    scale_spread_time,
    spread_surface,
)

pos = st.floats(min_value=1e-3, max_value=1e3,
                allow_nan=False, allow_infinity=False)


def test_identity_at_equal_horizons():
    assert scale_spread_time(2.0, 0.8, 1.6, 1.0, 1.0) == 2.0


def test_matched_eta_reduces_to_classical():
    # lambda * eta == spread makes the law exactly sqrt(T2/T1)
    spread, lam = 2.0, 1.6
    eta = spread / lam
    out = scale_spread_time(spread, eta, lam, 1.0, 2.0)
    assert out == pytest.approx(math.sqrt(2.0) * spread, rel=1e-14)


@given(spread=pos, eta=pos, lam=pos, ratio=st.floats(1.0, 1e6))
@settings(max_examples=200, deadline=None)
def test_scaling_monotone_and_above_identity(spread, eta, lam, ratio):
    out = scale_spread_time(spread, eta, lam, 1.0, ratio)
    assert out >= spread * (1.0 - 1e-12)


def test_scaling_slower_than_classical_when_eta_small():
    # small per-horizon noise: spread grows slower than sqrt(T)
    spread, eta, lam = 2.0, 0.1, 1.0
    t2 = 100.0
    q = scale_spread_time(spread, eta, lam, 1.0, t2)
    c = classical_scale(spread, 1.0, t2)
    assert q < c


def test_rejects_shrinking_horizon():
    with pytest.raises(DomainError):
        scale_spread_time(2.0, 0.8, 1.6, 2.0, 1.0)


def test_classical_scale_value():
    assert classical_scale(3.0, 1.0, 9.0) == pytest.approx(9.0, rel=1e-15)


def surface_params(**overrides):
    base = dict(lambda_risk=1.5, rho_risk=1.0, sigma_tau=0.02,
                n=100.0, tau0=0.01)
    base.update(overrides)
    return SpreadSurfaceParams(**base)


def test_bar_spread_positive_floor_at_zero_volume():
    p = surface_params()
    # V=0 leaves only the volatility floor: s * lambda * sigma_tau * sqrt(T)
    for T in (1.0, 4.0, 25.0):
        expected = 1.0 * 1.5 * 0.02 * math.sqrt(T)
        assert bar_spread_with_volume(p, 1.0, 0.0, T) == pytest.approx(
            expected, rel=1e-14)


def test_bar_spread_grows_with_volume_and_horizon():
    p = surface_params()
    v = np.linspace(0.0, 500.0, 50)
    d1 = np.array([bar_spread_with_volume(p, 1.0, x, 1.0) for x in v])
    d2 = np.array([bar_spread_with_volume(p, 1.0, x, 4.0) for x in v])
    assert np.all(np.diff(d1) > 0.0)
    assert np.all(d2 > d1)


def test_bar_dimensionless_matches_money_form():
    p = surface_params()
    v0 = p.n / (math.sqrt(2.0) * p.rho_risk * math.pi * p.tau0)
    for v in (0.1, 1.0, 3.0):
        for T in (1.0, 9.0):
            money = bar_spread_with_volume(p, 1.0, v * v0, T)
            dimless = bar_spread_dimensionless(v, T, p)
            assert money == pytest.approx(dimless, rel=1e-12)


def test_spread_surface_shape_and_monotonicity():
    p = surface_params()
    v_grid, t_grid = default_surface_grids(1.0, 1000.0, 1.0, 100.0,
                                           n_v=12, n_T=7)
    surf = spread_surface(p, 1.0, v_grid, t_grid)
    assert surf.shape == (7, 12)
    # longer horizons never cheapen the spread at fixed volume
    assert np.all(np.diff(surf, axis=0) >= -1e-15)


def test_spread_surface_rejects_bad_grids():
    p = surface_params()
    with pytest.raises(DomainError):
        spread_surface(p, 1.0, np.array([2.0, 1.0]), np.array([1.0, 2.0]))
    with pytest.raises(DomainError):
        spread_surface(p, 1.0, np.array([]), np.array([1.0]))


def test_piecewise_table_lookup():
    table = PiecewiseConstantTable(
        t_edges=np.array([0.0, 10.0, 20.0]),
        v_edges=np.array([0.0, 100.0, 200.0]),
        values=np.array([[1.0, 2.0], [3.0, 4.0]]),
    )
    assert table.value(5.0, 50.0) == 1.0
    assert table.value(5.0, 150.0) == 2.0
    assert table.value(15.0, 50.0) == 3.0
    assert table.value(15.0, 150.0) == 4.0
    # clamped outside the edges on both sides
    assert table.value(-1.0, -1.0) == 1.0
    assert table.value(99.0, 999.0) == 4.0


def test_surface_params_with_tables():
    table = PiecewiseConstantTable(
        t_edges=np.array([0.0, 1e9]), v_edges=np.array([0.0, 1e9]),
        values=np.array([[2.5]]),
    )
    p = surface_params(lambda_table=table)
    assert p.lambda_at(3.0, 7.0) == 2.5
    q = surface_params()
    assert q.lambda_at(3.0, 7.0) == q.lambda_risk
