"""Flow statistics, percentile curves, and spread-law fitting."""

import math

import numpy as np
import pytest

from spreadwave import (
    BarRecord,
    BucketSpec,
    CurveSource,
    DomainError,
    FlowStats,
    InsufficientDataError,
    QuoteRecord,
    SpreadSamples,
    TradeRecord,
    bar_spread_model,
    bars_to_samples,
    bidask_spread_model,
    build_spread_volume_curve,
    fit_bar_curve,
    fit_bid_ask_curve,
    fit_execution_scale,
    measure_flow_stats,
    quotes_to_samples,
)
from spreadwave.synthetic import synthetic_spread_curve, synthetic_trades


# --------------------------------------------------------------------------
# flow statistics
# --------------------------------------------------------------------------

def test_flow_stats_constant_tape():
    trades = [TradeRecord(timestamp=float(i), price=50.0, size=200.0)
              for i in range(60)]
    flow = measure_flow_stats(trades, window=60.0)
    assert flow.n == 200.0
    assert flow.V == pytest.approx(200.0)      # 12000 shares over 60 time units
    assert flow.sigma == 0.0
    assert flow.mean_price == 50.0


def test_flow_stats_volatility_rescaling():
    # same log-return sequence on a twice-coarser clock halves sigma^2 rate
    prices = 100.0 * np.exp(np.cumsum(np.sin(np.arange(100)) * 1e-3))
    fast = [TradeRecord(float(i), float(p), 1.0) for i, p in enumerate(prices)]
    slow = [TradeRecord(2.0 * i, float(p), 1.0) for i, p in enumerate(prices)]
    f_fast = measure_flow_stats(fast, window=100.0)
    f_slow = measure_flow_stats(slow, window=200.0)
    assert f_slow.sigma == pytest.approx(f_fast.sigma / math.sqrt(2.0), rel=1e-12)


def test_flow_stats_requires_enough_trades():
    trades = [TradeRecord(float(i), 50.0, 1.0) for i in range(10)]
    with pytest.raises(InsufficientDataError):
        measure_flow_stats(trades, window=10.0)


def test_flow_stats_on_synthetic_tape():
    trades = synthetic_trades(5000, s0=80.0, sigma_per_trade=2e-4,
                              mean_spacing=1.0, mean_size=150.0, seed=7)
    window = trades[-1].timestamp
    flow = measure_flow_stats(trades, window=window)
    assert flow.n == pytest.approx(150.0, rel=0.1)
    assert flow.V == pytest.approx(150.0, rel=0.1)     # ~1 trade per time unit
    assert flow.sigma == pytest.approx(2e-4, rel=0.15)
    assert flow.mean_price == pytest.approx(80.0, rel=0.05)


# --------------------------------------------------------------------------
# adapters
# --------------------------------------------------------------------------

def test_bars_to_samples_rejects_bad_rows():
    bars = [
        BarRecord(0.0, 10.0, 11.0, 9.0, 10.5, 100.0),
        BarRecord(1.0, 10.0, 11.0, 9.0, 10.5, 0.0),      # zero volume
        BarRecord(2.0, 10.0, 11.0, 9.0, 10.5, math.nan),  # bad volume
    ]
    samples = bars_to_samples(bars)
    assert len(samples.volumes) == 1
    assert samples.spreads[0] == pytest.approx(2.0)
    assert samples.n_rejected == 2
    assert samples.source is CurveSource.BAR


def test_quotes_to_samples_trailing_volume():
    trades = [TradeRecord(t, 100.0, 10.0) for t in (1.0, 2.0, 3.0, 4.0)]
    quotes = [
        QuoteRecord(2.5, 99.0, 101.0),   # trades at 1, 2 -> 20 over window 2
        QuoteRecord(4.0, 99.5, 100.5),   # trades at 3, 4 (window (2, 4])
        QuoteRecord(0.5, 99.0, 101.0),   # no trailing flow -> rejected
        QuoteRecord(3.0, 101.0, 99.0),   # crossed -> rejected
    ]
    samples = quotes_to_samples(quotes, trades, window=2.0)
    assert samples.volumes == pytest.approx([10.0, 10.0])
    assert samples.spreads == pytest.approx([2.0, 1.0])
    assert samples.n_rejected == 2
    assert samples.source is CurveSource.BID_ASK


# --------------------------------------------------------------------------
# percentile curve
# --------------------------------------------------------------------------

def test_quantile_matches_reference_convention():
    # 1..10 at q=0.9 under the linear interpolation convention gives 9.1
    volumes = np.full(10, 5.0)
    spreads = np.arange(1.0, 11.0)
    samples = SpreadSamples(volumes=volumes, spreads=spreads,
                            source=CurveSource.BID_ASK)
    curve = build_spread_volume_curve(
        samples, bucket_spec=BucketSpec(n_buckets=1),
        quantile_level=0.9, min_count=1)
    assert len(curve.buckets) == 1
    assert curve.buckets[0].spread_q == pytest.approx(9.1, rel=1e-14)


def test_bucket_counts_conserve_samples(rng):
    volumes = rng.lognormal(3.0, 1.0, size=5000)
    spreads = rng.uniform(0.1, 2.0, size=5000)
    samples = SpreadSamples(volumes=volumes, spreads=spreads,
                            source=CurveSource.BID_ASK)
    curve = build_spread_volume_curve(samples)
    assert sum(b.count for b in curve.buckets) == 5000
    assert curve.n_accepted == 5000
    # edges cover the data range
    assert curve.buckets[0].v_lo <= volumes.min()
    assert curve.buckets[-1].v_hi >= volumes.max()


def test_quantile_ordering(rng):
    volumes = rng.lognormal(0.0, 1.0, size=2000)
    spreads = rng.uniform(0.1, 2.0, size=2000)
    samples = SpreadSamples(volumes=volumes, spreads=spreads,
                            source=CurveSource.BID_ASK)
    lo = build_spread_volume_curve(samples, quantile_level=0.5)
    hi = build_spread_volume_curve(samples, quantile_level=0.9)
    for b_lo, b_hi in zip(lo.buckets, hi.buckets):
        if b_lo.count > 0:
            assert b_hi.spread_q >= b_lo.spread_q - 1e-12


def test_sparse_buckets_flagged_not_dropped(rng):
    volumes = np.concatenate([rng.uniform(1.0, 2.0, 500), [1000.0]])
    spreads = np.ones(501)
    samples = SpreadSamples(volumes=volumes, spreads=spreads,
                            source=CurveSource.BID_ASK)
    curve = build_spread_volume_curve(samples, min_count=20)
    assert any(b.flagged for b in curve.buckets)
    assert sum(b.count for b in curve.buckets) == 501


def test_degenerate_volume_range():
    samples = SpreadSamples(volumes=np.full(100, 7.0),
                            spreads=np.linspace(1, 2, 100),
                            source=CurveSource.BID_ASK)
    curve = build_spread_volume_curve(samples)
    usable = curve.usable()
    assert len(usable) >= 1
    assert sum(b.count for b in curve.buckets) == 100


def test_no_usable_samples_raises():
    samples = SpreadSamples(volumes=np.array([-1.0, 0.0]),
                            spreads=np.array([1.0, 1.0]),
                            source=CurveSource.BID_ASK)
    with pytest.raises(InsufficientDataError):
        build_spread_volume_curve(samples)


# --------------------------------------------------------------------------
# fitting
# --------------------------------------------------------------------------

FLOW = FlowStats(n=100.0, V=0.0, sigma=0.02, mean_price=50.0)
EDGES = np.geomspace(10.0, 1000.0, 25)


def test_bidask_fit_noiseless_recovery():
    curve = synthetic_spread_curve(FLOW, 3.5, 1.2, 0.01, EDGES,
                                   noise_rel=0.0, seed=0)
    result = fit_bid_ask_curve(curve, FLOW, tau0=0.01)
    assert result.lambda_hat == pytest.approx(3.5, rel=1e-6)
    assert result.rho_hat == pytest.approx(1.2, rel=1e-6)
    assert result.residual_norm < 1e-8
    assert result.converged


def test_bar_fit_noiseless_recovery():
    curve = synthetic_spread_curve(FLOW, 3.5, 1.2, 0.01, EDGES,
                                   noise_rel=0.0, seed=0,
                                   source=CurveSource.BAR, horizon_T=2.0)
    result = fit_bar_curve(curve, horizon_T=2.0, flow=FLOW, tau0=0.01)
    assert result.lambda_hat == pytest.approx(3.5, rel=1e-6)
    assert result.rho_hat == pytest.approx(1.2, rel=1e-6)


def test_strict_product_mode_reports_identified_combination():
    curve = synthetic_spread_curve(FLOW, 3.5, 1.2, 0.01, EDGES,
                                   noise_rel=0.0, seed=0)
    result = fit_bid_ask_curve(curve, FLOW, tau0=0.01, strict_product=True)
    assert result.rho_tau0_product == pytest.approx(1.2 * 0.01, rel=1e-6)
    assert result.rho_hat == pytest.approx(1.2, rel=1e-6)


def test_tau0_rescaling_leaves_product_invariant():
    # rho and tau0 are only identified through their product
    curve = synthetic_spread_curve(FLOW, 3.5, 1.2, 0.01, EDGES,
                                   noise_rel=0.0, seed=0)
    r1 = fit_bid_ask_curve(curve, FLOW, tau0=0.01)
    r2 = fit_bid_ask_curve(curve, FLOW, tau0=0.02)
    assert r1.rho_hat * 0.01 == pytest.approx(r2.rho_hat * 0.02, rel=1e-6)
    assert r1.lambda_hat == pytest.approx(r2.lambda_hat, rel=1e-6)


def test_fit_needs_three_usable_buckets():
    curve = synthetic_spread_curve(FLOW, 3.5, 1.2, 0.01,
                                   np.geomspace(10.0, 100.0, 3),
                                   noise_rel=0.0, seed=0)
    assert len(curve.usable()) == 2
    with pytest.raises(InsufficientDataError):
        fit_bid_ask_curve(curve, FLOW, tau0=0.01)


def test_models_vectorize():
    V = np.geomspace(1.0, 100.0, 7)
    ba = bidask_spread_model(V, 2.0, 1.0, 0.02, 100.0, 0.01)
    bar = bar_spread_model(V, 2.0, 1.0, 0.02, 100.0, 0.01, 1.0)
    assert ba.shape == V.shape and bar.shape == V.shape
    assert np.all(ba > 0.0) and np.all(bar > 0.0)


def test_execution_scale_mle():
    # constant samples: x0 = sqrt(mean(x^2)) = the constant
    assert fit_execution_scale(np.full(200, 2.5)) == pytest.approx(2.5)


def test_execution_scale_consistency(rng):
    # draws from p(x) = 2x/x0^2 exp(-(x/x0)^2) are Rayleigh(x0/sqrt(2))
    x0 = 1.7
    samples = rng.rayleigh(scale=x0 / math.sqrt(2.0), size=200_000)
    assert fit_execution_scale(samples) == pytest.approx(x0, rel=0.01)


def test_execution_scale_validation():
    with pytest.raises(InsufficientDataError):
        fit_execution_scale(np.ones(10))
    with pytest.raises(DomainError):
        fit_execution_scale(np.concatenate([np.ones(150), [-1.0]]))
