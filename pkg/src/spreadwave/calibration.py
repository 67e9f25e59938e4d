"""Calibration of the spread laws to trade, quote, and bar data.

The workflow mirrors how the curves are measured in practice: pair each
spread observation with a concurrent volume, split the scatter into volume
buckets, take a high quantile of the spread per bucket, then fit the
closed-form law to the bucketed curve by weighted least squares.  Flow
statistics (average trade size, volume rate, volatility) come straight from
the trade tape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import least_squares, nnls

from .errors import (
    DomainError,
    FitConvergenceError,
    InsufficientDataError,
)

_DEFAULT_BUCKETS = 25
_DEFAULT_QUANTILE = 0.90
_DEFAULT_MIN_COUNT = 20
_MAX_FIT_EVALS = 500


# --------------------------------------------------------------------------
# records and containers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TradeRecord:
    timestamp: float        # seconds since epoch
    price: float
    size: float


@dataclass(frozen=True)
class QuoteRecord:
    timestamp: float
    bid: float
    ask: float

    @property
    def spread(self) -> float:
        return self.ask - self.bid


@dataclass(frozen=True)
class BarRecord:
    timestamp: float
    open: float
    high: float
    low: float
    close: float
    volume: float


class CurveSource(str, Enum):
    BID_ASK = "bid_ask"
    BAR = "bar"


@dataclass(frozen=True)
class FlowStats:
    """Directly measured trading-flow statistics.

    ``sigma`` is per unit of the reference time in which ``V`` is expressed;
    ``mean_price`` is the price scale used to convert money spreads to
    dimensionless form.
    """

    n: float
    V: float
    sigma: float
    mean_price: float


@dataclass(frozen=True)
class SpreadSamples:
    """Paired (volume, spread) observations ready for bucketing."""

    volumes: np.ndarray
    spreads: np.ndarray
    source: CurveSource
    n_rejected: int = 0


@dataclass(frozen=True)
class CurveBucket:
    v_lo: float
    v_hi: float
    v_mid: float
    spread_q: float
    count: int
    flagged: bool


@dataclass(frozen=True)
class BucketSpec:
    """Log-spaced volume buckets between two volume percentiles.

    The outermost edges are extended to the data range so every accepted
    sample lands in exactly one bucket.
    """

    n_buckets: int = _DEFAULT_BUCKETS
    lo_percentile: float = 1.0
    hi_percentile: float = 99.0

    def __post_init__(self) -> None:
        if self.n_buckets < 1:
            raise DomainError(f"n_buckets must be >= 1, got {self.n_buckets!r}")
        if not (0.0 <= self.lo_percentile < self.hi_percentile <= 100.0):
            raise DomainError("percentile bounds must satisfy 0 <= lo < hi <= 100")


@dataclass(frozen=True)
class SpreadVolumeCurve:
    buckets: tuple[CurveBucket, ...]
    quantile_level: float
    source: CurveSource
    n_accepted: int
    n_rejected: int

    def usable(self) -> tuple[CurveBucket, ...]:
        return tuple(b for b in self.buckets if not b.flagged)


@dataclass(frozen=True)
class CalibrationResult:
    lambda_hat: float
    rho_hat: float
    tau0_hat: float
    residual_norm: float
    n_used: float
    sigma_used: float
    covariance_diag: tuple[float, float]
    converged: bool = True
    rho_tau0_product: float | None = None


# --------------------------------------------------------------------------
# flow statistics
# --------------------------------------------------------------------------

def measure_flow_stats(trades, window: float) -> FlowStats:
    """Average trade size, volume rate and volatility from a trade tape.

    Volatility is the per-trade standard deviation of log-price changes,
    rescaled to the reference time unit by the mean inter-trade spacing.

    Args:
        trades: Sequence of TradeRecord, timestamps non-decreasing.
        window: Length of the observation window in reference time units.
    """
    if not (window > 0.0):
        raise DomainError(f"window must be > 0, got {window!r}")
    trades = list(trades)
    if len(trades) < 30:
        raise InsufficientDataError(
            f"need >= 30 trades in the window, got {len(trades)}"
        )
    sizes = np.array([t.size for t in trades])
    prices = np.array([t.price for t in trades])
    times = np.array([t.timestamp for t in trades])
    if np.any(sizes <= 0.0) or np.any(prices <= 0.0):
        raise DomainError("trade prices and sizes must be > 0")
    if np.any(np.diff(times) < 0.0):
        raise DomainError("trade timestamps must be non-decreasing")

    n = float(np.mean(sizes))
    V = float(np.sum(sizes) / window)
    span = times[-1] - times[0]
    if span <= 0.0:
        raise InsufficientDataError("all trades share one timestamp")
    mean_spacing = span / (len(trades) - 1)
    per_trade_std = float(np.std(np.diff(np.log(prices)), ddof=1))
    sigma = per_trade_std / math.sqrt(mean_spacing)
    return FlowStats(n=n, V=V, sigma=sigma, mean_price=float(np.mean(prices)))


# --------------------------------------------------------------------------
# sample adapters
# --------------------------------------------------------------------------

def bars_to_samples(bars) -> SpreadSamples:
    """High-low ranges paired with per-bar volume."""
    volumes, spreads, rejected = [], [], 0
    for bar in bars:
        rng = bar.high - bar.low
        if bar.volume > 0.0 and rng >= 0.0 and math.isfinite(rng) \
                and math.isfinite(bar.volume):
            volumes.append(bar.volume)
            spreads.append(rng)
        else:
            rejected += 1
    return SpreadSamples(
        volumes=np.array(volumes), spreads=np.array(spreads),
        source=CurveSource.BAR, n_rejected=rejected,
    )


def quotes_to_samples(quotes, trades, window: float) -> SpreadSamples:
    """Bid-ask spreads paired with the trailing traded volume rate.

    Each quote's volume is the total trade size in (t - window, t] divided
    by the window length; quotes with no trailing flow are rejected (they
    cannot be placed on a log-volume axis).
    """
    if not (window > 0.0):
        raise DomainError(f"window must be > 0, got {window!r}")
    quotes = list(quotes)
    trades = list(trades)
    trade_times = np.array([t.timestamp for t in trades])
    trade_sizes = np.array([t.size for t in trades])
    order = np.argsort(trade_times, kind="stable")
    trade_times = trade_times[order]
    cumsize = np.concatenate(([0.0], np.cumsum(trade_sizes[order])))

    volumes, spreads, rejected = [], [], 0
    for q in quotes:
        spread = q.ask - q.bid
        if spread < 0.0 or not math.isfinite(spread):
            rejected += 1
            continue
        hi = np.searchsorted(trade_times, q.timestamp, side="right")
        lo = np.searchsorted(trade_times, q.timestamp - window, side="right")
        v = (cumsize[hi] - cumsize[lo]) / window
        if v > 0.0:
            volumes.append(v)
            spreads.append(spread)
        else:
            rejected += 1
    return SpreadSamples(
        volumes=np.array(volumes), spreads=np.array(spreads),
        source=CurveSource.BID_ASK, n_rejected=rejected,
    )


# --------------------------------------------------------------------------
# percentile curve
# --------------------------------------------------------------------------

def build_spread_volume_curve(
    samples: SpreadSamples,
    bucket_spec: BucketSpec | None = None,
    quantile_level: float = _DEFAULT_QUANTILE,
    min_count: int = _DEFAULT_MIN_COUNT,
) -> SpreadVolumeCurve:
    """Quantile of spread per log-spaced volume bucket.

    Buckets with fewer than ``min_count`` samples are flagged rather than
    dropped; the sum of bucket counts equals the number of accepted samples.
    """
    if not (0.0 < quantile_level <= 1.0):
        raise DomainError(f"quantile_level must be in (0, 1], got {quantile_level!r}")
    spec = bucket_spec if bucket_spec is not None else BucketSpec()

    keep = (samples.volumes > 0.0) & np.isfinite(samples.volumes) \
        & (samples.spreads >= 0.0) & np.isfinite(samples.spreads)
    volumes = samples.volumes[keep]
    spreads = samples.spreads[keep]
    rejected = samples.n_rejected + int(np.sum(~keep))
    if volumes.size == 0:
        raise InsufficientDataError("no usable (volume, spread) samples")

    lo = float(np.percentile(volumes, spec.lo_percentile))
    hi = float(np.percentile(volumes, spec.hi_percentile))
    if hi <= lo:
        edges = np.array([float(volumes.min()), float(volumes.max())])
        if edges[1] <= edges[0]:
            edges[1] = edges[0] * (1.0 + 1e-12) + 1e-300
    else:
        edges = np.geomspace(lo, hi, spec.n_buckets + 1)
        edges[0] = min(edges[0], float(volumes.min()))
        edges[-1] = max(edges[-1], float(volumes.max()))

    idx = np.clip(np.searchsorted(edges, volumes, side="right") - 1,
                  0, len(edges) - 2)
    buckets = []
    for b in range(len(edges) - 1):
        mask = idx == b
        count = int(np.sum(mask))
        if count > 0:
            q = float(np.quantile(spreads[mask], quantile_level, method="linear"))
        else:
            q = math.nan
        buckets.append(CurveBucket(
            v_lo=float(edges[b]), v_hi=float(edges[b + 1]),
            v_mid=float(math.sqrt(edges[b] * edges[b + 1])),
            spread_q=q, count=count, flagged=count < min_count,
        ))
    if all(b.count == 0 for b in buckets):  # pragma: no cover - guarded above
        raise InsufficientDataError("all buckets are empty")
    return SpreadVolumeCurve(
        buckets=tuple(buckets), quantile_level=quantile_level,
        source=samples.source, n_accepted=int(volumes.size), n_rejected=rejected,
    )


# --------------------------------------------------------------------------
# model fits
# --------------------------------------------------------------------------

def bidask_spread_model(
    V, lam: float, rho: float, sigma: float, n: float, tau0: float,
):
    """Dimensionless bid-ask law: sqrt(lam^2 sigma^2 n / V + 2 rho^2 (pi tau0 / n)^2 V^2)."""
    V = np.asarray(V, dtype=float)
    return np.sqrt(
        lam * lam * sigma * sigma * n / V
        + 2.0 * (rho * math.pi * tau0 / n) ** 2 * V * V
    )


def bar_spread_model(
    V, lam: float, rho: float, sigma_T: float, n: float, tau0: float, T: float,
):
    """Dimensionless bar law with the horizon-volatility floor."""
    V = np.asarray(V, dtype=float)
    pi_tau0 = math.pi * tau0
    return np.sqrt(
        lam * lam * sigma_T * sigma_T
        + (rho * pi_tau0 / n) ** 2 * V * V
        + rho * rho * pi_tau0 ** 2 * T * V ** 3 / n ** 3
    )


def _usable_curve_arrays(curve: SpreadVolumeCurve) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    usable = [b for b in curve.usable() if math.isfinite(b.spread_q)]
    if len(usable) < 3:
        raise InsufficientDataError(
            f"need >= 3 usable buckets to fit, got {len(usable)}"
        )
    v = np.array([b.v_mid for b in usable])
    y = np.array([b.spread_q for b in usable])
    w = np.sqrt(np.array([b.count for b in usable], dtype=float))
    return v, y, w


def _run_spread_fit(
    v: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    model,                      # model(V, lam, rho) -> spread (same units as y)
    basis,                      # basis(V) -> columns for lam^2, rho^2 init
    flow: FlowStats,
    tau0: float,
    strict_product: bool,
) -> CalibrationResult:
    a_cols = basis(v)
    a_weighted = a_cols * w[:, None]
    init_sq, _ = nnls(a_weighted, (y * y) * w)
    x0 = np.sqrt(np.maximum(init_sq, 1e-16))

    def residuals(x):
        return w * (model(v, x[0], x[1]) - y)

    result = least_squares(
        residuals, x0, bounds=([0.0, 0.0], [np.inf, np.inf]),
        method="trf", xtol=1e-12, ftol=1e-12, gtol=1e-12,
        max_nfev=_MAX_FIT_EVALS,
    )
    lam_hat, rho_like = float(result.x[0]), float(result.x[1])
    res_norm = float(np.linalg.norm(result.fun))

    dof = max(len(v) - 2, 1)
    res_var = float(np.sum(result.fun ** 2)) / dof
    jtj = result.jac.T @ result.jac
    cov = res_var * np.linalg.pinv(jtj)
    cov_diag = (float(cov[0, 0]), float(cov[1, 1]))

    if not result.success:
        raise FitConvergenceError(
            f"spread fit did not converge: {result.message}",
            best_so_far=CalibrationResult(
                lambda_hat=lam_hat, rho_hat=rho_like, tau0_hat=tau0,
                residual_norm=res_norm, n_used=flow.n, sigma_used=flow.sigma,
                covariance_diag=cov_diag, converged=False,
            ),
        )

    if strict_product:
        # The second parameter was the product rho * tau0 itself.
        return CalibrationResult(
            lambda_hat=lam_hat, rho_hat=rho_like / tau0, tau0_hat=tau0,
            residual_norm=res_norm, n_used=flow.n, sigma_used=flow.sigma,
            covariance_diag=cov_diag, rho_tau0_product=rho_like,
        )
    return CalibrationResult(
        lambda_hat=lam_hat, rho_hat=rho_like, tau0_hat=tau0,
        residual_norm=res_norm, n_used=flow.n, sigma_used=flow.sigma,
        covariance_diag=cov_diag,
    )


def fit_bid_ask_curve(
    curve: SpreadVolumeCurve,
    flow: FlowStats,
    tau0: float = 1.0,
    strict_product: bool = False,
) -> CalibrationResult:
    """Weighted least-squares fit of the bid-ask law to a percentile curve.

    rho and tau0 enter only through their product, so tau0 is fixed and
    (lambda, rho) are fitted; ``strict_product`` fits the product instead
    and reports it explicitly.  Bucket weights are the trade counts.
    """
    if not (tau0 > 0.0):
        raise DomainError(f"tau0 must be > 0, got {tau0!r}")
    v, y, w = _usable_curve_arrays(curve)
    s = flow.mean_price

    if strict_product:
        def model(V, lam, prod):
            return s * bidask_spread_model(V, lam, 1.0, flow.sigma, flow.n, prod)
    else:
        def model(V, lam, rho):
            return s * bidask_spread_model(V, lam, rho, flow.sigma, flow.n, tau0)

    def basis(V):
        scale = tau0 if not strict_product else 1.0
        return np.column_stack([
            s * s * flow.sigma ** 2 * flow.n / V,
            s * s * 2.0 * (math.pi * scale / flow.n) ** 2 * V * V,
        ])

    return _run_spread_fit(v, y, w, model, basis, flow, tau0, strict_product)


def fit_bar_curve(
    curve: SpreadVolumeCurve,
    horizon_T: float,
    flow: FlowStats,
    tau0: float = 1.0,
    strict_product: bool = False,
) -> CalibrationResult:
    """Weighted least-squares fit of the bar law at a fixed horizon.

    ``flow.sigma`` is interpreted at the horizon (sigma_T); the V -> 0
    intercept identifies lambda * sigma_T directly.
    """
    if not (tau0 > 0.0):
        raise DomainError(f"tau0 must be > 0, got {tau0!r}")
    if not (horizon_T > 0.0):
        raise DomainError(f"horizon_T must be > 0, got {horizon_T!r}")
    v, y, w = _usable_curve_arrays(curve)
    s = flow.mean_price

    if strict_product:
        def model(V, lam, prod):
            return s * bar_spread_model(V, lam, 1.0, flow.sigma, flow.n, prod, horizon_T)
    else:
        def model(V, lam, rho):
            return s * bar_spread_model(V, lam, rho, flow.sigma, flow.n, tau0, horizon_T)

    def basis(V):
        scale = tau0 if not strict_product else 1.0
        pi_scale = math.pi * scale
        return np.column_stack([
            np.full_like(V, s * s * flow.sigma ** 2),
            s * s * ((pi_scale / flow.n) ** 2 * V * V
                     + pi_scale ** 2 * horizon_T * V ** 3 / flow.n ** 3),
        ])

    return _run_spread_fit(v, y, w, model, basis, flow, tau0, strict_product)


def fit_execution_scale(spreads) -> float:
    """Maximum-likelihood scale of the quadratic-exponential spread density.

    For samples following p(x) = 2 x / x0^2 * exp(-(x/x0)^2) the estimator
    is x0 = sqrt(mean(x^2)).
    """
    spreads = np.asarray(list(spreads), dtype=float)
    if spreads.size < 100:
        raise InsufficientDataError(
            f"need >= 100 samples, got {spreads.size}"
        )
    if np.any(spreads <= 0.0) or not np.all(np.isfinite(spreads)):
        raise DomainError("all samples must be positive and finite")
    return float(math.sqrt(np.mean(spreads ** 2)))
