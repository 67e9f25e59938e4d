"""Closed-form bid-ask spread laws.

The spread of a traded security is modeled as the combination of two
components: a liquidity price (price uncertainty accumulated while a position
of average transaction size is worked off at the current volume) and an
impact price (price displacement caused by the order flow itself).  The
liquidity component alone gives the basic square-root law; adding the impact
component gives the general law, which is U-shaped in volume and admits an
analytic minimum.

All functions here are pure and safe to call concurrently.  Volatility
``sigma`` and volume ``V`` must always refer to the same reference time unit;
the library performs no unit conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, NoSolutionError

# Implied risk-aversion multiplier of the straddle-replication argument.
STRADDLE_LAMBDA = math.sqrt(8.0 / math.pi)

# Tolerance below which an inverse query at the minimum returns the double root.
_MIN_SPREAD_TIE_TOL = 1e-9


@dataclass(frozen=True)
class SpreadModelParams:
    """Parameters of the closed-form spread laws.

    Attributes:
        price_s: Security price s (money per share).
        sigma: Volatility per unit reference time (1/sqrt(time)).
        lambda_risk: Dimensionless risk-aversion multiplier on the liquidity term.
        rho_risk: Dimensionless impact multiplier on the impact term.
        avg_trade_size_n: Average transaction size n (shares).
        tau0: Time constant of the impact-price relation.
    """

    price_s: float
    sigma: float
    lambda_risk: float
    rho_risk: float
    avg_trade_size_n: float
    tau0: float

    def __post_init__(self) -> None:
        for name in ("price_s", "sigma", "lambda_risk", "rho_risk",
                     "avg_trade_size_n", "tau0"):
            value = getattr(self, name)
            if not (value > 0.0) or not math.isfinite(value):
                raise DomainError(f"{name} must be strictly positive, got {value!r}")


@dataclass(frozen=True)
class DimensionlessSpreadParams:
    """Dimensionless reduction of the general spread law.

    ``a_coeff`` collapses all risk/volatility constants into one number and
    ``v0_scale`` is the volume unit; in these variables the spread per unit
    price is delta(v) = sqrt(a/v + v^2) with v = V / v0_scale.
    """

    a_coeff: float
    v0_scale: float

    def __post_init__(self) -> None:
        if not (self.a_coeff > 0.0 and math.isfinite(self.a_coeff)):
            raise DomainError(f"a_coeff must be strictly positive, got {self.a_coeff!r}")
        if not (self.v0_scale > 0.0 and math.isfinite(self.v0_scale)):
            raise DomainError(f"v0_scale must be strictly positive, got {self.v0_scale!r}")

    @classmethod
    def from_model(cls, params: SpreadModelParams) -> "DimensionlessSpreadParams":
        """Build (a, V0) from dimensional model parameters."""
        root2_rho = math.sqrt(2.0) * params.rho_risk
        a = root2_rho * params.lambda_risk ** 2 * params.sigma ** 2 * math.pi * params.tau0
        v0 = params.avg_trade_size_n / (root2_rho * math.pi * params.tau0)
        return cls(a_coeff=a, v0_scale=v0)


@dataclass(frozen=True)
class SpreadMinimum:
    """Location and value of the minimum of the dimensionless spread curve."""

    v_min: float
    delta_min: float


def _require_positive(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not (value > 0.0) or not math.isfinite(value):
            raise DomainError(f"{name} must be strictly positive, got {value!r}")


def _liquidity_spread(lam: float, s: float, sigma: float, tau: float) -> float:
    # Single shared multiplication path: keeps the straddle law bit-identical
    # to the basic law at lam = STRADDLE_LAMBDA.
    return lam * s * sigma * math.sqrt(tau)


# --------------------------------------------------------------------------
# basic laws
# --------------------------------------------------------------------------

def transaction_time(n: float, V: float) -> float:
    """Average time to trade n shares at volume V: tau = n / V.

    Args:
        n: Transaction size in shares.
        V: Trading volume in shares per unit reference time.

    Returns:
        Transaction time in reference time units.
    """
    _require_positive(n=n, V=V)
    return n / V


def basic_spread(params: SpreadModelParams, V: float) -> float:
    """Liquidity-only spread: lambda * s * sigma * sqrt(n / V).

    Monotone increasing in volatility and decreasing in volume.
    """
    _require_positive(V=V)
    tau = params.avg_trade_size_n / V
    return _liquidity_spread(params.lambda_risk, params.price_s, params.sigma, tau)


def straddle_spread(s: float, sigma: float, tau: float) -> float:
    """Spread implied by straddle replication over the transaction time.

    Equals the basic law with the implied multiplier sqrt(8/pi) ~ 1.6.
    ``tau`` may be zero (zero-horizon limit yields a zero spread).
    """
    _require_positive(s=s, sigma=sigma)
    if tau < 0.0 or not math.isfinite(tau):
        raise DomainError(f"tau must be non-negative, got {tau!r}")
    return _liquidity_spread(STRADDLE_LAMBDA, s, sigma, tau)


# --------------------------------------------------------------------------
# general law (liquidity + impact)
# --------------------------------------------------------------------------

def general_spread(params: SpreadModelParams, V: float) -> float:
    """Full spread law combining liquidity and impact components.

    Delta(V) = sqrt(lambda^2 s^2 sigma^2 n / V + 2 rho^2 (pi s tau0 / n)^2 V^2).
    Agrees with price_s * general_spread_dimensionless(a, V / V0) to
    relative 1e-12.
    """
    _require_positive(V=V)
    liquidity_sq = (params.lambda_risk * params.price_s * params.sigma) ** 2 \
        * params.avg_trade_size_n / V
    impact_lin = params.rho_risk * math.pi * params.price_s * params.tau0 \
        / params.avg_trade_size_n * V
    return math.sqrt(liquidity_sq + 2.0 * impact_lin ** 2)


def general_spread_dimensionless(a: float, v: float) -> float:
    """Dimensionless spread delta(v) = sqrt(a / v + v^2).

    Behaves as sqrt(a/v) for small v (liquidity regime) and as v for large v
    (impact regime).
    """
    _require_positive(a=a, v=v)
    return math.sqrt(a / v + v * v)


def spread_minimum(a: float) -> SpreadMinimum:
    """Analytic minimum of the dimensionless spread curve.

    The curve sqrt(a/v + v^2) has a single interior minimum at
    v_min = (a/2)^(1/3) with value delta_min = sqrt(3) * v_min.
    """
    _require_positive(a=a)
    v_min = (a / 2.0) ** (1.0 / 3.0)
    return SpreadMinimum(v_min=v_min, delta_min=math.sqrt(3.0) * v_min)


def inverse_spread_volumes(a: float, delta: float) -> tuple[float, float]:
    """Both volumes at which the dimensionless spread equals ``delta``.

    The spread curve is strictly decreasing below its minimum and strictly
    increasing above it, so every level above the minimum is attained twice.

    Args:
        a: Dimensionless spread-law coefficient.
        delta: Target dimensionless spread level.

    Returns:
        (v_low, v_high) with v_low <= v_min <= v_high.

    Raises:
        NoSolutionError: If delta is below the curve minimum.
    """
    _require_positive(a=a, delta=delta)
    minimum = spread_minimum(a)
    if delta < minimum.delta_min - _MIN_SPREAD_TIE_TOL:
        raise NoSolutionError(
            f"spread {delta!r} is below the minimum {minimum.delta_min!r}"
        )
    if delta <= minimum.delta_min + _MIN_SPREAD_TIE_TOL:
        return (minimum.v_min, minimum.v_min)

    def objective(v: float) -> float:
        return general_spread_dimensionless(a, v) - delta

    # Left branch: delta(v) -> inf as v -> 0+, so a bracket always exists.
    lo = minimum.v_min
    while objective(lo) < 0.0:
        lo *= 0.5
        if lo < 1e-300:  # pragma: no cover - delta checked above
            raise NoSolutionError("failed to bracket the left root")
    v_low = brentq(objective, lo, minimum.v_min, xtol=1e-14, rtol=1e-14)

    # Right branch: delta(v) > v for all v, so v = 2*delta is past the root.
    hi = max(2.0 * delta, 10.0 * minimum.v_min)
    v_high = brentq(objective, minimum.v_min, hi, xtol=1e-14, rtol=1e-14)
    return (float(v_low), float(v_high))
