"""Two-level coupled-wave price simulator.

Prices are modeled as eigenvalues of a fluctuating Hermitian 2x2 price
operator.  The eigenvalue gap is the bar height h (high minus low); the
mid-price performs a multiplicative random walk; the last price is placed
inside the bar by a configurable rule.  Probability amplitudes on the two
levels evolve unitarily, with the bar height setting the oscillation
frequency between the high and low levels.

Reproducibility contract: every path is generated from a substream derived
from (seed, path_index), so results are bit-identical no matter how paths
are distributed across workers.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, InsufficientDataError

logger = logging.getLogger(__name__)

# Redraw rate above which a parameter set is considered suspicious.
_REDRAW_WARN_RATE = 1e-3


class LastPriceRule(str, Enum):
    """Placement rule for the last price inside a bar."""

    UNIFORM_IN_BAR = "uniform"      # uniform between low and high
    NORMAL_HALF_BAR = "normal"      # normal around mid, std = h/2

    @property
    def placement_alpha(self) -> float:
        """Variance coefficient of the placement rule (var = alpha * h^2 / 4)."""
        return 1.0 / 3.0 if self is LastPriceRule.UNIFORM_IN_BAR else 1.0


@dataclass(frozen=True)
class CoupledWaveParams:
    """Generative parameters of the two-level price process.

    Attributes:
        sigma_step: Per-step mid-price volatility, already scaled for the
            step length (sigma * sqrt(dt) for a physical volatility sigma).
        xi_mean, xi_std: Moments of the level-splitting draw xi.
        kappa_mean, kappa_std: Moments of the level-coupling draw kappa.
        tau0: Time constant of the amplitude evolution.
        last_price_rule: How the last price is placed inside the bar.
        seed: Root seed for the per-path substreams.
    """

    sigma_step: float = 0.0
    xi_mean: float = 0.0
    xi_std: float = 0.0
    kappa_mean: float = 0.0
    kappa_std: float = 0.0
    tau0: float = 1.0
    last_price_rule: LastPriceRule = LastPriceRule.UNIFORM_IN_BAR
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma_step < 0.0:
            raise DomainError(f"sigma_step must be >= 0, got {self.sigma_step!r}")
        if self.xi_std < 0.0 or self.kappa_std < 0.0:
            raise DomainError("xi_std and kappa_std must be >= 0")
        if not (self.tau0 > 0.0):
            raise DomainError(f"tau0 must be > 0, got {self.tau0!r}")
        if self._h_sq_mean() == 0.0:
            # Fully degenerate bars (h == 0) are allowed for frozen-dynamics
            # checks but are not a meaningful market configuration.
            logger.debug("both xi and kappa are degenerate at 0; bars collapse")

    def _h_sq_mean(self) -> float:
        return (self.xi_mean ** 2 + self.xi_std ** 2
                + self.kappa_mean ** 2 + self.kappa_std ** 2)


@dataclass(frozen=True)
class PriceOperator2x2:
    """Hermitian 2x2 price operator; the off-diagonal pair is real-equal."""

    s11: float
    s22: float
    s12: float


@dataclass(frozen=True)
class BarSample:
    """One simulated bar: mid/high/low/last prices and the bar height."""

    s_mid: float
    s_high: float
    s_low: float
    s_last: float
    h: float


@dataclass(frozen=True)
class AmplitudeState:
    """Probability amplitudes on the high and low levels."""

    psi_high: complex
    psi_low: complex

    def norm_sq(self) -> float:
        return abs(self.psi_high) ** 2 + abs(self.psi_low) ** 2

    def populations(self) -> tuple[float, float]:
        return (abs(self.psi_high) ** 2, abs(self.psi_low) ** 2)


@dataclass(frozen=True)
class VolumeConfig:
    """How the per-step volume column of a simulated path is produced.

    Modes:
        "impact": deterministic inversion of the impact-price relation,
            V = avg_trade_size * h / (2 pi tau0 s_mid); no extra randomness.
        "lognormal": iid lognormal draws from a dedicated substream, so the
            bar stream itself is identical across volume modes.
        "none": all zeros.
    """

    mode: str = "impact"
    avg_trade_size: float = 100.0
    log_mean: float = 0.0
    log_sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.mode not in ("impact", "lognormal", "none"):
            raise DomainError(f"unknown volume mode {self.mode!r}")
        if self.mode == "impact" and not (self.avg_trade_size > 0.0):
            raise DomainError("avg_trade_size must be > 0 for impact volumes")
        if self.mode == "lognormal" and not (self.log_sigma >= 0.0):
            raise DomainError("log_sigma must be >= 0")


@dataclass
class BarSeries:
    """Columnar container for a simulated or ingested path of bars."""

    s_mid: np.ndarray
    s_high: np.ndarray
    s_low: np.ndarray
    s_last: np.ndarray
    h: np.ndarray
    volume: np.ndarray
    s0: float
    redraws: int = 0

    def __len__(self) -> int:
        return len(self.s_mid)


@dataclass
class RedrawCounter:
    """Mutable counter for rejected mid-price draws."""

    count: int = 0


def path_rng(seed: int, path_index: int = 0, *extra: int) -> np.random.Generator:
    """Deterministic substream for (seed, path_index) plus optional subkeys."""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(path_index, *extra))
    )


# --------------------------------------------------------------------------
# price operator and bars
# --------------------------------------------------------------------------

def eigen_decompose(op: PriceOperator2x2) -> tuple[float, float, float, float]:
    """Eigenvalues of the price operator as bar quantities.

    Returns:
        (s_high, s_low, h, s_mid) with s_high/low = s_mid +/- h/2 and
        h = sqrt((s11 - s22)^2 + 4 |s12|^2).
    """
    s_mid = 0.5 * (op.s11 + op.s22)
    h = math.hypot(op.s11 - op.s22, 2.0 * op.s12)
    return (s_mid + 0.5 * h, s_mid - 0.5 * h, h, s_mid)


def step_price(
    s_last: float,
    params: CoupledWaveParams,
    rng: np.random.Generator,
    redraw_counter: RedrawCounter | None = None,
    max_redraws: int = 10_000,
) -> BarSample:
    """Advance the process by one step and return the resulting bar.

    Draw order per step is fixed (dz, xi, kappa, placement).  Prices must
    stay positive: a non-positive mid redraws dz, a non-positive last price
    redraws the placement, both incrementing ``redraw_counter``.  The bar
    envelope itself may touch zero when h is comparable to the price; only
    traded prices (mid, last) are constrained.
    """
    if not (s_last > 0.0):
        raise DomainError(f"s_last must be > 0, got {s_last!r}")

    redraws = 0

    def _guarded(draw) -> float:
        nonlocal redraws
        value = draw()
        while value <= 0.0:
            redraws += 1
            if redraws > max_redraws:
                raise DomainError(
                    "positive-price redraw limit exceeded; "
                    "step volatility or bar height is too large for this price"
                )
            value = draw()
        return value

    s_mid = _guarded(
        lambda: s_last * (1.0 + params.sigma_step * rng.standard_normal())
    )

    xi = params.xi_mean + params.xi_std * rng.standard_normal()
    kappa = params.kappa_mean + params.kappa_std * rng.standard_normal()
    h = math.hypot(xi, kappa)
    s_high = s_mid + 0.5 * h
    s_low = s_mid - 0.5 * h

    if params.last_price_rule is LastPriceRule.UNIFORM_IN_BAR:
        s_next = _guarded(lambda: rng.uniform(s_low, s_high))
    else:
        s_next = _guarded(lambda: s_mid + 0.5 * h * rng.standard_normal())

    if redraw_counter is not None:
        redraw_counter.count += redraws
    return BarSample(s_mid=s_mid, s_high=s_high, s_low=s_low, s_last=s_next, h=h)


def simulate_path(
    params: CoupledWaveParams,
    s0: float,
    n_steps: int,
    path_index: int = 0,
    volume: VolumeConfig | None = None,
) -> BarSeries:
    """Simulate a path of bars by iterating the one-step transition.

    The volume column is produced after the bar pass (see VolumeConfig), so
    changing the volume mode never perturbs the price stream.
    """
    if not (s0 > 0.0):
        raise DomainError(f"s0 must be > 0, got {s0!r}")
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps!r}")

    rng = path_rng(params.seed, path_index)
    counter = RedrawCounter()
    mids = np.empty(n_steps)
    highs = np.empty(n_steps)
    lows = np.empty(n_steps)
    lasts = np.empty(n_steps)
    heights = np.empty(n_steps)

    s_last = s0
    for i in range(n_steps):
        bar = step_price(s_last, params, rng, counter)
        mids[i] = bar.s_mid
        highs[i] = bar.s_high
        lows[i] = bar.s_low
        lasts[i] = bar.s_last
        heights[i] = bar.h
        s_last = bar.s_last

    if counter.count > _REDRAW_WARN_RATE * n_steps:
        logger.warning(
            "mid-price redraw rate %.3g exceeds %.3g; results may be biased",
            counter.count / n_steps, _REDRAW_WARN_RATE,
        )

    volume = volume if volume is not None else VolumeConfig(mode="none")
    if volume.mode == "impact":
        volumes = volume.avg_trade_size * heights / (
            2.0 * math.pi * params.tau0 * mids
        )
    elif volume.mode == "lognormal":
        vol_rng = path_rng(params.seed, path_index, 1)
        volumes = vol_rng.lognormal(volume.log_mean, volume.log_sigma, n_steps)
    else:
        volumes = np.zeros(n_steps)

    return BarSeries(
        s_mid=mids, s_high=highs, s_low=lows, s_last=lasts, h=heights,
        volume=volumes, s0=s0, redraws=counter.count,
    )


# --------------------------------------------------------------------------
# volatility diagnostics
# --------------------------------------------------------------------------

def path_volatility(series: BarSeries) -> float:
    """Empirical per-step volatility: standard deviation of last-price moves."""
    if len(series) < 1000:
        raise InsufficientDataError(
            f"need >= 1000 bars for a stable estimate, got {len(series)}"
        )
    increments = np.diff(np.concatenate(([series.s0], series.s_last)))
    return float(np.std(increments, ddof=1))


def predicted_volatility(
    params: CoupledWaveParams,
    s: float,
    h_sq_mean: float | None = None,
) -> float:
    """Analytic per-step volatility of last prices.

    eta = sqrt(s^2 sigma_step^2 + alpha * E[h^2] / 4), where alpha is the
    placement-rule variance coefficient (1/3 uniform, 1 normal).  E[h^2]
    defaults to the analytic moment of the xi/kappa draws.
    """
    if not (s > 0.0):
        raise DomainError(f"s must be > 0, got {s!r}")
    if h_sq_mean is None:
        h_sq_mean = params._h_sq_mean()
    alpha = params.last_price_rule.placement_alpha
    return math.sqrt((s * params.sigma_step) ** 2 + alpha * h_sq_mean / 4.0)


def bar_height_rayleigh_scale(series: BarSeries) -> float:
    """Maximum-likelihood Rayleigh scale of the bar heights."""
    if len(series) == 0:
        raise InsufficientDataError("empty series")
    return float(math.sqrt(np.mean(series.h ** 2) / 2.0))


# --------------------------------------------------------------------------
# amplitude evolution
# --------------------------------------------------------------------------

def evolve_amplitudes(
    state0: AmplitudeState,
    s_mid: float,
    xi: float,
    kappa: float,
    s: float,
    tau0: float,
    t: float,
) -> AmplitudeState:
    """Closed-form unitary evolution under constant operator coefficients.

    The rotation angle is h * t / (2 tau0 s) with h = sqrt(xi^2 + kappa^2);
    s_mid contributes only a global phase.  Norm is conserved exactly up to
    rounding.  For h = 0 the evolution is a pure phase.
    """
    if not (s > 0.0):
        raise DomainError(f"s must be > 0, got {s!r}")
    if not (tau0 > 0.0):
        raise DomainError(f"tau0 must be > 0, got {tau0!r}")

    phase = cmath.exp(-1j * s_mid * t / (tau0 * s))
    h = math.hypot(xi, kappa)
    if h == 0.0:
        return AmplitudeState(
            psi_high=phase * state0.psi_high,
            psi_low=phase * state0.psi_low,
        )

    theta = h * t / (2.0 * tau0 * s)
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    xi_h = xi / h
    kappa_h = kappa / h
    psi_high = phase * (
        (cos_t - 1j * xi_h * sin_t) * state0.psi_high
        - 1j * kappa_h * sin_t * state0.psi_low
    )
    psi_low = phase * (
        -1j * kappa_h * sin_t * state0.psi_high
        + (cos_t + 1j * xi_h * sin_t) * state0.psi_low
    )
    return AmplitudeState(psi_high=psi_high, psi_low=psi_low)


def suggest_amplitude_dt(
    params: CoupledWaveParams,
    s_scale: float,
    max_rotation: float = 0.1,
) -> float:
    """Step size keeping the per-step rotation below ``max_rotation`` radians.

    Piecewise-constant coefficients stay accurate when each step rotates the
    state only slightly; the characteristic bar height sets the rate.
    """
    h_char = math.sqrt(params._h_sq_mean())
    if h_char == 0.0:
        raise DomainError("bar height is identically zero; any dt works")
    return max_rotation * 2.0 * params.tau0 * s_scale / h_char


def evolve_fluctuating(
    state0: AmplitudeState,
    params: CoupledWaveParams,
    s_scale: float,
    dt: float,
    n_steps: int,
    path_index: int = 0,
    return_trajectory: bool = False,
) -> AmplitudeState | tuple[AmplitudeState, np.ndarray]:
    """Chain the closed-form evolution over per-step redrawn coefficients.

    Each step redraws (dz, xi, kappa), advances the mid-price walk, and
    applies the constant-coefficient solution for ``dt``.  The caller is
    responsible for a dt small enough that coefficients are effectively
    constant within a step (see suggest_amplitude_dt).

    Returns the final state, plus the (n_steps+1, 2) population trajectory
    when ``return_trajectory`` is set.
    """
    if not (s_scale > 0.0):
        raise DomainError(f"s_scale must be > 0, got {s_scale!r}")
    if not (dt > 0.0):
        raise DomainError(f"dt must be > 0, got {dt!r}")
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps!r}")

    rng = path_rng(params.seed, path_index)
    state = state0
    s_mid = s_scale
    trajectory = np.empty((n_steps + 1, 2)) if return_trajectory else None
    if trajectory is not None:
        trajectory[0] = state.populations()

    for i in range(n_steps):
        step = s_mid * params.sigma_step * rng.standard_normal()
        while s_mid + step <= 0.0:
            step = s_mid * params.sigma_step * rng.standard_normal()
        s_mid = s_mid + step
        xi = params.xi_mean + params.xi_std * rng.standard_normal()
        kappa = params.kappa_mean + params.kappa_std * rng.standard_normal()
        state = evolve_amplitudes(state, s_mid, xi, kappa, s_scale, params.tau0, dt)
        if trajectory is not None:
            trajectory[i + 1] = state.populations()

    if trajectory is not None:
        return state, trajectory
    return state


def impact_price(s: float, tau: float, tau0: float) -> float:
    """Impact component of the spread: h = 2 pi tau0 s / tau.

    s / tau is the money flow per share per transaction; the bar height is
    proportional to it with the model time constant tau0.
    """
    if not (s > 0.0 and tau > 0.0 and tau0 > 0.0):
        raise DomainError("s, tau and tau0 must all be > 0")
    return 2.0 * math.pi * tau0 * s / tau
