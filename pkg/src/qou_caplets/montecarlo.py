"""Monte Carlo reference prices for the quadratic short-rate model.

The factor follows a mean-reverting Gaussian process, so sampling uses the
exact one-step transition (no discretisation error in the factor itself);
the only bias is the trapezoid rule for the pathwise money-market integral,
which is second order in the step size.  Estimates carry standard errors so
callers can run bracket tests against the analytic prices.

Randomness comes from a counter-based generator with one substream per
fixed-size path block, and reductions run in block order, so results are
bit-identical for a given seed no matter how the work is scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bonds import ContractSpec, bond_price, curve_coeffs
from .errors import ArgumentError
from .riccati import QouParams

_PAIRS_PER_BLOCK = 32768


@dataclass(frozen=True)
class McConfig:
    """Simulation size and seeding for one Monte Carlo run."""

    n_paths: int
    n_steps: int
    seed: int

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ArgumentError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.n_steps < 1:
            raise ArgumentError(f"n_steps must be >= 1, got {self.n_steps}")
        if not (0 <= self.seed < 2**64):
            raise ArgumentError(f"seed must fit in 64 unsigned bits, got {self.seed}")


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    n_paths: int

    def __post_init__(self) -> None:
        if self.stderr < 0.0:
            raise ArgumentError(f"stderr must be >= 0, got {self.stderr}")

    def brackets(self, value: float, n_sigmas: float = 3.0) -> bool:
        """Whether `value` lies within `n_sigmas` standard errors of the mean."""
        return abs(self.mean - value) <= n_sigmas * self.stderr


def _block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent substream for one path block (counter-based, order-free)."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(block))


def _ou_step(params: QouParams, y: np.ndarray, z: np.ndarray, h: float) -> np.ndarray:
    """Exact one-step transition of the mean-reverting factor."""
    decay = math.exp(-params.kappa * h)
    width = params.delta * math.sqrt(
        (1.0 - math.exp(-2.0 * params.kappa * h)) / (2.0 * params.kappa)
    )
    return params.theta + (y - params.theta) * decay + width * z


def transition_moments(params: QouParams, y: float, h: float) -> tuple[float, float]:
    """Conditional mean and variance of the factor one step ahead."""
    decay = math.exp(-params.kappa * h)
    var = params.delta**2 * (1.0 - math.exp(-2.0 * params.kappa * h)) / (2.0 * params.kappa)
    return params.theta + (y - params.theta) * decay, var


def simulate_factor(
    params: QouParams, t0: float, t1: float, config: McConfig
) -> np.ndarray:
    """Sample factor paths on the uniform grid over [t0, t1].

    Returns an array of shape (n_paths, n_steps + 1) whose column j holds the
    factor at t0 + j*(t1 - t0)/n_steps; column 0 is the initial level y0 for
    every path.  Draws are independent across paths and deterministic per
    (seed, path index).
    """
    if not t0 < t1:
        raise ArgumentError(f"need t0 < t1, got {t0}, {t1}")
    h = (t1 - t0) / config.n_steps
    out = np.empty((config.n_paths, config.n_steps + 1))
    out[:, 0] = params.y0
    start = 0
    block = 0
    while start < config.n_paths:
        stop = min(start + 2 * _PAIRS_PER_BLOCK, config.n_paths)
        rng = _block_rng(config.seed, block)
        z = rng.standard_normal((stop - start, config.n_steps))
        y = out[start:stop, 0]
        for j in range(config.n_steps):
            y = _ou_step(params, y, z[:, j], h)
            out[start:stop, j + 1] = y
        start = stop
        block += 1
    return out


def _segments(t: float, T: float, tbar: float, n_steps: int) -> list[tuple[float, int]]:
    """Split the step budget over [t, T] and [T, tbar] with T on the grid."""
    total = tbar - t
    if T <= t:
        return [((tbar - T) / n_steps, n_steps)]
    n1 = int(round(n_steps * (T - t) / total))
    n1 = min(max(n1, 1), n_steps - 1)
    n2 = n_steps - n1
    return [((T - t) / n1, n1), ((tbar - T) / n2, n2)]


def _pair_units(
    params: QouParams,
    y0: float,
    segments: list[tuple[float, int]],
    config: McConfig,
    payoff_at_segment_end,
) -> np.ndarray:
    """Antithetic pair averages of the discounted payoff, in path order.

    Each antithetic pair (driven by +Z and -Z) forms one statistically
    independent unit; an odd trailing path stands alone.  The factor is
    stepped segment by segment, the short rate is integrated with the
    trapezoid rule on the step grid, and `payoff_at_segment_end(seg, y)` is
    evaluated at the end of each segment (returning None until the payoff
    is known) with the final value discounted by the full-horizon integral.
    """
    n_pairs = (config.n_paths + 1) // 2
    total_steps = sum(n for _, n in segments)
    units = np.empty(n_pairs)
    start = 0
    block = 0
    while start < n_pairs:
        stop = min(start + _PAIRS_PER_BLOCK, n_pairs)
        rng = _block_rng(config.seed, block)
        n_blk = stop - start
        z = rng.standard_normal((n_blk, total_steps))
        vals = np.zeros((2, n_blk))
        for sign, row in ((1.0, 0), (-1.0, 1)):
            y = np.full(n_blk, y0)
            integral = np.zeros(n_blk)
            rate = params.short_rate(y)
            payoff = None
            col = 0
            for seg_index, (h, n) in enumerate(segments):
                for _ in range(n):
                    y = _ou_step(params, y, sign * z[:, col], h)
                    new_rate = params.short_rate(y)
                    integral += 0.5 * h * (rate + new_rate)
                    rate = new_rate
                    col += 1
                maybe = payoff_at_segment_end(seg_index, y)
                if maybe is not None:
                    payoff = maybe
            vals[row] = np.exp(-integral) * payoff
        if 2 * stop > config.n_paths:  # odd path count: last unit is unpaired
            units[start:stop] = np.concatenate(
                [vals.mean(axis=0)[:-1], vals[0, -1:]]
            )
        else:
            units[start:stop] = vals.mean(axis=0)
        start = stop
        block += 1
    return units


def _estimate(units: np.ndarray, n_paths: int) -> McEstimate:
    mean = float(np.mean(units))
    if units.size > 1:
        stderr = float(np.std(units, ddof=1) / math.sqrt(units.size))
    else:
        stderr = 0.0
    return McEstimate(mean=mean, stderr=stderr, n_paths=n_paths)


def mc_bond_price(
    params: QouParams, t: float, y: float, T: float, config: McConfig
) -> McEstimate:
    """Monte Carlo zero-coupon bond price: mean of the pathwise discount."""
    if T < t:
        raise ArgumentError(f"need T >= t, got t={t}, T={T}")
    if T == t:
        return McEstimate(mean=1.0, stderr=0.0, n_paths=config.n_paths)
    segments = [((T - t) / config.n_steps, config.n_steps)]
    units = _pair_units(params, y, segments, config, lambda seg, yv: 1.0)
    return _estimate(units, config.n_paths)


def mc_caplet_price(
    params: QouParams, spec: ContractSpec, y: float, config: McConfig
) -> McEstimate:
    """Monte Carlo spot caplet price, discounted over the full horizon.

    The simple rate fixes at the reset date from the closed-form bond over
    the accrual period, the payoff pays at settlement, and each path carries
    its own money-market discount.
    """
    far = curve_coeffs(params, spec.T, spec.tbar)
    strike_rate = math.exp(spec.k)

    def rate_payoff(y_now: np.ndarray) -> np.ndarray:
        bond = np.exp(-(far.f + far.g * y_now + far.h * y_now * y_now))
        simple = (1.0 / bond - 1.0) / spec.tau
        return spec.tau * np.maximum(simple - strike_rate, 0.0)

    segments = _segments(spec.t, spec.T, spec.tbar, config.n_steps)
    if spec.T <= spec.t:
        fixed = float(rate_payoff(np.full(1, float(y)))[0])
        hook = lambda seg_index, y_now: fixed  # rate already fixed at t
    else:
        hook = lambda seg_index, y_now: rate_payoff(y_now) if seg_index == 0 else None
    units = _pair_units(params, y, segments, config, hook)
    return _estimate(units, config.n_paths)


def mc_forward_caplet_price(
    params: QouParams, spec: ContractSpec, y: float, config: McConfig
) -> McEstimate:
    """Monte Carlo forward caplet price: spot estimate over the analytic bond."""
    spot = mc_caplet_price(params, spec, y, config)
    settlement = bond_price(params, spec.t, y, spec.tbar)
    return McEstimate(
        mean=spot.mean / settlement,
        stderr=spot.stderr / settlement,
        n_paths=spot.n_paths,
    )
