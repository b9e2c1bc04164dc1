"""Black caplet pricing, vega, and implied-volatility inversion.

Prices are Tbar-forward: v = tau*(e^x*Phi(d+) - e^k*Phi(d-)) with
d+/- = (x - k +/- sigma^2*ttm/2) / (sigma*sqrt(ttm)), x the log forward
rate, k the log strike, ttm the time to reset.  Phi is evaluated through the
complementary error function (relative error ~1e-15), which sets the
accuracy ceiling of the inversion.

The inversion is a bracketed safeguarded root search on sigma in
[1e-8, 5]: Newton steps accelerated by vega whenever they stay inside the
current bracket, bisection otherwise, stopping when the price residual
drops below 1e-12 * tau * e^x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ArbitrageBoundsError, ArgumentError, ConvergenceError

_SIGMA_LO = 1e-8
_SIGMA_HI = 5.0
_MAX_ITER = 200
_RESIDUAL_SCALE = 1e-12
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class BlackInputs:
    """Inputs of the Black caplet formula.

    Attributes
    ----------
    x : float
        Log forward rate.
    k : float
        Log strike.
    ttm : float
        Time to reset, > 0.
    tau : float
        Accrual tenor, > 0.
    sigma : float
        Black volatility, > 0.
    """

    x: float
    k: float
    ttm: float
    tau: float
    sigma: float

    def __post_init__(self) -> None:
        vals = (self.x, self.k, self.ttm, self.tau, self.sigma)
        if not all(math.isfinite(v) for v in vals):
            raise ArgumentError(f"Black inputs must be finite, got {vals}")
        if self.ttm <= 0.0:
            raise ArgumentError(f"ttm must be > 0, got {self.ttm}")
        if self.tau <= 0.0:
            raise ArgumentError(f"tau must be > 0, got {self.tau}")
        if self.sigma <= 0.0:
            raise ArgumentError(f"sigma must be > 0, got {self.sigma}")


def _d_plus_minus(x, k, ttm, sigma):
    root = sigma * np.sqrt(ttm)
    d_plus = (x - k) / root + 0.5 * root
    return d_plus, d_plus - root


def _price(x, k, ttm, tau, sigma):
    d_plus, d_minus = _d_plus_minus(x, k, ttm, sigma)
    return tau * (np.exp(x) * ndtr(d_plus) - np.exp(k) * ndtr(d_minus))


def _vega(x, k, ttm, tau, sigma):
    d_plus, _ = _d_plus_minus(x, k, ttm, sigma)
    phi = np.exp(-0.5 * d_plus * d_plus) / _SQRT_2PI
    return tau * np.exp(x) * phi * np.sqrt(ttm)


def black_price(inputs: BlackInputs) -> float:
    """Tbar-forward Black price tau*(e^x*Phi(d+) - e^k*Phi(d-))."""
    return float(_price(inputs.x, inputs.k, inputs.ttm, inputs.tau, inputs.sigma))


def black_vega(inputs: BlackInputs) -> float:
    """Volatility sensitivity d(price)/d(sigma) = tau*e^x*phi(d+)*sqrt(ttm) > 0."""
    return float(_vega(inputs.x, inputs.k, inputs.ttm, inputs.tau, inputs.sigma))


def implied_vol_from_price(
    price: float, x: float, k: float, ttm: float, tau: float
) -> float:
    """Invert the Black formula for sigma in [1e-8, 5].

    The target price must lie strictly inside the static bounds
    (tau*max(e^x - e^k, 0), tau*e^x).  Newton steps (vega derivative) are
    taken whenever they land inside the live bracket, bisection otherwise;
    stops when |black_price(sigma) - price| <= 1e-12*tau*e^x.
    """
    if not all(math.isfinite(v) for v in (price, x, k, ttm, tau)):
        raise ArgumentError("inversion inputs must be finite")
    if ttm <= 0.0 or tau <= 0.0:
        raise ArgumentError(f"need ttm > 0 and tau > 0, got ttm={ttm}, tau={tau}")
    forward_leg = tau * math.exp(x)
    intrinsic = tau * max(math.exp(x) - math.exp(k), 0.0)
    if price <= intrinsic:
        raise ArbitrageBoundsError(
            f"price {price} at or below the intrinsic bound {intrinsic}"
        )
    if price >= forward_leg:
        raise ArbitrageBoundsError(
            f"price {price} at or above the forward bound {forward_leg}"
        )
    tol = _RESIDUAL_SCALE * forward_leg
    lo, hi = _SIGMA_LO, _SIGMA_HI
    sigma = 0.5 * (lo + hi)
    for _ in range(_MAX_ITER):
        diff = float(_price(x, k, ttm, tau, sigma)) - price
        if abs(diff) <= tol:
            return sigma
        if diff > 0.0:
            hi = sigma
        else:
            lo = sigma
        vega = float(_vega(x, k, ttm, tau, sigma))
        if vega > 0.0:
            candidate = sigma - diff / vega
        else:
            candidate = math.nan
        if math.isfinite(candidate) and lo < candidate < hi:
            sigma = candidate
        else:
            sigma = 0.5 * (lo + hi)
    raise ConvergenceError(
        f"implied volatility search did not reach |residual| <= {tol:.3e} "
        f"in {_MAX_ITER} iterations (last sigma {sigma:.6g})"
    )
