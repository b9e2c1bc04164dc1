"""Tests for Black caplet pricing, vega, and implied-volatility inversion."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qou_caplets import (
    ArbitrageBoundsError,
    ArgumentError,
    BlackInputs,
    ContractSpec,
    QouParams,
    black_price,
    black_vega,
    exact_implied_vol,
    forward_caplet_price_exact,
    implied_vol_from_price,
    log_forward_rate_xi,
)

SET_A = QouParams(kappa=0.9, theta=0.25 / 0.9, delta=0.2, q=0.0, y0=math.sqrt(0.08))

# 40-digit oracle for the at-the-money example price
# 0.25 * 0.05 * (2*Phi(0.1) - 1) with Phi(0.1) = 0.5398278372770289...
ATM_EXAMPLE_PRICE = 0.0009956959319257245


class TestBlackPrice:
    """The forward Black caplet price."""

    def test_atm_example_value(self):
        """x = k, sigma = 0.2, ttm = 1, tau = 0.25, e^x = 0.05 -> 9.957e-4."""
        inputs = BlackInputs(x=math.log(0.05), k=math.log(0.05), ttm=1.0, tau=0.25, sigma=0.2)
        price = black_price(inputs)
        assert abs(price - ATM_EXAMPLE_PRICE) < 1e-15, (
            f"price {price!r} vs oracle {ATM_EXAMPLE_PRICE!r}"
        )
        print(f"PASS: ATM example price {price:.10e}")

    def test_small_vol_reaches_intrinsic(self):
        """sigma -> 0+ with x > k approaches tau*(e^x - e^k)."""
        x, k = math.log(0.06), math.log(0.04)
        price = black_price(BlackInputs(x=x, k=k, ttm=0.5, tau=0.25, sigma=1e-7))
        intrinsic = 0.25 * (math.exp(x) - math.exp(k))
        assert abs(price - intrinsic) < 1e-15, f"{price} vs intrinsic {intrinsic}"
        print(f"PASS: vanishing-vol price equals intrinsic {intrinsic:.6e}")

    def test_atm_symmetry(self):
        """At x = k the price is tau*e^x*(2*Phi(sigma*sqrt(ttm)/2) - 1)."""
        from scipy.special import ndtr

        x = math.log(0.08)
        for sigma, ttm in ((0.15, 0.25), (0.8, 2.0)):
            price = black_price(BlackInputs(x=x, k=x, ttm=ttm, tau=0.5, sigma=sigma))
            closed = 0.5 * math.exp(x) * (2.0 * ndtr(0.5 * sigma * math.sqrt(ttm)) - 1.0)
            assert abs(price - closed) < 1e-16, f"{price} vs ATM closed form {closed}"
        print("PASS: ATM symmetry closed form reproduced")

    def test_strictly_inside_bounds(self):
        """Prices sit strictly between intrinsic value and the forward bound."""
        for dx in (-0.8, -0.1, 0.0, 0.1, 0.8):
            x = math.log(0.05)
            k = x + dx
            price = black_price(BlackInputs(x=x, k=k, ttm=1.0, tau=0.25, sigma=0.3))
            intrinsic = 0.25 * max(math.exp(x) - math.exp(k), 0.0)
            forward = 0.25 * math.exp(x)
            assert intrinsic < price < forward, (
                f"price {price} not strictly inside ({intrinsic}, {forward}) at dx={dx}"
            )
        print("PASS: prices strictly inside the arbitrage bounds")

    @given(
        sigma_lo=st.floats(0.02, 1.0),
        bump=st.floats(0.01, 1.0),
        dx=st.floats(-0.9, 0.9),
    )
    def test_monotone_in_volatility(self, sigma_lo, bump, dx):
        """More volatility never lowers the price (strictness saturates in
        the deep tails where the price equals a bound to machine precision)."""
        x = math.log(0.05)
        lo = black_price(BlackInputs(x=x, k=x + dx, ttm=0.5, tau=0.25, sigma=sigma_lo))
        hi = black_price(BlackInputs(x=x, k=x + dx, ttm=0.5, tau=0.25, sigma=sigma_lo + bump))
        assert hi >= lo, f"price fell from {lo} to {hi} as vol rose"

    def test_vega_positive_on_grid(self):
        """Strict monotonicity in sigma, certified by vega > 0 on a grid."""
        for dx in np.linspace(-0.9, 0.9, 7):
            for sigma in (0.05, 0.2, 0.8, 1.9):
                v = black_vega(
                    BlackInputs(x=math.log(0.05), k=math.log(0.05) + dx, ttm=0.5, tau=0.25, sigma=sigma)
                )
                assert v > 0.0, f"vega {v} not positive at dx={dx}, sigma={sigma}"
        print("PASS: vega strictly positive across the sample grid")

    def test_input_validation(self):
        """Non-positive ttm, tau, or sigma is rejected."""
        with pytest.raises(ArgumentError):
            BlackInputs(x=0.0, k=0.0, ttm=0.0, tau=0.25, sigma=0.2)
        with pytest.raises(ArgumentError):
            BlackInputs(x=0.0, k=0.0, ttm=1.0, tau=0.0, sigma=0.2)
        with pytest.raises(ArgumentError):
            BlackInputs(x=0.0, k=0.0, ttm=1.0, tau=0.25, sigma=0.0)
        with pytest.raises(ArgumentError):
            BlackInputs(x=math.nan, k=0.0, ttm=1.0, tau=0.25, sigma=0.2)
        print("PASS: invalid Black inputs rejected")


class TestBlackVega:
    """The volatility sensitivity."""

    def test_matches_finite_difference(self):
        """Richardson-extrapolated centered differences agree to 1e-8 relative."""
        h = 1e-4
        worst = 0.0
        for dx in (-0.2, 0.0, 0.3):
            for sigma in (0.15, 0.6):
                base = BlackInputs(
                    x=math.log(0.05) + dx, k=math.log(0.05), ttm=1.0, tau=0.25, sigma=sigma
                )

                def fd(step):
                    up = black_price(
                        BlackInputs(base.x, base.k, base.ttm, base.tau, sigma + step)
                    )
                    dn = black_price(
                        BlackInputs(base.x, base.k, base.ttm, base.tau, sigma - step)
                    )
                    return (up - dn) / (2 * step)

                richardson = (4.0 * fd(h) - fd(2 * h)) / 3.0
                exact = black_vega(base)
                worst = max(worst, abs(richardson - exact) / exact)
        assert worst < 1e-8, f"vega FD relative error {worst:.2e}"
        print(f"PASS: vega matches finite differences (worst rel {worst:.2e})")

    def test_vanishes_in_the_tails(self):
        """Vega decays to numerical zero far from the money."""
        for dx in (-8.0, 8.0):
            v = black_vega(
                BlackInputs(x=math.log(0.05) + dx, k=math.log(0.05), ttm=1.0, tau=0.25, sigma=0.2)
            )
            assert 0.0 <= v < 1e-200, f"tail vega {v} at dx={dx}"
        print("PASS: vega is numerically zero 8 log-units from the money")

    def test_atm_closed_form(self):
        """ATM vega is tau*e^x*phi(sigma*sqrt(ttm)/2)*sqrt(ttm)."""
        x, sigma, ttm = math.log(0.05), 0.2, 1.0
        v = black_vega(BlackInputs(x=x, k=x, ttm=ttm, tau=0.25, sigma=sigma))
        phi = math.exp(-0.5 * (0.5 * sigma * math.sqrt(ttm)) ** 2) / math.sqrt(2 * math.pi)
        closed = 0.25 * math.exp(x) * phi * math.sqrt(ttm)
        assert abs(v - closed) < 1e-18, f"{v} vs {closed}"
        assert v > 0.0
        print(f"PASS: ATM vega {v:.6e} matches the closed form")


class TestImpliedVol:
    """Robust inversion of the Black price."""

    def test_round_trip(self):
        """sigma = 0.37 -> price -> 0.37 to 1e-9."""
        x, k = math.log(0.05), math.log(0.055)
        price = black_price(BlackInputs(x=x, k=k, ttm=0.5, tau=0.25, sigma=0.37))
        sigma = implied_vol_from_price(price, x, k, 0.5, 0.25)
        assert abs(sigma - 0.37) < 1e-9, f"round trip gave {sigma!r}"
        print(f"PASS: round trip recovered sigma = {sigma:.12f}")

    def test_intrinsic_price_rejected(self):
        """price = tau*(e^x - e^k) exactly (x > k) violates the lower bound."""
        x, k = math.log(0.06), math.log(0.04)
        intrinsic = 0.25 * (math.exp(x) - math.exp(k))
        with pytest.raises(ArbitrageBoundsError) as exc_info:
            implied_vol_from_price(intrinsic, x, k, 1.0, 0.25)
        assert "lower" in str(exc_info.value).lower() or "intrinsic" in str(exc_info.value).lower()
        print(f"PASS: intrinsic price rejected ({exc_info.value})")

    def test_forward_bound_rejected(self):
        """price >= tau*e^x violates the upper bound."""
        x = math.log(0.05)
        with pytest.raises(ArbitrageBoundsError) as exc_info:
            implied_vol_from_price(0.25 * math.exp(x), x, x, 1.0, 0.25)
        assert "upper" in str(exc_info.value).lower() or "forward" in str(exc_info.value).lower()
        print(f"PASS: forward-bound price rejected ({exc_info.value})")

    def test_pipeline_idempotence(self):
        """The model-price inversion reproduces its own volatility through
        an explicit Black round trip on a set A contract."""
        spec = ContractSpec(t=0.0, T=0.125, tbar=2.0, k=-2.95)
        y = SET_A.y0
        sigma = exact_implied_vol(SET_A, spec, y)
        x = log_forward_rate_xi(SET_A, spec, y)
        price = black_price(BlackInputs(x=x, k=spec.k, ttm=0.125, tau=spec.tau, sigma=sigma))
        model_price = forward_caplet_price_exact(SET_A, spec, y)
        assert abs(price - model_price) <= 1e-10, (
            f"Black price at the implied vol misses the model price by "
            f"{abs(price - model_price):.2e}"
        )
        sigma_again = implied_vol_from_price(price, x, spec.k, 0.125, spec.tau)
        assert abs(sigma_again - sigma) < 1e-9, f"{sigma_again} vs {sigma}"
        print(f"PASS: pipeline idempotence at sigma = {sigma:.8f}")

    def test_thousand_random_round_trips(self):
        """Inversion residual <= 1e-12*tau*e^x on 1000 random draws.

        Draws keep |x - k| within min(1, 3*sigma*sqrt(ttm)) so the target
        price stays numerically inside the arbitrage bounds; outside that
        band the Black price IS the bound to machine precision and no
        inversion can succeed.
        """
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(1000):
            sigma = rng.uniform(0.01, 2.0)
            ttm = rng.uniform(1.0 / 64.0, 2.0)
            tau = rng.uniform(0.1, 1.0)
            x = math.log(rng.uniform(0.005, 0.15))
            k = x + rng.uniform(-1.0, 1.0) * min(1.0, 3.0 * sigma * math.sqrt(ttm))
            price = black_price(BlackInputs(x=x, k=k, ttm=ttm, tau=tau, sigma=sigma))
            fitted = implied_vol_from_price(price, x, k, ttm, tau)
            resid = abs(
                black_price(BlackInputs(x=x, k=k, ttm=ttm, tau=tau, sigma=fitted)) - price
            )
            worst = max(worst, resid / (1e-12 * tau * math.exp(x)))
        assert worst <= 1.0, f"worst residual is {worst:.3f}x the tolerance"
        print(f"PASS: 1000 round trips, worst residual {worst:.3f}x tolerance")
