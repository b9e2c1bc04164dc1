"""Tests for the transform-based exact caplet pricer."""

import math

import numpy as np
import pytest

from qou_caplets import (
    ArgumentError,
    CapletTransformPricer,
    ConsistencyError,
    ContourError,
    ContractSpec,
    McConfig,
    QouParams,
    QuadratureError,
    QuadratureConfig,
    caplet_price_u,
    caplet_psi_hat,
    exact_implied_vol,
    forward_caplet_price_exact,
    mc_caplet_price,
    mc_forward_caplet_price,
)

SET_A = QouParams(kappa=0.9, theta=0.25 / 0.9, delta=0.2, q=0.0, y0=math.sqrt(0.08))
SET_CIR = QouParams(kappa=0.045, theta=0.0, delta=math.sqrt(0.035), q=0.0, y0=math.sqrt(0.08))
RESETS = (1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0)


@pytest.fixture(scope="module")
def smile_grids():
    """Forward prices on 41-point strike grids for both sets, all four resets.

    Built once and shared by the monotonicity and convexity checks.
    Returns {(set_name, T): (strikes, forward_prices, log_forward)}.
    """
    grids = {}
    for name, params in (("A", SET_A), ("CIR", SET_CIR)):
        for T in RESETS:
            pricer = CapletTransformPricer(params, 0.0, T, 2.0, params.y0)
            ks = pricer.log_forward + np.linspace(-0.15, 0.15, 41)
            vs = np.array([pricer.forward_price(float(k)) for k in ks])
            grids[(name, T)] = (ks, vs, pricer.log_forward)
    return grids


class TestPsiHat:
    """The caplet payoff transform."""

    def test_hand_value_at_i(self):
        """omega = i with tau*e^k = 1: psi_hat = (1/2)/2 = 1/4."""
        k = math.log(4.0)  # tau = 0.25 so tau*e^k = 1
        val = caplet_psi_hat(1j, k, 0.25)
        assert abs(val - 0.25) < 1e-15, f"psi_hat(i) = {val}, expected 1/4"
        print(f"PASS: psi_hat(i) = {val}")

    def test_contour_requirement(self):
        """Im(omega) <= 0 is rejected."""
        with pytest.raises(ContourError):
            caplet_psi_hat(1.0 + 0.0j, -3.0, 0.25)
        with pytest.raises(ContourError):
            caplet_psi_hat(2.0 - 0.5j, -3.0, 0.25)
        print("PASS: transform refuses non-positive contour offsets")

    def test_quadratic_decay(self):
        """|psi_hat| falls like |omega_r|^-2 along the contour."""
        k = math.log(4.0)
        a1 = abs(caplet_psi_hat(100.0 + 1.5j, k, 0.25))
        a2 = abs(caplet_psi_hat(200.0 + 1.5j, k, 0.25))
        ratio = a1 / a2
        assert 3.5 < ratio < 4.5, f"decay ratio {ratio:.2f}, expected about 4"
        print(f"PASS: transform decay ratio {ratio:.3f} at doubled frequency")

    def test_pointwise_inversion(self):
        """Inverting the transform recovers the payoff in the transformed
        variable: psi(x) = (1+tau*e^k)*(1/(1+tau*e^k) - e^x)^+.

        Brute-force Simpson over omega_r in [-4000, 4000] with 400001 nodes
        along Im(omega) = 1.5, at a zero point (x = -0.5) and an interior
        point (x = -0.9) of the payoff.
        """
        tau = 0.25
        k = math.log(4.0)  # tau*e^k = 1
        omega_i = 1.5
        omega_r = np.linspace(-4000.0, 4000.0, 400001)
        h = omega_r[1] - omega_r[0]
        weights = np.ones_like(omega_r)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        omega = omega_r + 1j * omega_i
        phat = caplet_psi_hat(omega, k, tau)
        for x, target in ((-0.5, 0.0), (-0.9, 2.0 * (0.5 - math.exp(-0.9)))):
            integrand = phat * np.exp(1j * omega * x)
            val = (h / 3.0) * float(np.sum(weights * integrand.real)) / (2.0 * math.pi)
            assert abs(val - target) < 1e-6, f"psi({x}) = {val}, expected {target}"
        print("PASS: pointwise transform inversion recovers the payoff")


class TestPriceU:
    """The discounted transform price."""

    def test_deep_itm_martingale_identity(self):
        """k = x - 5: u equals settlement-bond * tau * (e^x - e^k) to 0.1%."""
        pricer = CapletTransformPricer(SET_A, 0.0, 0.125, 2.0, SET_A.y0)
        x = pricer.log_forward
        k = x - 5.0
        u = pricer.price_u(k)
        target = pricer.settlement_bond * pricer.tau * (math.exp(x) - math.exp(k))
        rel = abs(u - target) / target
        assert rel < 1e-3, f"deep ITM relative error {rel:.2e}"
        print(f"PASS: deep ITM u = {u:.8e} matches the martingale value ({rel:.1e} rel)")

    def test_against_mc(self):
        """Set A, T = 1/8, settlement 2, k = x: MC brackets the transform price."""
        spec_k = CapletTransformPricer(SET_A, 0.0, 0.125, 2.0, SET_A.y0)
        k = spec_k.log_forward
        u = spec_k.price_u(k)
        contract = ContractSpec(t=0.0, T=0.125, tbar=2.0, k=k)
        est = mc_caplet_price(
            SET_A, contract, SET_A.y0, McConfig(n_paths=100_000, n_steps=512, seed=2026)
        )
        z = abs(u - est.mean) / est.stderr
        assert z < 3.0, f"transform price {u:.3e} sits {z:.2f} stderr from MC"
        print(f"PASS: transform vs MC at z = {z:.2f}")

    def test_node_doubling_self_convergence(self):
        """Doubling the base nodes moves the price by no more than 1e-8."""
        coarse = CapletTransformPricer(SET_A, 0.0, 0.125, 2.0, SET_A.y0, QuadratureConfig())
        fine = CapletTransformPricer(
            SET_A, 0.0, 0.125, 2.0, SET_A.y0, QuadratureConfig(nodes=4001)
        )
        x = coarse.log_forward
        worst = 0.0
        for off in (-0.05, 0.0, 0.05):
            worst = max(worst, abs(coarse.price_u(x + off) - fine.price_u(x + off)))
        assert worst < 1e-8, f"node doubling moved the price by {worst:.2e}"
        print(f"PASS: self-convergence at doubled nodes ({worst:.2e})")

    def test_module_level_wrapper(self):
        """The functional entry point matches the pricer object."""
        spec = ContractSpec(t=0.0, T=0.0625, tbar=2.0, k=-2.9)
        via_fn = caplet_price_u(SET_CIR, spec, SET_CIR.y0)
        pricer = CapletTransformPricer(SET_CIR, 0.0, 0.0625, 2.0, SET_CIR.y0)
        assert via_fn == pricer.price_u(-2.9), "wrapper and object disagree"
        print("PASS: functional wrapper delegates to the pricer")


class TestForwardPrice:
    """The settlement-forward price and its bounds."""

    def test_far_otm_negligible(self):
        """k = x + 5 prices below 1e-6 * tau * e^x."""
        pricer = CapletTransformPricer(SET_A, 0.0, 0.125, 2.0, SET_A.y0)
        x = pricer.log_forward
        v = pricer.forward_price(x + 5.0)
        assert 0.0 <= v <= 1e-6 * pricer.tau * math.exp(x), f"far OTM price {v:.2e}"
        print(f"PASS: far OTM forward price {v:.2e}")

    def test_far_itm_intrinsic(self):
        """k = x - 5 reproduces tau*(e^x - e^k) within 0.1%."""
        pricer = CapletTransformPricer(SET_A, 0.0, 0.125, 2.0, SET_A.y0)
        x = pricer.log_forward
        k = x - 5.0
        v = pricer.forward_price(k)
        target = pricer.tau * (math.exp(x) - math.exp(k))
        assert abs(v - target) / target < 1e-3, f"far ITM {v} vs {target}"
        print(f"PASS: far ITM forward price within {abs(v-target)/target:.1e} of intrinsic")

    def test_against_mc_forward(self):
        """Set CIR, T = 1/16, k = x: positive and MC-confirmed."""
        pricer = CapletTransformPricer(SET_CIR, 0.0, 0.0625, 2.0, SET_CIR.y0)
        k = pricer.log_forward
        v = pricer.forward_price(k)
        assert v > 0.0
        contract = ContractSpec(t=0.0, T=0.0625, tbar=2.0, k=k)
        est = mc_forward_caplet_price(
            SET_CIR, contract, SET_CIR.y0, McConfig(n_paths=100_000, n_steps=512, seed=2026)
        )
        z = abs(v - est.mean) / est.stderr
        assert z < 3.0, f"forward price {v:.3e} sits {z:.2f} stderr from MC"
        print(f"PASS: forward price vs MC at z = {z:.2f}")

    def test_monotone_in_strike(self, smile_grids):
        """v never increases with the strike on any of the eight smile grids."""
        for (name, T), (ks, vs, _) in smile_grids.items():
            diffs = np.diff(vs)
            assert np.all(diffs <= 1e-10), (
                f"forward price increased with strike on set {name}, T={T}: "
                f"max rise {diffs.max():.2e}"
            )
        print("PASS: forward prices non-increasing in strike on all 8 grids")

    def test_convex_in_strike(self, smile_grids):
        """v is convex in e^k: discrete second differences >= -1e-8."""
        for (name, T), (ks, vs, _) in smile_grids.items():
            ek = np.exp(ks)
            first = np.diff(vs) / np.diff(ek)
            second = np.diff(first)
            assert np.all(second >= -1e-8), (
                f"convexity violated on set {name}, T={T}: min {second.min():.2e}"
            )
        print("PASS: forward prices convex in the strike level on all 8 grids")


class TestContourAndConfig:
    """Contour invariance and quadrature configuration errors."""

    def test_contour_invariance(self):
        """Prices on the 0.75 and 1.5 contours agree to 1e-7 (both sets)."""
        worst = 0.0
        for params in (SET_A, SET_CIR):
            lo = CapletTransformPricer(
                params, 0.0, 0.125, 2.0, params.y0, QuadratureConfig(omega_i=0.75)
            )
            hi = CapletTransformPricer(
                params, 0.0, 0.125, 2.0, params.y0, QuadratureConfig(omega_i=1.5)
            )
            x = lo.log_forward
            for off in (-0.05, 0.0, 0.05):
                worst = max(worst, abs(lo.price_u(x + off) - hi.price_u(x + off)))
        assert worst < 1e-7, f"contour disagreement {worst:.2e}"
        print(f"PASS: contour invariance at {worst:.2e}")

    def test_tiny_contour_offset_rejected(self):
        """An offset requiring absurd central refinement raises up front."""
        with pytest.raises(ContourError):
            CapletTransformPricer(
                SET_A, 0.0, 0.125, 2.0, SET_A.y0, QuadratureConfig(omega_i=1e-4)
            )
        print("PASS: near-pole contour offset rejected at construction")

    def test_tail_cap_enforced(self):
        """An unreachable tail tolerance hits the frequency cap and raises."""
        pricer = CapletTransformPricer(
            SET_A,
            0.0,
            0.125,
            2.0,
            SET_A.y0,
            QuadratureConfig(tail_tol=1e-30, omega_cap=900.0),
        )
        with pytest.raises(QuadratureError):
            pricer.price_u(pricer.log_forward)
        print("PASS: tail extension cap enforced")

    def test_config_validation(self):
        """Bad quadrature configurations are rejected."""
        with pytest.raises(ArgumentError):
            QuadratureConfig(omega_i=0.0)
        with pytest.raises(ArgumentError):
            QuadratureConfig(nodes=100)
        with pytest.raises(ArgumentError):
            QuadratureConfig(nodes=51)
        with pytest.raises(ArgumentError):
            QuadratureConfig(omega_max=-1.0)
        with pytest.raises(ArgumentError):
            QuadratureConfig(tail_growth=1.0)
        print("PASS: quadrature config validation")

    def test_bad_dates_rejected(self):
        """Pricer construction enforces t <= T < Tbar."""
        with pytest.raises(ArgumentError):
            CapletTransformPricer(SET_A, 0.5, 0.25, 2.0, SET_A.y0)
        print("PASS: pricer date ordering enforced")


class TestExactImpliedVol:
    """Implied volatility from the transform price."""

    def test_round_trip(self):
        """black_price at the extracted vol returns the forward price to 1e-10."""
        from qou_caplets import BlackInputs, black_price, log_forward_rate_xi

        spec = ContractSpec(t=0.0, T=0.125, tbar=2.0, k=-2.9)
        sigma = exact_implied_vol(SET_A, spec, SET_A.y0)
        v = forward_caplet_price_exact(SET_A, spec, SET_A.y0)
        x = log_forward_rate_xi(SET_A, spec, SET_A.y0)
        back = black_price(BlackInputs(x=x, k=-2.9, ttm=0.125, tau=spec.tau, sigma=sigma))
        assert abs(back - v) <= 1e-10, f"round trip residual {abs(back - v):.2e}"
        print(f"PASS: implied vol {sigma:.6f} round-trips the forward price")

    def test_atm_short_reset_sanity(self):
        """Set A, T = 1/64, k = x: a finite, positive, plausible volatility.

        The plotted band in the reference experiment sits around 0.5-0.7;
        this is a sanity bracket, so the assertion is deliberately loose.
        """
        pricer = CapletTransformPricer(SET_A, 0.0, 1.0 / 64.0, 2.0, SET_A.y0)
        sigma = pricer.implied_vol(pricer.log_forward)
        assert math.isfinite(sigma) and 0.3 < sigma < 0.9, f"ATM vol {sigma}"
        print(f"PASS: short-reset ATM implied vol {sigma:.4f} within the loose bracket")

    def test_invariant_to_quadrature_refinement(self):
        """Node doubling shifts the implied vol by no more than 1e-6."""
        spec = ContractSpec(t=0.0, T=0.0625, tbar=2.0, k=-2.95)
        base = exact_implied_vol(SET_CIR, spec, SET_CIR.y0)
        fine = exact_implied_vol(
            SET_CIR, spec, SET_CIR.y0, QuadratureConfig(nodes=4001)
        )
        assert abs(base - fine) < 1e-6, f"refinement moved vol by {abs(base - fine):.2e}"
        print(f"PASS: implied vol stable under refinement ({abs(base - fine):.2e})")
