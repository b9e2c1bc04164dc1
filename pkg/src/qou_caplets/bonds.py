"""Zero-coupon bonds, discount-curve coefficients, and the log-forward map.

With (F, G, H) from the Riccati closed forms, the transform

    Gamma(t, y; T, nu, omega) = exp(-F - G*y - H*y^2)

prices a unit payoff scaled by exp(nu*Y_T + omega*Y_T^2).  At (nu, omega) =
(0, 0) it is the zero-coupon bond B_t^T; the real coefficient triple of that
special case is the discount curve (curve_coeffs).  The simple forward rate
over [T, Tbar] with tenor tau = Tbar - T is

    L_t = (B_t^T / B_t^Tbar - 1) / tau,

and its log x = xi(t, y) has the explicit form log[(e^Delta - 1)/tau] with
Delta the difference of the two curves' exponents at (t, y).  The bond's
log-volatility loading is gamma = -delta*(G + 2*H*y), i.e. delta times the
y-derivative of log B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ConsistencyError, NonPositiveForwardError
from .riccati import QouParams, TerminalData, _q_arrays, solve_closed_form

# Imaginary parts of real-data transforms must sit at the double-precision
# noise floor; anything bigger flags a defect in the closed forms.
_IMAG_TOL = 1e-12
_BOND_TOL = 1e-10


@dataclass(frozen=True)
class CurveCoeffs:
    """Discount-curve coefficient triple: B_t^T = exp(-f - g*y - h*y^2)."""

    f: float
    g: float
    h: float


@dataclass(frozen=True)
class ContractSpec:
    """Caplet contract dates and strike.

    Attributes
    ----------
    t : float
        Valuation time.
    T : float
        Rate reset date (option expiry), >= t.
    tbar : float
        Settlement date, > T.
    k : float
        Log strike of the caplet.
    tau : float
        Tenor tbar - T, derived.
    """

    t: float
    T: float
    tbar: float
    k: float
    tau: float = field(init=False)

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.t, self.T, self.tbar, self.k)):
            raise ArgumentError("contract dates and strike must be finite")
        if not (self.t <= self.T < self.tbar):
            raise ArgumentError(
                f"need t <= T < Tbar, got t={self.t}, T={self.T}, Tbar={self.tbar}"
            )
        object.__setattr__(self, "tau", self.tbar - self.T)

    @property
    def ttm(self) -> float:
        """Time to reset T - t."""
        return self.T - self.t


def gamma_fn(
    params: QouParams,
    t: float,
    y: float,
    T: float,
    data: TerminalData,
    f_nodes: int = 801,
) -> complex:
    """Transform value exp(-F - G*y - H*y^2) at (t, y) for maturity T."""
    sol = solve_closed_form(params, t, T, data, f_nodes=f_nodes)
    return complex(np.exp(-sol.f - sol.g * y - sol.h * y * y))


def curve_coeffs(
    params: QouParams, t: float, T: float, f_nodes: int = 801
) -> CurveCoeffs:
    """Discount-curve coefficients: the real Riccati solution at (nu, omega) = (0, 0)."""
    sol = solve_closed_form(params, t, T, TerminalData(0.0, 0.0), f_nodes=f_nodes)
    worst = max(abs(sol.f.imag), abs(sol.g.imag), abs(sol.h.imag))
    if worst > _IMAG_TOL:
        raise ConsistencyError(
            f"discount-curve solve left an imaginary residue {worst:.3e} > {_IMAG_TOL:g}"
        )
    return CurveCoeffs(f=sol.f.real, g=sol.g.real, h=sol.h.real)


def bond_price(params: QouParams, t: float, y: float, T: float) -> float:
    """Zero-coupon bond price B_t^T = exp(-f - g*y - h*y^2), in (0, 1]."""
    c = curve_coeffs(params, t, T)
    price = math.exp(-c.f - c.g * y - c.h * y * y)
    if price > 1.0 + _BOND_TOL:
        raise ConsistencyError(
            f"bond price {price} exceeds 1: implies negative rates, impossible "
            f"for a short rate bounded below by q = {params.q}"
        )
    return price


def bond_vol_gamma(params: QouParams, t: float, y: float, T: float) -> float:
    """Bond log-volatility loading -delta*(g + 2*h*y) = delta * d/dy log B."""
    c = curve_coeffs(params, t, T)
    return -params.delta * (c.g + 2.0 * c.h * y)


def curve_gh_grid(
    params: QouParams, s: np.ndarray, T: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (g, h) curve coefficients at times s for maturity T.

    At (nu, omega) = (0, 0) the closed forms reduce to real elementary
    ratios, so whole time grids evaluate in one shot; used by the expansion
    integrals, which sample the curves at hundreds of interior times.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s > T):
        raise ArgumentError("grid times must not exceed the maturity")
    u = T - s
    _, _, q3, _, q5, _, q7 = _q_arrays(params, u)
    return -q3 / q5, -q7 / q5


def forward_exponent_delta(params: QouParams, spec: ContractSpec, y: float) -> float:
    """Exponent difference Delta = log(B_t^T / B_t^Tbar) evaluated at (t, y)."""
    near = curve_coeffs(params, spec.t, spec.T)
    far = curve_coeffs(params, spec.t, spec.tbar)
    return (far.f - near.f) + (far.g - near.g) * y + (far.h - near.h) * y * y


def log_forward_rate_xi(params: QouParams, spec: ContractSpec, y: float) -> float:
    """Log simple forward rate x = log[(e^Delta - 1)/tau].

    Satisfies e^x = (B_t^T / B_t^Tbar - 1)/tau exactly; raises when the
    exponent difference Delta is non-positive (zero or negative forward
    rate, log undefined).
    """
    delta_exp = forward_exponent_delta(params, spec, y)
    if delta_exp <= 0.0:
        raise NonPositiveForwardError(
            f"forward-rate exponent Delta = {delta_exp:.6g} <= 0 for contract "
            f"(t={spec.t}, T={spec.T}, Tbar={spec.tbar}); log forward rate undefined"
        )
    return math.log(math.expm1(delta_exp) / spec.tau)
