"""Exact caplet pricing by Fourier inversion along a complex contour.

The caplet payoff transform (log-forward-rate variable, log strike k, tenor
tau) is

    psi_hat(omega) = -(1 + tau*e^k)^{i*omega} / (omega^2 + i*omega),

analytic for Im(omega) > 0.  The time-t price of the caplet paying
tau*(L_T - e^k)^+ at Tbar is the contour integral

    u = (1/2pi) * int d(omega_r) psi_hat(omega) * e^{-i*omega*fF(T;Tbar)}
        * Gamma(t, y; T, -i*omega*fG(T;Tbar), -i*omega*fH(T;Tbar)),

with omega = omega_r + i*omega_i on a fixed horizontal contour and
(fF, fG, fH) the discount-curve coefficients over [T, Tbar].  The
Gamma factor is strike-independent, so one kernel pass prices a whole strike
sweep.

Truncation: the kernel decays only like |omega_r|^{-1/2} (the terminal
density is noncentral-chi-square-like), leaving an oscillatory integrand
with |omega_r|^{-5/2} envelope after the payoff transform.  A base Simpson
grid on [-omega_max, omega_max] is therefore extended with geometric
half-line tail blocks (conjugate symmetry folds them to 2*Re) until two
consecutive blocks each contribute less than tail_tol, keeping the node
step small enough to resolve the oscillation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .black import implied_vol_from_price
from .bonds import ContractSpec, bond_price, curve_coeffs, log_forward_rate_xi
from .errors import (
    ArgumentError,
    ConsistencyError,
    ContourError,
    QuadratureError,
)
from .quadrature import simpson_weights
from .riccati import QouParams, closed_form_batch

_NEGATIVE_CLAMP = 1e-10
_IMAG_RESIDUE_TOL = 1e-8
_BOUNDS_TOL = 1e-8


@dataclass(frozen=True)
class QuadratureConfig:
    """Contour and truncation controls for the Fourier price.

    Attributes
    ----------
    omega_i : float
        Contour offset Im(omega) > 0.
    omega_max : float
        Half-width of the base integration window in omega_r.
    nodes : int
        Simpson nodes on the base window, odd, >= 101.
    f_nodes : int
        Simpson nodes of the inner Riccati time integral.
    tail_tol : float
        A tail block whose contribution falls below this (two blocks in a
        row) stops the extension.
    tail_growth : float
        Geometric ratio between consecutive tail blocks.
    tail_step_cap : float
        Upper bound on the tail node step (resolves the oscillation).
    omega_cap : float
        Hard ceiling for the extension; reaching it raises.
    """

    omega_i: float = 1.5
    omega_max: float = 200.0
    nodes: int = 2001
    f_nodes: int = 801
    tail_tol: float = 1e-10
    tail_growth: float = 4.0
    tail_step_cap: float = 2.0
    omega_cap: float = 4.0e6

    def __post_init__(self) -> None:
        if not (self.omega_i > 0.0):
            raise ArgumentError(f"omega_i must be > 0, got {self.omega_i}")
        if self.nodes < 101 or self.nodes % 2 == 0:
            raise ArgumentError(f"nodes must be odd and >= 101, got {self.nodes}")
        if self.omega_max <= 0.0:
            raise ArgumentError(f"omega_max must be > 0, got {self.omega_max}")
        if self.tail_growth <= 1.0:
            raise ArgumentError(f"tail_growth must exceed 1, got {self.tail_growth}")


def caplet_psi_hat(
    omega: complex | np.ndarray, k: float, tau: float
) -> complex | np.ndarray:
    """Payoff transform -(1 + tau*e^k)^{i*omega} / (omega^2 + i*omega).

    The base 1 + tau*e^k is a positive real, so the principal power
    exp(i*omega*log(1 + tau*e^k)) carries no branch ambiguity.  Requires
    Im(omega) > 0 (strip of analyticity).
    """
    om = np.asarray(omega, dtype=complex)
    if np.any(om.imag <= 0.0):
        raise ContourError("psi_hat requires Im(omega) > 0 on every node")
    log_base = math.log1p(tau * math.exp(k))
    out = -np.exp(1j * om * log_base) / (om * om + 1j * om)
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return complex(out)
    return out


def _odd_node_count(width: float, step: float) -> int:
    n = int(math.ceil(width / step)) + 1
    return n if n % 2 == 1 else n + 1


class CapletTransformPricer:
    """Caplet transform pricer with a strike-independent cached kernel.

    One instance is bound to (model, t, T, Tbar, y, quadrature config); its
    price methods accept arbitrary log strikes and share the cached kernel,
    so strike sweeps cost one kernel pass plus a cheap weighted sum per
    strike.  Kernel segments are appended lazily as strikes demand longer
    tails; segments are immutable once built, so concurrent reads are safe
    after a warm-up call.
    """

    def __init__(
        self,
        params: QouParams,
        t: float,
        T: float,
        tbar: float,
        y: float,
        quad: QuadratureConfig | None = None,
    ) -> None:
        self.params = params
        self.quad = quad or QuadratureConfig()
        if not (t <= T < tbar):
            raise ArgumentError(f"need t <= T < Tbar, got {t}, {T}, {tbar}")
        self.t = t
        self.T = T
        self.tbar = tbar
        self.y = y
        self.tau = tbar - T
        far = curve_coeffs(params, T, tbar, f_nodes=self.quad.f_nodes)
        self._far_f, self._far_g, self._far_h = far.f, far.g, far.h
        self.settlement_bond = bond_price(params, t, y, tbar)
        self.log_forward = log_forward_rate_xi(
            params, ContractSpec(t=t, T=T, tbar=tbar, k=0.0), y
        )
        self.negative_clamp_count = 0
        # Base segment: full symmetric window, so the imaginary part of the
        # quadrature sum is a real cross-check of kernel conjugate symmetry.
        #
        # The payoff transform has a pole at omega = 0, a distance omega_i
        # below the contour, and the equispaced-Simpson error for that peak
        # decays like exp(-pi * omega_i / step).  At the default step that
        # error is ~1e-6 for omega_i = 0.75, which would make the price
        # depend on the contour offset.  The window around zero is therefore
        # integrated on a locally refined grid (fine enough that the peak
        # error is far below double-precision noise) while the smooth outer
        # region keeps the configured resolution.
        h = 2.0 * self.quad.omega_max / (self.quad.nodes - 1)
        refine = max(16, int(math.ceil(8.0 * h / self.quad.omega_i)))
        if refine > 1024:
            raise ContourError(
                f"omega_i={self.quad.omega_i:g} sits too close to the pole at "
                "omega=0 for the configured resolution; raise omega_i or nodes"
            )
        half_intervals = (self.quad.nodes - 1) // 2
        center_intervals = min(half_intervals, 100)
        if (half_intervals - center_intervals) % 2 == 1:
            center_intervals = min(center_intervals + 1, half_intervals)
        center = center_intervals * h
        grids: list[np.ndarray] = []
        weights: list[np.ndarray] = []
        if center < self.quad.omega_max:
            n_outer = half_intervals - center_intervals + 1
            w_outer = simpson_weights(n_outer) * (h / 3.0)
            grids.append(np.linspace(-self.quad.omega_max, -center, n_outer))
            weights.append(w_outer)
            grids.append(np.linspace(center, self.quad.omega_max, n_outer))
            weights.append(w_outer)
        n_inner = 2 * center_intervals * refine + 1
        grids.append(np.linspace(-center, center, n_inner))
        weights.append(simpson_weights(n_inner) * (h / refine / 3.0))
        omega_r = np.concatenate(grids)
        coeff = np.concatenate(weights)
        self._base = (omega_r + 1j * self.quad.omega_i, coeff, self._kernel(omega_r))
        self._tails: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []

    def _kernel(self, omega_r: np.ndarray) -> np.ndarray:
        """Strike-independent factor e^{-i*omega*fF} * Gamma(...) on the contour."""
        om = omega_r + 1j * self.quad.omega_i
        nu = -1j * om * self._far_g
        omega_term = -1j * om * self._far_h
        f, g, h = closed_form_batch(
            self.params, self.t, self.T, nu, omega_term,
            f_nodes=self.quad.f_nodes, chunk=2048,
        )
        y = self.y
        kern = np.exp(-1j * om * self._far_f) * np.exp(-f - g * y - h * y * y)
        if not np.all(np.isfinite(kern)):
            bad = int(np.argmin(np.isfinite(kern)))
            raise QuadratureError(
                f"kernel overflowed at omega_r={omega_r[bad]:g}: the terminal "
                "boundary layer of the exponent functions is narrower than the "
                "time grid can resolve at this frequency; raise f_nodes or "
                "lower the frequency range"
            )
        return kern

    def _tail_segment(self, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Build (lazily) tail block j on the positive half-line."""
        while len(self._tails) <= j:
            i = len(self._tails)
            g = self.quad.tail_growth
            lo = self.quad.omega_max * g**i
            hi = lo * g
            if lo >= self.quad.omega_cap:
                raise QuadratureError(
                    f"tail extension hit the omega cap {self.quad.omega_cap:g} "
                    f"without meeting tail_tol={self.quad.tail_tol:g}"
                )
            base_h = 2.0 * self.quad.omega_max / (self.quad.nodes - 1)
            step = min(self.quad.tail_step_cap, base_h * 2.0 ** (i + 2))
            n = _odd_node_count(hi - lo, step)
            omega_r = np.linspace(lo, hi, n)
            h_actual = (hi - lo) / (n - 1)
            coeff = simpson_weights(n) * (h_actual / 3.0)
            self._tails.append(
                (omega_r + 1j * self.quad.omega_i, coeff, self._kernel(omega_r))
            )
        return self._tails[j]

    def price_u(self, k: float) -> float:
        """Spot caplet price u at log strike k (payoff paid at Tbar)."""
        om, coeff, kern = self._base
        psi = caplet_psi_hat(om, k, self.tau)
        total = np.sum(coeff * psi * kern)
        residue = abs(total.imag) / (2.0 * math.pi)
        if residue > _IMAG_RESIDUE_TOL:
            raise QuadratureError(
                f"imaginary residue {residue:.3e} exceeds {_IMAG_RESIDUE_TOL:g}; "
                "kernel conjugate symmetry is broken"
            )
        u = total.real / (2.0 * math.pi)
        # Half-line tail blocks, folded by conjugate symmetry to 2*Re.
        converged_blocks = 0
        j = 0
        while converged_blocks < 2:
            om_t, coeff_t, kern_t = self._tail_segment(j)
            psi_t = caplet_psi_hat(om_t, k, self.tau)
            contribution = float(np.sum(coeff_t * psi_t * kern_t).real) / math.pi
            u += contribution
            converged_blocks = converged_blocks + 1 if abs(contribution) < self.quad.tail_tol else 0
            j += 1
        if u < -_NEGATIVE_CLAMP:
            raise QuadratureError(
                f"caplet price {u:.3e} below the negative clamp -{_NEGATIVE_CLAMP:g}"
            )
        if u < 0.0:
            self.negative_clamp_count += 1
            u = 0.0
        return float(u)

    def forward_price(self, k: float) -> float:
        """Tbar-forward caplet price v = u / B_t^Tbar, checked against bounds."""
        v = self.price_u(k) / self.settlement_bond
        x = self.log_forward
        lower = self.tau * max(math.exp(x) - math.exp(k), 0.0)
        upper = self.tau * math.exp(x)
        if v < lower - _BOUNDS_TOL or v > upper + _BOUNDS_TOL:
            raise ConsistencyError(
                f"forward price {v:.6e} violates the static bounds "
                f"[{lower:.6e}, {upper:.6e}] beyond {_BOUNDS_TOL:g}"
            )
        return v

    def implied_vol(self, k: float) -> float:
        """Black implied volatility of the exact forward price at strike k."""
        v = self.forward_price(k)
        return implied_vol_from_price(
            v, self.log_forward, k, self.T - self.t, self.tau
        )


def caplet_price_u(
    params: QouParams, spec: ContractSpec, y: float, quad: QuadratureConfig | None = None
) -> float:
    """Spot caplet price by Fourier inversion for a single contract."""
    pricer = CapletTransformPricer(params, spec.t, spec.T, spec.tbar, y, quad)
    return pricer.price_u(spec.k)


def forward_caplet_price_exact(
    params: QouParams, spec: ContractSpec, y: float, quad: QuadratureConfig | None = None
) -> float:
    """Tbar-forward caplet price for a single contract."""
    pricer = CapletTransformPricer(params, spec.t, spec.T, spec.tbar, y, quad)
    return pricer.forward_price(spec.k)


def exact_implied_vol(
    params: QouParams, spec: ContractSpec, y: float, quad: QuadratureConfig | None = None
) -> float:
    """Black implied volatility of the exact caplet price."""
    pricer = CapletTransformPricer(params, spec.t, spec.T, spec.tbar, y, quad)
    return pricer.implied_vol(spec.k)
