"""Closed-form implied-volatility expansion for quadratic-model caplets.

The forward rate's log follows a local-stochastic-volatility dynamic whose
generator has four state-dependent coefficients (named ``c``, ``f``, ``g``,
``h``): ``c`` multiplies the log-forward convexity pair, ``f`` and ``g`` the
factor drift and squared diffusion, and ``h`` the cross term.  Expanding the
coefficients to second order around a frozen point (x, y) yields explicit
implied-volatility terms: a leading root-mean-square level, a first-order
skew correction, and a second-order curvature correction that is exactly
quadratic in log-moneyness.

All time integrals (simple prefix integrals and ordered double integrals)
are evaluated on one shared uniform grid per contract with composite Simpson
and cumulative prefix sums, so a full strike sweep reuses a single table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .bonds import ContractSpec, curve_gh_grid
from .errors import ArgumentError, DegenerateDiffusionError
from .quadrature import cumulative_simpson, simpson
from .riccati import QouParams

_COEFF_NAMES = ("c", "f", "g", "h")


@dataclass(frozen=True)
class TaylorCoeff:
    """One Taylor coefficient of a generator coefficient at the frozen point."""

    chi: str
    i: int
    j: int
    value: float

    def __post_init__(self) -> None:
        if self.chi not in _COEFF_NAMES:
            raise ArgumentError(f"chi must be one of {_COEFF_NAMES}, got {self.chi!r}")
        if self.i < 0 or self.j < 0 or self.i + self.j > 2:
            raise ArgumentError(f"need i, j >= 0 with i + j <= 2, got ({self.i}, {self.j})")


@dataclass(frozen=True)
class HermiteTerm:
    """A scaled Hermite value used by the strike-dependent expansion terms."""

    n: int
    theta: float
    value: float


class GeneratorCoeffs:
    """Evaluators for the generator coefficients bound to a model and dates.

    The reset date may equal the settlement date (zero accrual tenor); in
    that degenerate case the coefficients tied to the accrual curve spread
    (``c`` and ``h``) vanish identically.
    """

    def __init__(self, params: QouParams, T: float, tbar: float, f_nodes: int = 801) -> None:
        if T > tbar:
            raise ArgumentError(f"need reset <= settlement, got T={T}, tbar={tbar}")
        self.params = params
        self.T = T
        self.tbar = tbar
        self.tau = tbar - T
        self.f_nodes = f_nodes

    def _pieces(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        g_near, h_near = curve_gh_grid(self.params, t, self.T)
        g_far, h_far = curve_gh_grid(self.params, t, self.tbar)
        return g_near, h_near, g_far, h_far

    def _spread(self, t: np.ndarray, y: float) -> tuple[np.ndarray, np.ndarray]:
        """Curve-spread slope B(t) = dG + 2*dH*y and its y-derivative half dH."""
        g_near, h_near, g_far, h_far = self._pieces(t)
        dh = h_far - h_near
        return (g_far - g_near) + 2.0 * dh * y, dh

    def c(self, t, x: float, y: float) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.tau == 0.0:
            return np.zeros_like(t)
        slope, _ = self._spread(t, y)
        a = 1.0 + math.exp(-x) / self.tau
        return 0.5 * self.params.delta**2 * a * a * slope * slope

    def f(self, t, x: float, y: float) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        p = self.params
        _, _, g_far, h_far = self._pieces(t)
        return p.kappa * p.theta - p.kappa * y - p.delta**2 * (g_far + 2.0 * h_far * y)

    def g(self, t, x: float, y: float) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.full_like(t, 0.5 * self.params.delta**2)

    def h(self, t, x: float, y: float) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.tau == 0.0:
            return np.zeros_like(t)
        slope, _ = self._spread(t, y)
        a = 1.0 + math.exp(-x) / self.tau
        return self.params.delta**2 * a * slope

    def taylor(self, chi: str, i: int, j: int, t, x: float, y: float) -> np.ndarray:
        """Taylor coefficient chi_{i,j}(t) at the frozen point, i!j!-normalised."""
        if chi not in _COEFF_NAMES:
            raise ArgumentError(f"chi must be one of {_COEFF_NAMES}, got {chi!r}")
        if i < 0 or j < 0 or i + j > 2:
            raise ArgumentError(f"need i, j >= 0 with i + j <= 2, got ({i}, {j})")
        t = np.atleast_1d(np.asarray(t, dtype=float))
        zeros = np.zeros_like(t)
        p = self.params
        d2 = p.delta**2
        if chi == "g":
            return np.full_like(t, 0.5 * d2) if (i, j) == (0, 0) else zeros
        if chi == "f":
            if (i, j) == (0, 0):
                return self.f(t, x, y)
            if (i, j) == (0, 1):
                _, _, _, h_far = self._pieces(t)
                return -p.kappa - 2.0 * d2 * h_far
            return zeros
        if self.tau == 0.0:
            return zeros
        slope, dh = self._spread(t, y)
        e = math.exp(-x) / self.tau
        a = 1.0 + e
        if chi == "c":
            if (i, j) == (0, 0):
                return 0.5 * d2 * a * a * slope * slope
            if (i, j) == (1, 0):
                return -d2 * e * a * slope * slope
            if (i, j) == (2, 0):
                return 0.5 * d2 * slope * slope * (e * e + a * e)
            if (i, j) == (0, 1):
                return 2.0 * d2 * a * a * slope * dh
            if (i, j) == (0, 2):
                return 2.0 * d2 * a * a * dh * dh
            return -4.0 * d2 * a * e * slope * dh  # (1, 1)
        # chi == "h"
        if (i, j) == (0, 0):
            return d2 * a * slope
        if (i, j) == (1, 0):
            return -d2 * e * slope
        if (i, j) == (0, 1):
            return 2.0 * d2 * a * dh
        if (i, j) == (2, 0):
            return 0.5 * d2 * e * slope
        if (i, j) == (1, 1):
            return -2.0 * d2 * e * dh
        return zeros  # (0, 2): slope is affine in y


def eval_coeff(
    chi: str, t: float, x: float, y: float, params: QouParams, T: float, tbar: float
) -> float:
    """Evaluate one generator coefficient at a single (t, x, y)."""
    gen = GeneratorCoeffs(params, T, tbar)
    if chi not in _COEFF_NAMES:
        raise ArgumentError(f"chi must be one of {_COEFF_NAMES}, got {chi!r}")
    return float(getattr(gen, chi)(t, x, y)[0])


def eval_taylor_coeff(
    chi: str,
    i: int,
    j: int,
    t: float,
    x: float,
    y: float,
    params: QouParams,
    T: float,
    tbar: float,
) -> float:
    """Evaluate one Taylor coefficient chi_{i,j} at a single time point."""
    gen = GeneratorCoeffs(params, T, tbar)
    return float(gen.taylor(chi, i, j, t, x, y)[0])


_HERMITE = (
    lambda z: np.ones_like(z) if isinstance(z, np.ndarray) else 1.0,
    lambda z: 2.0 * z,
    lambda z: 4.0 * z * z - 2.0,
    lambda z: 8.0 * z**3 - 12.0 * z,
    lambda z: 16.0 * z**4 - 48.0 * z * z + 12.0,
)


def scaled_hermite(n: int, x: float, k: float, sigma0: float, ttm: float) -> float:
    """Scaled Hermite term of order n at log-forward x, log-strike k.

    The argument is the normalised centred moneyness; each order carries a
    factor (-1 / (sigma0 * sqrt(2*ttm)))^n in front of the classical
    physicists' Hermite polynomial.
    """
    if not 0 <= n <= 4:
        raise ArgumentError(f"scaled-Hermite order must be 0..4, got {n}")
    if sigma0 <= 0.0 or ttm <= 0.0:
        raise ArgumentError(f"need sigma0 > 0 and ttm > 0, got {sigma0}, {ttm}")
    width = sigma0 * math.sqrt(2.0 * ttm)
    theta = (x - k - 0.5 * sigma0 * sigma0 * ttm) / width
    return (-1.0 / width) ** n * float(_HERMITE[n](theta))


@dataclass(frozen=True)
class TimeIntegralTable:
    """Named time integrals shared by every strike of one contract.

    ``singles`` holds integrals over [t, T] of one Taylor coefficient times
    prefix integrals; ``doubles`` holds time-ordered double integrals where
    the first name is the earlier-time factor (inner prefix) and the second
    the later-time factor (outer integrand).
    """

    t: float
    T: float
    grid_size: int
    singles: Mapping[str, float]
    doubles: Mapping[str, float]

    def __getitem__(self, key: str) -> float:
        if key in self.singles:
            return self.singles[key]
        return self.doubles[key]


def table_from_callable(
    taylor: Callable[[str, int, int, np.ndarray], np.ndarray],
    t: float,
    T: float,
    grid_size: int = 401,
) -> TimeIntegralTable:
    """Build the integral table from any Taylor-coefficient evaluator.

    `taylor(chi, i, j, s)` must return the coefficient values on the time
    array `s`.  Exposed separately from the model-bound builder so synthetic
    coefficient sets (e.g. constants) can exercise the same machinery.
    """
    if grid_size < 101 or grid_size % 2 == 0:
        raise ArgumentError(f"grid_size must be odd and >= 101, got {grid_size}")
    if not t < T:
        raise ArgumentError(f"need t < T, got {t}, {T}")
    s = np.linspace(t, T, grid_size)
    h = (T - t) / (grid_size - 1)

    c00 = taylor("c", 0, 0, s)
    c10 = taylor("c", 1, 0, s)
    c20 = taylor("c", 2, 0, s)
    c01 = taylor("c", 0, 1, s)
    c02 = taylor("c", 0, 2, s)
    c11 = taylor("c", 1, 1, s)
    f00 = taylor("f", 0, 0, s)
    f10 = taylor("f", 1, 0, s)
    f01 = taylor("f", 0, 1, s)
    g00 = taylor("g", 0, 0, s)
    h00 = taylor("h", 0, 0, s)
    h10 = taylor("h", 1, 0, s)
    h01 = taylor("h", 0, 1, s)
    for name, arr in (("c00", c00), ("f00", f00), ("g00", g00), ("h00", h00)):
        if not np.all(np.isfinite(arr)):
            bad = int(np.argmin(np.isfinite(arr)))
            raise ArgumentError(f"non-finite {name} at time {s[bad]:g}")

    # Prefix integrals from the contract start to each grid time.
    C = cumulative_simpson(c00, h)
    F = cumulative_simpson(f00, h)
    Hh = cumulative_simpson(h00, h)
    Gg = cumulative_simpson(g00, h)

    def single(values: np.ndarray) -> float:
        return float(simpson(values, h))

    def ordered(inner: np.ndarray, outer: np.ndarray) -> float:
        """Time-ordered double integral: earlier factor `inner`, later `outer`."""
        return float(simpson(outer * cumulative_simpson(inner, h), h))

    singles = {
        "c00": single(c00),
        "c10_C": single(c10 * C),
        "c01_F": single(c01 * F),
        "c01_H": single(c01 * Hh),
        "c20_CC": single(c20 * C * C),
        "c20_C": single(c20 * C),
        "c11_CH": single(c11 * C * Hh),
        "c11_CF": single(c11 * C * F),
        "c11_H": single(c11 * Hh),
        "c02_HH": single(c02 * Hh * Hh),
        "c02_HF": single(c02 * Hh * F),
        "c02_FF": single(c02 * F * F),
        "c02_G": single(c02 * Gg),
    }
    doubles = {
        "c10C.c10C": ordered(c10 * C, c10 * C),
        "c10C.c10": ordered(c10 * C, c10),
        "c10C.c01H": ordered(c10 * C, c01 * Hh),
        "c10C.c01F": ordered(c10 * C, c01 * F),
        "c10H.c01": ordered(c10 * Hh, c01),
        "c01H.c10C": ordered(c01 * Hh, c10 * C),
        "c01F.c10C": ordered(c01 * F, c10 * C),
        "c01H.c10": ordered(c01 * Hh, c10),
        "c01F.c10": ordered(c01 * F, c10),
        "f10C.c01": ordered(f10 * C, c01),
        "h10C.c01": ordered(h10 * C, c01),
        "c01H.c01H": ordered(c01 * Hh, c01 * Hh),
        "c01F.c01H": ordered(c01 * F, c01 * Hh),
        "c01H.c01F": ordered(c01 * Hh, c01 * F),
        "c01G.c01": ordered(c01 * Gg, c01),
        "c01F.c01F": ordered(c01 * F, c01 * F),
        "f01H.c01": ordered(f01 * Hh, c01),
        "f01F.c01": ordered(f01 * F, c01),
        "h01H.c01": ordered(h01 * Hh, c01),
        "h01F.c01": ordered(h01 * F, c01),
    }
    return TimeIntegralTable(t=t, T=T, grid_size=grid_size, singles=singles, doubles=doubles)


def nested_time_integrals(
    contract: ContractSpec,
    params: QouParams,
    x: float,
    y: float,
    grid_size: int = 401,
) -> TimeIntegralTable:
    """Integral table for one contract with coefficients frozen at (x, y)."""
    gen = GeneratorCoeffs(params, contract.T, contract.tbar)
    return table_from_callable(
        lambda chi, i, j, s: gen.taylor(chi, i, j, s, x, y),
        contract.t,
        contract.T,
        grid_size,
    )


@dataclass(frozen=True)
class IvApprox:
    """Implied-volatility expansion terms and their partial sums."""

    sigma0: float
    sigma1: float
    sigma2: float
    sigma10: float
    sigma01: float
    sigma20: float
    sigma11: float
    sigma02: float
    sbar: tuple[float, ...]


def sigma0_from_table(table: TimeIntegralTable) -> float:
    """Leading-order implied volatility: root-mean-square diffusion level."""
    ttm = table.T - table.t
    level = 2.0 * table.singles["c00"] / ttm
    if not level > 0.0:
        raise DegenerateDiffusionError(
            f"mean diffusion level {level:g} is not positive; "
            "the forward-rate volatility is degenerate on [t, T]"
        )
    return math.sqrt(level)


def sigma0(contract: ContractSpec, params: QouParams, x: float, y: float,
           table: TimeIntegralTable | None = None, grid_size: int = 401) -> float:
    """Leading-order implied volatility for one contract at frozen (x, y)."""
    if table is None:
        table = nested_time_integrals(contract, params, x, y, grid_size)
    return sigma0_from_table(table)


def _hermites(x: float, k: float, s0: float, ttm: float) -> tuple[float, ...]:
    return tuple(scaled_hermite(n, x, k, s0, ttm) for n in range(5))


def _sigma1_parts(table: TimeIntegralTable, s0: float, H: tuple[float, ...]) -> tuple[float, float]:
    ttm = table.T - table.t
    norm = 1.0 / (ttm * s0)
    s10 = norm * table["c10_C"] * (2.0 * H[1] - 1.0)
    s01 = norm * (table["c01_F"] + table["c01_H"] * H[1])
    return s10, s01


def _sigma2_parts(
    table: TimeIntegralTable, s0: float, s10: float, s01: float, H: tuple[float, ...]
) -> tuple[float, float, float]:
    ttm = table.T - table.t
    norm = 1.0 / (ttm * s0)
    convexity_debit = ttm * s0 * (H[2] - H[1]) + 1.0 / s0
    s20 = (
        norm
        * (
            table["c20_CC"] * (4.0 * H[2] - 4.0 * H[1] + 1.0)
            + 2.0 * table["c20_C"]
            + table["c10C.c10C"] * (4.0 * H[4] - 8.0 * H[3] + 5.0 * H[2] - H[1])
            + table["c10C.c10"] * (6.0 * H[2] - 6.0 * H[1] + 1.0)
        )
        - 0.5 * s10 * s10 * convexity_debit
    )
    s11 = (
        norm
        * (
            2.0 * table["c11_CH"] * H[2]
            + (2.0 * table["c11_CF"] - table["c11_CH"]) * H[1]
            - table["c11_CF"]
            + table["c11_H"]
            + 2.0 * table["c10C.c01H"] * H[4]
            + (2.0 * table["c10C.c01F"] - 3.0 * table["c10C.c01H"]) * H[3]
            + (table["c10C.c01H"] - 3.0 * table["c10C.c01F"] + table["c10H.c01"]) * H[2]
            + (table["c10C.c01F"] - table["c10H.c01"]) * H[1]
            + 2.0 * table["c01H.c10C"] * H[4]
            + (2.0 * table["c01F.c10C"] - 3.0 * table["c01H.c10C"]) * H[3]
            + (table["c01H.c10C"] - 3.0 * table["c01F.c10C"] + 3.0 * table["c01H.c10"]) * H[2]
            + (2.0 * table["c01F.c10"] + table["c01F.c10C"] - 2.0 * table["c01H.c10"]) * H[1]
            - table["c01F.c10"]
            + table["f10C.c01"] * (2.0 * H[1] - 1.0)
            + table["h10C.c01"] * (2.0 * H[2] - H[1])
        )
        - s10 * s01 * convexity_debit
    )
    s02 = (
        norm
        * (
            table["c02_HH"] * H[2]
            + 2.0 * table["c02_HF"] * H[1]
            + table["c02_FF"]
            + 2.0 * table["c02_G"]
            + table["c01H.c01H"] * H[4]
            + (table["c01F.c01H"] + table["c01H.c01F"] - table["c01H.c01H"]) * H[3]
            + (
                2.0 * table["c01G.c01"]
                + table["c01F.c01F"]
                - table["c01F.c01H"]
                - table["c01H.c01F"]
            )
            * H[2]
            - (2.0 * table["c01G.c01"] + table["c01F.c01F"]) * H[1]
            + table["f01H.c01"] * H[1]
            + table["f01F.c01"]
            + table["h01H.c01"] * H[2]
            + table["h01F.c01"] * H[1]
        )
        - 0.5 * s01 * s01 * convexity_debit
    )
    return s20, s11, s02


def sigma1(
    contract: ContractSpec,
    params: QouParams,
    x: float,
    y: float,
    k: float,
    table: TimeIntegralTable | None = None,
    grid_size: int = 401,
) -> tuple[float, float, float]:
    """First-order correction and its two parts (slope-in-x, slope-in-y)."""
    if table is None:
        table = nested_time_integrals(contract, params, x, y, grid_size)
    s0 = sigma0_from_table(table)
    H = _hermites(x, k, s0, table.T - table.t)
    s10, s01 = _sigma1_parts(table, s0, H)
    return s10 + s01, s10, s01


def sigma2(
    contract: ContractSpec,
    params: QouParams,
    x: float,
    y: float,
    k: float,
    table: TimeIntegralTable | None = None,
    grid_size: int = 401,
) -> tuple[float, float, float, float]:
    """Second-order correction and its three parts."""
    if table is None:
        table = nested_time_integrals(contract, params, x, y, grid_size)
    s0 = sigma0_from_table(table)
    H = _hermites(x, k, s0, table.T - table.t)
    s10, s01 = _sigma1_parts(table, s0, H)
    s20, s11, s02 = _sigma2_parts(table, s0, s10, s01, H)
    return s20 + s11 + s02, s20, s11, s02


def ivol_approx(
    order: int,
    contract: ContractSpec,
    params: QouParams,
    x: float,
    y: float,
    k: float,
    table: TimeIntegralTable | None = None,
    grid_size: int = 401,
) -> IvApprox:
    """Implied-volatility approximations up to the requested order (0..2)."""
    if not 0 <= order <= 2:
        raise ArgumentError(f"expansion order must be 0, 1, or 2, got {order}")
    if table is None:
        table = nested_time_integrals(contract, params, x, y, grid_size)
    s0 = sigma0_from_table(table)
    s1 = s10 = s01 = 0.0
    s2 = s20 = s11 = s02 = 0.0
    if order >= 1:
        H = _hermites(x, k, s0, table.T - table.t)
        s10, s01 = _sigma1_parts(table, s0, H)
        s1 = s10 + s01
        if order >= 2:
            s20, s11, s02 = _sigma2_parts(table, s0, s10, s01, H)
            s2 = s20 + s11 + s02
    sbar = tuple((s0, s0 + s1, s0 + s1 + s2)[: order + 1])
    return IvApprox(
        sigma0=s0, sigma1=s1, sigma2=s2,
        sigma10=s10, sigma01=s01, sigma20=s20, sigma11=s11, sigma02=s02,
        sbar=sbar,
    )
