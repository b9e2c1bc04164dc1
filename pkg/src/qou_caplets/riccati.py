"""Riccati system for the quadratic Ornstein-Uhlenbeck short-rate model.

The model: a one-dimensional OU factor dY = kappa*(theta - Y) dt + delta dW
drives the short rate r = q + Y^2 (kappa, delta > 0; theta, q >= 0).  The
transform

    Gamma(t, y; T, nu, omega) = E[ exp(-int_t^T r(Y_s) ds
                                       + nu*Y_T + omega*Y_T^2) | Y_t = y ]

is exponentially quadratic, Gamma = exp(-F - G*y - H*y^2), where (F, G, H)
solve the terminal-value system (d/dt along calendar time)

    F' = (delta^2/2) G^2 - delta^2 H - kappa*theta G - q,   F(T) = 0,
    G' = (2 delta^2 H + kappa) G - 2 kappa*theta H,         G(T) = -nu,
    H' = 2 delta^2 H^2 + 2 kappa H - 1,                     H(T) = -omega.

G and H admit closed forms as ratios of seven elementary functions of the
horizon u = T - t (q_functions below); F is a one-dimensional integral of an
elementary integrand evaluated by composite Simpson.  A classic fixed-step
RK4 integrator (solve_numeric) is kept as an independent oracle: on any
disagreement beyond 1e-6 the numeric path is authoritative and the closed
forms are the suspect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DivergenceError, DomainOverflowError, SingularityError
from .quadrature import simpson

# exp overflows just above 709; leave margin for downstream products.
_MAX_EXP_ARG = 700.0
# Relative floor for |Q4*omega + Q5| before a node is declared singular.
_SINGULARITY_RTOL = 1e-12


@dataclass(frozen=True)
class QouParams:
    """Model parameters for dY = kappa*(theta - Y) dt + delta dW, r = q + Y^2.

    Attributes
    ----------
    kappa : float
        Mean-reversion speed, > 0.
    theta : float
        Mean-reversion level, >= 0.
    delta : float
        Factor volatility, > 0.
    q : float
        Floor of the short rate, >= 0.
    y0 : float
        Factor value at the evaluation date.
    """

    kappa: float
    theta: float
    delta: float
    q: float
    y0: float

    def __post_init__(self) -> None:
        vals = (self.kappa, self.theta, self.delta, self.q, self.y0)
        if not all(math.isfinite(v) for v in vals):
            raise ArgumentError(f"model parameters must be finite, got {vals}")
        if self.kappa <= 0.0:
            raise ArgumentError(f"kappa must be > 0, got {self.kappa}")
        if self.delta <= 0.0:
            raise ArgumentError(f"delta must be > 0, got {self.delta}")
        if self.theta < 0.0:
            raise ArgumentError(f"theta must be >= 0, got {self.theta}")
        if self.q < 0.0:
            raise ArgumentError(f"q must be >= 0, got {self.q}")

    @property
    def mu(self) -> float:
        """Characteristic decay rate 2*sqrt(kappa^2 + 2*delta^2) (> 2*kappa)."""
        return 2.0 * math.sqrt(self.kappa**2 + 2.0 * self.delta**2)

    def short_rate(self, y: float | np.ndarray) -> float | np.ndarray:
        """Short rate r = q + y^2."""
        return self.q + np.square(y)


@dataclass(frozen=True)
class TerminalData:
    """Terminal coefficients (nu, omega) of the transform exponent."""

    nu: complex
    omega: complex

    def __post_init__(self) -> None:
        for name, v in (("nu", self.nu), ("omega", self.omega)):
            if not (math.isfinite(complex(v).real) and math.isfinite(complex(v).imag)):
                raise ArgumentError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class RiccatiValue:
    """Solution triple (f, g, h) of the Riccati system at a given time."""

    f: complex
    g: complex
    h: complex


@dataclass(frozen=True)
class QFunctions:
    """The seven elementary horizon functions behind the G/H closed forms."""

    q1: float
    q2: float
    q3: float
    q4: float
    q5: float
    q6: float
    q7: float
    mu: float


def _check_horizon(mu: float, u: np.ndarray | float) -> None:
    umax = float(np.max(u))
    if mu * umax > _MAX_EXP_ARG:
        raise DomainOverflowError(
            f"horizon {umax:g} overflows the coefficient functions "
            f"(mu*horizon = {mu * umax:.3g} exceeds {_MAX_EXP_ARG:g})"
        )


def _q_arrays(params: QouParams, u: np.ndarray) -> tuple[np.ndarray, ...]:
    """Vectorized q1..q7 at horizons u >= 0.  Returns seven float arrays."""
    mu = params.mu
    kappa, theta, delta = params.kappa, params.theta, params.delta
    _check_horizon(mu, u)
    eh = np.exp(0.5 * mu * u)  # e^{mu u / 2}
    ee = eh * eh  # e^{mu u}
    q1 = 2.0 * mu * eh
    q4 = 4.0 * delta**2 * (1.0 - ee)
    q5 = mu * (ee + 1.0) + 2.0 * kappa * (ee - 1.0)
    q6 = mu * (ee + 1.0) - 2.0 * kappa * (ee - 1.0)
    q7 = 2.0 * (1.0 - ee)
    # Half-horizon values feed q3: e^{mu (u/2)} is just eh again.
    q7_half = 2.0 * (1.0 - eh)
    q5_half = mu * (eh + 1.0) + 2.0 * kappa * (eh - 1.0)
    q2 = (8.0 * delta**2 / mu) * (eh - 1.0) ** 2 * (-(kappa**2) * theta / delta**2) \
        - kappa * theta * q4 / delta**2
    q3 = -(kappa * theta / delta**2) * (
        (kappa / mu) * q7_half * q5_half - q1 + q5
    )
    return q1, q2, q3, q4, q5, q6, q7


def q_functions(params: QouParams, t: float) -> QFunctions:
    """Evaluate the seven elementary functions at horizon t >= 0."""
    if not math.isfinite(t) or t < 0.0:
        raise ArgumentError(f"horizon must be finite and >= 0, got {t}")
    arrs = _q_arrays(params, np.asarray(float(t)))
    return QFunctions(*(float(a) for a in arrs), mu=params.mu)


def gh_closed_form(
    params: QouParams,
    u: np.ndarray | float,
    nu: np.ndarray | complex,
    omega: np.ndarray | complex,
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form (G, H) at horizons u for terminal data (nu, omega).

    Broadcasts u against (nu, omega).  Raises SingularityError when any
    denominator Q4*omega + Q5 falls below the relative floor.
    """
    u = np.asarray(u, dtype=float)
    nu = np.asarray(nu)
    omega = np.asarray(omega)
    q1, q2, q3, q4, q5, q6, q7 = _q_arrays(params, u)
    denom = q4 * omega + q5
    floor = _SINGULARITY_RTOL * (1.0 + np.abs(q5))
    bad = np.abs(denom) < floor
    if np.any(bad):
        m = float(np.min(np.abs(np.asarray(denom)[bad])))
        raise SingularityError(
            f"coefficient denominator |Q4*omega + Q5| = {m:.3e} fell below "
            f"the singularity floor at {int(np.count_nonzero(bad))} node(s)"
        )
    g = -(q1 * nu + q2 * omega + q3) / denom
    h = -(q6 * omega + q7) / denom
    return g, h


def _f_integrand(params: QouParams, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Integrand of the F equation: delta^2 G^2 / 2 - delta^2 H - kappa theta G - q."""
    d2 = params.delta**2
    return 0.5 * d2 * g * g - d2 * h - params.kappa * params.theta * g - params.q


def solve_closed_form(
    params: QouParams,
    t: float,
    T: float,
    data: TerminalData,
    f_nodes: int = 801,
) -> RiccatiValue:
    """Solve the system at time t for maturity T via the closed forms.

    G and H come from the elementary-function ratios at horizon T - t; F is
    the composite-Simpson integral of the elementary integrand over [t, T]
    (f_nodes odd, default 801), with F(T) = 0.
    """
    if not (math.isfinite(t) and math.isfinite(T)) or t > T:
        raise ArgumentError(f"need t <= T with finite dates, got t={t}, T={T}")
    if t == T:
        return RiccatiValue(f=0.0 + 0.0j, g=-complex(data.nu), h=-complex(data.omega))
    s = np.linspace(t, T, f_nodes)
    g_s, h_s = gh_closed_form(params, T - s, complex(data.nu), complex(data.omega))
    h_step = (T - t) / (f_nodes - 1)
    f_val = -simpson(_f_integrand(params, g_s, h_s), h_step)
    return RiccatiValue(f=complex(f_val), g=complex(g_s[0]), h=complex(h_s[0]))


def closed_form_batch(
    params: QouParams,
    t: float,
    T: float,
    nu: np.ndarray,
    omega: np.ndarray,
    f_nodes: int = 801,
    chunk: int = 4096,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized closed-form solve for arrays of terminal data.

    nu and omega are equal-length complex arrays; returns (F, G, H) arrays of
    the same length, each evaluated at time t for maturity T.  The horizon
    grid is shared across the batch, so the elementary functions are computed
    once; terminal data are processed in chunks to bound memory.
    """
    if not (math.isfinite(t) and math.isfinite(T)) or t > T:
        raise ArgumentError(f"need t <= T with finite dates, got t={t}, T={T}")
    nu = np.asarray(nu, dtype=complex)
    omega = np.asarray(omega, dtype=complex)
    if nu.shape != omega.shape or nu.ndim != 1:
        raise ArgumentError("nu and omega must be equal-length 1-d arrays")
    n = nu.size
    if t == T:
        return np.zeros(n, dtype=complex), -nu.copy(), -omega.copy()
    s = np.linspace(t, T, f_nodes)
    u = (T - s)[:, None]
    q1, q2, q3, q4, q5, q6, q7 = _q_arrays(params, u)
    h_step = (T - t) / (f_nodes - 1)
    d2 = params.delta**2
    kt = params.kappa * params.theta
    f_out = np.empty(n, dtype=complex)
    g_out = np.empty(n, dtype=complex)
    h_out = np.empty(n, dtype=complex)
    floor = _SINGULARITY_RTOL * (1.0 + np.abs(q5))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        om = omega[None, lo:hi]
        nn = nu[None, lo:hi]
        denom = q4 * om + q5
        bad = np.abs(denom) < floor
        if np.any(bad):
            j = int(np.nonzero(np.any(bad, axis=0))[0][0]) + lo
            raise SingularityError(
                f"coefficient denominator vanished for terminal data index {j} "
                f"(nu={nu[j]:.6g}, omega={omega[j]:.6g})"
            )
        g = -(q1 * nn + q2 * om + q3) / denom
        h = -(q6 * om + q7) / denom
        integrand = 0.5 * d2 * g * g - d2 * h - kt * g - params.q
        f_out[lo:hi] = -simpson(integrand, h_step, axis=0)
        g_out[lo:hi] = g[0]
        h_out[lo:hi] = h[0]
    return f_out, g_out, h_out


def riccati_rhs(
    params: QouParams,
    g: np.ndarray | complex,
    h: np.ndarray | complex,
) -> tuple[np.ndarray | complex, np.ndarray | complex, np.ndarray | complex]:
    """Calendar-time derivatives (F', G', H') of the terminal-value system."""
    d2 = params.delta**2
    kt = params.kappa * params.theta
    df = 0.5 * d2 * g * g - d2 * h - kt * g - params.q
    dg = (2.0 * d2 * h + params.kappa) * g - 2.0 * kt * h
    dh = 2.0 * d2 * h * h + 2.0 * params.kappa * h - 1.0
    return df, dg, dh


def _rk4_backward(
    params: QouParams,
    t: float,
    T: float,
    nu: np.ndarray,
    omega: np.ndarray,
    steps: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Classic RK4 from T down to t; state arrays follow the shape of nu."""
    f = np.zeros_like(nu, dtype=complex)
    g = -np.asarray(nu, dtype=complex).copy()
    h = -np.asarray(omega, dtype=complex).copy()
    dt = (t - T) / steps
    time = T
    for i in range(steps):
        df1, dg1, dh1 = riccati_rhs(params, g, h)
        df2, dg2, dh2 = riccati_rhs(params, g + 0.5 * dt * dg1, h + 0.5 * dt * dh1)
        df3, dg3, dh3 = riccati_rhs(params, g + 0.5 * dt * dg2, h + 0.5 * dt * dh2)
        df4, dg4, dh4 = riccati_rhs(params, g + dt * dg3, h + dt * dh3)
        f = f + (dt / 6.0) * (df1 + 2.0 * df2 + 2.0 * df3 + df4)
        g = g + (dt / 6.0) * (dg1 + 2.0 * dg2 + 2.0 * dg3 + dg4)
        h = h + (dt / 6.0) * (dh1 + 2.0 * dh2 + 2.0 * dh3 + dh4)
        time = T + (i + 1) * dt
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
            raise DivergenceError(f"numeric solve diverged near time {time:.6g}")
    return f, g, h


def solve_numeric(
    params: QouParams,
    t: float,
    T: float,
    data: TerminalData,
    steps: int = 1024,
) -> RiccatiValue:
    """Independent oracle: classic fixed-step RK4 for the same system.

    steps >= 16.  At t == T the terminal data are returned unchanged.  This
    path is authoritative whenever it disagrees with the closed forms by more
    than 1e-6 componentwise.
    """
    if steps < 16:
        raise ArgumentError(f"steps must be >= 16, got {steps}")
    if not (math.isfinite(t) and math.isfinite(T)) or t > T:
        raise ArgumentError(f"need t <= T with finite dates, got t={t}, T={T}")
    if t == T:
        return RiccatiValue(f=0.0 + 0.0j, g=-complex(data.nu), h=-complex(data.omega))
    nu = np.asarray(complex(data.nu))
    omega = np.asarray(complex(data.omega))
    f, g, h = _rk4_backward(params, t, T, nu, omega, steps)
    return RiccatiValue(f=complex(f), g=complex(g), h=complex(h))


def solve_numeric_batch(
    params: QouParams,
    t: float,
    T: float,
    nu: np.ndarray,
    omega: np.ndarray,
    steps: int = 1024,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """RK4 oracle vectorized over arrays of terminal data."""
    if steps < 16:
        raise ArgumentError(f"steps must be >= 16, got {steps}")
    if not (math.isfinite(t) and math.isfinite(T)) or t > T:
        raise ArgumentError(f"need t <= T with finite dates, got t={t}, T={T}")
    nu = np.asarray(nu, dtype=complex)
    omega = np.asarray(omega, dtype=complex)
    if t == T:
        return np.zeros_like(nu), -nu.copy(), -omega.copy()
    return _rk4_backward(params, t, T, nu, omega, steps)
