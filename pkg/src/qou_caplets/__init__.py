"""Caplet pricing under a quadratic Ornstein-Uhlenbeck short-rate model.

A single Gaussian factor Y follows dY = kappa*(theta - Y) dt + delta dW and
the short rate is r = q + Y^2, so rates stay at or above q.  Zero-coupon
bonds and a caplet transform are exponentially quadratic in Y with
coefficients solving a Riccati system in closed form; caplets are priced two
independent ways (a Fourier transform pricer and a Monte Carlo oracle) and
their Black implied volatility is approximated by an explicit second-order
expansion in log-moneyness.
"""

from .errors import (
    ArbitrageBoundsError,
    ArgumentError,
    ConfigError,
    ConsistencyError,
    ContourError,
    ConvergenceError,
    DegenerateDiffusionError,
    DivergenceError,
    DomainOverflowError,
    NonPositiveForwardError,
    QouError,
    QuadratureError,
    SingularityError,
)
from .riccati import (
    QFunctions,
    QouParams,
    RiccatiValue,
    TerminalData,
    q_functions,
    solve_closed_form,
    solve_numeric,
)
from .bonds import (
    ContractSpec,
    CurveCoeffs,
    bond_price,
    bond_vol_gamma,
    curve_coeffs,
    curve_gh_grid,
    forward_exponent_delta,
    gamma_fn,
    log_forward_rate_xi,
)
from .black import (
    BlackInputs,
    black_price,
    black_vega,
    implied_vol_from_price,
)
from .fourier import (
    CapletTransformPricer,
    QuadratureConfig,
    caplet_price_u,
    caplet_psi_hat,
    exact_implied_vol,
    forward_caplet_price_exact,
)
from .montecarlo import (
    McConfig,
    McEstimate,
    mc_bond_price,
    mc_caplet_price,
    mc_forward_caplet_price,
    simulate_factor,
    transition_moments,
)
from .expansion import (
    GeneratorCoeffs,
    IvApprox,
    TimeIntegralTable,
    eval_coeff,
    eval_taylor_coeff,
    ivol_approx,
    nested_time_integrals,
    scaled_hermite,
    sigma0,
    sigma1,
    sigma2,
    table_from_callable,
)

__version__ = "0.1.0"

from .experiments import (  # noqa: E402  (needs __version__ above)
    ErrorCell,
    ExperimentConfig,
    RunReport,
    SingleContract,
    SmileRow,
    apply_overrides,
    config_from_mapping,
    load_config,
    run_error_surface,
    run_mc_check,
    run_price,
    run_smile,
)

__all__ = [
    "QouParams",
    "TerminalData",
    "RiccatiValue",
    "QFunctions",
    "q_functions",
    "solve_closed_form",
    "solve_numeric",
    "ContractSpec",
    "CurveCoeffs",
    "gamma_fn",
    "curve_coeffs",
    "curve_gh_grid",
    "bond_price",
    "bond_vol_gamma",
    "forward_exponent_delta",
    "log_forward_rate_xi",
    "BlackInputs",
    "black_price",
    "black_vega",
    "implied_vol_from_price",
    "QuadratureConfig",
    "CapletTransformPricer",
    "caplet_psi_hat",
    "caplet_price_u",
    "forward_caplet_price_exact",
    "exact_implied_vol",
    "McConfig",
    "McEstimate",
    "transition_moments",
    "simulate_factor",
    "mc_bond_price",
    "mc_caplet_price",
    "mc_forward_caplet_price",
    "GeneratorCoeffs",
    "IvApprox",
    "TimeIntegralTable",
    "eval_coeff",
    "eval_taylor_coeff",
    "scaled_hermite",
    "table_from_callable",
    "nested_time_integrals",
    "sigma0",
    "sigma1",
    "sigma2",
    "ivol_approx",
    "ExperimentConfig",
    "SingleContract",
    "SmileRow",
    "ErrorCell",
    "RunReport",
    "config_from_mapping",
    "load_config",
    "apply_overrides",
    "run_smile",
    "run_error_surface",
    "run_price",
    "run_mc_check",
    "QouError",
    "ArgumentError",
    "ConfigError",
    "DomainOverflowError",
    "SingularityError",
    "DivergenceError",
    "ConsistencyError",
    "NonPositiveForwardError",
    "ContourError",
    "QuadratureError",
    "ArbitrageBoundsError",
    "ConvergenceError",
    "DegenerateDiffusionError",
    "__version__",
]
