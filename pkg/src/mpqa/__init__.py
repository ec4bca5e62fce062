"""Quasi-rational approximation of the modified Bessel function I_nu and the
half-order Caputo equation D^{1/2} y = I_nu."""

from .approximant import (
    ApproximantParams,
    evaluate_approximant,
    f_factor,
    q_closed_form,
    solve_params,
    taylor_coeffs_approximant,
)
from .error_analysis import (
    ErrorReport,
    ErrorSurface,
    asymptotic_residual,
    global_error,
    lambda_star,
    optimize_lambda,
    punctual_error,
    sweep_error_surface,
)
from .fde import (
    FdeConfig,
    FdeVerificationRecord,
    approx_solution_magnitude,
    caputo_half_derivative_numeric,
    exact_solution_magnitude,
    phase_factor,
    solution_derivative,
)
from .reference import (
    SeriesConfig,
    bessel_i_asymptotic,
    bessel_i_prime,
    bessel_i_series,
    gamma,
)

__version__ = "0.1.0"
