"""Reference evaluation of the gamma function and the modified Bessel function I_nu.

The ascending power series is the ground truth for every accuracy claim in the
package: all of its terms are positive, so summation never cancels and the
relative error stays at the level of the truncation tolerance.  The Hankel
asymptotic expansion is provided as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, NumericOverflowError

# log(DBL_MAX); e**x overflows beyond this.
MAX_EXP_ARG = math.log(np.finfo(float).max)
# Largest z with a finite Gamma(z).
GAMMA_MAX_ARG = 171.6243769563027


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy for the power series."""

    rel_tol: float = 1e-15
    max_terms: int = 400

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 10:
            raise DomainError(f"max_terms must be >= 10, got {self.max_terms}")


DEFAULT_SERIES = SeriesConfig()


def gamma(z: float) -> float:
    """Gamma(z) for real z > 0."""
    z = float(z)
    if not z > 0:
        raise DomainError(f"gamma requires z > 0, got {z}")
    if z > GAMMA_MAX_ARG:
        raise NumericOverflowError(f"gamma({z}) overflows; use log_gamma")
    return math.gamma(z)


def log_gamma(z: float) -> float:
    """log Gamma(z) for real z > 0, usable past the overflow point of gamma."""
    z = float(z)
    if not z > 0:
        raise DomainError(f"log_gamma requires z > 0, got {z}")
    return math.lgamma(z)


def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def bessel_i_series(nu, x, cfg: SeriesConfig = DEFAULT_SERIES):
    """I_nu(x) from the ascending series.

    Accepts a scalar or an array of arguments; the return type follows the
    input.  Terms are generated by the ratio
    ``t_{k+1} / t_k = (x/2)**2 / ((k+1)(k+nu+1))`` so no factorial or gamma
    value is ever formed beyond Gamma(nu+1).
    """
    nu = float(nu)
    if not nu > -1:
        raise DomainError(f"series order must satisfy nu > -1, got {nu}")
    x, scalar = _as_float_array(x)
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise DomainError("bessel_i_series requires finite x >= 0")
    if np.any(x > MAX_EXP_ARG):
        raise NumericOverflowError(f"I_nu(x) overflows for x > {MAX_EXP_ARG:.4f}")
    if nu < 0 and np.any(x == 0):
        raise DomainError("I_nu(0) is infinite for negative non-integer order")

    half = 0.5 * x
    term = np.power(half, nu) / gamma(nu + 1.0)
    total = term.copy()
    y = half * half
    for k in range(1, cfg.max_terms + 1):
        term = term * y / (k * (k + nu))
        total += term
        if np.all(term <= cfg.rel_tol * total):
            break
    else:
        raise ConvergenceError(
            f"I_{nu} series did not converge in {cfg.max_terms} terms "
            f"(max x = {float(np.max(x)):.6g})"
        )
    return float(total) if scalar else total


def hankel_coefficients(nu: float, n_terms: int) -> list[float]:
    """First ``n_terms`` coefficients a_m of e^x/sqrt(2 pi x) * sum a_m / x^m."""
    mu = 4.0 * nu * nu
    coeffs = [1.0]
    for m in range(1, n_terms):
        coeffs.append(-coeffs[-1] * (mu - (2 * m - 1) ** 2) / (8.0 * m))
    return coeffs


def bessel_i_asymptotic(nu, x, n_terms: int = 2):
    """Large-argument Hankel expansion of I_nu(x), truncated to ``n_terms``.

    The expansion diverges; its truncation error is of the order of the
    omitted terms, and it is only meaningful for x well above max(1, nu**2).
    """
    if not 1 <= n_terms <= 10:
        raise DomainError(f"n_terms must be in [1, 10], got {n_terms}")
    x, scalar = _as_float_array(x)
    if np.any(~(x > 0)):
        raise DomainError("bessel_i_asymptotic requires x > 0")
    if np.any(x > MAX_EXP_ARG):
        raise NumericOverflowError(f"I_nu(x) overflows for x > {MAX_EXP_ARG:.4f}")
    acc = np.zeros_like(x)
    # Horner in 1/x
    for a in reversed(hankel_coefficients(float(nu), n_terms)):
        acc = acc / x + a
    out = np.exp(x) / np.sqrt(2.0 * np.pi * x) * acc
    return float(out) if scalar else out


def bessel_i_prime(nu, x, cfg: SeriesConfig = DEFAULT_SERIES):
    """dI_nu/dx via I'_nu = I_{nu+1} + (nu/x) I_nu.

    The identity holds for every order; it is used here because it never
    asks the series for an order below nu.
    """
    x, scalar = _as_float_array(x)
    if np.any(~(x > 0)):
        raise DomainError("bessel_i_prime requires x > 0")
    out = bessel_i_series(nu + 1.0, x, cfg) + (nu / x) * bessel_i_series(nu, x, cfg)
    return float(out) if scalar else out
