"""Punctual and global relative error of the approximant, and the lambda search.

The punctual error is |I_nu(x) - I~_nu(x)| / I_nu(x); the global error is its
maximum over an interval.  Maxima are located on a uniform grid and every
local maximum is then polished by golden-section search.  The lambda search
uses the same grid-then-golden strategy on the global error.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .approximant import ApproximantParams, evaluate_approximant, is_admissible, solve_params
from .errors import DefectError, DomainError, NoAdmissibleLambdaError
from .reference import DEFAULT_SERIES, SeriesConfig, bessel_i_series

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

DEFAULT_INTERVAL = (0.0, 50.0)
DEFAULT_GRID_POINTS = 2000
DEFAULT_LAMBDA_RANGE = (0.05, 0.5)
X_REFINE_RTOL = 1e-6
LAMBDA_TOL = 1e-4

# Marks (lambda, nu) cells with q <= 0 in an error surface.
INADMISSIBLE = math.inf

# Linear fit of the optimal lambda across orders: nu = 24.5 (0.265 - lambda).
LAMBDA_STAR_INTERCEPT = 0.265
LAMBDA_STAR_SLOPE = 24.5


@dataclass(frozen=True)
class ErrorReport:
    nu: float
    lam: float
    interval: tuple[float, float]
    grid_points: int
    max_error: float
    argmax_x: float
    curve: np.ndarray = field(repr=False)  # shape (grid_points, 2): x, punctual error


@dataclass(frozen=True)
class ErrorSurface:
    lambda_grid: np.ndarray
    nu_grid: np.ndarray
    values: np.ndarray  # shape (len(nu_grid), len(lambda_grid))
    per_nu_optima: list[tuple[float, float, float]]

    @property
    def admissible(self) -> np.ndarray:
        return np.isfinite(self.values)


class LambdaOptimum(NamedTuple):
    lambda_min: float
    error_min: float


def _check_interval(interval) -> tuple[float, float]:
    a, b = (float(v) for v in interval)
    if not (0.0 <= a < b and math.isfinite(b)):
        raise DomainError(f"invalid interval [{a}, {b}]: need 0 <= a < b")
    return a, b


def punctual_error(nu: float, params: ApproximantParams, x, cfg: SeriesConfig = DEFAULT_SERIES):
    """Relative error of the approximant at x (scalar or array).

    At x = 0 both functions carry the same (x/2)^nu/Gamma(nu+1) prefactor, so
    the continuous extension |1 - (p0 + p1)| is returned there.
    """
    if float(nu) != params.nu:
        raise DomainError(f"order {nu} does not match params.nu = {params.nu}")
    xa = np.asarray(x, dtype=float)
    ref = bessel_i_series(params.nu, xa, cfg)
    approx = evaluate_approximant(params, xa)
    at_zero = abs(1.0 - (params.p0 + params.p1))
    with np.errstate(invalid="ignore", divide="ignore"):
        err = np.where(xa > 0, np.abs(ref - approx) / np.where(xa > 0, ref, 1.0), at_zero)
    return float(err) if err.ndim == 0 else err


@lru_cache(maxsize=64)
def _reference_on_grid(nu: float, a: float, b: float, n: int, cfg: SeriesConfig) -> np.ndarray:
    x = np.linspace(a, b, n)
    out = np.stack([x, bessel_i_series(nu, x, cfg)], axis=1)
    out.setflags(write=False)
    return out


def golden_section_max(fun: Callable[[np.ndarray], np.ndarray], lo, hi, tol: float):
    """Maximize ``fun`` independently on each bracket [lo[i], hi[i]].

    ``fun`` is vectorized; all brackets shrink in lockstep until narrower than
    ``tol``.  Returns (x_best, f_best) arrays.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    c = hi - INVPHI * (hi - lo)
    d = lo + INVPHI * (hi - lo)
    fc, fd = fun(c), fun(d)
    while np.max(hi - lo) > tol:
        left = fc >= fd  # max lies in [lo, d]
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_d = np.where(left, c, lo + INVPHI * (hi - lo))
        new_c = np.where(left, hi - INVPHI * (hi - lo), d)
        fnew = fun(np.where(left, new_c, new_d))
        fd, fc = np.where(left, fc, fnew), np.where(left, fnew, fd)
        c, d = new_c, new_d
    x = np.concatenate([lo, hi, c, d]).reshape(4, -1)
    fx = np.stack([fun(lo), fun(hi), fc, fd])
    idx = np.argmax(fx, axis=0)
    cols = np.arange(x.shape[1])
    return x[idx, cols], fx[idx, cols]


def refined_max(fun, x: np.ndarray, values: np.ndarray, tol: float) -> tuple[float, float]:
    """Grid maximum of ``values`` polished at every local maximum of the grid.

    Returns (max_value, location).  The result is never below the grid max.
    """
    n = len(x)
    v = values
    is_peak = np.ones(n, dtype=bool)
    is_peak[1:] &= v[1:] >= v[:-1]
    is_peak[:-1] &= v[:-1] >= v[1:]
    peaks = np.flatnonzero(is_peak)
    best_i = int(np.argmax(v))
    best_v, best_x = float(v[best_i]), float(x[best_i])
    if len(peaks) and n > 1:
        lo = x[np.maximum(peaks - 1, 0)]
        hi = x[np.minimum(peaks + 1, n - 1)]
        xs, fs = golden_section_max(fun, lo, hi, tol)
        j = int(np.argmax(fs))
        if fs[j] > best_v:
            best_v, best_x = float(fs[j]), float(xs[j])
    return best_v, best_x


def global_error(
    nu: float,
    lam: float,
    interval=DEFAULT_INTERVAL,
    grid_points: int = DEFAULT_GRID_POINTS,
    cfg: SeriesConfig = DEFAULT_SERIES,
    params: ApproximantParams | None = None,
) -> ErrorReport:
    """Maximum punctual error of the (lam, nu) approximant on [a, b].

    Raises DefectError if (lam, nu) is inadmissible.
    """
    a, b = _check_interval(interval)
    if grid_points < 64:
        raise DomainError(f"grid_points must be >= 64, got {grid_points}")
    if params is None:
        params = solve_params(lam, nu)
    nu = params.nu
    ref = _reference_on_grid(nu, a, b, int(grid_points), cfg)
    x = ref[:, 0]
    approx = evaluate_approximant(params, x)
    at_zero = abs(1.0 - (params.p0 + params.p1))
    with np.errstate(invalid="ignore", divide="ignore"):
        err = np.where(x > 0, np.abs(ref[:, 1] - approx) / np.where(x > 0, ref[:, 1], 1.0), at_zero)

    def fun(t):
        return punctual_error(nu, params, t, cfg)

    max_err, argmax = refined_max(fun, x, err, X_REFINE_RTOL * (b - a))
    return ErrorReport(
        nu=nu, lam=params.lam, interval=(a, b), grid_points=int(grid_points),
        max_error=max_err, argmax_x=argmax, curve=np.stack([x, err], axis=1),
    )


def _global_error_or_inf(nu, lam, interval, grid_points, cfg) -> float:
    if not is_admissible(lam, nu):
        return INADMISSIBLE
    try:
        return global_error(nu, lam, interval, grid_points, cfg).max_error
    except DefectError:
        return INADMISSIBLE


def optimize_lambda(
    nu: float,
    lambda_range=DEFAULT_LAMBDA_RANGE,
    coarse: int = 64,
    interval=DEFAULT_INTERVAL,
    grid_points: int = DEFAULT_GRID_POINTS,
    cfg: SeriesConfig = DEFAULT_SERIES,
) -> LambdaOptimum:
    """Lambda minimizing the global error over the admissible part of ``lambda_range``.

    A coarse uniform scan picks the best grid point (smallest lambda on ties);
    golden-section search then narrows the neighbouring bracket to within
    1e-4.  Inadmissible lambdas count as infinitely bad.
    """
    lo, hi = (float(v) for v in lambda_range)
    if not 0 < lo < hi:
        raise DomainError(f"invalid lambda range [{lo}, {hi}]")
    if coarse < 32:
        raise DomainError(f"coarse must be >= 32, got {coarse}")
    lams = np.linspace(lo, hi, coarse)
    errs = np.array([_global_error_or_inf(nu, l, interval, grid_points, cfg) for l in lams])
    if not np.any(np.isfinite(errs)):
        raise NoAdmissibleLambdaError(f"q <= 0 for every lambda in [{lo}, {hi}] at nu={nu}")
    i = int(np.argmin(errs))
    best_l, best_e = float(lams[i]), float(errs[i])

    left, right = lams[max(i - 1, 0)], lams[min(i + 1, coarse - 1)]

    def neg_err(ls):
        return np.array([-_global_error_or_inf(nu, l, interval, grid_points, cfg) for l in ls])

    xs, fs = golden_section_max(neg_err, [left], [right], LAMBDA_TOL)
    if -fs[0] < best_e or (-fs[0] == best_e and xs[0] < best_l):
        best_l, best_e = float(xs[0]), float(-fs[0])
    return LambdaOptimum(best_l, best_e)


def lambda_star(nu: float) -> float:
    """Linear model of the optimal lambda: 0.265 - nu/24.5."""
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise DomainError(f"lambda_star is defined for nu in [0, 1], got {nu}")
    return LAMBDA_STAR_INTERCEPT - nu / LAMBDA_STAR_SLOPE


def _surface_row(args):
    nu, lambda_grid, interval, grid_points, cfg = args
    return [_global_error_or_inf(nu, l, interval, grid_points, cfg) for l in lambda_grid]


def sweep_error_surface(
    nu_grid: Sequence[float],
    lambda_grid: Sequence[float],
    interval=DEFAULT_INTERVAL,
    grid_points: int = DEFAULT_GRID_POINTS,
    cfg: SeriesConfig = DEFAULT_SERIES,
    workers: int | None = None,
) -> ErrorSurface:
    """Global error on the (nu, lambda) grid, one row per nu.

    Cells with q <= 0 hold INADMISSIBLE.  With ``workers > 1`` rows are
    computed in separate processes; rows are collected in input order so the
    result does not depend on scheduling.
    """
    nus = np.asarray(nu_grid, dtype=float)
    lams = np.asarray(lambda_grid, dtype=float)
    if nus.size == 0 or lams.size == 0:
        raise DomainError("nu_grid and lambda_grid must be nonempty")
    if np.any(np.diff(nus) <= 0) or np.any(np.diff(lams) <= 0):
        raise DomainError("grids must be strictly ascending")
    interval = _check_interval(interval)
    tasks = [(float(nu), tuple(lams.tolist()), interval, grid_points, cfg) for nu in nus]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_surface_row, tasks))
    else:
        rows = [_surface_row(t) for t in tasks]
    values = np.array(rows, dtype=float)
    optima = []
    for nu, row in zip(nus, values):
        if np.any(np.isfinite(row)):
            j = int(np.argmin(row))
            optima.append((float(nu), float(lams[j]), float(row[j])))
        else:
            optima.append((float(nu), math.nan, INADMISSIBLE))
    return ErrorSurface(lambda_grid=lams, nu_grid=nus, values=values, per_nu_optima=optima)


def asymptotic_residual(nu_source: float) -> float:
    """Sum over the two half-order components of |1 - p2 / (f q)| at lambda*.

    This is the x-independent leading term of the punctual error of the
    product solution as x grows; it vanishes when p2 = q f holds.
    """
    from .approximant import f_factor

    total = 0.0
    for k in (-0.25, 0.25):
        order = nu_source / 2.0 + k
        if not 0.0 <= order <= 1.0:
            raise DomainError(f"component order {order} outside [0, 1] for nu={nu_source}")
        lam = lambda_star(order)
        p = solve_params(lam, order)
        total += abs(1.0 - p.p2 / (f_factor(lam, order) * p.q))
    return total
