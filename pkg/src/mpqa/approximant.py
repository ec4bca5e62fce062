"""Six-parameter quasi-rational approximant of I_nu(x) for 0 <= nu <= 1.

The approximant is

    I~_nu(x) = (x/2)^nu [(p0 + p2 x^2) cosh x + (p1 + p3 x^2) sinh(x)/x]
               / [Gamma(nu+1) (1 + lambda^2 x^2)^beta (1 + q x^2)]

with beta = nu/2 + 1/4.  Two leading terms of the Hankel expansion fix p2 and
p3 relative to q; the x^0, x^2 and x^4 coefficients of the ascending series fix
p0, p1 and q.  Only lambda is left free.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DefectError, DomainError, NumericOverflowError, SingularityError
from .reference import gamma

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
RESIDUAL_TOL = 1e-8
# Below this sinh(x)/x is replaced by 1 + x^2/6 + x^4/120.
SINHC_TAYLOR_BELOW = 1e-4

CLOSED_FORM = "closed-form"
LEAST_SQUARES = "least-squares"


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise DomainError(f"approximant order must lie in [0, 1], got {nu}")
    return nu


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    return lam


def beta_exponent(nu: float) -> float:
    return nu / 2.0 + 0.25


@dataclass(frozen=True)
class ApproximantParams:
    """Fitted quantities of one approximant plus solve diagnostics.

    ``lam`` is serialized under the key ``"lambda"``.
    """

    nu: float
    lam: float
    beta: float
    q: float
    p0: float
    p1: float
    p2: float
    p3: float
    residual18: float = 0.0
    residual19: float = 0.0
    method: str = CLOSED_FORM

    def __post_init__(self):
        if not (self.lam > 0 and self.q > 0):
            raise DefectError(
                f"inadmissible parameters: lambda={self.lam!r}, q={self.q!r} "
                "(both must be positive)"
            )

    @property
    def clean(self) -> bool:
        """True when the closed-form solve satisfied the x^4 condition."""
        return self.method == CLOSED_FORM

    def to_dict(self) -> dict:
        d = asdict(self)
        return {
            "nu": d["nu"],
            "lambda": d["lam"],
            "beta": d["beta"],
            "q": d["q"],
            "p0": d["p0"],
            "p1": d["p1"],
            "p2": d["p2"],
            "p3": d["p3"],
            "residual18": d["residual18"],
            "residual19": d["residual19"],
            "method": d["method"],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "ApproximantParams":
        kw = dict(d)
        kw["lam"] = kw.pop("lambda")
        return cls(**kw)


def f_factor(lam: float, nu: float) -> float:
    """2^(1+nu) lambda^(nu+1/2) Gamma(1+nu) / sqrt(2 pi).

    The large-x limit of the approximant is e^x/sqrt(2 pi x) * (p2 + p3/x)
    divided by f*q, which is what ties p2 and p3 to q.
    """
    lam = _check_lambda(lam)
    nu = float(nu)
    return 2.0 ** (1.0 + nu) * lam ** (nu + 0.5) * gamma(1.0 + nu) / SQRT_2PI


def q_closed_form(lam: float, nu: float) -> float:
    """q(lambda, nu) eliminating p0..p3 from the x^0, x^2, x^4 matching conditions.

    The value may be negative; callers decide admissibility.
    """
    lam = _check_lambda(lam)
    nu = _check_order(nu)
    b = beta_exponent(nu)
    num = math.sqrt(math.pi / 2.0) * (
        -4.0 * nu**2
        - 240.0 * (b - 1.0) * b * lam**4 * (nu + 1.0) * (nu + 2.0)
        + 24.0 * b * lam**2 * (nu + 2.0) * (2.0 * nu - 3.0)
        + 1.0
    )
    d1 = 2.0**nu * (4.0 * nu**2 - 49.0) * lam ** (nu + 0.5) * gamma(nu + 3.0)
    d2 = 3.0 * SQRT_2PI * (nu + 2.0) * (20.0 * b * lam**2 * (nu + 1.0) - 2.0 * nu + 3.0)
    den = 4.0 * (d1 + d2)
    # relative to the size of the cancelling terms
    if abs(d1 + d2) < 1e-14 * max(abs(d1), abs(d2)):
        raise SingularityError(f"q(lambda, nu) has a pole at lambda={lam}, nu={nu}")
    return num / den


def is_admissible(lam: float, nu: float) -> bool:
    """True when q_closed_form(lam, nu) exists and is positive."""
    try:
        return q_closed_form(lam, nu) > 0
    except SingularityError:
        return False


def _matching_system(lam, nu, b, q, p2, p3):
    """Rows (coef_p0, coef_p1, rest_lhs, rhs_terms) of the four matching equations.

    ``rest_lhs`` lists the p2/p3 contributions on the left; ``rhs_terms`` the
    right-hand side terms.  Returned separately so residuals can be scaled by
    the largest term.
    """
    a1 = 1.0 / (4.0 * (nu + 1.0))
    a2 = 1.0 / (32.0 * (nu + 1.0) * (nu + 2.0))
    bl2 = b * lam**2
    bb4 = (b - 1.0) * b * lam**4
    return [
        (1.0, 1.0, [], [1.0]),
        (1.0 / 2.0, 1.0 / 6.0, [p2, p3], [q, bl2, a1]),
        (
            1.0 / 24.0,
            1.0 / 120.0,
            [p2 / 2.0, p3 / 6.0],
            [bb4 / 2.0, q * bl2, q * a1, bl2 * a1, a2],
        ),
        (
            0.0,
            0.0,
            [p2 / 24.0, p3 / 120.0],
            [q * bb4 / 2.0, q * bl2 * a1, q * a2, bb4 * a1 / 2.0, bl2 * a2],
        ),
    ]


def _residual(row, p0, p1) -> float:
    c0, c1, rest, rhs = row
    lhs_terms = [c0 * p0, c1 * p1, *rest]
    diff = sum(lhs_terms) - sum(rhs)
    scale = max(abs(t) for t in lhs_terms + rhs)
    return abs(diff) / scale if scale > 0 else abs(diff)


def solve_params(lam: float, nu: float) -> ApproximantParams:
    """Build the approximant for (lambda, nu).

    q comes from :func:`q_closed_form`, then p2 = q f and p3 = (1-4nu^2)/8 f q,
    then p0, p1 from the x^0 and x^2 conditions.  The x^4 and x^6 residuals are
    kept as diagnostics.  If the x^4 residual is not clean, p0 and p1 are
    re-fitted in the least-squares sense over all four conditions and the
    result is flagged ``"least-squares"``.

    Raises DefectError when q <= 0.
    """
    lam = _check_lambda(lam)
    nu = _check_order(nu)
    b = beta_exponent(nu)
    q = q_closed_form(lam, nu)
    if not q > 0:
        raise DefectError(
            f"q(lambda={lam}, nu={nu}) = {q:.6g} <= 0: denominator would vanish"
        )
    f = f_factor(lam, nu)
    p2 = q * f
    p3 = (1.0 - 4.0 * nu * nu) / 8.0 * f * q

    rows = _matching_system(lam, nu, b, q, p2, p3)
    A = np.array([[r[0], r[1]] for r in rows[:2]])
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularityError("degenerate 2x2 system for p0, p1")
    rhs = np.array([sum(r[3]) - sum(r[2]) for r in rows[:2]])
    p0, p1 = np.linalg.solve(A, rhs)
    r18 = _residual(rows[2], p0, p1)
    r19 = _residual(rows[3], p0, p1)

    method = CLOSED_FORM
    # The x^6 row carries no p0/p1 dependence and is an over-determined
    # condition by construction; only the x^4 row can signal a bad q.
    if r18 > RESIDUAL_TOL:
        A_all = np.array([[r[0], r[1]] for r in rows])
        rhs_all = np.array([sum(r[3]) - sum(r[2]) for r in rows])
        (p0, p1), *_ = np.linalg.lstsq(A_all, rhs_all, rcond=None)
        r18 = _residual(rows[2], p0, p1)
        r19 = _residual(rows[3], p0, p1)
        method = LEAST_SQUARES
        logger.warning(
            "x^4 matching residual above %.0e at lambda=%g, nu=%g; "
            "using least-squares p0, p1",
            RESIDUAL_TOL, lam, nu,
        )

    return ApproximantParams(
        nu=nu, lam=lam, beta=b, q=q,
        p0=float(p0), p1=float(p1), p2=p2, p3=p3,
        residual18=float(r18), residual19=float(r19), method=method,
    )


def _sinhc(x: np.ndarray) -> np.ndarray:
    small = x < SINHC_TAYLOR_BELOW
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 + x2 / 6.0 + x2 * x2 / 120.0, np.sinh(safe) / safe)


def evaluate_approximant(params: ApproximantParams, x):
    """I~_nu(x) for scalar or array x >= 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0):
        raise DomainError("evaluate_approximant requires finite x >= 0")
    p = params
    x2 = xa * xa
    try:
        with np.errstate(over="raise"):
            num = (p.p0 + p.p2 * x2) * np.cosh(xa) + (p.p1 + p.p3 * x2) * _sinhc(xa)
            den = (1.0 + p.lam**2 * x2) ** p.beta * (1.0 + p.q * x2)
            out = np.power(0.5 * xa, p.nu) * num / (gamma(p.nu + 1.0) * den)
    except FloatingPointError as exc:
        raise NumericOverflowError(f"approximant overflows at max x = {xa.max():g}") from exc
    return float(out) if out.ndim == 0 else out


def _poly_mul(a, b, n):
    out = [0.0] * n
    for i, ai in enumerate(a[:n]):
        for j, bj in enumerate(b[: n - i]):
            out[i + j] += ai * bj
    return out


def taylor_coeffs_approximant(params: ApproximantParams, order: int = 4) -> list[float]:
    """Coefficients [c0, c2, ..., c_order] of I~_nu(x) / ((x/2)^nu / Gamma(nu+1)).

    Built by multiplying the even power series of the hyperbolic numerator,
    of (1 + lambda^2 x^2)^(-beta) and of 1/(1 + q x^2), each in powers of x^2.
    """
    if order % 2 or not 0 <= order <= 6:
        raise DomainError(f"order must be even and <= 6, got {order}")
    n = order // 2 + 1
    p = params
    fact = math.factorial
    numer = []
    for j in range(n):
        c = p.p0 / fact(2 * j) + p.p1 / fact(2 * j + 1)
        if j >= 1:
            c += p.p2 / fact(2 * j - 2) + p.p3 / fact(2 * j - 1)
        numer.append(c)
    # generalized binomial coefficients of (1 + y)^(-beta), y = lambda^2 x^2
    binom = [1.0]
    for j in range(1, n):
        binom.append(binom[-1] * (-p.beta - (j - 1)) / j)
    lam_series = [binom[j] * p.lam ** (2 * j) for j in range(n)]
    geom = [(-p.q) ** j for j in range(n)]
    return _poly_mul(_poly_mul(numer, lam_series, n), geom, n)


def exact_taylor_coeffs(nu: float, order: int = 4) -> list[float]:
    """Same coefficients for I_nu itself: c_2k = 1 / (4^k k! (nu+1)_k)."""
    out = []
    c = 1.0
    for k in range(order // 2 + 1):
        if k:
            c /= 4.0 * k * (nu + k)
        out.append(c)
    return out
