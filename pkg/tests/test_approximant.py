import json
import logging
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

import mpqa.approximant as ap
from mpqa.approximant import (
    ApproximantParams,
    evaluate_approximant,
    exact_taylor_coeffs,
    f_factor,
    is_admissible,
    q_closed_form,
    solve_params,
    taylor_coeffs_approximant,
)
from mpqa.error_analysis import lambda_star
from mpqa.errors import DefectError, DomainError, NumericOverflowError, SingularityError
from mpqa.reference import bessel_i_asymptotic, bessel_i_series

# mpmath, 40 digits: f(lambda, nu) and the exact solution of the x^0, x^2, x^4
# matching conditions with p2 = q f, p3 = (1 - 4 nu^2)/8 f q.
F_0236_01 = 0.34208256250452658614
F_0236_06 = 0.22073097396694347112
SOLVED_0236_06 = dict(
    p0=6.2294420557540694799,
    p1=-5.2294420557540694799,
    p2=0.57351021481927837921,
    p3=-0.031543061815060310857,
    q=2.5982317049222412283,
)
Q_0236_01 = -0.21194300805286577788

admissible_points = st.tuples(
    st.floats(min_value=0.05, max_value=0.5), st.floats(min_value=0.0, max_value=1.0)
).filter(lambda p: is_admissible(*p))


def rel(a, b):
    return abs(a - b) / abs(b)


def matching_system_oracle(lam, nu):
    """Solve the x^0, x^2, x^4 conditions directly for (p0, p1, q)."""
    b = nu / 2 + 0.25
    f = 2 ** (1 + nu) * lam ** (nu + 0.5) * math.gamma(1 + nu) / math.sqrt(2 * math.pi)
    c = (1 - 4 * nu**2) / 8
    A = np.array([
        [1.0, 1.0, 0.0],
        [1 / 2, 1 / 6, f + c * f - 1],
        [1 / 24, 1 / 120, f / 2 + c * f / 6 - (b * lam**2 + 1 / (4 * (nu + 1)))],
    ])
    rhs = np.array([
        1.0,
        b * lam**2 + 1 / (4 * (1 + nu)),
        (b - 1) * b * lam**4 / 2 + b * lam**2 / (4 * (nu + 1)) + 1 / (32 * (nu + 1) * (nu + 2)),
    ])
    return np.linalg.solve(A, rhs)


class TestFFactor:
    @pytest.mark.parametrize("lam", [0.05, 0.236, 1.0])
    def test_order_zero(self, lam):
        assert rel(f_factor(lam, 0.0), 2 * math.sqrt(lam) / math.sqrt(2 * math.pi)) < 1e-15

    def test_frozen(self):
        assert rel(f_factor(0.236, 0.1), F_0236_01) < 1e-14
        assert rel(f_factor(0.236, 0.6), F_0236_06) < 1e-14

    def test_domain(self):
        with pytest.raises(DomainError):
            f_factor(0.0, 0.5)


class TestQ:
    def test_lambda_0236_order_01_is_negative(self):
        # The closed form is negative here: lambda = 0.236 is not admissible
        # for the order-1/10 component.
        q = q_closed_form(0.236, 0.1)
        assert rel(q, Q_0236_01) < 1e-12
        assert q < 0

    def test_positive_on_linear_model(self):
        assert q_closed_form(lambda_star(0.1), 0.1) > 0

    @given(st.floats(min_value=0.05, max_value=0.5), st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=100, deadline=None)
    def test_matches_direct_solve(self, lam, nu):
        try:
            q = q_closed_form(lam, nu)
        except SingularityError:
            return
        q_oracle = matching_system_oracle(lam, nu)[2]
        assume(abs(q_oracle) < 1e6)
        assert q == pytest.approx(q_oracle, rel=1e-9, abs=1e-12)

    def test_limit_nu_to_zero(self):
        # dq/dnu is about -490 here, so the gap scales with the offset
        q0 = q_closed_form(0.265, 0.0)
        a, b = q_closed_form(0.265, 1e-8), q_closed_form(0.265, 1e-6)
        assert math.isfinite(q0)
        assert rel(a, q0) < 1e-5
        assert rel(b, q0) < 1e-4
        assert (b - q0) / (a - q0) == pytest.approx(100.0, rel=1e-2)

    def test_sign_map(self):
        lams = np.linspace(0.05, 0.5, 46)
        nus = np.linspace(0.0, 1.0, 21)
        sign = np.array([[is_admissible(l, n) for l in lams] for n in nus])
        # lambda* line and the band lambda in [0.3, 0.4] are inside the q > 0 region
        assert all(is_admissible(lambda_star(n), n) for n in nus)
        band = (lams >= 0.3) & (lams <= 0.4)
        assert sign[:, band].all()
        # and the region is not everything: a q <= 0 strip sits below lambda*
        assert not sign.all()

    def test_pole(self):
        from scipy.optimize import brentq

        nu = 0.5
        b = nu / 2 + 0.25

        def den(lam):
            return 4 * (
                2**nu * (4 * nu**2 - 49) * lam ** (nu + 0.5) * math.gamma(nu + 3)
                + 3 * math.sqrt(2 * math.pi) * (nu + 2) * (20 * b * lam**2 * (nu + 1) - 2 * nu + 3)
            )

        root = brentq(den, 0.2, 0.3, xtol=1e-16)
        with pytest.raises(SingularityError):
            q_closed_form(root, nu)


class TestSolve:
    def test_frozen_six_tuple(self):
        p = solve_params(0.236, 0.6)
        for name, want in SOLVED_0236_06.items():
            assert rel(getattr(p, name), want) <= 1e-10, name
        assert p.lam == 0.236 and p.beta == 0.55

    def test_defect_rejected(self):
        with pytest.raises(DefectError):
            solve_params(0.236, 0.1)

    def test_linear_model_point(self):
        p = solve_params(lambda_star(0.1), 0.1)
        assert abs(p.p0 + p.p1 - 1) <= 1e-12
        assert p.q > 0 and p.method == "closed-form" and p.residual18 < 1e-12

    @given(admissible_points)
    @settings(max_examples=100, deadline=None)
    def test_construction_identities(self, pt):
        lam, nu = pt
        p = solve_params(lam, nu)
        f = f_factor(lam, nu)
        assert p.beta == nu / 2 + 0.25
        assert abs(p.p0 + p.p1 - 1) <= 1e-12 * max(1.0, abs(p.p0))
        assert p.p2 / (f * p.q) == pytest.approx(1.0, rel=1e-12)
        assert p.p3 / (f * p.q) == pytest.approx((1 - 4 * nu**2) / 8, rel=1e-12, abs=1e-15)

    def test_x6_condition_is_not_satisfied(self):
        # Five unknowns cannot satisfy the x^0..x^6 conditions together.
        p = solve_params(0.236, 0.6)
        assert p.residual19 > 1e-3

    def test_least_squares_fallback(self, monkeypatch, caplog):
        real = ap.q_closed_form
        monkeypatch.setattr(ap, "q_closed_form", lambda lam, nu: 1.01 * real(lam, nu))
        with caplog.at_level(logging.WARNING, logger="mpqa.approximant"):
            p = solve_params(0.236, 0.6)
        assert p.method == "least-squares" and not p.clean
        assert p.residual18 > 1e-8
        assert "least-squares" in caplog.text

    @pytest.mark.parametrize("lam,nu", [(0.0, 0.5), (-0.1, 0.5), (0.2, 1.5), (0.2, -0.1)])
    def test_domain(self, lam, nu):
        with pytest.raises(DomainError):
            solve_params(lam, nu)


class TestParamsObject:
    def test_json_schema(self):
        p = solve_params(0.236, 0.6)
        d = json.loads(p.to_json())
        assert list(d) == [
            "nu", "lambda", "beta", "q", "p0", "p1", "p2", "p3",
            "residual18", "residual19", "method",
        ]
        assert d["method"] in ("closed-form", "least-squares")
        assert ApproximantParams.from_dict(d) == p

    def test_immutable(self):
        p = solve_params(0.236, 0.6)
        with pytest.raises(AttributeError):
            p.q = 1.0

    @pytest.mark.parametrize("q,lam", [(-1.0, 0.2), (0.0, 0.2), (1.0, 0.0)])
    def test_defects_cannot_be_constructed(self, q, lam):
        with pytest.raises(DefectError):
            ApproximantParams(nu=0.5, lam=lam, beta=0.5, q=q, p0=1, p1=0, p2=0, p3=0)


class TestEvaluate:
    def test_order_zero_at_origin(self):
        assert evaluate_approximant(solve_params(lambda_star(0.0), 0.0), 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_positive_order_vanishes_at_origin(self):
        assert evaluate_approximant(solve_params(lambda_star(0.6), 0.6), 0.0) == 0.0

    @pytest.mark.parametrize("nu", [0.0, 0.1, 0.6, 1.0])
    def test_leading_term(self, nu):
        p = solve_params(lambda_star(nu), nu)
        x = 1e-6
        assert rel(evaluate_approximant(p, x), (x / 2) ** nu / math.gamma(nu + 1)) <= 1e-10

    def test_value_at_five(self):
        p = solve_params(lambda_star(0.1), 0.1)
        assert evaluate_approximant(p, 5.0) / bessel_i_series(0.1, 5.0) == pytest.approx(1.0, abs=0.0011)

    def test_sinhc_branch_is_continuous(self):
        p = solve_params(0.236, 0.6)
        lo, hi = evaluate_approximant(p, np.array([0.9999e-4, 1.0001e-4]))
        assert hi / lo == pytest.approx((1.0001 / 0.9999) ** 0.6, rel=1e-12)

    def test_overflow(self):
        with pytest.raises(NumericOverflowError):
            evaluate_approximant(solve_params(0.236, 0.6), 800.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            evaluate_approximant(solve_params(0.236, 0.6), -1.0)

    @pytest.mark.parametrize("nu", [0.0, 0.1, 0.6, 1.0])
    def test_large_x_two_term_asymptotics(self, nu):
        p = solve_params(lambda_star(nu), nu)
        x = 200.0
        assert rel(evaluate_approximant(p, x), bessel_i_asymptotic(nu, x, 2)) <= 1e-3
        lead = evaluate_approximant(p, np.array([100.0, 400.0])) * np.sqrt(2 * np.pi * np.array([100.0, 400.0])) * np.exp(-np.array([100.0, 400.0]))
        assert abs(lead[1] - 1) < abs(lead[0] - 1)

    @given(admissible_points)
    @settings(max_examples=30, deadline=None)
    def test_no_defects_and_positive(self, pt):
        lam, nu = pt
        p = solve_params(lam, nu)
        x = np.linspace(0.0, 100.0, 10_000)
        den = (1 + lam**2 * x**2) ** p.beta * (1 + p.q * x**2)
        assert np.all(den >= 1.0)
        assert np.all(evaluate_approximant(p, x[1:]) > 0)


class TestTaylor:
    def test_exact_coefficients(self):
        nu = 0.3
        c = exact_taylor_coeffs(nu, 4)
        assert c == pytest.approx([1, 1 / (4 * (1 + nu)), 1 / (32 * (1 + nu) * (2 + nu))], rel=1e-15)

    @given(admissible_points)
    @settings(max_examples=100, deadline=None)
    def test_series_match(self, pt):
        lam, nu = pt
        p = solve_params(lam, nu)
        c0, c2, c4 = taylor_coeffs_approximant(p, 4)
        assert abs(c0 - 1) <= 1e-12 * max(1.0, abs(p.p0))
        assert rel(c2, 1 / (4 * (1 + nu))) <= 1e-10 * max(1.0, p.q)
        if p.clean:
            assert rel(c4, 1 / (32 * (1 + nu) * (2 + nu))) <= 1e-8 * max(1.0, p.q)

    def test_against_numeric_expansion(self):
        # fit the even polynomial to samples of approx / prefactor near 0
        p = solve_params(0.236, 0.6)
        x = np.linspace(1e-2, 0.3, 60)
        y = evaluate_approximant(p, x) / ((x / 2) ** 0.6 / math.gamma(1.6))
        coef = np.polynomial.polynomial.polyfit(x**2, y, 5)
        # the fit itself is only good to ~2e-6 in the x^4 coefficient
        assert coef[:3] == pytest.approx(taylor_coeffs_approximant(p, 4), rel=1e-5)

    @pytest.mark.parametrize("order", [1, 3, 8, -2])
    def test_bad_order(self, order):
        with pytest.raises(DomainError):
            taylor_coeffs_approximant(solve_params(0.236, 0.6), order)

    def test_sixth_order_mismatch_is_reported(self):
        p = solve_params(0.236, 0.6)
        c6 = taylor_coeffs_approximant(p, 6)[3]
        assert c6 != pytest.approx(exact_taylor_coeffs(0.6, 6)[3], rel=1e-3)
