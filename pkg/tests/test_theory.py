import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy import integrate

from densemem import theory
from oracles import (
    binomial_upper_tail_exact,
    rademacher_tail_enumerated,
    rate_function_highprec,
)


class TestRateFunction:
    def test_endpoints(self):
        assert theory.rate_function(0.0) == 0.0
        assert theory.rate_function(1.0) == pytest.approx(math.log(2), rel=1e-15)
        assert theory.rate_function(-1.0) == pytest.approx(math.log(2), rel=1e-15)

    def test_matches_high_precision(self):
        for x in (0.5, 0.1, 0.9, 0.999, 1e-6, 0.75):
            expected = float(rate_function_highprec(x))
            assert theory.rate_function(x) == pytest.approx(expected, rel=1e-12)

    def test_even(self):
        grid = np.linspace(0.0, 1.0, 101)
        for x in grid:
            assert theory.rate_function(float(x)) == pytest.approx(
                theory.rate_function(float(-x)), rel=1e-14, abs=1e-15
            )

    def test_convex_on_dense_grid(self):
        xs = np.linspace(-1.0, 1.0, 1001)
        vals = [theory.rate_function(float(x)) for x in xs]
        second = np.diff(vals, 2)
        assert (second >= -1e-12).all()

    def test_chain_of_inequalities(self):
        # I(x) <= log(1 + x^2) <= x^2 <= x on (0, 1)
        for x in np.linspace(1e-4, 1.0 - 1e-9, 500):
            i = theory.rate_function(float(x))
            assert i <= math.log1p(x * x) + 1e-15
            assert math.log1p(x * x) <= x * x
            assert x * x <= x

    def test_domain(self):
        for bad in (1.0000001, -1.1, 2.0):
            with pytest.raises(ValueError):
                theory.rate_function(bad)


class TestAlphaStar:
    def test_zero_rho_is_half_log_two(self):
        assert theory.alpha_star(0.0) == pytest.approx(math.log(2) / 2, rel=1e-15)

    def test_composition_identity(self):
        assert theory.alpha_star(0.25) == pytest.approx(
            theory.rate_function(0.5) / 2, rel=1e-15
        )

    def test_monotone_and_bounded(self):
        grid = np.linspace(0.0, 0.4999, 400)
        vals = [theory.alpha_star(float(r)) for r in grid]
        assert all(a > 0 for a in vals[:-1])
        assert vals[0] <= math.log(2) / 2 + 1e-15
        assert all(vals[k + 1] <= vals[k] + 1e-15 for k in range(len(vals) - 1))

    def test_vanishes_at_half(self):
        assert theory.alpha_star(0.499999) < 1e-5

    def test_twice_alpha_relationship(self):
        # 2 alpha*(rho) = I(1 - 2 rho) <= 1 - 2 rho across the domain
        for rho in np.linspace(0.0, 0.499, 300):
            lhs = 2.0 * theory.alpha_star(float(rho))
            assert lhs == pytest.approx(theory.rate_function(1 - 2 * rho), rel=1e-13, abs=1e-15)
            assert lhs <= (1 - 2 * rho) + 1e-15

    def test_domain(self):
        for bad in (-0.01, 0.5, 0.7):
            with pytest.raises(ValueError):
                theory.alpha_star(bad)


class TestCapacityConstants:
    def test_known_values(self):
        assert theory.capacity_constant(2) == 2
        assert theory.capacity_constant(3) == 6
        assert theory.capacity_constant(4) == 30

    def test_ratio_recurrence(self):
        for n in range(2, 12):
            assert theory.capacity_constant(n + 1) == (2 * n - 1) * theory.capacity_constant(n)

    def test_strictly_increasing(self):
        vals = [theory.capacity_constant(n) for n in range(2, 12)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_rejects_low_degree(self):
        with pytest.raises(ValueError):
            theory.capacity_constant(1)

    def test_gaussian_moments_exact(self):
        assert theory.gaussian_even_moment(1) == 1
        assert theory.gaussian_even_moment(2) == 3
        assert theory.gaussian_even_moment(3) == 15

    def test_gaussian_moments_against_quadrature(self):
        for l in (1, 2, 3):
            val, _ = integrate.quad(
                lambda x: x ** (2 * l) * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
                -np.inf,
                np.inf,
            )
            assert val == pytest.approx(theory.gaussian_even_moment(l), abs=1e-9)

    def test_rejects_bad_moment_order(self):
        with pytest.raises(ValueError):
            theory.gaussian_even_moment(0)


class TestPolynomialCapacity:
    def test_closed_form_at_e_squared(self):
        n = math.e**2
        assert theory.polynomial_capacity(n, 2, 1.0) == pytest.approx(n / 2, rel=1e-14)

    def test_against_high_precision(self):
        with mpmath.workprec(128):
            expected = float(mpmath.mpf(60) ** 2 / (12 * mpmath.log(60)))
        assert theory.polynomial_capacity(60, 3, 12.0) == pytest.approx(expected, rel=1e-14)

    def test_monotone_in_n(self):
        for degree in (2, 3, 4):
            vals = [theory.polynomial_capacity(n, degree, 6.0) for n in range(3, 200)]
            assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_domain(self):
        with pytest.raises(ValueError):
            theory.polynomial_capacity(1, 2, 1.0)
        with pytest.raises(ValueError):
            theory.polynomial_capacity(10, 1, 1.0)
        with pytest.raises(ValueError):
            theory.polynomial_capacity(10, 2, 0.0)


class TestBinomialTailBound:
    def test_closed_form_value(self):
        assert theory.binomial_tail_bound(100, 0.1, 0.1) == pytest.approx(
            math.exp(-2.5), rel=1e-15
        )

    def test_dominates_exact_tail(self):
        for m in (5, 10, 20, 30):
            for p in (0.1, 0.3, 0.5):
                for eps in np.linspace(0.01, 1.0 - p, 12):
                    eps = float(eps)
                    bound = theory.binomial_tail_bound(m, p, eps)
                    exact = binomial_upper_tail_exact(m, p, m * (p + eps))
                    assert bound >= exact - 1e-12

    def test_small_eps_limit(self):
        assert theory.binomial_tail_bound(50, 0.3, 1e-9) == pytest.approx(1.0, abs=1e-8)
        assert theory.binomial_tail_bound(50, 0.3, 1e-4) < 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            theory.binomial_tail_bound(0, 0.1, 0.1)
        with pytest.raises(ValueError):
            theory.binomial_tail_bound(5, 1.1, 0.1)
        with pytest.raises(ValueError):
            theory.binomial_tail_bound(5, 0.5, 0.0)
        with pytest.raises(ValueError):
            theory.binomial_tail_bound(5, 0.9, 0.2)


class TestRademacherTailBound:
    def test_dominates_enumeration_small_m(self):
        for m in range(1, 13):
            for x in (0.25, 0.5, 0.75):
                bound = theory.rademacher_tail_bound(m, x)
                exact = rademacher_tail_enumerated(m, x)
                assert bound >= exact - 1e-12

    def test_dominates_binomial_tail_large_m(self):
        from scipy.stats import binom

        for m in (16, 20, 24):
            for x in (0.25, 0.5, 0.75):
                k_min = math.ceil(m * (1 + x) / 2)
                exact = float(binom.sf(k_min - 1, m, 0.5))
                assert theory.rademacher_tail_bound(m, x) >= exact - 1e-12

    def test_boundary_limit_is_two_to_minus_m(self):
        for m in (5, 10, 24):
            assert theory.rademacher_tail_bound(m, 1.0 - 1e-12) == pytest.approx(
                2.0**-m, rel=1e-6
            )

    def test_exact_tail_known_value(self):
        assert theory.rademacher_exact_tail(24, 0.5) == Fraction(190051, 16777216)

    def test_empirical_rate_approaches_rate_function(self):
        # finite-m rate exceeds I(x) and closes in as m grows
        i_half = theory.rate_function(0.5)
        rates = [theory.empirical_rademacher_rate(m, 0.5) for m in (24, 100, 400, 2000)]
        assert rates[0] == pytest.approx(0.18668685821924658, rel=1e-12)
        assert all(r > i_half for r in rates)
        assert all(b < a for a, b in zip(rates, rates[1:]))
        assert (rates[-1] - i_half) / i_half < 0.02

    def test_domain(self):
        with pytest.raises(ValueError):
            theory.rademacher_tail_bound(5, 0.0)
        with pytest.raises(ValueError):
            theory.rademacher_tail_bound(5, 1.0)
        with pytest.raises(ValueError):
            theory.rademacher_tail_bound(0, 0.5)


class TestThresholdReport:
    def test_rho_report(self):
        rep = theory.threshold_report(rho=0.125, n_neurons=40)
        assert rep.alpha_star == pytest.approx(theory.alpha_star(0.125), rel=1e-15)
        assert rep.m_max == pytest.approx(math.exp(rep.alpha_star * 40), rel=1e-12)

    def test_degree_report(self):
        rep = theory.threshold_report(n_degree=3, n_neurons=60)
        assert rep.c_n == 6
        assert rep.polynomial_m == pytest.approx(
            theory.polynomial_capacity(60, 3, 6), rel=1e-15
        )

    def test_needs_a_query(self):
        with pytest.raises(ValueError):
            theory.threshold_report()

    def test_renders(self):
        rep = theory.threshold_report(rho=0.0, n_degree=2)
        assert '"alpha_star"' in rep.to_json()
        assert "c_n" in rep.to_table()
