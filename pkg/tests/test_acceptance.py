"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings. All tolerances are fixed here; the Monte Carlo
criteria use master seed 0 throughout.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from densemem import (
    ModelSpec,
    NetworkState,
    Pattern,
    PatternStore,
    SweepPoint,
    classical_local_field,
    exp_delta_energy_sign,
    polynomial_local_field,
    results_to_csv,
    run_sweep,
    run_trial,
    theory,
)
from densemem.experiments import _trial_specs
from oracles import (
    binomial_upper_tail_exact,
    exp_delta_sign_highprec,
    generalized_x2_sign,
    hebbian_tensor_field_numerators,
    random_instance,
    rate_function_highprec,
)

MASTER_SEED = 0

A_STAR_EIGHTH = theory.alpha_star(0.125)

EXP_TREND_POINTS = [
    SweepPoint(model_kind="exponential", n_neurons=40, alpha=f * A_STAR_EIGHTH, n_flips=5)
    for f in (0.5, 1.0, 1.5)
]
EXP_TREND_TRIALS = 500

POLY_M_LOW = math.floor(60**2 / (12 * math.log(60)))
POLY_M_HIGH = math.floor(60**2 / (0.5 * math.log(60)))
POLY_TREND_POINTS = [
    SweepPoint(model_kind="polynomial", degree=3, n_neurons=60, n_patterns=m, n_flips=0)
    for m in (POLY_M_LOW, POLY_M_HIGH)
]
POLY_TREND_TRIALS = 300


@contextmanager
def criterion(number, description, budget_seconds, extra_elapsed=0.0):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"CRITERION {number}: FAIL - {description}")
        raise
    elapsed = time.perf_counter() - start + extra_elapsed
    assert elapsed < budget_seconds, (
        f"criterion {number} took {elapsed:.1f}s, budget {budget_seconds}s"
    )
    print(f"CRITERION {number}: PASS - {description} ({elapsed:.2f}s)")


@pytest.fixture(scope="module")
def exp_trend():
    start = time.perf_counter()
    results = run_sweep(EXP_TREND_POINTS, EXP_TREND_TRIALS, MASTER_SEED, parallelism=8)
    return results, time.perf_counter() - start


@pytest.fixture(scope="module")
def poly_trend():
    start = time.perf_counter()
    results = run_sweep(POLY_TREND_POINTS, POLY_TREND_TRIALS, MASTER_SEED, parallelism=8)
    return results, time.perf_counter() - start


def test_criterion_1_classical_reduction():
    with criterion(1, "x^2 generic rule == classical sign rule, 1000 instances", 10.0):
        rng = np.random.default_rng(1001)
        for _ in range(1000):
            n = int(rng.integers(2, 65))
            m = int(rng.integers(1, 21))
            signs, sigma = random_instance(rng, n, m)
            store = PatternStore.from_signs(signs)
            state = NetworkState.from_pattern(store, Pattern.from_signs(sigma))
            i = int(rng.integers(0, n))
            # classical field carries the constant self-coupling M sigma_i;
            # remove it before comparing with the self-term-free generic rule
            corrected = classical_local_field(state, i) - m * int(sigma[i])
            classical_sign = (corrected > 0) - (corrected < 0)
            oracle_sign = generalized_x2_sign(signs, sigma, i)
            assert classical_sign == oracle_sign
            # identical decisions under the keep-current tie policy,
            # ties coinciding
            current = int(sigma[i])
            classical_value = current if classical_sign == 0 else classical_sign
            oracle_value = current if oracle_sign == 0 else oracle_sign
            assert classical_value == oracle_value
            assert (classical_sign == 0) == (oracle_sign == 0)


def test_criterion_2_tensor_vs_overlap_oracle():
    with criterion(2, "degree-n field sign == Hebbian tensor contraction, 500 instances", 10.0):
        rng = np.random.default_rng(1002)
        for _ in range(500):
            n = int(rng.integers(2, 9))
            m = int(rng.integers(1, 7))
            degree = int(rng.choice([2, 3, 4]))
            signs, sigma = random_instance(rng, n, m)
            store = PatternStore.from_signs(signs)
            state = NetworkState.from_pattern(store, Pattern.from_signs(sigma))
            tensor_fields = hebbian_tensor_field_numerators(signs, sigma, degree)
            for i in range(n):
                production = polynomial_local_field(state, i, degree)
                assert np.sign(production) == np.sign(tensor_fields[i])


def test_criterion_3_exponential_sign_oracle():
    with criterion(3, "exponential gap sign == 256-bit direct evaluation, 500 instances", 30.0):
        rng = np.random.default_rng(1003)
        for _ in range(500):
            n = int(rng.integers(2, 31))
            m = int(rng.integers(1, 51))
            signs, sigma = random_instance(rng, n, m)
            store = PatternStore.from_signs(signs)
            state = NetworkState.from_pattern(store, Pattern.from_signs(sigma))
            i = int(rng.integers(0, n))
            production_sign, _ = exp_delta_energy_sign(state, i)
            assert production_sign == exp_delta_sign_highprec(signs, sigma, i)


def test_criterion_4_rate_function_suite():
    with criterion(4, "rate function values, convexity, inequality chain", 1.0):
        assert theory.rate_function(0.0) == 0.0
        assert abs(theory.rate_function(1.0) - math.log(2)) <= 1e-12 * math.log(2)
        grid = np.linspace(-1.0, 1.0, 1001)
        values = np.array([theory.rate_function(float(x)) for x in grid])
        # evenness against the mirrored grid
        assert np.allclose(values, values[::-1], rtol=1e-12, atol=1e-15)
        # convexity via second differences
        assert (np.diff(values, 2) >= -1e-12).all()
        # 1e-12 relative agreement with the high-precision oracle
        for x in grid[::50]:
            hp = float(rate_function_highprec(float(x)))
            assert abs(theory.rate_function(float(x)) - hp) <= 1e-12 * max(abs(hp), 1e-300)
        # I(x) <= x^2 <= x on (0, 1)
        for x in np.linspace(1e-6, 1.0 - 1e-12, 2000):
            i_x = theory.rate_function(float(x))
            assert i_x <= x * x + 1e-15
            assert x * x <= x


def test_criterion_5_bound_domination():
    with criterion(5, "large-deviation bounds dominate exact tails", 30.0):
        for m in range(1, 31):
            for p in (0.1, 0.3, 0.5):
                for eps in np.linspace(0.01, 1.0 - p, 10):
                    eps = float(eps)
                    bound = theory.binomial_tail_bound(m, p, eps)
                    exact = binomial_upper_tail_exact(m, p, m * (p + eps))
                    assert bound >= exact
        for m in range(1, 25):
            for x in (0.25, 0.5, 0.75):
                bound = theory.rademacher_tail_bound(m, x)
                k_min = math.ceil(m * (1 + x) / 2)
                exact = Fraction(
                    sum(math.comb(m, k) for k in range(k_min, m + 1)), 2**m
                )
                assert bound >= float(exact)


def test_criterion_6_exponential_capacity_trend(exp_trend):
    results, sweep_elapsed = exp_trend
    with criterion(
        6,
        "one-step success separates 0.5 vs 1.5 alpha* at N=40, rho=0.125",
        300.0,
        extra_elapsed=sweep_elapsed,
    ):
        low_load, _, high_load = results
        rate_low = low_load.n_success / low_load.n_trials
        assert rate_low >= 0.95
        # non-overlapping 95% Wilson intervals between the extreme loads
        assert low_load.wilson_low > high_load.wilson_high
        assert low_load.theory_overlay == pytest.approx(A_STAR_EIGHTH, rel=1e-15)


def test_criterion_7_polynomial_capacity_trend(poly_trend):
    results, sweep_elapsed = poly_trend
    with criterion(
        7,
        "degree-3 stability separates M=N^2/(12 log N) vs M=N^2/(0.5 log N)",
        300.0,
        extra_elapsed=sweep_elapsed,
    ):
        below, above = results
        assert below.n_patterns == POLY_M_LOW and above.n_patterns == POLY_M_HIGH
        assert below.wilson_low > above.wilson_high


def test_criterion_8_necessary_condition_audit():
    with criterion(8, "every failed bit has |noise| >= |signal|, zero violations", 300.0):
        for p_idx, point in enumerate(EXP_TREND_POINTS):
            for spec in _trial_specs(point, EXP_TREND_TRIALS, MASTER_SEED, p_idx):
                result = run_trial(spec)
                assert result.audit_violations == 0


def test_criterion_9_parallel_determinism(exp_trend, poly_trend):
    with criterion(9, "parallelism 1 vs 8 produce identical CSV payloads", 600.0):
        exp_results, _ = exp_trend
        poly_results, _ = poly_trend
        exp_serial = run_sweep(EXP_TREND_POINTS, EXP_TREND_TRIALS, MASTER_SEED, parallelism=1)
        poly_serial = run_sweep(POLY_TREND_POINTS, POLY_TREND_TRIALS, MASTER_SEED, parallelism=1)
        assert results_to_csv(exp_serial) == results_to_csv(exp_results)
        assert results_to_csv(poly_serial) == results_to_csv(poly_results)
