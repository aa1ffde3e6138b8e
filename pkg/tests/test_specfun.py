import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from destim.specfun import AccuracyBudget, erfc, exp_integral_e1, scaled_e1

EULER_GAMMA = 0.5772156649015328606


# ---------------------------------------------------------------- oracles

def e1_quadrature_oracle(x: float) -> float:
    value, _ = integrate.quad(lambda t: math.exp(-t) / t, x, np.inf, epsabs=0, epsrel=1e-13)
    return value


def e1_series_oracle(x: float, terms: int = 80) -> float:
    total = -EULER_GAMMA - math.log(x)
    fact = 1.0
    for k in range(1, terms):
        fact *= k
        total += (-1) ** (k + 1) * x**k / (k * fact)
    return total


def erfc_quadrature_oracle(x: float) -> float:
    value, _ = integrate.quad(
        lambda t: 2.0 / math.sqrt(math.pi) * math.exp(-t * t), x, np.inf, epsabs=0, epsrel=1e-13
    )
    return value


# Frozen from the oracles above.
E1_AT_1 = 0.21938393439552023
ERFC_AT_1 = 0.15729920705028513


def test_oracles_still_agree_with_frozen_values():
    assert e1_quadrature_oracle(1.0) == pytest.approx(E1_AT_1, rel=1e-12)
    assert e1_series_oracle(1.0) == pytest.approx(E1_AT_1, rel=1e-12)
    assert erfc_quadrature_oracle(1.0) == pytest.approx(ERFC_AT_1, rel=1e-12)


# ------------------------------------------------------------------- E1

def test_e1_at_one():
    assert exp_integral_e1(1.0) == pytest.approx(E1_AT_1, rel=1e-12)


def test_e1_small_x_log_divergence():
    x = 1e-8
    assert exp_integral_e1(x) == pytest.approx(-EULER_GAMMA - math.log(x), rel=1e-7)
    assert exp_integral_e1(x) == pytest.approx(e1_series_oracle(x), rel=1e-12)


def test_e1_asymptotic_window_at_50():
    # e^x x E1(x) = 1 - 1/x + ... so the product sits just below 1.
    assert 0.96 < exp_integral_e1(50.0) * 50.0 * math.exp(50.0) < 1.0


@pytest.mark.parametrize("bad", [0.0, -1.0, -1e-9])
def test_e1_domain(bad):
    with pytest.raises(ValueError):
        exp_integral_e1(bad)
    with pytest.raises(ValueError):
        scaled_e1(bad)


def test_e1_matches_scipy_on_grid():
    for x in np.logspace(-6, 2.5, 60):
        assert exp_integral_e1(float(x)) == pytest.approx(float(special.exp1(x)), rel=1e-11)


# -------------------------------------------------------------- scaled E1

def test_scaled_e1_at_one():
    assert scaled_e1(1.0) == pytest.approx(math.e * E1_AT_1, rel=1e-12)


def test_scaled_e1_huge_arguments_no_overflow():
    x = 1e6
    assert scaled_e1(x) == pytest.approx(1.0 / x - 1.0 / x**2, rel=1e-9)
    assert 0.0 < scaled_e1(1e8) < 1e-7


def test_scaled_e1_consistent_with_e1_at_small_x():
    x = 0.1666667
    assert scaled_e1(x) == pytest.approx(math.exp(x) * exp_integral_e1(x), rel=1e-13)


@given(st.floats(min_value=1e-6, max_value=700.0))
def test_scaled_product_identity(x):
    direct = scaled_e1(x)
    product = math.exp(x) * exp_integral_e1(x)
    assert abs(direct - product) / direct <= 1e-10


@given(st.floats(min_value=10.0, max_value=700.0))
def test_e1_sandwich(x):
    e1 = exp_integral_e1(x)
    assert math.exp(-x) / (x + 1.0) < e1 < math.exp(-x) / x


@given(st.floats(min_value=10.0, max_value=1e6))
def test_scaled_e1_sandwich_large_x(x):
    # Above ~1e6 the gap between the brackets falls below double
    # resolution, so the strict form is only meaningful up to there.
    s = scaled_e1(x)
    assert 1.0 / (x + 1.0) < s < 1.0 / x


def _spaced(xs, rel_gap=1e-6):
    # Strict ordering is only claimed for points that are meaningfully
    # apart; values 1 ulp apart can round to the same double.
    out = []
    for x in sorted(xs):
        if not out or x > out[-1] * (1.0 + rel_gap) + 1e-9:
            out.append(x)
    return out


@given(st.lists(st.floats(min_value=1e-4, max_value=500.0), min_size=2, max_size=20, unique=True))
def test_e1_monotone_decreasing(xs):
    xs = _spaced(xs)
    e1s = [exp_integral_e1(x) for x in xs]
    assert all(a > b for a, b in zip(e1s, e1s[1:]))


@given(st.lists(st.floats(min_value=1e-4, max_value=25.0), min_size=2, max_size=20, unique=True))
def test_erfc_monotone_decreasing(xs):
    # erfc underflows past x ~ 27, below the 1e-300 documentation floor;
    # strict ordering is only claimed above it.
    xs = _spaced(xs)
    erfcs = [erfc(x) for x in xs]
    assert all(a > b for a, b in zip(erfcs, erfcs[1:]))


# ----------------------------------------------------------------- erfc

def test_erfc_values():
    assert erfc(0.0) == 1.0
    assert erfc(1.0) == pytest.approx(ERFC_AT_1, rel=1e-12)


def test_erfc_gaussian_tail_bound():
    # erfc(sqrt(a)) <= exp(-a) with a = 100.
    assert erfc(10.0) <= math.exp(-100.0)


def test_erfc_rejects_negative():
    with pytest.raises(ValueError):
        erfc(-0.5)


# ----------------------------------------------------------------- budget

def test_accuracy_budget_validation():
    with pytest.raises(ValueError):
        AccuracyBudget(rel_tol=1e-5)
    with pytest.raises(ValueError):
        AccuracyBudget(rel_tol=0.0)
    with pytest.raises(ValueError):
        AccuracyBudget(max_terms=10)
    tight = AccuracyBudget(rel_tol=1e-15, max_terms=500)
    assert scaled_e1(2.0, tight) == pytest.approx(scaled_e1(2.0), rel=1e-11)
