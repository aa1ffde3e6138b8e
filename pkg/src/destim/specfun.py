"""Exponential integral E1 and complementary error function.

Every closed-form fading expectation in this package reduces to E1(x) =
int_x^inf exp(-t)/t dt and erfc.  The product exp(x)*E1(x) appears with
arguments that grow with the sensor count, where exp(x) alone overflows,
so the scaled form is computed directly and never as a product.

Evaluation strategy: the alternating power series converges quickly for
x <= 1, and the continued fraction

    exp(x) E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- 9/(x+7- ...))))

(evaluated with the modified Lentz algorithm) converges quickly for
x > 1.  Together they cover every argument the distortion formulas
produce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "AccuracyBudget",
    "ConvergenceError",
    "exp_integral_e1",
    "scaled_e1",
    "erfc",
]

_EULER_GAMMA = 0.5772156649015328606


class ConvergenceError(ArithmeticError):
    """A series or continued fraction failed to reach its tolerance."""


@dataclass(frozen=True)
class AccuracyBudget:
    """Termination control for the series and continued fraction."""

    rel_tol: float = 1e-12
    max_terms: int = 200

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tol <= 1e-6:
            raise ValueError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if self.max_terms < 50:
            raise ValueError(f"max_terms must be >= 50, got {self.max_terms}")


_DEFAULT_BUDGET = AccuracyBudget()

# Below this floor, relative comparisons against denormal tails are moot.
_ABS_FLOOR = 1e-300


def _e1_series(x: float, budget: AccuracyBudget) -> float:
    # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
    total = -_EULER_GAMMA - math.log(x)
    term = 1.0
    for k in range(1, budget.max_terms + 1):
        term *= -x / k
        contrib = -term / k
        total += contrib
        if abs(contrib) <= budget.rel_tol * abs(total):
            return total
    raise ConvergenceError(f"E1 power series did not converge at x={x}")


def _scaled_e1_lentz(x: float, budget: AccuracyBudget) -> float:
    # Modified Lentz on the continued fraction for exp(x) E1(x); the
    # partial numerators are -k^2 and the denominators x + (2k+1).
    tiny = 1e-290
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for k in range(1, budget.max_terms + 1):
        a = -float(k * k)
        b += 2.0
        d = a * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= budget.rel_tol:
            return h
    raise ConvergenceError(f"E1 continued fraction did not converge at x={x}")


def exp_integral_e1(x: float, budget: AccuracyBudget = _DEFAULT_BUDGET) -> float:
    """E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Underflows to 0.0 for x beyond roughly 740 where the true value drops
    below the smallest representable double; callers needing the tail use
    :func:`scaled_e1`.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"E1 requires x > 0, got {x}")
    if x <= 1.0:
        return _e1_series(x, budget)
    return math.exp(-x) * _scaled_e1_lentz(x, budget)


def scaled_e1(x: float, budget: AccuracyBudget = _DEFAULT_BUDGET) -> float:
    """exp(x) * E1(x) without overflow, valid up to x ~ 1e8 and beyond."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"scaled E1 requires x > 0, got {x}")
    if x <= 1.0:
        return math.exp(x) * _e1_series(x, budget)
    return _scaled_e1_lentz(x, budget)


def erfc(x: float) -> float:
    """Complementary error function on x >= 0.

    Delegates to the C library implementation, which is accurate to a few
    ulp; negative arguments are not needed by any fading integral here
    and are rejected.
    """
    x = float(x)
    if x < 0.0:
        raise ValueError(f"erfc domain here is x >= 0, got {x}")
    return math.erfc(x)
