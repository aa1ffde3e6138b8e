"""Water-filling power allocation and transmission-threshold optimization.

The optimal allocation for an active sensor with gain g is

    alpha2(g) = sqrt(1/(g*nu)) - b/g   for g >= b^2 * nu, else 0

with b = sigma_n2/(sigma_theta2+sigma_v2) and nu the multiplier that makes
the average-power constraint bind.  The constraint's left-hand side is
strictly decreasing in nu (the integrand shrinks and the activation region
contracts), so the root is unique and a bracketed Brent search finds it.

For the best-channel scheme the constraint integral runs over the max-gain
density and is evaluated by quadrature; for ALOHA it has a closed form in
erfc and E1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .analysis import (
    NumericsError,
    gmax_cdf,
    quadrature_expected_distortion_aloha,
    success_probability,
    _gmax_quantile,
    _QUAD_LIMIT,
    _QUAD_EPSREL,
)
from .model import NetworkParams, default_threshold
from .specfun import erfc, scaled_e1

__all__ = [
    "WaterFillSolution",
    "ThresholdSolution",
    "waterfill_alpha2",
    "solve_nu_diversity",
    "expected_distortion_diversity_optimal",
    "solve_nu_aloha",
    "expected_distortion_aloha_optimal",
    "expected_distortion_aloha_threshold",
    "optimize_threshold_constant_power",
    "optimize_threshold_joint",
]

_NU_BRACKET_LO = 1e-15
_NU_BRACKET_HI = 1e12


@dataclass(frozen=True)
class WaterFillSolution:
    """A solved allocation: the multiplier, where sensors switch on, how
    tightly the power constraint is met, and the resulting E[D]."""

    nu: float
    cutoff: float
    constraint_residual: float
    expected_distortion: float


@dataclass(frozen=True)
class ThresholdSolution:
    """An optimized transmission threshold and its expected distortion.

    `joint` carries the inner water-filling solution when power was
    co-optimized.  `curvature` is the central finite-difference second
    derivative at t_star; `n_grid_minima` counts local minima seen during
    the coarse scan (1 means the objective looked unimodal).
    """

    t_star: float
    expected_distortion: float
    joint: WaterFillSolution | None = None
    curvature: float = float("nan")
    n_grid_minima: int = 1


def waterfill_alpha2(g, nu: float, b: float):
    """Piecewise allocation, continuous (and zero) at the cutoff g = b^2*nu."""
    if nu <= 0.0 or b <= 0.0:
        raise ValueError("nu and b must be > 0")
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.sqrt(1.0 / (g * nu)) - b / g
    out = np.where(g >= b * b * nu, np.maximum(raw, 0.0), 0.0)
    return out if out.ndim else float(out)


def _diversity_power_used(nu: float, params: NetworkParams, m: int) -> float:
    # E[alpha2(gmax)] via the u = F(x) substitution; below-cutoff mass
    # contributes nothing.
    lam, b = params.lam, params.derived.b_shift
    u0 = gmax_cdf(b * b * nu, lam, m)

    def integrand(u: float) -> float:
        x = _gmax_quantile(u, lam, m)
        return max(math.sqrt(1.0 / (x * nu)) - b / x, 0.0)

    value, _ = integrate.quad(integrand, u0, 1.0, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=_QUAD_LIMIT)
    return value


def _solve_nu(power_used, budget: float, nu_guess: float) -> float:
    # Expand a bracket around the asymptotic guess, then Brent.
    f = lambda nu: power_used(nu) - budget
    lo = hi = nu_guess
    while f(lo) < 0.0:
        lo /= 10.0
        if lo < _NU_BRACKET_LO:
            raise NumericsError(f"no lower nu bracket above {_NU_BRACKET_LO}")
    while f(hi) > 0.0:
        hi *= 10.0
        if hi > _NU_BRACKET_HI:
            raise NumericsError(f"no upper nu bracket below {_NU_BRACKET_HI}")
    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=1e-14)


def solve_nu_diversity(
    params: NetworkParams, m: int, budget: float | None = None
) -> WaterFillSolution:
    """Find nu for the best-channel scheme at the given normalized budget
    (P/(sigma_theta2+sigma_v2), defaulting to the params' own budget)."""
    if budget is None:
        budget = params.normalized_budget
    if budget <= 0.0:
        raise ValueError("budget must be > 0")
    lam, b = params.lam, params.derived.b_shift
    guess = lam / math.log(max(m, 3))
    nu = _solve_nu(lambda v: _diversity_power_used(v, params, m), budget, guess)
    residual = (_diversity_power_used(nu, params, m) - budget) / budget
    ed = _ed_diversity_waterfilled(params, m, nu)
    return WaterFillSolution(nu=nu, cutoff=b * b * nu, constraint_residual=residual, expected_distortion=ed)


def _ed_diversity_waterfilled(params: NetworkParams, m: int, nu: float) -> float:
    # Two pieces: the active region with alpha2(g), and the prior variance
    # on the (exponentially unlikely) event that even the best gain sits
    # below the cutoff.
    lam = params.lam
    d = params.derived
    u0 = gmax_cdf(d.b_shift**2 * nu, lam, m)

    def integrand(u: float) -> float:
        x = _gmax_quantile(u, lam, m)
        return d.a_limit * (1.0 + d.c_coeff * math.sqrt(nu / x))

    value, _ = integrate.quad(integrand, u0, 1.0, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=_QUAD_LIMIT)
    return value + params.sigma_theta2 * u0


def expected_distortion_diversity_optimal(
    params: NetworkParams, m: int, budget: float | None = None
) -> float:
    """E[D] for the best-channel scheme under the optimal allocation."""
    return solve_nu_diversity(params, m, budget).expected_distortion


def _aloha_power_used(nu: float, params: NetworkParams, threshold: float) -> float:
    # Closed form of int_a^inf (sqrt(1/(g nu)) - b/g) lam e^{-lam g} dg with
    # a = max(T, b^2 nu):  sqrt(lam pi / nu) erfc(sqrt(lam a)) - b lam E1(lam a).
    lam, b = params.lam, params.derived.b_shift
    a = max(threshold, b * b * nu)
    if a == 0.0:
        # T = 0 and cutoff 0 cannot occur since nu > 0, but guard the log.
        raise ValueError("activation point must be positive")
    first = math.sqrt(lam * math.pi / nu) * erfc(math.sqrt(lam * a))
    second = b * lam * math.exp(-lam * a) * scaled_e1(lam * a)
    return first - second


def solve_nu_aloha(
    params: NetworkParams,
    m: int,
    threshold: float | None = None,
    budget: float | None = None,
) -> WaterFillSolution:
    """Find nu for channel-aware ALOHA.

    `budget` is the per-sensor normalized budget P/(M(sigma_theta2+sigma_v2));
    by default the params' total budget is split across the M sensors.
    """
    t = default_threshold(params.lam, m) if threshold is None else float(threshold)
    if t < 0.0:
        raise ValueError("threshold must be >= 0")
    if budget is None:
        budget = params.normalized_budget / m
    if budget <= 0.0:
        raise ValueError("budget must be > 0")
    lam, b = params.lam, params.derived.b_shift
    guess = lam / math.log(max(m, 3))
    nu = _solve_nu(lambda v: _aloha_power_used(v, params, t), budget, guess)
    residual = (_aloha_power_used(nu, params, t) - budget) / budget
    ed = _ed_aloha_waterfilled(params, m, t, nu)
    return WaterFillSolution(
        nu=nu, cutoff=max(t, b * b * nu), constraint_residual=residual, expected_distortion=ed
    )


def _ed_aloha_waterfilled(params: NetworkParams, m: int, t: float, nu: float) -> float:
    # Three terms: failed slots at the prior variance, successes above the
    # activation point a = max(T, b^2 nu), and successes whose gain cleared
    # the threshold but not the cutoff (zero-power, prior variance again).
    lam = params.lam
    d = params.derived
    st2 = params.sigma_theta2
    a = max(t, d.b_shift**2 * nu)
    p_succ = success_probability(m, lam, t)
    p = math.exp(-lam * t)
    tail_mass = math.exp(-lam * a)
    root_tail = math.sqrt(nu * lam * math.pi) * erfc(math.sqrt(lam * a))
    active = d.a_limit * (tail_mass + d.c_coeff * root_tail)
    dormant = st2 * (p - tail_mass)
    if p > 0.0:
        conditional = (active + dormant) / p
    else:
        conditional = st2
    return st2 * (1.0 - p_succ) + p_succ * conditional


def expected_distortion_aloha_optimal(
    params: NetworkParams,
    m: int,
    threshold: float | None = None,
    budget: float | None = None,
) -> float:
    """E[D] for ALOHA under the optimal allocation at the given threshold."""
    return solve_nu_aloha(params, m, threshold, budget).expected_distortion


def expected_distortion_aloha_threshold(params: NetworkParams, m: int, threshold: float) -> float:
    """E[D] for ALOHA at threshold T under the normalized constant policy
    alpha2 = exp(lam*T)/M, which keeps the long-run average power equal to
    the unit policy at the default threshold."""
    if params.lam * threshold > 690.0:
        # alpha2 would overflow, but the transmit probability has already
        # underflowed: nothing ever reaches the fusion center.
        return params.sigma_theta2
    alpha2 = math.exp(params.lam * threshold) / m
    return quadrature_expected_distortion_aloha(params, m, threshold, alpha2)


def _scan_then_golden(objective, m: int, lam: float) -> tuple[float, float, int]:
    # Coarse 200-point scan of (0.05, 3] * ln(M)/lam, extended if the
    # minimum lands on an edge, then golden-section refinement.
    t_scale = math.log(max(m, 2)) / lam
    lo, hi = 0.05 * t_scale, 3.0 * t_scale
    for _ in range(8):
        grid = np.linspace(lo, hi, 200)
        values = np.array([objective(t) for t in grid])
        idx = int(np.argmin(values))
        if idx == 0 and lo > 1e-3 * t_scale:
            lo /= 4.0
            continue
        if idx == len(grid) - 1 and hi < 10.0 * t_scale:
            hi = min(2.0 * hi, 10.0 * t_scale)
            continue
        break
    interior = values[1:-1]
    minima = np.sum(
        (interior < values[:-2]) & (interior <= values[2:])
    )
    n_minima = max(int(minima), 1)
    left = grid[max(idx - 1, 0)]
    right = grid[min(idx + 1, len(grid) - 1)]
    if idx in (0, len(grid) - 1):
        t_star = float(grid[idx])
    else:
        try:
            result = optimize.minimize_scalar(
                objective,
                bracket=(left, float(grid[idx]), right),
                method="golden",
                options={"xtol": 1e-10},
            )
            t_star = float(result.x)
        except ValueError:
            # Degenerate (flat) bracket; the grid point is already optimal
            # to within the scan resolution.
            t_star = float(grid[idx])
    return t_star, float(objective(t_star)), n_minima


def _curvature(objective, t_star: float) -> float:
    h = 1e-4 * t_star
    return (objective(t_star + h) - 2.0 * objective(t_star) + objective(t_star - h)) / (h * h)


def optimize_threshold_constant_power(params: NetworkParams, m: int) -> ThresholdSolution:
    """Minimize E[D] over the threshold under the normalized constant policy."""
    if m < 2:
        raise ValueError("threshold optimization needs M >= 2")
    objective = lambda t: expected_distortion_aloha_threshold(params, m, t)
    t_star, ed, n_minima = _scan_then_golden(objective, m, params.lam)
    return ThresholdSolution(
        t_star=t_star,
        expected_distortion=ed,
        curvature=_curvature(objective, t_star),
        n_grid_minima=n_minima,
    )


def optimize_threshold_joint(
    params: NetworkParams, m: int, budget: float | None = None
) -> ThresholdSolution:
    """Line search over the threshold with the exact inner water-filling
    solution recomputed at every candidate."""
    if m < 2:
        raise ValueError("threshold optimization needs M >= 2")
    if budget is None:
        budget = params.normalized_budget

    def objective(t: float) -> float:
        return solve_nu_aloha(params, m, t, budget / m).expected_distortion

    t_star, ed, n_minima = _scan_then_golden(objective, m, params.lam)
    solution = solve_nu_aloha(params, m, t_star, budget / m)
    return ThresholdSolution(
        t_star=t_star,
        expected_distortion=ed,
        joint=solution,
        curvature=_curvature(objective, t_star),
        n_grid_minima=n_minima,
    )
