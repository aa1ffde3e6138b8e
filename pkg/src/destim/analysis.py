"""Exact expected distortions, large-M scaling laws, and asymmetric bounds.

Expectations over the best of M exponential gains are computed by
adaptive quadrature after the substitution u = (1 - exp(-lam*x))^M,
which turns the max-gain density into the Jacobian and leaves a smooth
integrand on (0, 1).  Without it the density mass sits in a narrow bump
near ln(M)/lam that fixed panels miss entirely.

The alternating binomial sum for E[1/(gmax+b)] is exact but loses about
one bit per sensor to cancellation, so it refuses M > 15 and exists
mainly as an independent check on the quadrature path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .model import (
    AsymmetricRanges,
    NetworkParams,
    default_threshold,
    expected_gain,
    expected_root_gain,
)
from .specfun import AccuracyBudget, scaled_e1

# The alternating sum amplifies per-term error by roughly the ratio of the
# largest term to the result (~1e4 at M=15), so its E1 evaluations run at a
# tolerance near machine precision.
_EXACT_SUM_BUDGET = AccuracyBudget(rel_tol=1e-15, max_terms=500)

__all__ = [
    "NumericsError",
    "AsymptoticCurve",
    "BoundPair",
    "EXACT_SUM_MAX_M",
    "gmax_inverse_moment_exact_sum",
    "gmax_inverse_moment_quadrature",
    "gmax_negative_moment",
    "gmax_cdf",
    "asymptotic_diversity",
    "asymptotic_aloha",
    "asymptotic_mac",
    "asymptotic_orthogonal",
    "asymptotic_curve",
    "quadrature_expected_distortion_diversity",
    "quadrature_expected_distortion_aloha",
    "success_probability",
    "asymptotic_bounds",
]

EXACT_SUM_MAX_M = 15

_QUAD_LIMIT = 300
_QUAD_EPSREL = 1e-12


class NumericsError(ArithmeticError):
    """Quadrature or root finding failed; carries the residual estimate."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


def _quad(f: Callable[[float], float], lo: float, hi: float, rel_target: float = 1e-10) -> float:
    value, abserr = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=_QUAD_LIMIT)
    if abserr > rel_target * max(abs(value), 1e-300):
        raise NumericsError(
            f"quadrature residual {abserr:.3e} exceeds target for value {value:.6e}",
            residual=abserr,
        )
    return value


def _gmax_quantile(u: float, lam: float, m: int) -> float:
    # Inverse CDF of the max of m exponentials; scalar counterpart of
    # model.gmax_from_uniform, kept local for tight quadrature loops.
    return -math.log(-math.expm1(math.log(u) / m)) / lam


def gmax_cdf(x: float, lam: float, m: int) -> float:
    """(1 - exp(-lam*x))^M, computed through expm1 for small x."""
    if x <= 0.0:
        return 0.0
    log_inner = math.log(-math.expm1(-lam * x))
    return math.exp(m * log_inner)


def gmax_inverse_moment_exact_sum(lam: float, b: float, m: int) -> float:
    """E[1/(gmax+b)] by the exact alternating binomial sum, M <= 15 only.

    sum_{k=0}^{M-1} M lam C(M-1,k) (-1)^k exp(lam(k+1)b) E1(lam(k+1)b)
    """
    if lam <= 0.0 or b <= 0.0:
        raise ValueError("lam and b must be > 0")
    if not 1 <= m <= EXACT_SUM_MAX_M:
        raise ValueError(
            f"exact sum is limited to M <= {EXACT_SUM_MAX_M} by alternating-sign "
            f"cancellation; use gmax_inverse_moment_quadrature for M={m}"
        )
    total = 0.0
    for k in range(m):
        term = m * lam * math.comb(m - 1, k) * scaled_e1(lam * (k + 1) * b, _EXACT_SUM_BUDGET)
        total += -term if k % 2 else term
    return total


def gmax_inverse_moment_quadrature(lam: float, b: float, m: int) -> float:
    """E[1/(gmax+b)] for any M >= 1 by adaptive quadrature."""
    if lam <= 0.0 or b <= 0.0:
        raise ValueError("lam and b must be > 0")
    if m < 1:
        raise ValueError("M must be >= 1")
    return _quad(lambda u: 1.0 / (_gmax_quantile(u, lam, m) + b), 0.0, 1.0)


def gmax_negative_moment(lam: float, m: int, exponent: float) -> float:
    """E[gmax^-p] for p in {1/2, 1}.

    The substitution u = s^2 flattens the integrable endpoint singularity.
    E[1/gmax] diverges for M = 1 (plain exponential) and is rejected.
    """
    if exponent not in (0.5, 1.0):
        raise ValueError(f"unsupported exponent {exponent}; only 1/2 and 1")
    if m < 1:
        raise ValueError("M must be >= 1")
    if exponent == 1.0 and m == 1:
        raise ValueError("E[1/g] diverges for a single exponential gain")
    return _quad(
        lambda s: 2.0 * s * _gmax_quantile(s * s, lam, m) ** (-exponent),
        0.0,
        1.0,
    )


def _diversity_scaling(sv2: float, inv_mu: float, m: int, params: NetworkParams) -> float:
    # Best-channel asymptote with sensor noise sv2 and fading scale 1/inv_mu.
    st2, sn2 = params.sigma_theta2, params.sigma_n2
    a = st2 * sv2 / (st2 + sv2)
    c = sn2 * st2 / (sv2 * (st2 + sv2))
    return a * (1.0 + c * inv_mu / math.log(m))


def asymptotic_diversity(params: NetworkParams, m: int) -> float:
    """a_limit * (1 + c_coeff * lam / ln M); converges at rate 1/ln M."""
    if m < 2:
        raise ValueError("asymptote needs M >= 2 (ln M must be positive)")
    return _diversity_scaling(params.sigma_v2, params.lam, m, params)


def asymptotic_aloha(params: NetworkParams, m: int) -> float:
    """sigma_theta2*(1 - 1/e) + (1/e) * diversity asymptote."""
    if m < 2:
        raise ValueError("asymptote needs M >= 2")
    st2 = params.sigma_theta2
    return st2 * (1.0 - 1.0 / math.e) + asymptotic_diversity(params, m) / math.e


def asymptotic_mac(
    params: NetworkParams,
    m: int,
    e_gain: float | None = None,
    e_root_gain: float | None = None,
) -> float:
    """(sigma_v2 E[g] + sigma_n2) / (M (E[sqrt g])^2); holds for any fading
    with both moments finite, exponential moments by default."""
    if m < 1:
        raise ValueError("M must be >= 1")
    eg = expected_gain(params.lam) if e_gain is None else e_gain
    es = expected_root_gain(params.lam) if e_root_gain is None else e_root_gain
    return (params.sigma_v2 * eg + params.sigma_n2) / (m * es * es)


def asymptotic_orthogonal(params: NetworkParams, m: int) -> float:
    """L + (2 sigma_v2 / (M lam^2 sigma_n2^2)) * L^2 with
    L = (1/sigma_theta2 + 1/(lam sigma_n2))^-1."""
    if m < 1:
        raise ValueError("M must be >= 1")
    if params.sigma_n2 == 0.0:
        raise ValueError("orthogonal asymptote requires sigma_n2 > 0")
    limit = _orthogonal_limit(params.sigma_n2, params.lam, params.sigma_theta2)
    coeff = 2.0 * params.sigma_v2 / (params.lam**2 * params.sigma_n2**2)
    return limit + coeff * limit * limit / m


def _orthogonal_limit(sn2: float, lam: float, st2: float) -> float:
    return 1.0 / (1.0 / st2 + 1.0 / (lam * sn2))


@dataclass(frozen=True)
class AsymptoticCurve:
    """A scheme's large-M law: its limit, finite-M expression, and decay rate."""

    limit_value: float
    decay_rate_tag: str  # "inv_log_M" or "inv_M"
    _eval: Callable[[int], float]

    def at(self, m: int) -> float:
        return self._eval(m)


def asymptotic_curve(scheme: str, params: NetworkParams) -> AsymptoticCurve:
    d = params.derived
    if scheme == "diversity":
        return AsymptoticCurve(d.a_limit, "inv_log_M", lambda m: asymptotic_diversity(params, m))
    if scheme == "aloha":
        st2 = params.sigma_theta2
        limit = st2 * (1.0 - 1.0 / math.e) + d.a_limit / math.e
        return AsymptoticCurve(limit, "inv_log_M", lambda m: asymptotic_aloha(params, m))
    if scheme == "mac":
        return AsymptoticCurve(0.0, "inv_M", lambda m: asymptotic_mac(params, m))
    if scheme == "orthogonal":
        limit = _orthogonal_limit(params.sigma_n2, params.lam, params.sigma_theta2)
        return AsymptoticCurve(limit, "inv_M", lambda m: asymptotic_orthogonal(params, m))
    raise ValueError(f"unknown scheme {scheme!r}")


def quadrature_expected_distortion_diversity(
    params: NetworkParams, m: int, alpha2: float = 1.0
) -> float:
    """Exact finite-M E[D] for the best-channel scheme at constant alpha2."""
    if alpha2 <= 0.0:
        raise ValueError("alpha2 must be > 0")
    d = params.derived
    if d.c_coeff == 0.0:
        return d.a_limit
    moment = gmax_inverse_moment_quadrature(params.lam, d.b_shift / alpha2, m)
    return d.a_limit * (1.0 + d.c_coeff * moment / alpha2)


def success_probability(m: int, lam: float, threshold: float) -> float:
    """P(exactly one of M sensors exceeds the threshold)."""
    p = math.exp(-lam * threshold)
    return m * p * (1.0 - p) ** (m - 1)


def quadrature_expected_distortion_aloha(
    params: NetworkParams,
    m: int,
    threshold: float | None = None,
    alpha2: float = 1.0,
) -> float:
    """Exact finite-M E[D] for channel-aware ALOHA at constant alpha2.

    Closed form: the conditional best-channel integral over (T, inf)
    evaluates to a_limit * e^{-lam T} * (1 + (c/alpha2) lam e^{x} E1(x))
    with x = lam*(b/alpha2 + T), using the scaled E1 so the exponent may
    grow with M without overflow.
    """
    if alpha2 <= 0.0:
        raise ValueError("alpha2 must be > 0")
    t = default_threshold(params.lam, m) if threshold is None else float(threshold)
    if t < 0.0:
        raise ValueError("threshold must be >= 0")
    d = params.derived
    lam = params.lam
    p_succ = success_probability(m, lam, t)
    if d.c_coeff == 0.0:
        mean_success = d.a_limit
    else:
        mean_success = d.a_limit * (
            1.0 + (d.c_coeff / alpha2) * lam * scaled_e1(lam * (d.b_shift / alpha2 + t))
        )
    return params.sigma_theta2 * (1.0 - p_succ) + p_succ * mean_success


@dataclass(frozen=True)
class BoundPair:
    """Upper/lower expected-distortion bounds for an asymmetric network.

    The displayed bounds hold up to (1+o(1)) factors that are dropped at
    finite M, hence `asymptotic_only`; `shares_limit` records whether both
    bounds approach the same value as M grows.
    """

    lower: float
    upper: float
    shares_limit: bool
    asymptotic_only: bool = True


def asymptotic_bounds(
    scheme: str, params: NetworkParams, ranges: AsymmetricRanges, m: int
) -> BoundPair:
    """Evaluate the symmetric-substitution bound pair at finite M.

    Sensor-noise heterogeneity is bracketed by evaluating the symmetric
    law at sigma_max2 (upper) and sigma_min2 (lower); fading heterogeneity
    g_i = mu_i h_i by the scale bounds on the max.  Distortion decreases
    in the fading scale, so the lower bound takes mu_max and the upper
    bound mu_min.
    """
    if m < 2:
        raise ValueError("bounds need M >= 2")
    sv_lo = params.sigma_v2 if ranges.sigma_min2 is None else ranges.sigma_min2
    sv_hi = params.sigma_v2 if ranges.sigma_max2 is None else ranges.sigma_max2
    # With a mu range the common factor h is exponential with mean 1, so
    # the effective rate is 1/mu; otherwise the symmetric rate applies.
    if ranges.mu_min is None:
        rate_for_lower = rate_for_upper = params.lam
        eh, esh = expected_gain(params.lam), expected_root_gain(params.lam)
        mu_lo = mu_hi = 1.0 / params.lam
        h_scaled = False
    else:
        rate_for_lower = 1.0 / ranges.mu_max
        rate_for_upper = 1.0 / ranges.mu_min
        eh, esh = expected_gain(1.0), expected_root_gain(1.0)
        mu_lo, mu_hi = ranges.mu_min, ranges.mu_max
        h_scaled = True

    st2, sn2 = params.sigma_theta2, params.sigma_n2
    if scheme == "diversity":
        lower = _diversity_scaling(sv_lo, rate_for_lower, m, params)
        upper = _diversity_scaling(sv_hi, rate_for_upper, m, params)
    elif scheme == "aloha":
        base = st2 * (1.0 - 1.0 / math.e)
        lower = base + _diversity_scaling(sv_lo, rate_for_lower, m, params) / math.e
        upper = base + _diversity_scaling(sv_hi, rate_for_upper, m, params) / math.e
    elif scheme == "mac":
        if h_scaled:
            lower = (sv_lo * mu_lo * eh + sn2) / (m * mu_hi * esh * esh)
            upper = (sv_hi * mu_hi * eh + sn2) / (m * mu_lo * esh * esh)
        else:
            lower = (sv_lo * eh + sn2) / (m * esh * esh)
            upper = (sv_hi * eh + sn2) / (m * esh * esh)
    elif scheme == "orthogonal":
        lower = _orthogonal_finite(sv_lo, mu_hi, m, params)
        upper = _orthogonal_finite(sv_hi, mu_lo, m, params)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    lim_lo = _bound_limit(scheme, sv_lo, mu_hi, params)
    lim_hi = _bound_limit(scheme, sv_hi, mu_lo, params)
    shares = math.isclose(lim_lo, lim_hi, rel_tol=1e-12, abs_tol=1e-300)
    return BoundPair(lower=lower, upper=upper, shares_limit=shares)


def _orthogonal_finite(sv2: float, mu: float, m: int, params: NetworkParams) -> float:
    st2, sn2 = params.sigma_theta2, params.sigma_n2
    limit = 1.0 / (1.0 / st2 + mu / sn2)
    return limit + 2.0 * sv2 * mu * mu * limit * limit / (m * sn2 * sn2)


def _bound_limit(scheme: str, sv2: float, mu: float, params: NetworkParams) -> float:
    st2, sn2 = params.sigma_theta2, params.sigma_n2
    if scheme == "diversity":
        return st2 * sv2 / (st2 + sv2)
    if scheme == "aloha":
        return st2 * (1.0 - 1.0 / math.e) + (st2 * sv2 / (st2 + sv2)) / math.e
    if scheme == "mac":
        return 0.0
    return 1.0 / (1.0 / st2 + mu / sn2)
