"""System parameters, power policies, and channel-gain sampling.

Channel power gains are exponential with mean 1/lam (Rayleigh amplitude
fading).  For the schemes that only ever look at the best channel, the
maximum of M gains is drawn in O(1) through its inverse CDF instead of
materializing M draws, which keeps sensor counts of 1e6+ cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = [
    "NetworkParams",
    "DerivedConstants",
    "AsymmetricRanges",
    "PowerPolicy",
    "default_threshold",
    "expected_gain",
    "expected_root_gain",
    "gmax_from_uniform",
    "exponential_from_uniform",
    "sample_gains",
    "sample_gmax",
    "sample_aloha_trial_sparse",
]

# Gains are kept strictly positive because 1/g enters the water-filling
# allocation.
_TINY_GAIN = np.finfo(float).tiny


@dataclass(frozen=True)
class NetworkParams:
    """Source, sensor, and channel parameters of a symmetric network.

    sigma_theta2  source variance
    sigma_v2      per-sensor measurement noise variance
    sigma_n2      receiver noise variance
    lam           fading rate; gains are exponential with mean 1/lam
    num_sensors   M
    power_budget  average total transmit power P
    """

    sigma_theta2: float
    sigma_v2: float
    sigma_n2: float
    lam: float
    num_sensors: int
    power_budget: float = 1.0

    def __post_init__(self) -> None:
        for name in ("sigma_theta2", "sigma_v2", "lam", "power_budget"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        # sigma_n2 = 0 (noiseless channel) is a meaningful limiting case for
        # the per-realization distortions.
        if self.sigma_n2 < 0.0:
            raise ValueError(f"sigma_n2 must be >= 0, got {self.sigma_n2}")
        if not (isinstance(self.num_sensors, (int, np.integer)) and self.num_sensors >= 1):
            raise ValueError(f"num_sensors must be an integer >= 1, got {self.num_sensors}")

    @property
    def derived(self) -> "DerivedConstants":
        return DerivedConstants.from_params(self)

    @property
    def normalized_budget(self) -> float:
        """Power budget expressed in units of E[y^2] = sigma_theta2 + sigma_v2."""
        return self.power_budget / (self.sigma_theta2 + self.sigma_v2)


@dataclass(frozen=True)
class DerivedConstants:
    """The three constants that factor every best-channel distortion.

    a_limit  single-sensor distortion floor  st2*sv2/(st2+sv2)
    b_shift  sn2/(st2+sv2)
    c_coeff  sn2*st2/(sv2*(st2+sv2))

    so that D(g, alpha2) = a_limit * (1 + c_coeff/(g*alpha2 + b_shift)).
    """

    a_limit: float
    b_shift: float
    c_coeff: float

    @classmethod
    def from_params(cls, params: NetworkParams) -> "DerivedConstants":
        st2, sv2, sn2 = params.sigma_theta2, params.sigma_v2, params.sigma_n2
        total = st2 + sv2
        return cls(
            a_limit=st2 * sv2 / total,
            b_shift=sn2 / total,
            c_coeff=sn2 * st2 / (sv2 * total),
        )


@dataclass(frozen=True)
class AsymmetricRanges:
    """Bounds for heterogeneous networks: per-sensor noise variances in
    [sigma_min2, sigma_max2] and/or fading scale factors in [mu_min, mu_max]
    (gain_i = mu_i * h_i with the h_i identically distributed).

    Either pair may be omitted; an omitted pair means that axis stays
    symmetric.
    """

    sigma_min2: float | None = None
    sigma_max2: float | None = None
    mu_min: float | None = None
    mu_max: float | None = None

    def __post_init__(self) -> None:
        if (self.sigma_min2 is None) != (self.sigma_max2 is None):
            raise ValueError("sigma_min2 and sigma_max2 must be given together")
        if (self.mu_min is None) != (self.mu_max is None):
            raise ValueError("mu_min and mu_max must be given together")
        if self.sigma_min2 is None and self.mu_min is None:
            raise ValueError("at least one of the sigma or mu ranges is required")
        if self.sigma_min2 is not None:
            if not 0.0 < self.sigma_min2 <= self.sigma_max2:
                raise ValueError(
                    f"need 0 < sigma_min2 <= sigma_max2, got [{self.sigma_min2}, {self.sigma_max2}]"
                )
        if self.mu_min is not None:
            if not 0.0 < self.mu_min <= self.mu_max:
                raise ValueError(f"need 0 < mu_min <= mu_max, got [{self.mu_min}, {self.mu_max}]")


@dataclass(frozen=True)
class PowerPolicy:
    """How the amplification factor alpha^2 of an active sensor is chosen.

    kinds:
      unit                  alpha2 = 1 (best sensor / transmitting sensor)
      split                 alpha2 = 1/M for every sensor
      threshold_normalized  alpha2 = exp(lam*T)/M, so the long-run average
                            transmit power matches the unit policy at the
                            default threshold
      fixed                 an explicit constant alpha2
      waterfill             alpha2 = waterfill_alpha2(g, nu, b) per trial

    Transmit power of a sensor is gamma = alpha2 * (sigma_theta2 + sigma_v2).
    """

    kind: str
    alpha2: float | None = None
    nu: float | None = None

    _KINDS = ("unit", "split", "threshold_normalized", "fixed", "waterfill")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "fixed":
            if self.alpha2 is None or self.alpha2 < 0.0:
                raise ValueError("fixed policy needs alpha2 >= 0")
        if self.kind == "waterfill":
            if self.nu is None or not self.nu > 0.0:
                raise ValueError("waterfill policy needs nu > 0")

    @classmethod
    def unit(cls) -> "PowerPolicy":
        return cls("unit")

    @classmethod
    def split_across_sensors(cls) -> "PowerPolicy":
        return cls("split")

    @classmethod
    def threshold_normalized(cls) -> "PowerPolicy":
        return cls("threshold_normalized")

    @classmethod
    def fixed(cls, alpha2: float) -> "PowerPolicy":
        return cls("fixed", alpha2=float(alpha2))

    @classmethod
    def water_filling(cls, nu: float) -> "PowerPolicy":
        return cls("waterfill", nu=float(nu))


def default_threshold(lam: float, num_sensors: int) -> float:
    """Threshold ln(M)/lam, giving each sensor transmit probability 1/M."""
    if num_sensors < 1:
        raise ValueError("num_sensors must be >= 1")
    if lam <= 0.0:
        raise ValueError("lam must be > 0")
    return math.log(num_sensors) / lam


def expected_gain(lam: float) -> float:
    """E[g] = 1/lam for exponential gains."""
    return 1.0 / lam


def expected_root_gain(lam: float) -> float:
    """E[sqrt(g)] = 0.5*sqrt(pi/lam) for exponential gains."""
    return 0.5 * math.sqrt(math.pi / lam)


def exponential_from_uniform(u, lam: float):
    """Map uniforms in [0, 1) to exponential(lam) gains, clamped away from 0."""
    g = -np.log1p(-np.asarray(u, dtype=float)) / lam
    return np.maximum(g, _TINY_GAIN)


def gmax_from_uniform(u, lam: float, num_sensors: int):
    """Inverse CDF of max(g_1..g_M): x = -ln(-expm1(ln(u)/M))/lam.

    The -expm1 form stays finite and positive for M up to 1e9 and u
    arbitrarily close to either end of (0, 1).
    """
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        x = -np.log(-np.expm1(np.log(u) / num_sensors)) / lam
    return np.maximum(x, _TINY_GAIN)


def sample_gains(params: NetworkParams, rng: np.random.Generator, size: int | None = None):
    """Draw one (or `size`) vectors of M i.i.d. exponential gains."""
    shape = (params.num_sensors,) if size is None else (size, params.num_sensors)
    return exponential_from_uniform(rng.random(shape), params.lam)


def sample_gmax(params: NetworkParams, rng: np.random.Generator, size: int | None = None):
    """Draw from the max-of-M-exponentials distribution, O(1) per draw."""
    u = rng.random() if size is None else rng.random(size)
    return gmax_from_uniform(u, params.lam, params.num_sensors)


def sample_aloha_trial_sparse(
    params: NetworkParams,
    threshold: float,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Sample (K, gain) without touching all M sensors.

    K ~ Binomial(M, exp(-lam*T)) counts the sensors whose gain exceeds the
    threshold.  When K == 1 the transmitter's gain is T + exponential(lam)
    by memorylessness; entries with K != 1 carry NaN.  Statistically
    identical to drawing all M gains and thresholding.
    """
    if threshold < 0.0:
        raise ValueError("threshold must be >= 0")
    p = math.exp(-params.lam * threshold)
    scalar = size is None
    n = 1 if scalar else size
    u_count = rng.random(n)
    u_gain = rng.random(n)
    k = stats.binom.ppf(u_count, params.num_sensors, p).astype(np.int64)
    gain = threshold + exponential_from_uniform(u_gain, params.lam)
    gain = np.where(k == 1, gain, np.nan)
    if scalar:
        return int(k[0]), float(gain[0])
    return k, gain
