"""Per-realization MMSE distortion for the four access schemes.

All functions accept scalars or numpy arrays and broadcast; the MAC and
orthogonal forms reduce over the last axis, so a (trials, M) batch of
gain vectors evaluates in one call.

The best-channel distortion is evaluated in the factored form

    D = a_limit * (1 + c_coeff / (g*alpha2 + b_shift))

rather than as a nested reciprocal, which keeps full precision when
g*alpha2 dwarfs the receiver noise.  At g*alpha2 = 0 the factored form
collapses to sigma_theta2 exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import NetworkParams

__all__ = [
    "AlohaEvent",
    "TrialOutcome",
    "distortion_diversity",
    "distortion_aloha",
    "aloha_distortion_values",
    "distortion_mac",
    "distortion_orthogonal",
]


class AlohaEvent(enum.Enum):
    NOT_APPLICABLE = "not_applicable"
    NONE_TRANSMITTED = "none_transmitted"
    COLLISION = "collision"
    SUCCESS = "success"


@dataclass(frozen=True)
class TrialOutcome:
    distortion: float
    aloha_event: AlohaEvent = AlohaEvent.NOT_APPLICABLE


def distortion_diversity(gmax, alpha2, params: NetworkParams):
    """Distortion when only the best-channel sensor transmits.

    D = (1/sigma_theta2 + g*alpha2/(g*alpha2*sigma_v2 + sigma_n2))^-1
    """
    d = params.derived
    x = np.asarray(gmax, dtype=float) * alpha2
    if params.sigma_n2 == 0.0:
        return np.where(x > 0.0, d.a_limit, params.sigma_theta2)
    return d.a_limit * (1.0 + d.c_coeff / (x + d.b_shift))


def distortion_aloha(k: int, gain: float, alpha2: float, params: NetworkParams) -> TrialOutcome:
    """Classify one sparse ALOHA trial and compute its distortion.

    No transmission or a collision leaves the fusion center with the prior
    alone, so the distortion is sigma_theta2 exactly.
    """
    if k == 0:
        return TrialOutcome(params.sigma_theta2, AlohaEvent.NONE_TRANSMITTED)
    if k >= 2:
        return TrialOutcome(params.sigma_theta2, AlohaEvent.COLLISION)
    return TrialOutcome(float(distortion_diversity(gain, alpha2, params)), AlohaEvent.SUCCESS)


def aloha_distortion_values(k, gain, alpha2, params: NetworkParams):
    """Vectorized distortion of ALOHA trials; gain may be NaN where k != 1."""
    k = np.asarray(k)
    with np.errstate(invalid="ignore"):
        success = distortion_diversity(gain, alpha2, params)
    return np.where(k == 1, success, params.sigma_theta2)


def _as_gain_matrix(gains):
    gains = np.asarray(gains, dtype=float)
    if gains.size == 0 or gains.shape[-1] == 0:
        raise ValueError("gains vector must be nonempty")
    if np.any(gains <= 0.0):
        raise ValueError("gains must be strictly positive")
    return gains


def distortion_mac(gains, alpha2, params: NetworkParams, sensor_noise2=None):
    """Coherent multi-access distortion.

    D = st2*(sum g_i a_i^2 s_i^2 + sn2) /
        (sum g_i a_i^2 s_i^2 + sn2 + st2*(sum sqrt(g_i) a_i)^2)

    `alpha2` and `sensor_noise2` may be per-sensor vectors; scalars mean
    the symmetric case a_i^2 = alpha2, s_i^2 = sigma_v2.
    """
    gains = _as_gain_matrix(gains)
    s2 = params.sigma_v2 if sensor_noise2 is None else np.asarray(sensor_noise2, dtype=float)
    a2 = np.asarray(alpha2, dtype=float)
    noise_sum = np.sum(gains * a2 * s2, axis=-1) + params.sigma_n2
    coherent = np.sum(np.sqrt(gains * a2), axis=-1) ** 2
    return params.sigma_theta2 * noise_sum / (noise_sum + params.sigma_theta2 * coherent)


def distortion_orthogonal(gains, alpha2, params: NetworkParams, sensor_noise2=None):
    """Orthogonal-access distortion.

    D = (1/st2 + sum_i g_i a_i^2 / (g_i a_i^2 s_i^2 + sn2))^-1
    """
    gains = _as_gain_matrix(gains)
    s2 = params.sigma_v2 if sensor_noise2 is None else np.asarray(sensor_noise2, dtype=float)
    a2 = np.asarray(alpha2, dtype=float)
    x = gains * a2
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(x > 0.0, x / (x * s2 + params.sigma_n2), 0.0)
    return 1.0 / (1.0 / params.sigma_theta2 + np.sum(terms, axis=-1))
