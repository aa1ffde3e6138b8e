"""Monte Carlo estimation of expected distortion.

Reproducibility contract: every trial consumes a fixed number of uniforms
from a counter-based stream (numpy Philox keyed by the seed), so trial i's
draws depend only on (seed, i).  Work is split into chunks whose boundaries
are a pure function of (trials, M) — never of the worker count — and chunk
statistics are merged in ascending trial order.  The result is therefore
bit-identical for any degree of parallelism.

numpy's Philox advances its counter in blocks of four 64-bit outputs, so
chunk boundaries are kept on multiples of four draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .distortion import (
    aloha_distortion_values,
    distortion_diversity,
    distortion_mac,
    distortion_orthogonal,
)
from .model import (
    NetworkParams,
    PowerPolicy,
    default_threshold,
    exponential_from_uniform,
    gmax_from_uniform,
)
from .optimizer import waterfill_alpha2

__all__ = ["SchemeConfig", "DistortionEstimate", "estimate_expected_distortion"]

SCHEMES = ("diversity", "aloha", "mac", "orthogonal")

# Chunks hold at most ~2^22 uniforms; must stay a multiple of 4 trials so
# every chunk starts on a Philox block boundary regardless of draws/trial.
_MAX_CHUNK_DRAWS = 1 << 22


@dataclass(frozen=True)
class SchemeConfig:
    """Which access scheme to simulate; ALOHA carries its threshold
    (None means the default ln(M)/lam)."""

    kind: str
    threshold: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in SCHEMES:
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.threshold is not None:
            if self.kind != "aloha":
                raise ValueError("threshold only applies to the aloha scheme")
            if self.threshold < 0.0:
                raise ValueError("threshold must be >= 0")


@dataclass(frozen=True)
class DistortionEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int
    scheme: SchemeConfig
    policy: PowerPolicy


def _draws_per_trial(scheme: SchemeConfig, params: NetworkParams) -> int:
    if scheme.kind == "diversity":
        return 1
    if scheme.kind == "aloha":
        return 2
    return params.num_sensors


def _chunk_size(draws_per_trial: int) -> int:
    trials = max(_MAX_CHUNK_DRAWS // draws_per_trial, 1)
    return max((trials // 4) * 4, 4)


def _uniform_block(seed: int, first_draw: int, n_draws: int) -> np.ndarray:
    assert first_draw % 4 == 0
    bg = np.random.Philox(key=seed)
    bg.advance(first_draw // 4)
    return np.random.Generator(bg).random(n_draws)


def _resolve_constant_alpha2(
    scheme: SchemeConfig, policy: PowerPolicy, params: NetworkParams
) -> float | None:
    """The per-trial constant alpha2, or None when it depends on the gains."""
    kind = policy.kind
    if kind == "fixed":
        return policy.alpha2
    if kind == "unit":
        if scheme.kind not in ("diversity", "aloha"):
            raise ValueError("unit power applies to single-transmitter schemes")
        return 1.0
    if kind == "split":
        if scheme.kind not in ("mac", "orthogonal"):
            raise ValueError("split power applies to mac/orthogonal schemes")
        return 1.0 / params.num_sensors
    if kind == "threshold_normalized":
        if scheme.kind != "aloha":
            raise ValueError("threshold-normalized power applies to aloha")
        t = scheme.threshold
        if t is None:
            t = default_threshold(params.lam, params.num_sensors)
        return math.exp(params.lam * t) / params.num_sensors
    if kind == "waterfill":
        if scheme.kind not in ("diversity", "aloha"):
            raise ValueError("water-filling is defined for diversity and aloha only")
        return None
    raise ValueError(f"unknown policy kind {kind!r}")


def _chunk_distortions(
    scheme: SchemeConfig,
    params: NetworkParams,
    policy: PowerPolicy,
    const_alpha2: float | None,
    u: np.ndarray,
    n_trials: int,
) -> np.ndarray:
    b = params.derived.b_shift
    if scheme.kind == "diversity":
        gmax = gmax_from_uniform(u[:n_trials], params.lam, params.num_sensors)
        a2 = const_alpha2 if const_alpha2 is not None else waterfill_alpha2(gmax, policy.nu, b)
        return distortion_diversity(gmax, a2, params)
    if scheme.kind == "aloha":
        t = scheme.threshold
        if t is None:
            t = default_threshold(params.lam, params.num_sensors)
        p = math.exp(-params.lam * t)
        u = u[: 2 * n_trials]
        k = stats.binom.ppf(u[0::2], params.num_sensors, p).astype(np.int64)
        gain = t + exponential_from_uniform(u[1::2], params.lam)
        if const_alpha2 is not None:
            a2 = const_alpha2
        else:
            a2 = waterfill_alpha2(gain, policy.nu, b)
        return aloha_distortion_values(k, gain, a2, params)
    m = params.num_sensors
    gains = exponential_from_uniform(u[: n_trials * m].reshape(n_trials, m), params.lam)
    if scheme.kind == "mac":
        return distortion_mac(gains, const_alpha2, params)
    return distortion_orthogonal(gains, const_alpha2, params)


def _merge(acc: tuple[int, float, float], part: tuple[int, float, float]) -> tuple[int, float, float]:
    # Chan et al. pairwise update of (count, mean, sum of squared deviations).
    n1, mean1, m2_1 = acc
    n2, mean2, m2_2 = part
    n = n1 + n2
    delta = mean2 - mean1
    mean = mean1 + delta * n2 / n
    m2 = m2_1 + m2_2 + delta * delta * n1 * n2 / n
    return n, mean, m2


def estimate_expected_distortion(
    scheme: SchemeConfig,
    params: NetworkParams,
    policy: PowerPolicy,
    trials: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> DistortionEstimate:
    """Sample mean and standard error of the per-trial distortion.

    `workers` only changes how chunks are scheduled, never the estimate.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials for a meaningful stderr")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if policy.kind == "waterfill" and (policy.nu is None or policy.nu <= 0.0):
        raise ValueError("waterfill policy requires nu > 0")
    const_alpha2 = _resolve_constant_alpha2(scheme, policy, params)

    k = _draws_per_trial(scheme, params)
    chunk = _chunk_size(k)
    starts = range(0, trials, chunk)

    def run_chunk(start: int) -> tuple[int, float, float]:
        n = min(chunk, trials - start)
        u = _uniform_block(seed, start * k, n * k)
        d = np.asarray(
            _chunk_distortions(scheme, params, policy, const_alpha2, u, n), dtype=float
        )
        mean = float(d.mean())
        m2 = float(np.sum((d - mean) ** 2))
        return n, mean, m2

    if workers == 1:
        parts = [run_chunk(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, starts))

    total = parts[0]
    for part in parts[1:]:
        total = _merge(total, part)
    n, mean, m2 = total
    stderr = math.sqrt(m2 / (n - 1)) / math.sqrt(n)
    return DistortionEstimate(
        mean=mean, stderr=stderr, trials=n, seed=seed, scheme=scheme, policy=policy
    )
