"""Expected-distortion analysis and simulation for amplify-and-forward
sensor networks over Rayleigh-fading channels.

Four multiple-access schemes are covered: best-channel (multi-sensor
diversity), channel-aware ALOHA, coherent multi-access, and orthogonal
access.  The package provides per-realization distortions, a reproducible
Monte Carlo engine, exact finite-M expectations, the large-M scaling laws,
water-filling power allocation, and transmission-threshold optimization.
"""

from .analysis import (
    AsymptoticCurve,
    BoundPair,
    NumericsError,
    asymptotic_aloha,
    asymptotic_bounds,
    asymptotic_curve,
    asymptotic_diversity,
    asymptotic_mac,
    asymptotic_orthogonal,
    gmax_inverse_moment_exact_sum,
    gmax_inverse_moment_quadrature,
    gmax_negative_moment,
    quadrature_expected_distortion_aloha,
    quadrature_expected_distortion_diversity,
)
from .distortion import (
    AlohaEvent,
    TrialOutcome,
    distortion_aloha,
    distortion_diversity,
    distortion_mac,
    distortion_orthogonal,
)
from .model import (
    AsymmetricRanges,
    DerivedConstants,
    NetworkParams,
    PowerPolicy,
    default_threshold,
    expected_gain,
    expected_root_gain,
    sample_aloha_trial_sparse,
    sample_gains,
    sample_gmax,
)
from .montecarlo import DistortionEstimate, SchemeConfig, estimate_expected_distortion
from .optimizer import (
    ThresholdSolution,
    WaterFillSolution,
    expected_distortion_aloha_optimal,
    expected_distortion_aloha_threshold,
    expected_distortion_diversity_optimal,
    optimize_threshold_constant_power,
    optimize_threshold_joint,
    solve_nu_aloha,
    solve_nu_diversity,
    waterfill_alpha2,
)
from .specfun import AccuracyBudget, erfc, exp_integral_e1, scaled_e1

__version__ = "0.1.0"
