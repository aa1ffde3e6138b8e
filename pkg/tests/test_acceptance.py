"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
go by; a failed assertion marks the corresponding criterion red.
"""

import math
import subprocess
import sys

import pytest

from destim.analysis import (
    asymptotic_aloha,
    asymptotic_curve,
    asymptotic_diversity,
    asymptotic_mac,
    asymptotic_orthogonal,
    gmax_inverse_moment_exact_sum,
    gmax_inverse_moment_quadrature,
    quadrature_expected_distortion_aloha,
    quadrature_expected_distortion_diversity,
)
from destim.model import (
    NetworkParams,
    PowerPolicy,
    default_threshold,
    expected_root_gain,
)
from destim.montecarlo import SchemeConfig, estimate_expected_distortion
from destim.optimizer import (
    expected_distortion_aloha_optimal,
    expected_distortion_aloha_threshold,
    expected_distortion_diversity_optimal,
    optimize_threshold_constant_power,
    optimize_threshold_joint,
    solve_nu_aloha,
    solve_nu_diversity,
)

SEED = 20260809


def p0(m: int) -> NetworkParams:
    return NetworkParams(1.0, 0.2, 0.1, 2.0, m, 1.2)


def ok(criterion: str, detail: str = ""):
    print(f"PASS {criterion}" + (f" — {detail}" if detail else ""))


def test_criterion_01_fixed_point_constants():
    diversity_limit = asymptotic_curve("diversity", p0(2)).limit_value
    orthogonal_limit = asymptotic_curve("orthogonal", p0(2)).limit_value
    aloha_limit = asymptotic_curve("aloha", p0(2)).limit_value
    assert abs(diversity_limit - 0.1667) < 5e-5
    assert abs(orthogonal_limit - 0.1667) < 5e-5
    assert abs(aloha_limit - 0.6934) < 5e-5
    assert abs(expected_root_gain(2.0) - math.sqrt(math.pi / 8.0)) <= 1e-12
    ok(
        "criterion 1 (fixed-point constants)",
        f"diversity/orthogonal limits {diversity_limit:.4f}/{orthogonal_limit:.4f}, "
        f"aloha {aloha_limit:.4f}",
    )


def test_criterion_02_figure1_diversity():
    # MC vs quadrature oracle at moderate M
    for m in (2, 5, 10, 50, 100, 500, 1000):
        params = p0(m)
        est = estimate_expected_distortion(
            SchemeConfig("diversity"), params, PowerPolicy.unit(), 100_000, seed=SEED
        )
        oracle = quadrature_expected_distortion_diversity(params, m)
        assert abs(est.mean - oracle) < 3.0 * est.stderr, f"M={m}"

    # convergence of the MC curve toward the asymptote
    gaps = {}
    for m in (10**3, 10**6):
        params = p0(m)
        est = estimate_expected_distortion(
            SchemeConfig("diversity"), params, PowerPolicy.unit(), 1_000_000, seed=SEED
        )
        asym = asymptotic_diversity(params, m)
        gaps[m] = abs(est.mean - asym) / asym
    assert gaps[10**6] < gaps[10**3]
    ok(
        "criterion 2 (figure-1 reproduction)",
        f"relative gap {gaps[10**3]:.4f} @1e3 -> {gaps[10**6]:.4f} @1e6",
    )


def test_criterion_03_figure2_aloha():
    for m in (2, 5, 10, 50, 100, 500, 1000):
        params = p0(m)
        est = estimate_expected_distortion(
            SchemeConfig("aloha"), params, PowerPolicy.unit(), 100_000, seed=SEED
        )
        oracle = quadrature_expected_distortion_aloha(params, m)
        assert abs(est.mean - oracle) < 3.0 * est.stderr, f"M={m}"
    # non-monotonicity in M is permitted and deliberately not asserted
    # either way
    ok("criterion 3 (figure-2 reproduction)")


def test_criterion_04_figure3_mac():
    errors = {}
    for m in (10, 100, 1000):
        params = p0(m)
        est = estimate_expected_distortion(
            SchemeConfig("mac"), params, PowerPolicy.split_across_sensors(), 100_000, seed=SEED
        )
        errors[m] = abs(est.mean - asymptotic_mac(params, m)) / asymptotic_mac(params, m)
    assert errors[1000] < 0.05
    assert errors[1000] < errors[10]
    ok(
        "criterion 4 (figure-3 reproduction)",
        f"relative errors {errors[10]:.4f} @10 -> {errors[1000]:.5f} @1000",
    )


def test_criterion_05_figure4_orthogonal():
    errors = {}
    scaled_gaps = {}
    limit = asymptotic_curve("orthogonal", p0(2)).limit_value
    for m in (10, 100, 1000):
        params = p0(m)
        est = estimate_expected_distortion(
            SchemeConfig("orthogonal"),
            params,
            PowerPolicy.split_across_sensors(),
            100_000,
            seed=SEED,
        )
        asym = asymptotic_orthogonal(params, m)
        errors[m] = abs(est.mean - asym) / asym
        scaled_gaps[m] = (est.mean - limit) * m
    assert errors[10] > errors[100] > errors[1000]
    lo, hi = min(scaled_gaps.values()), max(scaled_gaps.values())
    assert hi / lo < 1.30
    ok(
        "criterion 5 (figure-4 reproduction)",
        f"(E[D]-L)*M in [{lo:.3f}, {hi:.3f}], errors decreasing",
    )


def test_criterion_06_lemma1_suite():
    lam, b = 2.0, 1.0 / 12.0
    prev = None
    for m in (10**2, 10**3, 10**4, 10**5, 10**6):
        r = gmax_inverse_moment_quadrature(lam, b, m) * (lam * b + math.log(m)) / lam
        dev = abs(r - 1.0)
        if prev is not None:
            assert dev < prev, f"M={m}"
        prev = dev
    for m in range(1, 16):
        exact = gmax_inverse_moment_exact_sum(lam, b, m)
        quad = gmax_inverse_moment_quadrature(lam, b, m)
        assert abs(exact - quad) / quad <= 1e-8, f"M={m}"
    ok("criterion 6 (inverse-moment rate and exact sum)")


def test_criterion_07_waterfilling_kkt():
    prev_gaps = {"diversity": None, "aloha": None}
    for m in (10, 100, 1000):
        params = p0(m)
        div = solve_nu_diversity(params, m, budget=1.0)
        assert abs(div.constraint_residual) <= 1e-8
        const_div = quadrature_expected_distortion_diversity(params, m, alpha2=1.0)
        assert div.expected_distortion < const_div
        gap = const_div - div.expected_distortion
        if prev_gaps["diversity"] is not None:
            assert gap < prev_gaps["diversity"]
        prev_gaps["diversity"] = gap

        alo = solve_nu_aloha(params, m, budget=1.0 / m)
        assert abs(alo.constraint_residual) <= 1e-8
        const_alo = quadrature_expected_distortion_aloha(params, m)
        assert alo.expected_distortion < const_alo
        gap = const_alo - alo.expected_distortion
        if prev_gaps["aloha"] is not None:
            assert gap < prev_gaps["aloha"]
        prev_gaps["aloha"] = gap
    ok(
        "criterion 7 (water-filling KKT and dominance)",
        f"final gaps diversity {prev_gaps['diversity']:.2e}, aloha {prev_gaps['aloha']:.2e}",
    )


def test_criterion_08_asymptotic_nu():
    prev = None
    for m in (10**3, 10**4, 10**5, 10**6):
        sol = solve_nu_diversity(p0(m), m, budget=1.0)
        dev = abs(sol.nu * math.log(m) / 2.0 - 1.0)
        if prev is not None:
            assert dev < prev, f"M={m}"
        prev = dev
    first_holds = None
    for m in range(2, 41):
        params = p0(m)
        sol = solve_nu_aloha(params, m, budget=1.0 / m)
        t = default_threshold(params.lam, m)
        if t > params.derived.b_shift**2 * sol.nu:
            if first_holds is None:
                first_holds = m
        else:
            first_holds = None
    assert first_holds is not None and first_holds <= 10
    for m in (10, 100, 1000, 10**4):
        params = p0(m)
        sol = solve_nu_aloha(params, m, budget=1.0 / m)
        assert default_threshold(params.lam, m) > params.derived.b_shift**2 * sol.nu
    ok(
        "criterion 8 (asymptotic nu, cutoff below threshold)",
        f"|nu lnM/lam - 1| -> {prev:.4f}; holds from M = {first_holds}",
    )


def test_criterion_09_threshold_optimality():
    lam = 2.0
    prev = None
    for m in (10**2, 10**3, 10**4):
        params = p0(m)
        sol = optimize_threshold_constant_power(params, m)
        t_def = default_threshold(lam, m)
        assert sol.expected_distortion <= expected_distortion_aloha_threshold(params, m, t_def)
        dev = abs(sol.t_star * lam / math.log(m) - 1.0)
        if prev is not None:
            assert dev < prev
        prev = dev

    m = 100
    params = p0(m)
    joint = optimize_threshold_joint(params, m, budget=1.0)
    power_only = expected_distortion_aloha_optimal(params, m, budget=1.0 / m)
    threshold_only = optimize_threshold_constant_power(params, m).expected_distortion
    assert joint.expected_distortion <= power_only + 1e-12
    assert joint.expected_distortion <= threshold_only + 1e-12

    # Lemma-7 sandwich: above the limit, hugging the asymptote ever closer
    limit = asymptotic_curve("aloha", p0(2)).limit_value
    eps_prev = None
    sandwich = []
    for m in (10**2, 10**3, 10**4):
        params = p0(m)
        sol = optimize_threshold_constant_power(params, m)
        assert sol.expected_distortion >= limit * (1.0 - 1e-3)
        eps = abs(sol.expected_distortion / asymptotic_aloha(params, m) - 1.0)
        sandwich.append((m, sol.expected_distortion, eps))
        if eps_prev is not None:
            assert eps < eps_prev
        eps_prev = eps
    report = ", ".join(f"M={m}: E[D](T*)={ed:.5f} (eps={eps:.2e})" for m, ed, eps in sandwich)
    ok("criterion 9 (threshold optimality; sandwich)", report)


def test_criterion_10_cli_determinism(tmp_path):
    base = [
        sys.executable,
        "-m",
        "destim.cli",
        "simulate",
        "--scheme",
        "mac",
        "--m-list",
        "2048",
        "--trials",
        "2100",
        "--seed",
        "99",
    ]
    outs = []
    for name, extra in [("r1.csv", ["--workers", "1"]), ("r2.csv", ["--workers", "1"]),
                        ("r3.csv", ["--workers", "4"])]:
        out = tmp_path / name
        proc = subprocess.run(
            base + extra + ["--out", str(out)], capture_output=True, text=True
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    ok("criterion 10 (CLI byte-identical across reruns and worker counts)")
