#!/usr/bin/env python3
# Water-filling the transmit power over the fading states: spend more when
# the channel is good, nothing below the cutoff b^2*nu.  The punchline is
# how little it buys over constant power once the network is large: the
# multiplier nu itself decays like lam/ln(M), so the allocation flattens.
import math

from destim import (
    NetworkParams,
    quadrature_expected_distortion_aloha,
    quadrature_expected_distortion_diversity,
    solve_nu_aloha,
    solve_nu_diversity,
    waterfill_alpha2,
)

PARAMS = dict(sigma_theta2=1.0, sigma_v2=0.2, sigma_n2=0.1, lam=2.0)
BUDGET = 1.0  # normalized: P/(sigma_theta2 + sigma_v2)
M_GRID = [10, 20, 50, 100, 200, 500, 1000, 5000, 10**4, 10**5]


def main():
    print("best-channel scheme, normalized budget 1")
    print(f"{'M':>7} {'nu':>9} {'nu*lnM/lam':>11} {'E[D] const':>11} {'E[D] opt':>10} {'gain %':>7}")
    for m in M_GRID:
        params = NetworkParams(num_sensors=m, **PARAMS)
        sol = solve_nu_diversity(params, m, budget=BUDGET)
        const = quadrature_expected_distortion_diversity(params, m, alpha2=BUDGET)
        gain = 100.0 * (const - sol.expected_distortion) / const
        print(
            f"{m:>7} {sol.nu:>9.5f} {sol.nu * math.log(m) / params.lam:>11.5f}"
            f" {const:>11.6f} {sol.expected_distortion:>10.6f} {gain:>7.3f}"
        )

    print("\nchannel-aware ALOHA, default threshold ln(M)/lam")
    print(f"{'M':>7} {'nu':>9} {'E[D] const':>11} {'E[D] opt':>10} {'gain %':>7}")
    for m in M_GRID:
        params = NetworkParams(num_sensors=m, **PARAMS)
        sol = solve_nu_aloha(params, m, budget=BUDGET / m)
        const = quadrature_expected_distortion_aloha(params, m)
        gain = 100.0 * (const - sol.expected_distortion) / const
        print(
            f"{m:>7} {sol.nu:>9.5f} {const:>11.6f} {sol.expected_distortion:>10.6f} {gain:>7.3f}"
        )

    # a peek at the allocation shape for one network size
    m = 100
    params = NetworkParams(num_sensors=m, **PARAMS)
    sol = solve_nu_diversity(params, m, budget=BUDGET)
    b = params.derived.b_shift
    print(f"\nallocation profile at M={m} (cutoff g = {sol.cutoff:.5f}):")
    for g in (0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0):
        print(f"  g = {g:>6.3f}  ->  alpha^2 = {float(waterfill_alpha2(g, sol.nu, b)):.4f}")


if __name__ == "__main__":
    main()
