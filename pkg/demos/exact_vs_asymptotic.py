#!/usr/bin/env python3
# The key quantity behind the slow 1/ln(M) laws is E[1/(gmax + b)], the
# inverse moment of the best of M exponential channel gains.  Three ways
# to get at it:
#   * an exact alternating binomial sum in E1 (loses precision past M=15),
#   * adaptive quadrature against the max-gain density (any M),
#   * the large-M law  lam/(lam*b + ln M).
# This script shows all three converging on each other.
import math

from destim import (
    NetworkParams,
    asymptotic_diversity,
    gmax_inverse_moment_exact_sum,
    gmax_inverse_moment_quadrature,
    quadrature_expected_distortion_diversity,
)

LAM, B = 2.0, 1.0 / 12.0


def main():
    print("inverse moment E[1/(gmax+b)] at lam=2, b=1/12")
    print(f"{'M':>8} {'exact sum':>14} {'quadrature':>14} {'lam/(lam b+lnM)':>16}")
    for m in (1, 2, 5, 10, 15):
        s = gmax_inverse_moment_exact_sum(LAM, B, m)
        q = gmax_inverse_moment_quadrature(LAM, B, m)
        a = LAM / (LAM * B + math.log(m)) if m > 1 else float("nan")
        print(f"{m:>8} {s:>14.10f} {q:>14.10f} {a:>16.6f}")

    print("\nbeyond the exact sum's reach, quadrature carries on:")
    print(f"{'M':>8} {'quadrature':>14} {'lam/(lam b+lnM)':>16} {'ratio':>8}")
    for m in (10**2, 10**3, 10**4, 10**5, 10**6):
        q = gmax_inverse_moment_quadrature(LAM, B, m)
        a = LAM / (LAM * B + math.log(m))
        print(f"{m:>8} {q:>14.10f} {a:>16.10f} {q / a:>8.5f}")
    print("the ratio creeps toward 1: that is the 1/ln(M) law at work.")

    print("\nsame story one level up, for the best-channel E[D] itself:")
    params = NetworkParams(1.0, 0.2, 0.1, LAM, 2)
    floor = params.derived.a_limit
    print(f"{'M':>8} {'exact E[D]':>12} {'asymptote':>12} {'excess ratio':>13}")
    for m in (10**2, 10**3, 10**4, 10**5, 10**6):
        exact = quadrature_expected_distortion_diversity(params, m)
        asym = asymptotic_diversity(params, m)
        print(f"{m:>8} {exact:>12.6f} {asym:>12.6f} {(exact - floor) / (asym - floor):>13.5f}")


if __name__ == "__main__":
    main()
