#!/usr/bin/env python3
# How fast does each access scheme's expected distortion approach its
# large-network limit?  The best-channel and channel-aware ALOHA schemes
# crawl at 1/ln(M); coherent multi-access and orthogonal access race at
# 1/M.  This script simulates all four and lays the asymptotes alongside.
import math

from destim import (
    NetworkParams,
    PowerPolicy,
    SchemeConfig,
    asymptotic_curve,
    estimate_expected_distortion,
)

ST2, SV2, SN2, LAM = 1.0, 0.2, 0.1, 2.0
TRIALS = 100_000
SEED = 2024

SCHEMES = {
    "diversity": PowerPolicy.unit(),
    "aloha": PowerPolicy.unit(),
    "mac": PowerPolicy.split_across_sensors(),
    "orthogonal": PowerPolicy.split_across_sensors(),
}
M_GRID = [2, 5, 10, 20, 50, 100, 200, 500, 1000]


def main():
    results = {}
    for name, policy in SCHEMES.items():
        curve = asymptotic_curve(name, NetworkParams(ST2, SV2, SN2, LAM, 2))
        print(f"\n{name}  (limit {curve.limit_value:.4f}, decay {curve.decay_rate_tag})")
        print(f"{'M':>6} {'simulated':>12} {'asymptote':>12} {'rel gap':>9}")
        rows = []
        for m in M_GRID:
            params = NetworkParams(ST2, SV2, SN2, LAM, m)
            est = estimate_expected_distortion(
                SchemeConfig(name), params, policy, TRIALS, seed=SEED
            )
            asym = curve.at(m) if m >= 2 else float("nan")
            gap = abs(est.mean - asym) / asym
            rows.append((m, est.mean, asym))
            print(f"{m:>6} {est.mean:>12.5f} {asym:>12.5f} {gap:>9.4f}")
        results[name] = rows

    print("\nNote how the ALOHA column is not monotone in M: adding sensors")
    print("raises the collision rate before the diversity gain wins out.")
    _maybe_plot(results)


def _maybe_plot(results):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    for ax, (name, rows) in zip(axes.flat, results.items()):
        ms = [r[0] for r in rows]
        ax.semilogx(ms, [r[1] for r in rows], "o-", label="simulated")
        ax.semilogx(ms, [r[2] for r in rows], "s--", label="asymptote")
        ax.set_title(name)
        ax.set_xlabel("M")
        ax.set_ylabel("E[D]")
        ax.legend()
    fig.tight_layout()
    fig.savefig("scaling_laws.png", dpi=120)
    print("saved scaling_laws.png")


if __name__ == "__main__":
    main()
