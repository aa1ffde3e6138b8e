"""Command-line experiment runner.

Writes plain CSV with the fixed schema scheme,M,policy,threshold,quantity,value
(UTF-8, LF line endings, 15 significant digits) plus, for `reproduce`, a
declarative .plot.json sidecar describing how to plot the columns.  Flag
values override config-file values override the built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .analysis import (
    NumericsError,
    asymptotic_bounds,
    asymptotic_aloha,
    asymptotic_diversity,
    asymptotic_mac,
    asymptotic_orthogonal,
    quadrature_expected_distortion_aloha,
    quadrature_expected_distortion_diversity,
)
from .model import AsymmetricRanges, NetworkParams, PowerPolicy, default_threshold
from .montecarlo import SCHEMES, SchemeConfig, estimate_expected_distortion
from .optimizer import (
    expected_distortion_aloha_threshold,
    optimize_threshold_constant_power,
    optimize_threshold_joint,
    solve_nu_aloha,
    solve_nu_diversity,
)

__all__ = ["main", "ResultRow", "write_csv", "read_csv"]

CSV_HEADER = ("scheme", "M", "policy", "threshold", "quantity", "value")

# Baseline parameters used throughout the numerical studies; the budget is
# one unit of transmit power per E[y^2] = sigma_theta2 + sigma_v2.
DEFAULTS = {
    "sigma_theta2": 1.0,
    "sigma_v2": 0.2,
    "sigma_n2": 0.1,
    "lambda": 2.0,
    "M": 100,
    "power_budget": 1.2,
    "seed": 12345,
    "trials": 100000,
}

CONFIG_KEYS = set(DEFAULTS)


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    m: int
    policy: str
    threshold: float | None
    quantity: str
    value: float


def _fmt(value: float) -> str:
    return format(float(value), ".15g")


def write_csv(path: str | Path, rows: list[ResultRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            if not math.isfinite(r.value):
                raise NumericsError(f"non-finite value in row {r}")
            writer.writerow(
                (
                    r.scheme,
                    str(r.m),
                    r.policy,
                    "" if r.threshold is None else _fmt(r.threshold),
                    r.quantity,
                    _fmt(r.value),
                )
            )


def read_csv(path: str | Path) -> list[ResultRow]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        for fields in reader:
            scheme, m, policy, threshold, quantity, value = fields
            rows.append(
                ResultRow(
                    scheme=scheme,
                    m=int(m),
                    policy=policy,
                    threshold=None if threshold == "" else float(threshold),
                    quantity=quantity,
                    value=float(value),
                )
            )
    return rows


def load_config(path: str | Path) -> dict:
    """Parse `key = value` lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, _, val = line.partition(sep)
                break
        else:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        val = val.strip()
        values[key] = int(val) if key in ("M", "seed", "trials") else float(val)
    return values


def _parse_m_list(text: str) -> list[int]:
    try:
        ms = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad m-list {text!r}") from exc
    if not ms:
        raise argparse.ArgumentTypeError("m-list must be nonempty")
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise argparse.ArgumentTypeError("m-list must be strictly increasing")
    if ms[0] < 1:
        raise argparse.ArgumentTypeError("sensor counts must be >= 1")
    return ms


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sigma-theta2", type=float, default=None)
    common.add_argument("--sigma-v2", type=float, default=None)
    common.add_argument("--sigma-n2", type=float, default=None)
    common.add_argument("--lambda", dest="lam", type=float, default=None)
    common.add_argument("--m-list", type=_parse_m_list, default=None)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument(
        "--budget",
        type=float,
        default=None,
        help="normalized power budget P/(sigma_theta2+sigma_v2)",
    )
    common.add_argument("--config", type=str, default=None)
    common.add_argument("--out", type=str, default=None)
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="destim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate of E[D]")
    p_sim.add_argument("--scheme", choices=SCHEMES, required=True)
    p_sim.add_argument("--power", choices=("constant", "optimal"), default="constant")
    p_sim.add_argument("--threshold", default="default", help="default | optimal | <value>")

    p_asym = sub.add_parser("asymptotic", parents=[common], help="large-M scaling law values")
    p_asym.add_argument("--scheme", choices=SCHEMES, required=True)

    p_exact = sub.add_parser("exact", parents=[common], help="exact finite-M E[D] (quadrature)")
    p_exact.add_argument("--scheme", choices=("diversity", "aloha"), required=True)
    p_exact.add_argument("--threshold", default="default")

    p_pow = sub.add_parser("optimize-power", parents=[common], help="water-filling allocation")
    p_pow.add_argument("--scheme", choices=("diversity", "aloha"), required=True)

    p_thr = sub.add_parser("optimize-threshold", parents=[common], help="optimal ALOHA threshold")
    p_thr.add_argument("--power", choices=("constant", "optimal"), default="constant")

    p_bnd = sub.add_parser("bounds", parents=[common], help="asymmetric-network bound pair")
    p_bnd.add_argument("--scheme", choices=SCHEMES, required=True)
    p_bnd.add_argument("--sigma-min2", type=float, default=None)
    p_bnd.add_argument("--sigma-max2", type=float, default=None)
    p_bnd.add_argument("--mu-min", type=float, default=None)
    p_bnd.add_argument("--mu-max", type=float, default=None)

    p_rep = sub.add_parser("reproduce", parents=[common], help="regenerate a study figure")
    p_rep.add_argument("--figure", type=int, required=True)

    return parser


def _settings(args: argparse.Namespace) -> dict:
    values = dict(DEFAULTS)
    if args.config:
        values.update(load_config(args.config))
    overrides = {
        "sigma_theta2": args.sigma_theta2,
        "sigma_v2": args.sigma_v2,
        "sigma_n2": args.sigma_n2,
        "lambda": args.lam,
        "seed": args.seed,
        "trials": args.trials,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    if args.budget is not None:
        values["power_budget"] = args.budget * (values["sigma_theta2"] + values["sigma_v2"])
    return values


def _params_for(values: dict, m: int) -> NetworkParams:
    return NetworkParams(
        sigma_theta2=values["sigma_theta2"],
        sigma_v2=values["sigma_v2"],
        sigma_n2=values["sigma_n2"],
        lam=values["lambda"],
        num_sensors=m,
        power_budget=values["power_budget"],
    )


def _m_list(args: argparse.Namespace, values: dict) -> list[int]:
    return args.m_list if args.m_list is not None else [values["M"]]


def _resolve_threshold(spec: str, params: NetworkParams, m: int) -> tuple[float, str]:
    if spec == "default":
        return default_threshold(params.lam, m), "default"
    if spec == "optimal":
        return optimize_threshold_constant_power(params, m).t_star, "optimal"
    return float(spec), "fixed"


def _cmd_simulate(args, values) -> list[ResultRow]:
    rows = []
    for m in _m_list(args, values):
        params = _params_for(values, m)
        budget = params.normalized_budget
        threshold = None
        if args.scheme == "aloha":
            threshold, _ = _resolve_threshold(args.threshold, params, m)
        scheme = SchemeConfig(args.scheme, threshold)
        if args.power == "optimal":
            if args.scheme == "diversity":
                nu = solve_nu_diversity(params, m, budget).nu
            elif args.scheme == "aloha":
                nu = solve_nu_aloha(params, m, threshold, budget / m).nu
            else:
                raise ValueError("optimal power is available for diversity and aloha only")
            policy = PowerPolicy.water_filling(nu)
            label = "waterfill"
            rows.append(ResultRow(args.scheme, m, label, threshold, "nu", nu))
        else:
            label = "constant"
            if args.scheme == "diversity":
                policy = PowerPolicy.fixed(budget)
            elif args.scheme == "aloha":
                policy = PowerPolicy.fixed(budget * math.exp(params.lam * threshold) / m)
            else:
                policy = PowerPolicy.fixed(budget / m)
        est = estimate_expected_distortion(
            scheme, params, policy, values["trials"], values["seed"], workers=args.workers
        )
        rows.append(ResultRow(args.scheme, m, label, threshold, "mc_mean", est.mean))
        rows.append(ResultRow(args.scheme, m, label, threshold, "mc_stderr", est.stderr))
    return rows


def _asymptotic_value(scheme: str, params: NetworkParams, m: int) -> float:
    fn = {
        "diversity": asymptotic_diversity,
        "aloha": asymptotic_aloha,
        "mac": asymptotic_mac,
        "orthogonal": asymptotic_orthogonal,
    }[scheme]
    return fn(params, m)


def _cmd_asymptotic(args, values) -> list[ResultRow]:
    rows = []
    for m in _m_list(args, values):
        params = _params_for(values, m)
        rows.append(
            ResultRow(args.scheme, m, "constant", None, "asymptotic", _asymptotic_value(args.scheme, params, m))
        )
    return rows


def _cmd_exact(args, values) -> list[ResultRow]:
    rows = []
    for m in _m_list(args, values):
        params = _params_for(values, m)
        budget = params.normalized_budget
        if args.scheme == "diversity":
            value = quadrature_expected_distortion_diversity(params, m, alpha2=budget)
            rows.append(ResultRow("diversity", m, "constant", None, "quadrature", value))
        else:
            threshold, _ = _resolve_threshold(args.threshold, params, m)
            alpha2 = budget * math.exp(params.lam * threshold) / m
            value = quadrature_expected_distortion_aloha(params, m, threshold, alpha2)
            rows.append(ResultRow("aloha", m, "constant", threshold, "quadrature", value))
    return rows


def _cmd_optimize_power(args, values) -> list[ResultRow]:
    rows = []
    for m in _m_list(args, values):
        params = _params_for(values, m)
        budget = params.normalized_budget
        if args.scheme == "diversity":
            sol = solve_nu_diversity(params, m, budget)
            const = quadrature_expected_distortion_diversity(params, m, alpha2=budget)
            threshold = None
        else:
            threshold = default_threshold(params.lam, m)
            sol = solve_nu_aloha(params, m, threshold, budget / m)
            const = quadrature_expected_distortion_aloha(
                params, m, threshold, budget * math.exp(params.lam * threshold) / m
            )
        rows.append(ResultRow(args.scheme, m, "waterfill", threshold, "nu", sol.nu))
        rows.append(
            ResultRow(args.scheme, m, "waterfill", threshold, "quadrature", sol.expected_distortion)
        )
        rows.append(ResultRow(args.scheme, m, "constant", threshold, "quadrature", const))
    return rows


def _cmd_optimize_threshold(args, values) -> list[ResultRow]:
    rows = []
    for m in _m_list(args, values):
        params = _params_for(values, m)
        budget = params.normalized_budget
        t_def = default_threshold(params.lam, m)
        if args.power == "constant":
            sol = optimize_threshold_constant_power(params, m)
            label = "constant"
            rows.append(ResultRow("aloha", m, label, sol.t_star, "t_star", sol.t_star))
            rows.append(
                ResultRow("aloha", m, label, sol.t_star, "quadrature", sol.expected_distortion)
            )
        else:
            sol = optimize_threshold_joint(params, m, budget)
            label = "waterfill"
            rows.append(ResultRow("aloha", m, label, sol.t_star, "t_star", sol.t_star))
            rows.append(ResultRow("aloha", m, label, sol.t_star, "nu", sol.joint.nu))
            rows.append(
                ResultRow("aloha", m, label, sol.t_star, "quadrature", sol.expected_distortion)
            )
        rows.append(
            ResultRow(
                "aloha",
                m,
                "constant",
                t_def,
                "quadrature",
                expected_distortion_aloha_threshold(params, m, t_def),
            )
        )
    return rows


def _cmd_bounds(args, values) -> list[ResultRow]:
    ranges = AsymmetricRanges(
        sigma_min2=args.sigma_min2,
        sigma_max2=args.sigma_max2,
        mu_min=args.mu_min,
        mu_max=args.mu_max,
    )
    rows = []
    for m in _m_list(args, values):
        params = _params_for(values, m)
        pair = asymptotic_bounds(args.scheme, params, ranges, m)
        rows.append(ResultRow(args.scheme, m, "constant", None, "bound_lower", pair.lower))
        rows.append(ResultRow(args.scheme, m, "constant", None, "bound_upper", pair.upper))
    return rows


_FIGURE_GRIDS = {
    1: [2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000],
    2: [2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000],
    3: [2, 5, 10, 20, 50, 100, 200, 500, 1000],
    4: [2, 5, 10, 20, 50, 100, 200, 500, 1000],
    5: [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 100000],
    6: [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 100000],
    7: [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000],
    8: [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000],
}

_FIGURE_SCHEME = {1: "diversity", 2: "aloha", 3: "mac", 4: "orthogonal"}


def _figure_rows(figure: int, values: dict, workers: int) -> tuple[list[ResultRow], dict]:
    grid = _FIGURE_GRIDS[figure]
    rows: list[ResultRow] = []
    series: list[dict]
    scheme = _FIGURE_SCHEME.get(figure)
    trials, seed = values["trials"], values["seed"]

    if figure in (1, 2, 3, 4):
        for m in grid:
            params = _params_for(values, m)
            threshold = default_threshold(params.lam, m) if scheme == "aloha" else None
            if scheme == "diversity":
                policy = PowerPolicy.unit()
            elif scheme == "aloha":
                policy = PowerPolicy.unit()
            else:
                policy = PowerPolicy.split_across_sensors()
            est = estimate_expected_distortion(
                SchemeConfig(scheme, threshold), params, policy, trials, seed, workers=workers
            )
            rows.append(ResultRow(scheme, m, "constant", threshold, "mc_mean", est.mean))
            rows.append(ResultRow(scheme, m, "constant", threshold, "mc_stderr", est.stderr))
            rows.append(
                ResultRow(
                    scheme, m, "constant", threshold, "asymptotic", _asymptotic_value(scheme, params, m)
                )
            )
            if scheme == "diversity":
                rows.append(
                    ResultRow(
                        scheme,
                        m,
                        "constant",
                        None,
                        "quadrature",
                        quadrature_expected_distortion_diversity(params, m),
                    )
                )
            elif scheme == "aloha":
                rows.append(
                    ResultRow(
                        scheme,
                        m,
                        "constant",
                        threshold,
                        "quadrature",
                        quadrature_expected_distortion_aloha(params, m, threshold),
                    )
                )
        series = [
            {"label": "simulated", "filter": {"quantity": "mc_mean"}},
            {"label": "asymptotic", "filter": {"quantity": "asymptotic"}},
        ]
        title = f"{scheme}: simulated vs asymptotic expected distortion"
    elif figure in (5, 6):
        scheme = "diversity" if figure == 5 else "aloha"
        for m in grid:
            params = _params_for(values, m)
            budget = params.normalized_budget
            if scheme == "diversity":
                sol = solve_nu_diversity(params, m, budget)
                const = quadrature_expected_distortion_diversity(params, m, alpha2=budget)
                threshold = None
            else:
                threshold = default_threshold(params.lam, m)
                sol = solve_nu_aloha(params, m, threshold, budget / m)
                const = quadrature_expected_distortion_aloha(
                    params, m, threshold, budget * math.exp(params.lam * threshold) / m
                )
            rows.append(ResultRow(scheme, m, "constant", threshold, "quadrature", const))
            rows.append(
                ResultRow(scheme, m, "waterfill", threshold, "quadrature", sol.expected_distortion)
            )
            rows.append(ResultRow(scheme, m, "waterfill", threshold, "nu", sol.nu))
        series = [
            {"label": "constant power", "filter": {"quantity": "quadrature", "policy": "constant"}},
            {"label": "optimal power", "filter": {"quantity": "quadrature", "policy": "waterfill"}},
        ]
        title = f"{scheme}: constant vs optimal power allocation"
    elif figure == 7:
        scheme = "aloha"
        for m in grid:
            params = _params_for(values, m)
            t_def = default_threshold(params.lam, m)
            sol = optimize_threshold_constant_power(params, m)
            rows.append(ResultRow(scheme, m, "optimal_threshold", sol.t_star, "t_star", sol.t_star))
            rows.append(
                ResultRow(
                    scheme, m, "optimal_threshold", sol.t_star, "quadrature", sol.expected_distortion
                )
            )
            rows.append(ResultRow(scheme, m, "default_threshold", t_def, "t_star", t_def))
            rows.append(
                ResultRow(
                    scheme,
                    m,
                    "default_threshold",
                    t_def,
                    "quadrature",
                    expected_distortion_aloha_threshold(params, m, t_def),
                )
            )
        series = [
            {
                "label": "optimal threshold",
                "filter": {"quantity": "quadrature", "policy": "optimal_threshold"},
            },
            {
                "label": "default threshold",
                "filter": {"quantity": "quadrature", "policy": "default_threshold"},
            },
        ]
        title = "aloha: simple vs optimal thresholding (constant power)"
    elif figure == 8:
        scheme = "aloha"
        for m in grid:
            params = _params_for(values, m)
            budget = params.normalized_budget
            t_def = default_threshold(params.lam, m)
            sol = optimize_threshold_joint(params, m, budget)
            rows.append(ResultRow(scheme, m, "joint", sol.t_star, "t_star", sol.t_star))
            rows.append(ResultRow(scheme, m, "joint", sol.t_star, "nu", sol.joint.nu))
            rows.append(
                ResultRow(scheme, m, "joint", sol.t_star, "quadrature", sol.expected_distortion)
            )
            rows.append(
                ResultRow(
                    scheme,
                    m,
                    "default_threshold",
                    t_def,
                    "quadrature",
                    expected_distortion_aloha_threshold(params, m, t_def),
                )
            )
        series = [
            {
                "label": "joint optimal threshold+power",
                "filter": {"quantity": "quadrature", "policy": "joint"},
            },
            {
                "label": "default threshold, constant power",
                "filter": {"quantity": "quadrature", "policy": "default_threshold"},
            },
        ]
        title = "aloha: joint threshold/power optimization vs simple scheme"
    else:
        raise ValueError(f"figure must be 1..8, got {figure}")

    plot = {
        "title": title,
        "x": {"column": "M", "label": "number of sensors M", "log": True},
        "y": {"column": "value", "label": "expected distortion", "log": False},
        "series": series,
    }
    return rows, plot


def _cmd_reproduce(args, values) -> tuple[list[ResultRow], dict]:
    if not 1 <= args.figure <= 8:
        raise ValueError(f"figure must be 1..8, got {args.figure}")
    return _figure_rows(args.figure, values, args.workers)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        values = _settings(args)
        if args.command == "simulate":
            if values["trials"] < 100:
                raise ValueError("simulate requires trials >= 100")
            rows = _cmd_simulate(args, values)
            default_out = "destim_simulate.csv"
        elif args.command == "asymptotic":
            rows = _cmd_asymptotic(args, values)
            default_out = "destim_asymptotic.csv"
        elif args.command == "exact":
            rows = _cmd_exact(args, values)
            default_out = "destim_exact.csv"
        elif args.command == "optimize-power":
            rows = _cmd_optimize_power(args, values)
            default_out = "destim_optimize_power.csv"
        elif args.command == "optimize-threshold":
            rows = _cmd_optimize_threshold(args, values)
            default_out = "destim_optimize_threshold.csv"
        elif args.command == "bounds":
            rows = _cmd_bounds(args, values)
            default_out = "destim_bounds.csv"
        else:
            rows, plot = _cmd_reproduce(args, values)
            default_out = f"figure{args.figure}.csv"
        out = Path(args.out) if args.out else Path(default_out)
        write_csv(out, rows)
        if args.command == "reproduce":
            plot["csv"] = out.name
            sidecar = out.with_suffix(".plot.json")
            sidecar.write_text(json.dumps(plot, indent=2) + "\n", encoding="utf-8")
            print(f"wrote {out} and {sidecar}")
        else:
            print(f"wrote {out} ({len(rows)} rows)")
        return 0
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if exc.residual is not None:
            print(f"residual estimate: {exc.residual:.3e}", file=sys.stderr)
        return 1
    except ValueError as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
