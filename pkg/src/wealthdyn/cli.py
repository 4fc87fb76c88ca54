"""Command-line front end.

Subcommands: simulate, gini-theory, autocorr, relax, rank-corr, overlap,
fit-overlap, fit-power, collapse, ingest-richlist, recipe. Simulation
commands take their config from --config (a JSON object with exactly the
SimConfig fields) with individual flags as overrides. Exit codes:
0 success, 1 validation error, 2 runtime/numeric error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from wealthdyn import csvio, recipes
from wealthdyn.distributions import gini_curve, gini_theoretical
from wealthdyn.engine import SimConfig, run
from wealthdyn.errors import (
    ConfigError,
    DataError,
    FitError,
    SimulationError,
    StatisticsError,
)
from wealthdyn.rankstats import correlation_series, mean_overlap_series
from wealthdyn.richlist import ingest, richlist_report
from wealthdyn.timeseries import (
    CollapseCurve,
    ScalarSeries,
    ScalingConvention,
    autocorr_details,
    collapse_check,
    exponential_relaxation_time,
    fit_overlap_decay,
    fit_power_law,
    stationary_gini_series,
)

_CONFIG_FLAGS = (
    ("n_agents", int),
    ("sigma", float),
    ("alpha", float),
    ("flow_rate", float),
    ("mu", float),
    ("start", str),
    ("seed", int),
    ("steps", int),
    ("snapshot_every", int),
)


def _add_sim_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with the SimConfig fields")
    for name, kind in _CONFIG_FLAGS:
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, type=kind, default=None, help=f"override {name}")


def _load_config(args: argparse.Namespace) -> SimConfig:
    mapping: dict = {}
    if args.config:
        try:
            with open(args.config) as handle:
                mapping = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from exc
        if not isinstance(mapping, dict):
            raise ConfigError(f"{args.config} must hold a single JSON object")
    for name, _ in _CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            mapping[name] = value
    return SimConfig.from_mapping(mapping)


def _auto_stride(config: SimConfig) -> int:
    return max(1, int(round(0.08 / (config.alpha * config.sigma**2))))


def _burn_in(config: SimConfig) -> int:
    return 0 if config.flow_rate <= 0.0 else int(6.0 / config.flow_rate)


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    csvio.write_snapshots_csv(args.out, run(config))
    return 0


def _parse_alpha_grid(args: argparse.Namespace) -> np.ndarray:
    if args.alphas:
        return np.array([float(v) for v in args.alphas.split(",")])
    return np.linspace(args.alpha_min, args.alpha_max, args.alpha_count)


def _cmd_gini_theory(args: argparse.Namespace) -> int:
    csvio.write_gini_curve_csv(args.out, gini_curve(_parse_alpha_grid(args)))
    return 0


def _cmd_autocorr(args: argparse.Namespace) -> int:
    if args.series:
        ks, values = csvio.read_series_csv(args.series)
        stride = args.stride or (int(ks[1] - ks[0]) if ks.size > 1 else 1)
        series = ScalarSeries(values, stride)
    else:
        config = _load_config(args)
        stride = args.stride or _auto_stride(config)
        burn = args.burn_in if args.burn_in is not None else _burn_in(config)
        series = stationary_gini_series(config, stride, burn)
    estimate = autocorr_details(series, window_factor=args.window_factor)
    rows = {
        "tau_ac": (estimate.tau_steps, estimate.std_error),
        "window_lags": (float(estimate.window_lags), 0.0),
        "n_samples": (float(estimate.n_samples), 0.0),
        "stride": (float(series.step_stride), 0.0),
    }
    csvio.write_fit_csv(args.out, rows)
    return 0


def _cmd_relax(args: argparse.Namespace) -> int:
    config = _load_config(args)
    target = args.target if args.target is not None else gini_theoretical(config.alpha).value
    result = exponential_relaxation_time(
        config, target, args.replicas, step_cap=args.cap, jobs=args.jobs
    )
    rows = {
        "tau_exp": (result.mean, result.std_error),
        "target_gini": (target, 0.0),
        "replicas": (float(result.replicas), 0.0),
        "censored": (float(result.n_censored), 0.0),
        "step_cap": (float(result.step_cap), 0.0),
    }
    csvio.write_fit_csv(args.out, rows)
    return 0


def _cmd_rank_corr(args: argparse.Namespace) -> int:
    config = _load_config(args)
    rankings = recipes.collect_rankings(config, config.steps // config.snapshot_every + 1)
    lags = recipes.log_spaced_lags(len(rankings) - 1, args.lags)
    series = correlation_series(
        rankings,
        args.top_n,
        config.snapshot_every,
        config.alpha,
        config.sigma,
        lags=lags,
        max_origins=args.max_origins,
    )
    csvio.write_correlation_csv(args.out, series)
    return 0


def _cmd_overlap(args: argparse.Namespace) -> int:
    config = _load_config(args)
    rankings = recipes.collect_rankings(config, config.steps // config.snapshot_every + 1)
    series = mean_overlap_series(rankings, args.top_n)
    lags = np.array(sorted(series), dtype=float) * config.snapshot_every
    omega = np.array([series[k] for k in sorted(series)])
    csvio.write_overlap_csv(
        args.out, lags, lags * config.sigma**2 * (config.alpha - 1.0), omega
    )
    return 0


def _cmd_fit_overlap(args: argparse.Namespace) -> int:
    points = []
    for path in args.inputs:
        data = csvio.read_columns_csv(path, ["k", "x_overlap", "omega"])
        keep = data["k"] > 0
        points.extend(zip(data["x_overlap"][keep], data["omega"][keep]))
    fit = fit_overlap_decay(points, args.top_n, args.n_agents)
    csvio.write_fit_csv(args.out, csvio.fit_result_rows(fit))
    return 0


def _cmd_fit_power(args: argparse.Namespace) -> int:
    data = csvio.read_columns_csv(args.input, [args.x_col, args.y_col])
    fit = fit_power_law(list(zip(data[args.x_col], data[args.y_col])))
    csvio.write_fit_csv(args.out, csvio.fit_result_rows(fit))
    return 0


def _parse_curve_spec(spec: str) -> dict:
    parts = dict(item.split("=", 1) for item in spec.split(",") if "=" in item)
    missing = {"alpha", "sigma", "file"} - set(parts)
    if missing:
        raise ConfigError(f"--curve needs alpha=,sigma=,file=; missing {sorted(missing)}")
    return parts


def _cmd_collapse(args: argparse.Namespace) -> int:
    convention = ScalingConvention(args.convention)
    curves = []
    for spec in args.curve:
        parts = _parse_curve_spec(spec)
        data = csvio.read_columns_csv(parts["file"], ["k", args.column])
        curves.append(
            CollapseCurve(float(parts["alpha"]), float(parts["sigma"]), data["k"], data[args.column])
        )
    report = collapse_check(curves, convention)
    csvio.write_collapse_csv(args.out, report)
    print(f"max pairwise deviation: {report.max_pairwise_deviation:.6g}", file=sys.stderr)
    return 0


def _cmd_ingest_richlist(args: argparse.Namespace) -> int:
    records = csvio.read_richlist_csv(args.input)
    aliases = csvio.read_alias_csv(args.alias) if args.alias else None
    lists = ingest(records, aliases)
    base_year = args.base_year if args.base_year is not None else min(lists)
    report = richlist_report(lists, base_year, seed=args.seed, completions=args.completions)
    csvio.write_richlist_report_csv(args.out, report)
    if args.overlap_out:
        lags = sorted(report.mean_overlap)
        values = [report.mean_overlap[k] for k in lags]
        csvio.write_overlap_csv(args.overlap_out, lags, np.asarray(lags, float), values)
    return 0


def _cmd_recipe(args: argparse.Namespace) -> int:
    if args.list or args.name is None:
        for name, description in recipes.list_recipes().items():
            print(f"{name}: {description}")
        return 0
    info = recipes.RECIPES.get(args.name)
    if info is None:
        raise ConfigError(f"unknown recipe {args.name!r}; try --list")
    if info["kind"] == "richlist":
        if not args.richlist:
            raise ConfigError("recipe realdata requires --richlist <csv>")
        out_dir = Path(args.out if args.out != "-" else ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        sub = argparse.Namespace(
            input=args.richlist,
            alias=args.alias,
            base_year=args.base_year,
            seed=args.seed,
            completions=args.completions,
            out=str(out_dir / "richlist_report.csv"),
            overlap_out=str(out_dir / "richlist_overlap.csv"),
        )
        return _cmd_ingest_richlist(sub)
    if args.out == "-":
        raise ConfigError("recipe plans need --out <directory>")
    plan = recipes.build_recipe(args.name, args.out, seed=args.seed)
    result = recipes.run_plan(plan, jobs=args.jobs)
    for label, status in result.point_status.items():
        print(f"{label}: {status}", file=sys.stderr)
    for err in result.plan_errors:
        print(f"plan: {err}", file=sys.stderr)
    if result.failed:
        raise SimulationError(f"recipe {args.name!r} had failing analyses")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wealthdyn", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output file or directory ('-' = stdout)")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers where supported")

    p = subparsers.add_parser("simulate", parents=[common], help="run one simulation to CSV")
    _add_sim_options(p)
    p.set_defaults(func=_cmd_simulate)

    p = subparsers.add_parser("gini-theory", parents=[common], help="theoretical Gini over an alpha grid")
    p.add_argument("--alphas", help="comma-separated alpha values")
    p.add_argument("--alpha-min", type=float, default=1.1)
    p.add_argument("--alpha-max", type=float, default=6.0)
    p.add_argument("--alpha-count", type=int, default=50)
    p.set_defaults(func=_cmd_gini_theory)

    p = subparsers.add_parser("autocorr", parents=[common], help="integrated autocorrelation time of the Gini")
    _add_sim_options(p)
    p.add_argument("--series", help="existing k,value CSV instead of simulating")
    p.add_argument("--stride", type=int, default=None, help="sampling stride in steps")
    p.add_argument("--burn-in", type=int, default=None, help="burn-in steps before sampling")
    p.add_argument("--window-factor", type=float, default=6.0)
    p.set_defaults(func=_cmd_autocorr)

    p = subparsers.add_parser("relax", parents=[common], help="first-passage relaxation time from cold starts")
    _add_sim_options(p)
    p.add_argument("--target", type=float, default=None, help="Gini threshold (default: theoretical)")
    p.add_argument("--replicas", type=int, default=40)
    p.add_argument("--cap", type=int, default=None, help="step cap per replica (default: steps)")
    p.set_defaults(func=_cmd_relax)

    p = subparsers.add_parser("rank-corr", parents=[common], help="tau/rho/gamma/overlap vs lag")
    _add_sim_options(p)
    p.add_argument("--top-n", type=int, default=100)
    p.add_argument("--lags", type=int, default=48, help="size of the log-spaced lag grid")
    p.add_argument("--max-origins", type=int, default=32)
    p.set_defaults(func=_cmd_rank_corr)

    p = subparsers.add_parser("overlap", parents=[common], help="mean top-n overlap vs lag")
    _add_sim_options(p)
    p.add_argument("--top-n", type=int, default=100)
    p.set_defaults(func=_cmd_overlap)

    p = subparsers.add_parser("fit-overlap", parents=[common], help="fit (A, B) of the overlap decay law")
    p.add_argument("inputs", nargs="+", help="overlap CSVs (k,x_overlap,omega)")
    p.add_argument("--top-n", type=int, default=100)
    p.add_argument("--n-agents", type=int, default=10_000)
    p.set_defaults(func=_cmd_fit_overlap)

    p = subparsers.add_parser("fit-power", parents=[common], help="log-log power-law fit")
    p.add_argument("input", help="CSV with the two columns to fit")
    p.add_argument("--x-col", default="sigma")
    p.add_argument("--y-col", default="value")
    p.set_defaults(func=_cmd_fit_power)

    p = subparsers.add_parser("collapse", parents=[common], help="scaling collapse of tagged curves")
    p.add_argument("--curve", action="append", required=True,
                   help="alpha=A,sigma=S,file=PATH (repeatable)")
    p.add_argument("--column", default="tau", help="value column to collapse")
    p.add_argument("--convention", choices=[c.value for c in ScalingConvention], default="tau-rho")
    p.set_defaults(func=_cmd_collapse)

    p = subparsers.add_parser("ingest-richlist", parents=[common], help="rank statistics of a rich-list CSV")
    p.add_argument("input", help="CSV with header year,rank,name")
    p.add_argument("--alias", help="alias,canonical CSV for name normalization")
    p.add_argument("--base-year", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--completions", type=int, default=1,
                   help="average tau/rho over this many completion seeds")
    p.add_argument("--overlap-out", default=None, help="also write the mean overlap series here")
    p.set_defaults(func=_cmd_ingest_richlist)

    p = subparsers.add_parser("recipe", parents=[common], help="run a built-in experiment recipe")
    p.add_argument("name", nargs="?", help="recipe name; omit with --list to enumerate")
    p.add_argument("--list", action="store_true", help="list available recipes")
    p.add_argument("--seed", type=int, default=recipes.DEFAULT_SEED)
    p.add_argument("--richlist", help="input CSV for the realdata recipe")
    p.add_argument("--alias", help="alias CSV for the realdata recipe")
    p.add_argument("--base-year", type=int, default=None)
    p.add_argument("--completions", type=int, default=1)
    p.set_defaults(func=_cmd_recipe)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SimulationError, StatisticsError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
