"""Experiment plans: multi-config sweeps with figure-ready CSV outputs.

A plan is a grid of simulation configs plus a set of analyses. Grid
points execute independently (optionally in parallel processes), each
writing its CSVs and a manifest into its own subdirectory; cross-point
analyses (scaling collapse, pooled overlap-decay fit) run afterwards on
the per-point outputs. A failed grid point is recorded and never touches
the outputs of the others.

Built-in recipes (fig1a .. fig3, realdata) map the standard plots of the
steady-state study onto plans at desk-scale runtimes; ``fig1b-fast``
covers the autocorrelation/relaxation sweep with a cheaper volatility
grid (0.04, 0.08, 0.16).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

import wealthdyn
from wealthdyn import csvio
from wealthdyn.distributions import gini_coefficient, gini_curve, gini_theoretical
from wealthdyn.engine import SimConfig, StartMode, init_ensemble, make_snapshot, run, step
from wealthdyn.errors import ConfigError
from wealthdyn.rankstats import correlation_series, mean_overlap_series, ranks_from_wealth
from wealthdyn.timeseries import (
    CollapseCurve,
    ScalingConvention,
    autocorr_details,
    collapse_check,
    exponential_relaxation_time,
    fit_overlap_decay,
    stationary_gini_series,
)


class Analysis(Enum):
    GINI_TRACE = "gini-trace"
    GINI_VS_ALPHA = "gini-vs-alpha"
    RANK_CORR = "rank-corr"
    OVERLAP = "overlap"
    AUTOCORR = "autocorr"
    RELAX = "relax"
    COLLAPSE = "collapse"
    FIT_OVERLAP = "fit-overlap"


@dataclass(frozen=True)
class ExperimentPlan:
    name: str
    grid: tuple[SimConfig, ...]
    analyses: frozenset[Analysis]
    output_dir: str
    replicas: int = 40
    top_n: int = 100
    lag_count: int = 48
    max_origins: int | None = 32

    def __post_init__(self) -> None:
        if not self.grid:
            raise ConfigError("experiment plan needs a non-empty config grid")
        if not self.analyses:
            raise ConfigError("experiment plan needs at least one analysis")
        if self.replicas < 1 or self.top_n < 1 or self.lag_count < 1:
            raise ConfigError("replicas, top_n and lag_count must be positive")


@dataclass
class PlanResult:
    plan: ExperimentPlan
    point_status: dict[str, str]
    plan_errors: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return bool(self.plan_errors) or any(v != "ok" for v in self.point_status.values())


def point_label(config: SimConfig) -> str:
    return f"alpha{config.alpha:g}_sigma{config.sigma:g}"


def log_spaced_lags(max_lag: int, count: int) -> list[int]:
    if max_lag < 1:
        return [0]
    grid = np.unique(
        np.round(np.geomspace(1, max_lag, min(count, max_lag))).astype(int)
    )
    return [0] + grid.tolist()


def _burn_in_steps(config: SimConfig) -> int:
    # A few flow relaxation times 1/j; hot starts are already near
    # stationarity, this clears the residual finite-N transient.
    if config.flow_rate <= 0.0:
        return 0
    return int(6.0 / config.flow_rate)


def collect_rankings(config: SimConfig, n_snapshots: int):
    ensemble = init_ensemble(config)
    for _ in range(_burn_in_steps(config)):
        step(ensemble, config)
    rankings = [ranks_from_wealth(make_snapshot(ensemble))]
    for _ in range(n_snapshots - 1):
        for _ in range(config.snapshot_every):
            step(ensemble, config)
        rankings.append(ranks_from_wealth(make_snapshot(ensemble)))
    return rankings


def _analysis_gini_trace(config: SimConfig, out_dir: Path) -> list[str]:
    ks, ginis = [], []
    for snap in run(config):
        ks.append(snap.time_index)
        ginis.append(gini_coefficient(snap.normalized))
    csvio.write_gini_trace_csv(out_dir / "gini_trace.csv", ks, config.sigma, ginis)
    return ["gini_trace.csv"]


def _analysis_gini_vs_alpha(config: SimConfig, out_dir: Path) -> list[str]:
    stride = max(1, int(round(0.08 / (config.alpha * config.sigma**2))))
    series = stationary_gini_series(config, stride, _burn_in_steps(config))
    mean = float(series.values.mean())
    se = float(series.values.std(ddof=1) / np.sqrt(series.values.size))
    theory = gini_theoretical(config.alpha).value
    rows = {
        "gini_mean": (mean, se),
        "gini_theory": (theory, 0.0),
        "n_samples": (float(series.values.size), 0.0),
        "stride": (float(stride), 0.0),
    }
    csvio.write_fit_csv(out_dir / "gini_summary.csv", rows)
    return ["gini_summary.csv"]


def _analysis_rank_corr(config: SimConfig, plan: ExperimentPlan, out_dir: Path) -> list[str]:
    n_snapshots = config.steps // config.snapshot_every + 1
    rankings = collect_rankings(config, n_snapshots)
    lags = log_spaced_lags(len(rankings) - 1, plan.lag_count)
    series = correlation_series(
        rankings,
        plan.top_n,
        config.snapshot_every,
        config.alpha,
        config.sigma,
        lags=lags,
        max_origins=plan.max_origins,
    )
    csvio.write_correlation_csv(out_dir / "rank_corr.csv", series)
    return ["rank_corr.csv"]


def _analysis_overlap(config: SimConfig, plan: ExperimentPlan, out_dir: Path) -> list[str]:
    n_snapshots = config.steps // config.snapshot_every + 1
    rankings = collect_rankings(config, n_snapshots)
    series = mean_overlap_series(rankings, plan.top_n)
    lags = np.array(sorted(series), dtype=float) * config.snapshot_every
    omega = np.array([series[k] for k in sorted(series)])
    x_overlap = lags * config.sigma**2 * (config.alpha - 1.0)
    csvio.write_overlap_csv(out_dir / "overlap.csv", lags, x_overlap, omega)
    return ["overlap.csv"]


def _analysis_autocorr(config: SimConfig, out_dir: Path) -> list[str]:
    stride = max(1, int(round(0.08 / (config.alpha * config.sigma**2))))
    series = stationary_gini_series(config, stride, _burn_in_steps(config))
    estimate = autocorr_details(series)
    rows = {
        "tau_ac": (estimate.tau_steps, estimate.std_error),
        "window_lags": (float(estimate.window_lags), 0.0),
        "n_samples": (float(estimate.n_samples), 0.0),
        "stride": (float(stride), 0.0),
        "series_steps": (float(series.values.size * stride), 0.0),
    }
    csvio.write_fit_csv(out_dir / "autocorr.csv", rows)
    return ["autocorr.csv"]


def _analysis_relax(config: SimConfig, plan: ExperimentPlan, out_dir: Path) -> list[str]:
    target = gini_theoretical(config.alpha).value
    result = exponential_relaxation_time(config, target, plan.replicas)
    rows = {
        "tau_exp": (result.mean, result.std_error),
        "target_gini": (target, 0.0),
        "replicas": (float(result.replicas), 0.0),
        "censored": (float(result.n_censored), 0.0),
        "step_cap": (float(result.step_cap), 0.0),
    }
    csvio.write_fit_csv(out_dir / "relax.csv", rows)
    return ["relax.csv"]


def execute_grid_point(plan: ExperimentPlan, config: SimConfig) -> tuple[str, str]:
    """Run all per-point analyses for one config; returns (label, status)."""
    label = point_label(config)
    out_dir = Path(plan.output_dir) / label
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    written: list[str] = []
    try:
        if Analysis.GINI_TRACE in plan.analyses:
            written += _analysis_gini_trace(config, out_dir)
        if Analysis.GINI_VS_ALPHA in plan.analyses:
            written += _analysis_gini_vs_alpha(config, out_dir)
        if Analysis.RANK_CORR in plan.analyses:
            written += _analysis_rank_corr(config, plan, out_dir)
        if Analysis.OVERLAP in plan.analyses:
            written += _analysis_overlap(config, plan, out_dir)
        if Analysis.AUTOCORR in plan.analyses:
            written += _analysis_autocorr(config, out_dir)
        if Analysis.RELAX in plan.analyses:
            written += _analysis_relax(config, plan, out_dir)
    except Exception as exc:  # noqa: BLE001 - isolate point failures
        status = f"{type(exc).__name__}: {exc}"
    else:
        status = "ok"
    manifest = {
        "label": label,
        "config": config.to_mapping(),
        "seed": config.seed,
        "code_version": wealthdyn.__version__,
        "wall_time_s": round(time.perf_counter() - started, 3),
        "status": status,
        "files": written,
    }
    with open(out_dir / "manifest.json", "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
    return label, status


def _plan_collapse(plan: ExperimentPlan, ok_points: list[SimConfig], out: Path) -> None:
    if Analysis.RANK_CORR in plan.analyses:
        for column in ("tau", "rho"):
            curves = []
            for config in ok_points:
                data = csvio.read_columns_csv(
                    out / point_label(config) / "rank_corr.csv", ["k", column]
                )
                curves.append(
                    CollapseCurve(config.alpha, config.sigma, data["k"], data[column])
                )
            report = collapse_check(curves, ScalingConvention.TAU_RHO)
            csvio.write_collapse_csv(out / f"collapse_{column}.csv", report)
    if Analysis.OVERLAP in plan.analyses:
        curves = []
        for config in ok_points:
            data = csvio.read_columns_csv(out / point_label(config) / "overlap.csv", ["k", "omega"])
            curves.append(CollapseCurve(config.alpha, config.sigma, data["k"], data["omega"]))
        for convention, name in (
            (ScalingConvention.OVERLAP, "collapse_omega.csv"),
            (ScalingConvention.TAU_RHO, "collapse_omega_wrong_axis.csv"),
        ):
            report = collapse_check(curves, convention)
            csvio.write_collapse_csv(out / name, report)


def _plan_fit_overlap(plan: ExperimentPlan, ok_points: list[SimConfig], out: Path) -> None:
    points = []
    n_agents = ok_points[0].n_agents
    for config in ok_points:
        data = csvio.read_columns_csv(out / point_label(config) / "overlap.csv", ["k", "x_overlap", "omega"])
        keep = data["k"] > 0
        points.extend(zip(data["x_overlap"][keep], data["omega"][keep]))
    fit = fit_overlap_decay(points, plan.top_n, n_agents)
    csvio.write_fit_csv(out / "fit_overlap.csv", csvio.fit_result_rows(fit))


def _plan_theory_curve(ok_points: list[SimConfig], out: Path) -> None:
    alphas = sorted({c.alpha for c in ok_points})
    grid = np.linspace(min(alphas), max(alphas), 81) if len(alphas) > 1 else alphas
    csvio.write_gini_curve_csv(out / "gini_theory.csv", gini_curve(grid))


def run_plan(plan: ExperimentPlan, jobs: int = 1) -> PlanResult:
    """Execute a plan; grid points run concurrently when jobs > 1."""
    out = Path(plan.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = [point_label(c) for c in plan.grid]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate grid-point labels in plan {plan.name!r}")
    started = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            statuses = dict(pool.map(execute_grid_point, [plan] * len(plan.grid), plan.grid))
    else:
        statuses = dict(execute_grid_point(plan, config) for config in plan.grid)
    result = PlanResult(plan, statuses)
    ok_points = [c for c in plan.grid if statuses[point_label(c)] == "ok"]
    try:
        if ok_points:
            if Analysis.GINI_VS_ALPHA in plan.analyses:
                _plan_theory_curve(ok_points, out)
            if Analysis.COLLAPSE in plan.analyses:
                _plan_collapse(plan, ok_points, out)
            if Analysis.FIT_OVERLAP in plan.analyses:
                _plan_fit_overlap(plan, ok_points, out)
        else:
            result.plan_errors.append("no grid point succeeded")
    except Exception as exc:  # noqa: BLE001 - report, do not corrupt points
        result.plan_errors.append(f"{type(exc).__name__}: {exc}")
    manifest = {
        "plan": plan.name,
        "analyses": sorted(a.value for a in plan.analyses),
        "points": statuses,
        "plan_errors": result.plan_errors,
        "code_version": wealthdyn.__version__,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    with open(out / "manifest.json", "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
    return result


DEFAULT_SEED = 20240801
_N_DESK = 10_000


def _grid(alphas, sigmas, start: StartMode, steps_fn, snapshot_fn=None, seed=DEFAULT_SEED):
    configs = []
    for i, alpha in enumerate(alphas):
        for k, sigma in enumerate(sigmas):
            steps = steps_fn(alpha, sigma)
            cadence = snapshot_fn(alpha, sigma, steps) if snapshot_fn else 1
            configs.append(
                SimConfig(
                    n_agents=_N_DESK,
                    sigma=sigma,
                    alpha=alpha,
                    start=start,
                    seed=seed + 97 * i + k,
                    steps=steps,
                    snapshot_every=max(1, cadence),
                )
            )
    return tuple(configs)


def _recipe_fig1a(output_dir: str, seed: int) -> ExperimentPlan:
    return ExperimentPlan(
        name="fig1a",
        grid=_grid((1.5, 2.0, 3.0, 4.0), (0.02, 0.04, 0.08), StartMode.HOT,
                   lambda a, s: 10_000, seed=seed),
        analyses=frozenset({Analysis.GINI_VS_ALPHA}),
        output_dir=output_dir,
    )


def _recipe_fig1b(output_dir: str, seed: int) -> ExperimentPlan:
    return ExperimentPlan(
        name="fig1b",
        grid=_grid((2.0,), (0.02, 0.04, 0.08), StartMode.HOT,
                   lambda a, s: int(3000.0 / (s * s * (a - 1.0))), seed=seed),
        analyses=frozenset({Analysis.AUTOCORR, Analysis.RELAX}),
        output_dir=output_dir,
        replicas=100,
    )


def _recipe_fig1b_fast(output_dir: str, seed: int) -> ExperimentPlan:
    return ExperimentPlan(
        name="fig1b-fast",
        grid=_grid((2.0,), (0.04, 0.08, 0.16), StartMode.HOT,
                   lambda a, s: int(1500.0 / (s * s * (a - 1.0))), seed=seed),
        analyses=frozenset({Analysis.AUTOCORR, Analysis.RELAX}),
        output_dir=output_dir,
        replicas=40,
    )


def _recipe_fig1c(output_dir: str, seed: int) -> ExperimentPlan:
    return ExperimentPlan(
        name="fig1c",
        grid=_grid((2.0,), (0.02, 0.04, 0.08), StartMode.COLD,
                   lambda a, s: int(25.0 / (s * s)),
                   lambda a, s, steps: steps // 400, seed=seed),
        analyses=frozenset({Analysis.GINI_TRACE}),
        output_dir=output_dir,
    )


def _recipe_fig1d(output_dir: str, seed: int) -> ExperimentPlan:
    return ExperimentPlan(
        name="fig1d",
        grid=_grid((2.0,), (0.02, 0.04, 0.08), StartMode.HOT,
                   lambda a, s: int(25.0 / (s * s)),
                   lambda a, s, steps: steps // 400, seed=seed),
        analyses=frozenset({Analysis.GINI_TRACE}),
        output_dir=output_dir,
    )


def _recipe_fig2(output_dir: str, seed: int) -> ExperimentPlan:
    return ExperimentPlan(
        name="fig2",
        grid=_grid((2.0, 3.0, 4.0), (0.02, 0.04, 0.08), StartMode.HOT,
                   lambda a, s: int(16.0 / (a * s * s)),
                   lambda a, s, steps: steps // 240, seed=seed),
        analyses=frozenset({Analysis.RANK_CORR, Analysis.COLLAPSE}),
        output_dir=output_dir,
    )


def _recipe_fig3(output_dir: str, seed: int) -> ExperimentPlan:
    return ExperimentPlan(
        name="fig3",
        grid=_grid((2.0, 3.0, 4.0), (0.02, 0.04, 0.08), StartMode.HOT,
                   lambda a, s: int(9.0 / (s * s * (a - 1.0))),
                   lambda a, s, steps: steps // 240, seed=seed),
        analyses=frozenset({Analysis.OVERLAP, Analysis.FIT_OVERLAP, Analysis.COLLAPSE}),
        output_dir=output_dir,
    )


RECIPES: dict[str, dict] = {
    "fig1a": {"kind": "plan", "builder": _recipe_fig1a,
              "description": "steady-state Gini vs tail exponent, hot starts, three volatilities"},
    "fig1b": {"kind": "plan", "builder": _recipe_fig1b,
              "description": "autocorrelation and relaxation times vs volatility (slow, ~1h)"},
    "fig1b-fast": {"kind": "plan", "builder": _recipe_fig1b_fast,
                   "description": "fig1b with volatilities 0.04/0.08/0.16 at desk-scale runtime"},
    "fig1c": {"kind": "plan", "builder": _recipe_fig1c,
              "description": "Gini relaxation traces from cold (equal-wealth) starts"},
    "fig1d": {"kind": "plan", "builder": _recipe_fig1d,
              "description": "stationary Gini fluctuation traces from hot starts"},
    "fig2": {"kind": "plan", "builder": _recipe_fig2,
             "description": "tau/rho rank-correlation decay and k*alpha*sigma^2 collapse"},
    "fig3": {"kind": "plan", "builder": _recipe_fig3,
             "description": "top-100 overlap decay, universal-axis collapse and (A, B) fit"},
    "realdata": {"kind": "richlist",
                 "description": "rank statistics of a user-supplied rich-list CSV (year,rank,name)"},
}


def list_recipes() -> dict[str, str]:
    """Catalog of built-in recipe names and descriptions."""
    return {name: info["description"] for name, info in RECIPES.items()}


def build_recipe(name: str, output_dir: str, seed: int = DEFAULT_SEED) -> ExperimentPlan:
    """Instantiate a named simulation recipe as an executable plan."""
    info = RECIPES.get(name)
    if info is None:
        raise ConfigError(f"unknown recipe {name!r}; known: {', '.join(sorted(RECIPES))}")
    if info["kind"] != "plan":
        raise ConfigError(f"recipe {name!r} is not a simulation plan; see the CLI for its runner")
    return info["builder"](output_dir, seed)
