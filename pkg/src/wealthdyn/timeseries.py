"""Autocorrelation times, relaxation times, decay fits and scaling collapse.

The integrated autocorrelation time uses the self-consistent windowing
rule: sum normalized autocovariances up to the smallest M with
M >= window_factor * tau_M (window_factor defaults to 6). The exponential
relaxation time is the first-passage proxy: evolve cold-start replicas
until the empirical Gini first exceeds the stationary target. Overlap
decay curves are fitted with

    omega(x) = (1 - n/N) * exp(-A*sqrt(x) - B*x) + n/N

by Gauss-Newton with a numeric Jacobian, started from the log-linearized
regression of the decay on (sqrt(x), x).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from wealthdyn.distributions import gini_coefficient
from wealthdyn.engine import AgentEnsemble, SimConfig, init_cold, init_ensemble, step
from wealthdyn.errors import ConfigError, FitError, StatisticsError

_MIN_SERIES_LENGTH = 100
_GN_MAX_ITER = 100
_GN_MAX_HALVINGS = 40


@dataclass(frozen=True)
class ScalarSeries:
    """A scalar observable sampled every ``step_stride`` evolution steps."""

    values: np.ndarray
    step_stride: int = 1


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters with linearized standard errors."""

    params: dict[str, float]
    std_errors: dict[str, float]
    residual_norm: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < len(self.params) + 1:
            raise FitError("fit needs more points than parameters")
        if any(not v >= 0.0 for v in self.std_errors.values()):
            raise FitError("standard errors must be non-negative")


@dataclass(frozen=True)
class AutocorrEstimate:
    """Windowed integrated autocorrelation time with its context."""

    tau_steps: float
    window_lags: int
    n_samples: int
    step_stride: int

    @property
    def std_error(self) -> float:
        """Madras-Sokal linearized standard error of tau."""
        return self.tau_steps * math.sqrt(2.0 * (2.0 * self.window_lags + 1.0) / self.n_samples)


def autocorr_details(series: ScalarSeries, window_factor: float = 6.0) -> AutocorrEstimate:
    """Integrated autocorrelation time plus window and sample diagnostics."""
    v = np.asarray(series.values, dtype=float)
    n = v.size
    if n < _MIN_SERIES_LENGTH:
        raise StatisticsError(f"series too short for tau_ac: {n} < {_MIN_SERIES_LENGTH}")
    x = v - v.mean()
    c0 = float(x @ x) / n
    if c0 == 0.0:
        raise StatisticsError("constant series has no autocorrelation time")
    tau = 0.5
    for k in range(1, n):
        tau += float(x[:-k] @ x[k:]) / n / c0
        if k >= window_factor * tau:
            return AutocorrEstimate(tau * series.step_stride, k, n, series.step_stride)
    raise StatisticsError("series too short relative to its correlation time")


def integrated_autocorr_time(series: ScalarSeries, window_factor: float = 6.0) -> float:
    """Integrated autocorrelation time, in evolution steps.

    tau = (1/2 + sum_{k<=M} rho(k)) * step_stride with the window M
    chosen self-consistently as the smallest M >= window_factor * tau_M.
    """
    return autocorr_details(series, window_factor).tau_steps


@dataclass(frozen=True)
class RelaxationResult:
    """First-passage relaxation time over independent cold-start replicas."""

    mean: float
    std_error: float
    times: np.ndarray
    n_censored: int
    step_cap: int

    @property
    def replicas(self) -> int:
        return self.times.size + self.n_censored


def _first_passage(config: SimConfig, target: float, replica: int, step_cap: int) -> int:
    """First step at which the cold-start Gini exceeds ``target`` (0 if capped)."""
    rng = np.random.default_rng([config.seed, replica])
    ensemble = init_cold(config, rng)
    for k in range(1, step_cap + 1):
        step(ensemble, config)
        if gini_coefficient(ensemble.wealth) > target:
            return k
    return 0


def exponential_relaxation_time(
    config: SimConfig,
    target: float,
    replicas: int,
    step_cap: int | None = None,
    jobs: int = 1,
) -> RelaxationResult:
    """Mean first-passage time of the Gini above ``target`` from cold starts.

    Each replica runs an independent stream seeded from (config.seed,
    replica index). Replicas that do not cross within ``step_cap`` steps
    (default: config.steps) are reported as censored, never dropped
    silently; the mean is over the uncensored replicas.
    """
    if replicas < 1:
        raise ConfigError("replicas must be positive")
    cap = config.steps if step_cap is None else int(step_cap)
    if cap < 1:
        raise ConfigError("step cap must be positive (set config.steps or step_cap)")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_first_passage, *zip(*[
                (config, target, r, cap) for r in range(replicas)
            ])))
    else:
        raw = [_first_passage(config, target, r, cap) for r in range(replicas)]
    times = np.array([t for t in raw if t > 0], dtype=float)
    n_censored = replicas - times.size
    if times.size == 0:
        raise StatisticsError(f"all {replicas} replicas censored at step cap {cap}")
    std_error = float(times.std(ddof=1) / math.sqrt(times.size)) if times.size > 1 else float("nan")
    return RelaxationResult(float(times.mean()), std_error, times, n_censored, cap)


def stationary_gini_series(
    config: SimConfig, stride: int, burn_in_steps: int = 0
) -> ScalarSeries:
    """Gini sampled every ``stride`` steps over config.steps, after a burn-in."""
    if stride < 1:
        raise ConfigError("stride must be positive")
    ensemble = init_ensemble(config)
    for _ in range(burn_in_steps):
        step(ensemble, config)
    values = np.empty(config.steps // stride)
    for i in range(values.size):
        for _ in range(stride):
            step(ensemble, config)
        values[i] = gini_coefficient(ensemble.wealth)
    return ScalarSeries(values, stride)


def fit_power_law(points: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares power law value = prefactor * x^(-exponent), in log-log.

    The exponent is reported positive for decaying data (value ~ x^-x0).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise FitError("fit_power_law needs at least 3 (x, value) points")
    if np.any(pts <= 0.0):
        raise FitError("fit_power_law requires positive abscissas and values")
    lx = np.log(pts[:, 0])
    ly = np.log(pts[:, 1])
    m = lx.size
    x_centered = lx - lx.mean()
    sxx = float(x_centered @ x_centered)
    if sxx == 0.0:
        raise FitError("degenerate abscissas in fit_power_law")
    slope = float(x_centered @ ly) / sxx
    intercept = float(ly.mean()) - slope * float(lx.mean())
    resid = ly - (intercept + slope * lx)
    ssr = float(resid @ resid)
    s2 = ssr / (m - 2)
    se_slope = math.sqrt(s2 / sxx)
    se_intercept = math.sqrt(s2 * (1.0 / m + lx.mean() ** 2 / sxx))
    prefactor = math.exp(intercept)
    return FitResult(
        params={"exponent": -slope, "prefactor": prefactor},
        std_errors={"exponent": se_slope, "prefactor": prefactor * se_intercept},
        residual_norm=math.sqrt(ssr),
        n_points=m,
    )


def overlap_decay_model(x, A: float, B: float, top_n: int, n_agents: int):
    """Phenomenological overlap decay (1-n/N) exp(-A sqrt(x) - B x) + n/N."""
    x = np.asarray(x, dtype=float)
    floor = top_n / n_agents
    return (1.0 - floor) * np.exp(-A * np.sqrt(x) - B * x) + floor


def _numeric_jacobian(x: np.ndarray, params: np.ndarray, top_n: int, n_agents: int) -> np.ndarray:
    jac = np.empty((x.size, params.size))
    for i in range(params.size):
        h = 1e-6 * max(1.0, abs(params[i]))
        hi = params.copy()
        lo = params.copy()
        hi[i] += h
        lo[i] -= h
        jac[:, i] = (
            overlap_decay_model(x, hi[0], hi[1], top_n, n_agents)
            - overlap_decay_model(x, lo[0], lo[1], top_n, n_agents)
        ) / (2.0 * h)
    return jac


def _linearized_start(x: np.ndarray, y: np.ndarray, floor: float) -> np.ndarray:
    """Regress -ln((y-floor)/(1-floor)) on (sqrt(x), x), no intercept.

    Points at or below the floor are excluded here (the log is undefined)
    but stay in the full nonlinear fit.
    """
    usable = y > floor
    if np.count_nonzero(usable) < 2:
        raise FitError("too few points above n/N to initialize the decay fit")
    u = -np.log((y[usable] - floor) / (1.0 - floor))
    basis = np.column_stack((np.sqrt(x[usable]), x[usable]))
    gram = basis.T @ basis
    try:
        start = np.linalg.solve(gram, basis.T @ u)
    except np.linalg.LinAlgError as exc:
        raise FitError("degenerate abscissas in the decay-fit start") from exc
    return start


def fit_overlap_decay(
    points: Sequence[tuple[float, float]], top_n: int, n_agents: int
) -> FitResult:
    """Fit (A, B) of the overlap decay law by Gauss-Newton least squares."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise FitError("fit_overlap_decay needs at least 4 (x, omega) points")
    x = pts[:, 0]
    y = pts[:, 1]
    if np.any(x < 0.0):
        raise FitError("fit_overlap_decay requires x >= 0")
    floor = top_n / n_agents
    params = _linearized_start(x, y, floor)

    def ssr_at(p: np.ndarray) -> float:
        r = overlap_decay_model(x, p[0], p[1], top_n, n_agents) - y
        return float(r @ r)

    ssr = ssr_at(params)
    converged = False
    for _ in range(_GN_MAX_ITER):
        resid = overlap_decay_model(x, params[0], params[1], top_n, n_agents) - y
        jac = _numeric_jacobian(x, params, top_n, n_agents)
        try:
            delta = np.linalg.solve(jac.T @ jac, -jac.T @ resid)
        except np.linalg.LinAlgError as exc:
            raise FitError("singular normal equations in overlap decay fit") from exc
        scale = 1.0
        for _ in range(_GN_MAX_HALVINGS):
            candidate = params + scale * delta
            new_ssr = ssr_at(candidate)
            if new_ssr <= ssr:
                break
            scale /= 2.0
        else:
            # No descent direction left: converged if the step is tiny.
            if float(np.max(np.abs(delta))) <= 1e-10 * (1.0 + float(np.max(np.abs(params)))):
                converged = True
                break
            raise FitError("overlap decay fit diverged (no descent step found)")
        step_size = float(np.max(np.abs(scale * delta)))
        improvement = ssr - new_ssr
        params, ssr = candidate, new_ssr
        if step_size <= 1e-12 * (1.0 + float(np.max(np.abs(params)))) or (
            improvement <= 1e-15 * max(ssr, 1e-300)
        ):
            converged = True
            break
    if not converged:
        raise FitError(f"overlap decay fit did not converge in {_GN_MAX_ITER} iterations")
    jac = _numeric_jacobian(x, params, top_n, n_agents)
    dof = x.size - 2
    s2 = ssr / dof
    try:
        cov = s2 * np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError as exc:
        raise FitError("singular covariance in overlap decay fit") from exc
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return FitResult(
        params={"A": float(params[0]), "B": float(params[1])},
        std_errors={"A": float(se[0]), "B": float(se[1])},
        residual_norm=math.sqrt(ssr),
        n_points=int(x.size),
    )


class ScalingConvention(Enum):
    """Which universal abscissa a curve family is rescaled onto."""

    TAU_RHO = "tau-rho"    # x = k * alpha * sigma^2
    OVERLAP = "overlap"    # x = k * sigma^2 * (alpha - 1)

    def factor(self, alpha: float, sigma: float) -> float:
        if self is ScalingConvention.TAU_RHO:
            return alpha * sigma * sigma
        return sigma * sigma * (alpha - 1.0)


@dataclass(frozen=True)
class CollapseCurve:
    """One lag-indexed curve tagged with its (alpha, sigma) parameters."""

    alpha: float
    sigma: float
    lags: np.ndarray
    values: np.ndarray
    label: str = ""

    def tag(self) -> str:
        return self.label or f"alpha={self.alpha:g},sigma={self.sigma:g}"


@dataclass(frozen=True)
class CollapseReport:
    """Pairwise deviations of rescaled curves on their shared x range."""

    convention: ScalingConvention
    max_pairwise_deviation: float
    pair_deviations: dict[tuple[str, str], float]
    grid: np.ndarray
    curves: dict[str, tuple[np.ndarray, np.ndarray]]


def collapse_check(
    curves: Sequence[CollapseCurve],
    convention: ScalingConvention,
    n_grid: int = 201,
) -> CollapseReport:
    """Rescale curves onto the convention's x axis and compare pairwise.

    Each curve's lag axis is multiplied by the convention factor, the
    curves are linearly interpolated onto a common grid restricted to the
    shared x range, and the maximum pairwise absolute deviation is
    reported.
    """
    if len(curves) < 2:
        raise StatisticsError("collapse_check requires at least 2 curves")
    rescaled: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for curve in curves:
        xs = np.asarray(curve.lags, dtype=float) * convention.factor(curve.alpha, curve.sigma)
        order = np.argsort(xs)
        tag = curve.tag()
        if tag in rescaled:
            raise StatisticsError(f"duplicate curve label {tag!r}")
        rescaled[tag] = (xs[order], np.asarray(curve.values, dtype=float)[order])
    lo = max(xs[0] for xs, _ in rescaled.values())
    hi = min(xs[-1] for xs, _ in rescaled.values())
    if not hi > lo:
        raise StatisticsError("curves share no overlapping rescaled range")
    grid = np.linspace(lo, hi, n_grid)
    on_grid = {tag: np.interp(grid, xs, vals) for tag, (xs, vals) in rescaled.items()}
    tags = list(on_grid)
    pair_deviations: dict[tuple[str, str], float] = {}
    worst = 0.0
    for i, tag_a in enumerate(tags):
        for tag_b in tags[i + 1 :]:
            dev = float(np.max(np.abs(on_grid[tag_a] - on_grid[tag_b])))
            pair_deviations[(tag_a, tag_b)] = dev
            worst = max(worst, dev)
    return CollapseReport(convention, worst, pair_deviations, grid, rescaled)
