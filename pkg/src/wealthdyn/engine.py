"""Discrete-time mean-field evolution of an interacting wealth ensemble.

One evolution step splits into two sub-steps:

    (i)  growth:  W_half = exp(r) * W,  r i.i.d. Normal(mu, sigma^2)
    (ii) flow:    W_new  = (1 - j) * W_half + (j/N) * sum(W_half)

The flow sub-step is a convex redistribution and conserves total wealth
to rounding. Because the dynamics is invariant under a common rescaling
of wealth, the state vector carries the drift-free path (mu = 0 growth):
the mean growth rate only multiplies all entries by the same factor per
step, so it is accumulated in a scalar ``log_scale`` instead and applied
when raw wealth is reported. This makes normalized wealth bit-identical
across runs that differ only in mu (given common draws) and keeps the
state far from overflow; very long runs additionally rescale the vector
by its mean whenever the mean leaves [1e-120, 1e120], folding the factor
into ``log_scale``.

Randomness comes from one numpy PCG64 generator per run, seeded from the
config; each step consumes exactly N standard normals in agent order
(numpy's ziggurat sampler). Bit-for-bit reproducibility is promised per
(config, seed) within one build of this package, not across generator or
algorithm changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Iterator

import numpy as np

from wealthdyn.distributions import InverseGammaLaw, sample_inverse_gamma
from wealthdyn.errors import ConfigError, SimulationError

_RESCALE_LO = 1e-120
_RESCALE_HI = 1e120

_ALPHA_CONSISTENCY_RTOL = 1e-12


class StartMode(Enum):
    COLD = "cold"
    HOT = "hot"


@dataclass(frozen=True)
class SimConfig:
    """Full specification of one simulation run.

    Exactly one of ``alpha``/``flow_rate`` may be omitted; the other is
    derived from alpha = 1 + 2*flow_rate/sigma^2. If both are given they
    must satisfy that relation to 1e-12 relative tolerance.
    """

    n_agents: int
    sigma: float
    alpha: float | None = None
    flow_rate: float | None = None
    mu: float = 0.0
    start: StartMode = StartMode.COLD
    seed: int = 0
    steps: int = 0
    snapshot_every: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.n_agents, int) or self.n_agents < 1:
            raise ConfigError(f"n_agents must be a positive integer, got {self.n_agents}")
        if not (isinstance(self.sigma, (int, float)) and math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigError(f"sigma must be a positive real, got {self.sigma}")
        if not (isinstance(self.mu, (int, float)) and math.isfinite(self.mu)):
            raise ConfigError(f"mu must be a finite real, got {self.mu}")
        if isinstance(self.start, str):
            object.__setattr__(self, "start", _parse_start(self.start))
        elif not isinstance(self.start, StartMode):
            raise ConfigError(f"start must be 'cold' or 'hot', got {self.start!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not isinstance(self.steps, int) or self.steps < 0:
            raise ConfigError(f"steps must be a non-negative integer, got {self.steps}")
        if not isinstance(self.snapshot_every, int) or self.snapshot_every < 1:
            raise ConfigError(f"snapshot_every must be a positive integer, got {self.snapshot_every}")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "mu", float(self.mu))
        self._resolve_alpha_flow()

    def _resolve_alpha_flow(self) -> None:
        alpha, flow = self.alpha, self.flow_rate
        s2 = self.sigma * self.sigma
        if alpha is None and flow is None:
            raise ConfigError("one of alpha or flow_rate must be given")
        if alpha is not None:
            alpha = float(alpha)
            if not (math.isfinite(alpha) and alpha > 1.0):
                raise ConfigError(f"alpha must be a real > 1, got {alpha}")
            derived_flow = s2 * (alpha - 1.0) / 2.0
            if flow is None:
                flow = derived_flow
            else:
                flow = float(flow)
                implied_alpha = 1.0 + 2.0 * flow / s2
                if abs(alpha - implied_alpha) > _ALPHA_CONSISTENCY_RTOL * abs(alpha):
                    raise ConfigError(
                        f"alpha={alpha} inconsistent with flow_rate={flow} at "
                        f"sigma={self.sigma} (implies alpha={implied_alpha})"
                    )
        else:
            flow = float(flow)
            alpha = 1.0 + 2.0 * flow / s2
        if not (math.isfinite(flow) and 0.0 <= flow < 1.0):
            raise ConfigError(f"flow_rate must lie in [0, 1), got {flow}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "flow_rate", flow)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SimConfig":
        """Build a config from a plain mapping; unknown keys are an error."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = dict(mapping)
        for key in ("n_agents", "seed", "steps", "snapshot_every"):
            if key in kwargs:
                kwargs[key] = _as_int(key, kwargs[key])
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return {
            "n_agents": self.n_agents,
            "sigma": self.sigma,
            "alpha": self.alpha,
            "flow_rate": self.flow_rate,
            "mu": self.mu,
            "start": self.start.value,
            "seed": self.seed,
            "steps": self.steps,
            "snapshot_every": self.snapshot_every,
        }


def _parse_start(value: str) -> StartMode:
    try:
        return StartMode(value.lower())
    except ValueError:
        raise ConfigError(f"start must be 'cold' or 'hot', got {value!r}") from None


def _as_int(key: str, value) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ConfigError(f"{key} must be an integer, got {value!r}")


@dataclass
class AgentEnsemble:
    """Mutable simulation state: drift-free wealth vector plus bookkeeping.

    ``wealth`` holds strictly positive finite entries; raw (reported)
    wealth is ``wealth * exp(log_scale)``. Not safe for concurrent
    mutation; safe to hand off between threads.
    """

    wealth: np.ndarray
    time_index: int
    rng: np.random.Generator
    log_scale: float = 0.0

    def raw_wealth(self) -> np.ndarray:
        if self.log_scale == 0.0:
            return self.wealth.copy()
        return self.wealth * math.exp(self.log_scale)

    def normalized_wealth(self) -> np.ndarray:
        return self.wealth / self.wealth.mean()


@dataclass(frozen=True)
class WealthSnapshot:
    """Wealth state at one time index, raw and in units of the mean."""

    time_index: int
    wealth: np.ndarray
    normalized: np.ndarray


def init_cold(config: SimConfig, rng: np.random.Generator | None = None) -> AgentEnsemble:
    """Complete-equality start: every agent holds wealth 1."""
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    return AgentEnsemble(np.ones(config.n_agents), 0, rng)


def init_hot(config: SimConfig, rng: np.random.Generator | None = None) -> AgentEnsemble:
    """Equilibrium start: i.i.d. draws from the stationary inverse-gamma law."""
    if config.alpha <= 1.0:
        raise ConfigError("hot start requires alpha > 1 (stationary mean undefined)")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    wealth = sample_inverse_gamma(InverseGammaLaw(config.alpha), config.n_agents, rng)
    return AgentEnsemble(wealth, 0, rng)


def ensemble_from_wealth(
    config: SimConfig, wealth: np.ndarray, rng: np.random.Generator | None = None
) -> AgentEnsemble:
    """Start from an explicit wealth vector (must be positive, length N)."""
    w = np.asarray(wealth, dtype=float).copy()
    if w.shape != (config.n_agents,):
        raise ConfigError(f"wealth vector must have shape ({config.n_agents},), got {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise ConfigError("wealth entries must be positive and finite")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    return AgentEnsemble(w, 0, rng)


def step(
    ensemble: AgentEnsemble, config: SimConfig, draws: np.ndarray | None = None
) -> AgentEnsemble:
    """Advance the ensemble by one evolution step (in place).

    ``draws`` is a test-only override: an array of N growth rates r used
    verbatim in place of the generator's Normal(mu, sigma^2) draws (no
    drift bookkeeping is applied for such a step).
    """
    w = ensemble.wealth
    if draws is None:
        factors = np.exp(config.sigma * ensemble.rng.standard_normal(w.size))
        ensemble.log_scale += config.mu
    else:
        r = np.asarray(draws, dtype=float)
        if r.shape != w.shape:
            raise ConfigError(f"draw override must have shape {w.shape}, got {r.shape}")
        factors = np.exp(r)
    w *= factors
    total = float(w.sum())
    if not math.isfinite(total) or total <= 0.0:
        raise SimulationError(
            f"non-finite wealth at step {ensemble.time_index + 1}: "
            "mu/sigma/steps outside the representable range"
        )
    j = config.flow_rate
    if j > 0.0:
        w *= 1.0 - j
        w += j * total / w.size
    mean = total / w.size
    if not _RESCALE_LO < mean < _RESCALE_HI:
        w /= mean
        ensemble.log_scale += math.log(mean)
    ensemble.time_index += 1
    return ensemble


def make_snapshot(ensemble: AgentEnsemble) -> WealthSnapshot:
    """Freeze the current state into an immutable snapshot."""
    w = ensemble.wealth
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise SimulationError(f"non-positive wealth entry at step {ensemble.time_index}")
    return WealthSnapshot(ensemble.time_index, ensemble.raw_wealth(), ensemble.normalized_wealth())


def init_ensemble(config: SimConfig) -> AgentEnsemble:
    if config.start is StartMode.COLD:
        return init_cold(config)
    return init_hot(config)


def run(config: SimConfig) -> Iterator[WealthSnapshot]:
    """Evolve for ``config.steps`` steps, yielding snapshots.

    A snapshot is emitted at k = 0 and at every k divisible by
    ``snapshot_every``. The stream is bit-for-bit reproducible for a
    given config.
    """
    ensemble = init_ensemble(config)
    yield make_snapshot(ensemble)
    for k in range(1, config.steps + 1):
        step(ensemble, config)
        if k % config.snapshot_every == 0:
            yield make_snapshot(ensemble)
