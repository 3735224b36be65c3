"""Exact individual-level SIS process on a hypergraph.

Two samplers for the same continuous-time Markov chain:

* "discretized": synchronous time steps of length dt; each susceptible node
  becomes infected with probability 1 - exp(-rate*dt), each infected node
  recovers with probability 1 - exp(-delta*dt), all against the state at
  the start of the step;
* "event": exact event-driven sampling; exponential waiting time at the
  total event rate, one node flipped per event, with per-node rates
  maintained incrementally over the hyperedges touching the flipped node.

Runs within an ensemble are independent (seeds base_seed + run index) and
share the hypergraph and kernels read-only; aggregation is a deterministic
post-pass, so ensembles could be farmed out in parallel without changing
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _accel
from .errors import ValidationError
from .kernels import family_tables
from .meanfield import ModelParams

__all__ = [
    "RunConfig",
    "RunResult",
    "EnsembleSummary",
    "BACKENDS",
    "infection_rates",
    "step_discretized",
    "step_event_driven",
    "run_trajectory",
    "run_ensemble",
    "trimmed_envelope",
]

BACKENDS = ("discretized", "event")
TRIM_FRACTION = 0.05


@dataclass(frozen=True)
class RunConfig:
    """Everything one stochastic run needs, including its seed."""

    hg: object
    kernels: object  # a kernel, or a sequence matched to edge families
    params: ModelParams
    i0: float
    T: float
    dt: float = 0.05
    backend: str = "discretized"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.i0 <= 1.0:
            raise ValidationError("i0 must lie in [0, 1]")
        if not self.T > 0:
            raise ValidationError("T must be positive")
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if self.backend not in BACKENDS:
            raise ValidationError(
                f"unknown backend {self.backend!r}; expected one of {BACKENDS}"
            )


@dataclass(frozen=True)
class RunResult:
    """One run: prevalence on the output grid plus the extinction time."""

    times: np.ndarray
    prevalence: np.ndarray
    extinction_time: float  # inf if still alive at T


@dataclass(frozen=True)
class EnsembleSummary:
    """Per-time ensemble statistics over independent runs."""

    times: np.ndarray
    mean: np.ndarray
    env_lo: np.ndarray
    env_hi: np.ndarray
    survival: np.ndarray
    extinction_times: np.ndarray = field(repr=False)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,mean,env_lo,env_hi,survival\n")
            for row in zip(self.times, self.mean, self.env_lo, self.env_hi, self.survival):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    def extinction_to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("run,extinction_time\n")
            for r, tau in enumerate(self.extinction_times):
                cell = "" if math.isinf(tau) else repr(float(tau))
                fh.write(f"{r},{cell}\n")


def infection_rates(hg, kernels, beta: float, X) -> np.ndarray:
    """Per-node infection rate beta * sum over edges of f(infected members).

    Computed for every node; only susceptible nodes ever act on it.
    """
    x = np.asarray(X, dtype=np.float64)
    ftables, findex = family_tables(hg, kernels)
    vals = _accel.infected_values(
        x, hg.members_flat, hg.edge_offsets, hg.edge_sizes, ftables, findex
    )
    return beta * _accel.accumulate_to_members(
        vals, hg.members_flat, hg.edge_sizes, hg.n
    )


def step_discretized(X, rates, delta: float, dt: float, rng) -> np.ndarray:
    """One synchronous step; all flips evaluated against the pre-step state."""
    x = np.asarray(X, dtype=np.int8)
    u_infect = rng.random(x.size)
    u_recover = rng.random(x.size)
    p_infect = -np.expm1(-np.asarray(rates, dtype=np.float64) * dt)
    p_recover = -math.expm1(-delta * dt)
    out = x.copy()
    out[(x == 0) & (u_infect < p_infect)] = 1
    out[(x == 1) & (u_recover < p_recover)] = 0
    return out


class _EventState:
    """Per-node rates with incremental updates around each flipped node."""

    def __init__(self, hg, kernels, params, X):
        self.beta = params.beta
        self.delta = params.delta
        self.members = hg.members_flat
        self.offsets = hg.edge_offsets
        self.ftables, self.findex = family_tables(hg, kernels)
        self.node_edge_ids, self.node_edge_offsets = hg.node_edges
        self.x = np.asarray(X, dtype=np.int8).copy()
        xf = self.x.astype(np.float64)
        if hg.num_edges:
            self.counts = np.add.reduceat(xf[self.members], self.offsets[:-1]).astype(
                np.int64
            )
        else:
            self.counts = np.zeros(0, dtype=np.int64)
        self.vals = self.ftables[self.findex, self.counts]
        self.load = _accel.accumulate_to_members(
            self.vals, self.members, hg.edge_sizes, hg.n
        )

    def node_rates(self) -> np.ndarray:
        return np.where(self.x == 1, self.delta, self.beta * self.load)

    def flip(self, i: int) -> None:
        now_infected = self.x[i] == 0
        self.x[i] = 1 if now_infected else 0
        lo, hi = self.node_edge_offsets[i], self.node_edge_offsets[i + 1]
        touched = self.node_edge_ids[lo:hi]
        if touched.size == 0:
            return
        self.counts[touched] += 1 if now_infected else -1
        new_vals = self.ftables[self.findex[touched], self.counts[touched]]
        deltas = new_vals - self.vals[touched]
        self.vals[touched] = new_vals
        for e, d in zip(touched, deltas):
            if d != 0.0:
                span = self.members[self.offsets[e] : self.offsets[e + 1]]
                self.load[span] += d

    def step(self, rng) -> float:
        """Sample and apply one event; returns the elapsed time (inf if absorbed)."""
        rates = self.node_rates()
        total = float(rates.sum())
        if total <= 0.0:
            return math.inf
        elapsed = rng.exponential(1.0 / total)
        u = rng.random() * total
        i = int(np.searchsorted(np.cumsum(rates), u, side="right"))
        i = min(i, rates.size - 1)
        self.flip(i)
        return float(elapsed)


def step_event_driven(X, hg, kernels, params, rng):
    """One exact event: exponential waiting time, one node flipped.

    Returns (new state, elapsed time).  If no event can occur (the
    disease-free state, or a frozen state with delta = 0 and no exposed
    susceptibles), elapsed is inf and the state is returned unchanged.
    """
    state = _EventState(hg, kernels, params, X)
    elapsed = state.step(rng)
    return state.x, elapsed


def _output_grid(T: float, dt: float) -> np.ndarray:
    n_full = int(T / dt + 1e-9)
    rem = T - n_full * dt
    grid = dt * np.arange(n_full + 1)
    if rem > 1e-12 * dt:
        grid = np.append(grid, T)
    return grid


def _run_discretized(cfg: RunConfig, x0: np.ndarray, rng, grid) -> RunResult:
    hg = cfg.hg
    ftables, findex = family_tables(hg, cfg.kernels)
    members, offsets, sizes = hg.members_flat, hg.edge_offsets, hg.edge_sizes
    beta, delta = cfg.params.beta, cfg.params.delta

    x = x0
    prevalence = np.empty(grid.size)
    prevalence[0] = x.mean()
    extinction = 0.0 if x.sum() == 0 else math.inf
    for k in range(1, grid.size):
        if x.sum() == 0:
            prevalence[k:] = 0.0
            break
        vals = _accel.infected_values(
            x.astype(np.float64), members, offsets, sizes, ftables, findex
        )
        rates = beta * _accel.accumulate_to_members(vals, members, sizes, hg.n)
        x = step_discretized(x, rates, delta, grid[k] - grid[k - 1], rng)
        prevalence[k] = x.mean()
        if math.isinf(extinction) and x.sum() == 0:
            extinction = float(grid[k])
    return RunResult(grid, prevalence, extinction)


def _run_event(cfg: RunConfig, x0: np.ndarray, rng, grid) -> RunResult:
    state = _EventState(cfg.hg, cfg.kernels, cfg.params, x0)
    prevalence = np.empty(grid.size)
    current = x0.mean()
    prevalence[0] = current
    extinction = 0.0 if x0.sum() == 0 else math.inf
    t = 0.0
    g = 1
    while g < grid.size:
        elapsed = state.step(rng)
        if math.isinf(elapsed):
            prevalence[g:] = current
            break
        t += elapsed
        while g < grid.size and grid[g] < t:
            prevalence[g] = current
            g += 1
        current = state.x.mean()
        if math.isinf(extinction) and state.x.sum() == 0:
            extinction = t
    return RunResult(grid, prevalence, extinction)


def run_trajectory(cfg: RunConfig) -> RunResult:
    """One run: Bernoulli(i0) initial state, chosen backend, prevalence grid.

    The extinction time is the first time the infected count reaches zero
    (exact event time for the event backend, grid time for the discretized
    one); inf if the run is still alive at T.
    """
    rng = np.random.default_rng(cfg.seed)
    x0 = (rng.random(cfg.hg.n) < cfg.i0).astype(np.int8)
    grid = _output_grid(cfg.T, cfg.dt)
    if cfg.backend == "discretized":
        return _run_discretized(cfg, x0, rng, grid)
    return _run_event(cfg, x0, rng, grid)


def trimmed_envelope(values: np.ndarray, trim_fraction: float = TRIM_FRACTION):
    """Envelope after dropping ceil(trim_fraction*R) values from each end.

    `values` has runs along axis 0.  The trim is capped so at least one
    value always remains (a single run is its own envelope).
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
        squeeze = True
    else:
        squeeze = False
    runs = arr.shape[0]
    drop = min(math.ceil(trim_fraction * runs), (runs - 1) // 2)
    ordered = np.sort(arr, axis=0)
    lo, hi = ordered[drop], ordered[runs - 1 - drop]
    if squeeze:
        return float(lo[0]), float(hi[0])
    return lo, hi


def run_ensemble(cfg: RunConfig, runs: int, base_seed: int) -> EnsembleSummary:
    """Independent runs seeded base_seed..base_seed+runs-1, aggregated.

    The mean curve averages all runs; the envelope drops the extreme 5%
    of values above and below at each time; survival is the fraction of
    runs with at least one infected node.
    """
    if not (isinstance(runs, (int, np.integer)) and runs >= 1):
        raise ValidationError("runs must be an integer >= 1")
    results = [
        run_trajectory(replace(cfg, seed=int(base_seed) + r)) for r in range(runs)
    ]
    matrix = np.vstack([res.prevalence for res in results])
    env_lo, env_hi = trimmed_envelope(matrix)
    return EnsembleSummary(
        times=results[0].times,
        mean=matrix.mean(axis=0),
        env_lo=env_lo,
        env_hi=env_hi,
        survival=(matrix > 0).mean(axis=0),
        extinction_times=np.array([res.extinction_time for res in results]),
    )
