"""Deterministic mean-field models and their explicit Euler integrator.

Three right-hand sides over per-node infection probabilities P:

* integer-argument model: rate of node i is beta * sum over its hyperedges
  of the kernel folded against the Poisson-binomial distribution of the
  edge's members (node i included), times (1 - p_i), minus delta * p_i;
* expectation-commuted model: the kernel is applied to the *sum* of member
  probabilities instead of being folded over the distribution;
* linear upper bound: beta * c * (W P)_i (1 - p_i) - delta * p_i with W the
  co-membership matrix and c the kernel's maximal secant slope.

rhs evaluation follows the algebraic closed form, so it remains defined for
states slightly outside [0,1]; the integrator clamps after every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import NumericalError, UnsupportedModelError, ValidationError
from .kernels import InfectionKernel, family_tables

__all__ = [
    "ModelParams",
    "Trajectory",
    "VARIANTS",
    "make_rhs",
    "rhs_integer_argument",
    "rhs_expectation_commuted",
    "rhs_multitype",
    "rhs_linear_bound",
    "integrate",
    "jacobian_at_zero",
]

VARIANTS = ("mf_integer", "mf_commuted", "mf_linear_bound")


@dataclass(frozen=True)
class ModelParams:
    """Infection strength beta and recovery rate delta."""

    beta: float
    delta: float

    def __post_init__(self):
        for name in ("beta", "delta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ValidationError(f"{name} must be a finite nonnegative real")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "delta", float(self.delta))


@dataclass(frozen=True)
class Trajectory:
    """Strided snapshots of an integrated probability state."""

    times: np.ndarray  # (snapshots,)
    states: np.ndarray  # (snapshots, n)

    @property
    def prevalence(self) -> np.ndarray:
        """Population average of the state at each snapshot."""
        return self.states.mean(axis=1)

    def to_csv(self, path, aggregate: bool = True) -> None:
        """Write `t,prevalence` (default) or the full `t,p_0,...,p_{n-1}` table."""
        with open(path, "w", encoding="utf-8") as fh:
            if aggregate:
                fh.write("t,prevalence\n")
                for t, prev in zip(self.times, self.prevalence):
                    fh.write(f"{float(t)!r},{float(prev)!r}\n")
            else:
                n = self.states.shape[1]
                fh.write("t," + ",".join(f"p_{i}" for i in range(n)) + "\n")
                for t, row in zip(self.times, self.states):
                    fh.write(
                        f"{float(t)!r}," + ",".join(repr(float(v)) for v in row) + "\n"
                    )


def _as_state(P, n=None) -> np.ndarray:
    arr = np.asarray(P, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError("state P must be a 1-d vector")
    if n is not None and arr.size != n:
        raise ValidationError(f"state has {arr.size} entries, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("state P must be finite")
    return arr


def make_rhs(hg, kernels, params: ModelParams, variant: str):
    """Bind a model variant to a hypergraph and kernel(s); returns P -> dP/dt.

    `kernels` is a single kernel, or a sequence matched to the hypergraph's
    families for the multi-type integer-argument model.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; expected {VARIANTS}")
    n = hg.n
    members, offsets, sizes = hg.members_flat, hg.edge_offsets, hg.edge_sizes
    beta, delta = params.beta, params.delta

    if variant == "mf_integer":
        ftables, findex = family_tables(hg, kernels)

        def rhs(P):
            state = _as_state(P, n)
            loads = _accel.edge_loads(state, members, offsets, sizes, ftables, findex)
            pressure = _accel.accumulate_to_members(loads, members, sizes, n)
            return beta * pressure * (1.0 - state) - delta * state

        return rhs

    if variant == "mf_commuted":
        if isinstance(kernels, InfectionKernel):
            kernel_list = [kernels]
            findex = np.zeros(hg.num_edges, dtype=np.int64)
        else:
            kernel_list = list(kernels)
            if hg.family_of is None:
                raise ValidationError(
                    "a kernel list requires a hypergraph with family assignments"
                )
            if len(kernel_list) != hg.num_families:
                raise ValidationError(
                    f"got {len(kernel_list)} kernels for {hg.num_families} families"
                )
            findex = np.asarray(hg.family_of, dtype=np.int64) - 1
        for kern in kernel_list:
            if not kern.supports_real:
                raise UnsupportedModelError(
                    f"kernel {kern.kind!r} has no continuous extension; "
                    "the expectation-commuted model cannot use it"
                )
        masks = [findex == s for s in range(len(kernel_list))]

        def rhs(P):
            state = _as_state(P, n)
            if sizes.size == 0:
                return -delta * state
            sums = np.add.reduceat(state[members], offsets[:-1])
            vals = np.empty(sums.size, dtype=np.float64)
            for kern, mask in zip(kernel_list, masks):
                if mask.any():
                    vals[mask] = kern.eval_real(sums[mask])
            pressure = _accel.accumulate_to_members(vals, members, sizes, n)
            return beta * pressure * (1.0 - state) - delta * state

        return rhs

    # mf_linear_bound
    if not isinstance(kernels, InfectionKernel):
        raise UnsupportedModelError(
            "the linear upper-bound model is defined for a single kernel"
        )
    coeff = kernels.max_secant_slope(max(hg.max_size, 1))
    W = hg.comembership()

    def rhs(P):
        state = _as_state(P, n)
        return rhs_linear_bound(W, coeff, params, state)

    return rhs


def rhs_integer_argument(hg, kernel, params: ModelParams, P) -> np.ndarray:
    """Integer-argument mean-field right-hand side at state P."""
    return make_rhs(hg, kernel, params, "mf_integer")(P)


def rhs_multitype(hg, kernels, params: ModelParams, P) -> np.ndarray:
    """Integer-argument right-hand side with one kernel per edge family."""
    if isinstance(kernels, InfectionKernel):
        raise ValidationError("rhs_multitype expects a sequence of kernels")
    return make_rhs(hg, kernels, params, "mf_integer")(P)


def rhs_expectation_commuted(hg, kernel, params: ModelParams, P) -> np.ndarray:
    """Expectation-commuted right-hand side at state P."""
    return make_rhs(hg, kernel, params, "mf_commuted")(P)


def rhs_linear_bound(W, coeff: float, params: ModelParams, P) -> np.ndarray:
    """Linear upper-bound right-hand side: beta*c*(W P)(1-P) - delta*P."""
    state = _as_state(P)
    return params.beta * coeff * (W @ state) * (1.0 - state) - params.delta * state


def integrate(rhs, P0, dt: float, T: float, stride: int = 1) -> Trajectory:
    """Explicit Euler with clamping of every component into [0, 1].

    Steps with fixed dt (plus one shortened final step if T is not a
    multiple of dt); records the initial state, every `stride`-th step, and
    the final state.  Raises NumericalError if the rhs turns non-finite.
    """
    if not (dt > 0 and T > 0):
        raise ValidationError("dt and T must be positive")
    if dt > T:
        raise ValidationError("dt must not exceed T")
    if not (isinstance(stride, (int, np.integer)) and stride >= 1):
        raise ValidationError("stride must be an integer >= 1")
    state = np.clip(_as_state(P0), 0.0, 1.0)

    n_full = int(T / dt + 1e-9)
    rem = T - n_full * dt
    steps = [dt] * n_full + ([rem] if rem > 1e-12 * dt else [])

    times = [0.0]
    snaps = [state.copy()]
    t = 0.0
    for k, h in enumerate(steps, start=1):
        delta_p = rhs(state)
        if not np.all(np.isfinite(delta_p)):
            raise NumericalError(f"non-finite derivative at step {k}, t={t!r}")
        state = np.clip(state + h * delta_p, 0.0, 1.0)
        t += h
        if k % stride == 0 or k == len(steps):
            times.append(t)
            snaps.append(state.copy())
    return Trajectory(np.asarray(times), np.vstack(snaps))


def jacobian_at_zero(hg, kernel, params: ModelParams):
    """Derivative of the integer-argument rhs at the disease-free state.

    Closed form: beta * f(1) * W - delta * I, with W the co-membership
    matrix.  Returned dense or sparse to match the matrix representation.
    """
    W = hg.comembership()
    f1 = kernel.value_at_one
    if isinstance(W, np.ndarray):
        return params.beta * f1 * W.astype(np.float64) - params.delta * np.eye(hg.n)
    import scipy.sparse as sp

    return (params.beta * f1 * W).astype(np.float64) - params.delta * sp.identity(
        hg.n, format="csr"
    )
