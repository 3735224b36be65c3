"""Largest eigenvalues and machine-checkable stability conditions.

Every decay condition in the package has the shape beta * c * lambda(W) /
delta < 1 for a coefficient c set by the kernel class and a co-membership
matrix W (kernel-weighted across families in the multi-type case).
`evaluate_conditions` reports them side by side rather than reducing to a
single verdict, since comparing the models is the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NumericalError, ValidationError
from .kernels import InfectionKernel
from .meanfield import ModelParams

__all__ = [
    "lambda_max",
    "StabilityCondition",
    "ThresholdReport",
    "evaluate_conditions",
    "survival_bound",
    "extinction_time_bound",
]

_RESTART_SEED = 0x5EED


def _check_symmetric(M) -> None:
    if M.shape[0] != M.shape[1]:
        raise ValidationError(f"matrix must be square, got {M.shape}")
    if sp.issparse(M):
        diff = (M - M.T).tocoo()
        scale = max(1.0, abs(M).max() if M.nnz else 0.0)
        if diff.nnz and np.abs(diff.data).max() > 1e-12 * scale:
            raise ValidationError("matrix is not symmetric")
    else:
        arr = np.asarray(M)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("matrix entries must be finite")
        scale = max(1.0, np.abs(arr).max(initial=0.0))
        if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12 * scale):
            raise ValidationError("matrix is not symmetric")


def lambda_max(M, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of a symmetric nonnegative matrix by power iteration.

    Starts from the all-ones vector and stops when the relative change of
    the Rayleigh quotient drops below tol.  On stagnation it restarts once
    from a seeded random vector; a second failure raises NumericalError
    carrying the last estimate.
    """
    if not sp.issparse(M):
        M = np.asarray(M, dtype=np.float64)
    _check_symmetric(M)
    n = M.shape[0]
    if sp.issparse(M):
        if M.nnz == 0:
            return 0.0
    elif not M.any():
        return 0.0

    estimate = math.nan
    v = np.full(n, 1.0 / math.sqrt(n))
    for attempt in range(2):
        previous = math.inf
        for _ in range(max_iter):
            w = M @ v
            estimate = float(v @ w)
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                break  # start vector annihilated; fall through to restart
            v = w / norm
            if abs(estimate - previous) <= tol * max(1.0, abs(estimate)):
                return estimate
            previous = estimate
        if attempt == 0:
            rng = np.random.default_rng(_RESTART_SEED)
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
    raise NumericalError(
        f"power iteration did not converge in {max_iter} iterations; "
        f"last estimate {estimate!r}"
    )


@dataclass(frozen=True)
class StabilityCondition:
    """One spectral condition: satisfied iff value = beta*c*lambda/delta < 1."""

    name: str
    coefficient: float | None
    value: float | None
    satisfied: bool | None
    critical_beta: float | None
    evaluable: bool = True
    reason: str | None = None

    def to_dict(self) -> dict:
        def _num(v):
            return None if v is None or not math.isfinite(v) else v

        out = {
            "name": self.name,
            "coefficient": _num(self.coefficient),
            "value": _num(self.value),
            "satisfied": self.satisfied,
            "critical_beta": _num(self.critical_beta),
        }
        if not self.evaluable:
            out["evaluable"] = False
            out["reason"] = self.reason
        return out


@dataclass(frozen=True)
class ThresholdReport:
    """lambda(W) plus every stability condition evaluated side by side."""

    lambda_w: float
    conditions: tuple[StabilityCondition, ...]

    def get(self, name: str) -> StabilityCondition:
        for cond in self.conditions:
            if cond.name == name:
                return cond
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "lambda_W": self.lambda_w,
            "conditions": [c.to_dict() for c in self.conditions],
        }


def _condition(name, coefficient, lam, params) -> StabilityCondition:
    value = params.beta * coefficient * lam / params.delta
    scale = coefficient * lam
    critical = params.delta / scale if scale > 0 else math.inf
    return StabilityCondition(name, coefficient, value, bool(value < 1.0), critical)


def _not_evaluable(name, reason) -> StabilityCondition:
    return StabilityCondition(name, None, None, None, None, False, reason)


def _single_type_conditions(kernel, max_size, lam, params):
    conditions = []
    try:
        slope = kernel.max_secant_slope(max(max_size, 1))
        conditions.append(_condition("exact_mean_decay", slope, lam, params))
    except ValidationError as exc:
        conditions.append(_not_evaluable("exact_mean_decay", str(exc)))

    f1 = kernel.value_at_one
    conditions.append(_condition("mf_integer_local", f1, lam, params))

    if kernel.concave:
        kernel.verify_concave(max(max_size, 1))
        conditions.append(_condition("mf_integer_global", f1, lam, params))
    elif kernel.kind == "threshold":
        conditions.append(
            _condition("mf_integer_global", kernel.c2 / kernel.c1, lam, params)
        )
    else:
        conditions.append(
            _not_evaluable(
                "mf_integer_global",
                "no global-stability condition for this kernel class",
            )
        )

    try:
        conditions.append(
            _condition("mf_commuted_global", kernel.slope_at_zero, lam, params)
        )
    except ValidationError as exc:
        conditions.append(_not_evaluable("mf_commuted_global", str(exc)))
    return conditions


def _weighted_lambda(mats, weights) -> float:
    total = None
    for w, mat in zip(weights, mats):
        term = w * (mat if sp.issparse(mat) else np.asarray(mat, dtype=np.float64))
        total = term if total is None else total + term
    return lambda_max(total)


def _multitype_conditions(kernels, hg, params):
    mats = hg.family_comembership()
    sizes = hg.edge_sizes
    findex = np.asarray(hg.family_of, dtype=np.int64) - 1

    lam_local = _weighted_lambda(mats, [k.value_at_one for k in kernels])
    conditions = [_condition("multitype_local", 1.0, lam_local, params)]

    if all(k.concave for k in kernels):
        for s, k in enumerate(kernels):
            in_family = findex == s
            if in_family.any():
                k.verify_concave(int(sizes[in_family].max()))
        conditions.append(_condition("multitype_global", 1.0, lam_local, params))
    elif all(k.kind == "threshold" for k in kernels):
        lam_ratio = _weighted_lambda(mats, [k.c2 / k.c1 for k in kernels])
        conditions.append(_condition("multitype_global", 1.0, lam_ratio, params))
    else:
        conditions.append(
            _not_evaluable(
                "multitype_global",
                "families mix kernel classes; no common global condition",
            )
        )
    return conditions


def evaluate_conditions(hg, kernels, params: ModelParams) -> ThresholdReport:
    """Evaluate every applicable stability condition for this instance.

    A single kernel produces the single-type report (exact-process mean
    decay, integer-argument local and global, expectation-commuted global);
    a kernel sequence produces the multi-type report over the families'
    kernel-weighted co-membership matrices.  Conditions whose metadata is
    missing are marked not evaluable instead of failing.
    """
    lam = lambda_max(hg.comembership())
    if isinstance(kernels, InfectionKernel):
        conditions = _single_type_conditions(kernels, hg.max_size, lam, params)
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
        conditions = _multitype_conditions(kernel_list, hg, params)
    return ThresholdReport(lam, tuple(conditions))


def survival_bound(n, i0, beta, f1, lambda_w, delta, t):
    """Upper bound on the probability any node is infected at time t:
    n * i0 * exp((beta*f1*lambda_w - delta) * t).  Accepts array t."""
    return n * i0 * np.exp((beta * f1 * lambda_w - delta) * np.asarray(t, dtype=float))


def extinction_time_bound(n, beta, f1, lambda_w, delta) -> float:
    """Upper bound on the mean extinction time, (1 + log n) / decay margin.

    Only defined in the subcritical regime delta > beta*f1*lambda_w.
    """
    margin = delta - beta * f1 * lambda_w
    if margin <= 0:
        raise ValidationError(
            "extinction-time bound requires the subcritical condition "
            f"delta > beta*f1*lambda_w (margin {margin!r})"
        )
    return (1.0 + math.log(n)) / margin
