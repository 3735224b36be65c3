"""Poisson-binomial distribution over a hyperedge's members.

Given independent per-member infection probabilities p_j, `pmf_dft` returns
the distribution of the number of infected members through the discrete
Fourier closed form, and `pmf_enum` recomputes it by explicit subset
enumeration as an independent cross-check.  `f_load` folds a kernel over
the distribution: sum over l >= 1 of f(l) * P(exactly l infected).
"""

from __future__ import annotations

import functools

import numpy as np

from .errors import NumericalError, ValidationError

__all__ = ["pmf_dft", "pmf_enum", "f_load", "PMF_FLOOR", "ENUM_MAX"]

# DFT round-off beyond this magnitude indicates a bug, not noise
PMF_FLOOR = 1e-9
# subset enumeration is 2^k; refuse beyond this
ENUM_MAX = 20


def _clean_probs(p) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError("member probabilities must be a nonempty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("member probabilities must be finite")
    return np.clip(arr, 0.0, 1.0)


def pmf_dft(p) -> np.ndarray:
    """Distribution of the infected-member count via the DFT closed form.

    Evaluates, for l = 0..k,
        (1/(k+1)) * sum_t w^(-t l) * prod_j (1 - p_j + p_j w^t),
    with w = exp(2 pi i / (k+1)), then discards the imaginary residue,
    clamps entries into [0, 1], and renormalizes to unit sum.  Entries
    outside [-1e-9, 1 + 1e-9] before cleanup raise NumericalError.
    """
    arr = _clean_probs(p)
    k = arr.size
    t = np.arange(k + 1)
    omega_t = np.exp(2j * np.pi * t / (k + 1))
    factors = 1.0 + arr[:, None] * (omega_t[None, :] - 1.0)
    transform = np.prod(factors, axis=0)
    inverse = np.exp(-2j * np.pi * np.outer(t, t) / (k + 1))
    raw = (transform @ inverse).real / (k + 1)

    if raw.min() < -PMF_FLOOR or raw.max() > 1.0 + PMF_FLOOR:
        bad = int(np.argmax(np.abs(raw - np.clip(raw, 0.0, 1.0))))
        raise NumericalError(
            f"DFT pmf entry {bad} = {raw[bad]!r} outside [-{PMF_FLOOR}, 1+{PMF_FLOOR}]"
        )
    cleaned = np.clip(raw, 0.0, 1.0)
    return cleaned / cleaned.sum()


@functools.lru_cache(maxsize=8)
def _subset_table(k: int):
    codes = np.arange(1 << k, dtype=np.uint32)
    masks = ((codes[:, None] >> np.arange(k, dtype=np.uint32)) & 1).astype(bool)
    return masks, masks.sum(axis=1).astype(np.int64)


def pmf_enum(p) -> np.ndarray:
    """Exact pmf by summing over all subsets of members; the oracle for pmf_dft."""
    arr = _clean_probs(p)
    k = arr.size
    if k > ENUM_MAX:
        raise ValidationError(
            f"subset enumeration limited to {ENUM_MAX} members, got {k}"
        )
    masks, counts = _subset_table(k)
    products = np.where(masks, arr, 1.0 - arr).prod(axis=1)
    return np.bincount(counts, weights=products, minlength=k + 1)


def f_load(kernel, p) -> float:
    """Kernel folded over the infected-count distribution: sum f(l) pmf(l), l >= 1."""
    pmf = pmf_dft(p)
    table = kernel.table(pmf.size - 1)
    return float(pmf[1:] @ table[1:])
