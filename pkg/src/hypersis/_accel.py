"""Hot per-hyperedge kernels with a jitted and a pure-numpy implementation.

The two expensive inner loops of the package live here:

* `edge_loads` evaluates, for every hyperedge, the kernel folded over the
  Poisson-binomial distribution of its members (the integer-argument
  mean-field rate), via the DFT closed form in its raw algebraic form.
* `infected_values` evaluates, for every hyperedge, the kernel at the
  integer count of infected members (the stochastic-process rate).

Both have a numba @njit version and a vectorized numpy version.  The env
variable HYPERSIS_BACKEND selects between them: "numba", "numpy", or
"auto" (default: numba when importable).  `benchmarks/bench_backends.py`
compares the two directly.

Note: edge_loads evaluates the raw closed form without the clamp/renormalize
cleanup of `poisson_binomial.pmf_dft`, so it stays a polynomial in the state
and finite-difference probes just outside [0,1] remain well defined.  For
states inside [0,1] the two agree to round-off.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "HAS_NUMBA",
    "edge_loads",
    "edge_loads_numpy",
    "edge_loads_numba",
    "infected_values",
    "infected_values_numpy",
    "infected_values_numba",
    "accumulate_to_members",
]

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAS_NUMBA = False


def _select_backend() -> str:
    requested = os.environ.get("HYPERSIS_BACKEND", "auto").strip().lower() or "auto"
    if requested not in ("auto", "numba", "numpy"):
        raise RuntimeError(
            f"HYPERSIS_BACKEND={requested!r}: expected 'numba', 'numpy', or 'auto'"
        )
    if requested == "numpy":
        return "numpy"
    if not HAS_NUMBA:
        if requested == "numba":
            raise RuntimeError("HYPERSIS_BACKEND=numba but numba is not importable")
        return "numpy"
    return "numba"


BACKEND = _select_backend()


# -- pure numpy implementations, vectorized over edges of equal size --------


def edge_loads_numpy(p, members, offsets, sizes, ftables, findex):
    m = sizes.size
    loads = np.empty(m, dtype=np.float64)
    if m == 0:
        return loads
    for k in np.unique(sizes):
        k = int(k)
        idx = np.nonzero(sizes == k)[0]
        cols = offsets[idx][:, None] + np.arange(k)[None, :]
        probs = p[members[cols]]  # (edges, k)
        t = np.arange(k + 1)
        omega_t = np.exp(2j * np.pi * t / (k + 1))
        transform = np.prod(
            1.0 + probs[:, :, None] * (omega_t[None, None, :] - 1.0), axis=1
        )
        inverse = np.exp(-2j * np.pi * np.outer(t, t) / (k + 1)) / (k + 1)
        pmf = (transform @ inverse).real  # (edges, k+1), raw
        tables = ftables[findex[idx]]
        loads[idx] = np.einsum("el,el->e", pmf[:, 1:], tables[:, 1 : k + 1])
    return loads


def infected_values_numpy(x, members, offsets, sizes, ftables, findex):
    if sizes.size == 0:
        return np.empty(0, dtype=np.float64)
    counts = np.add.reduceat(x[members], offsets[:-1]).astype(np.int64)
    return ftables[findex, counts]


# -- numba implementations ---------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _edge_loads_jit(p, members, offsets, ftables, findex):
        m = offsets.size - 1
        loads = np.zeros(m, dtype=np.float64)
        kmax = 0
        for e in range(m):
            k = offsets[e + 1] - offsets[e]
            if k > kmax:
                kmax = k
        cos_tab = np.empty(kmax + 1, dtype=np.float64)
        sin_tab = np.empty(kmax + 1, dtype=np.float64)
        for e in range(m):
            start = offsets[e]
            k = offsets[e + 1] - start
            kp1 = k + 1
            row = findex[e]
            for i in range(kp1):
                ang = 2.0 * np.pi * i / kp1
                cos_tab[i] = np.cos(ang)
                sin_tab[i] = np.sin(ang)
            acc = 0.0
            for t in range(kp1):
                g_re = 1.0
                g_im = 0.0
                ct = cos_tab[t]
                st = sin_tab[t]
                for j in range(start, start + k):
                    pj = p[members[j]]
                    a_re = 1.0 + pj * (ct - 1.0)
                    a_im = pj * st
                    tmp = g_re * a_re - g_im * a_im
                    g_im = g_re * a_im + g_im * a_re
                    g_re = tmp
                for l in range(1, kp1):
                    fl = ftables[row, l]
                    if fl != 0.0:
                        idx = (t * l) % kp1
                        acc += fl * (g_re * cos_tab[idx] + g_im * sin_tab[idx])
            loads[e] = acc / kp1
        return loads

    @njit(cache=True)
    def _infected_values_jit(x, members, offsets, ftables, findex):
        m = offsets.size - 1
        vals = np.empty(m, dtype=np.float64)
        for e in range(m):
            c = 0
            for j in range(offsets[e], offsets[e + 1]):
                if x[members[j]] != 0.0:
                    c += 1
            vals[e] = ftables[findex[e], c]
        return vals

    def edge_loads_numba(p, members, offsets, sizes, ftables, findex):
        return _edge_loads_jit(p, members, offsets, ftables, findex)

    def infected_values_numba(x, members, offsets, sizes, ftables, findex):
        return _infected_values_jit(x, members, offsets, ftables, findex)

else:  # pragma: no cover
    edge_loads_numba = None
    infected_values_numba = None


if BACKEND == "numba":
    edge_loads = edge_loads_numba
    infected_values = infected_values_numba
else:
    edge_loads = edge_loads_numpy
    infected_values = infected_values_numpy


def accumulate_to_members(values, members, sizes, n):
    """Add each edge's value to every member node; deterministic edge order."""
    if values.size == 0:
        return np.zeros(n, dtype=np.float64)
    return np.bincount(members, weights=np.repeat(values, sizes), minlength=n)
