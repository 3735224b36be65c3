"""Hypergraphs with multiset hyperedges, random generation, and co-membership.

A hypergraph holds `n` nodes (ids 0..n-1) and an ordered multiset of
hyperedges, each a set of at least two distinct nodes.  Edges may carry an
optional family tag (1..S) for the multi-type model.  Instances are
immutable after construction and safe for concurrent shared reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError

__all__ = ["Hypergraph", "SizeSpec", "generate_random", "partition_by_size"]

# co-membership stays dense up to this node count
_DENSE_LIMIT = 1000


class Hypergraph:
    """Validated hypergraph with canonical (sorted) edge storage.

    Duplicate hyperedges are permitted and each copy counts separately in
    the co-membership matrix.
    """

    def __init__(self, n: int, edges, family_of=None):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValidationError("node count n must be an integer >= 1")
        self.n = int(n)

        canon = []
        for j, edge in enumerate(edges):
            ids = [int(v) for v in edge]
            if len(ids) < 2:
                raise ValidationError(f"edge {j}: size {len(ids)} < 2")
            if len(set(ids)) != len(ids):
                raise ValidationError(f"edge {j}: repeated node id")
            for v in ids:
                if not 0 <= v < self.n:
                    raise ValidationError(
                        f"edge {j}: node id {v} out of range [0, {self.n})"
                    )
            canon.append(tuple(sorted(ids)))
        self.edges: tuple[tuple[int, ...], ...] = tuple(canon)

        self.family_of: tuple[int, ...] | None = None
        if family_of is not None:
            m = len(self.edges)
            if isinstance(family_of, dict):
                missing = [j for j in range(m) if j not in family_of]
                if missing:
                    raise ValidationError(
                        f"edge {missing[0]}: no family assignment"
                    )
                fams = [family_of[j] for j in range(m)]
            else:
                fams = list(family_of)
                if len(fams) != m:
                    raise ValidationError(
                        f"family list has {len(fams)} entries for {m} edges"
                    )
            for j, s in enumerate(fams):
                if not isinstance(s, (int, np.integer)) or s < 1:
                    raise ValidationError(
                        f"edge {j}: family id {s!r} must be an integer >= 1"
                    )
            self.family_of = tuple(int(s) for s in fams)

    # -- basic shape -------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def max_size(self) -> int:
        """Largest hyperedge size (0 for an edgeless hypergraph)."""
        return max((len(e) for e in self.edges), default=0)

    @property
    def num_families(self) -> int:
        return 0 if self.family_of is None else max(self.family_of)

    def __eq__(self, other):
        return (
            isinstance(other, Hypergraph)
            and self.n == other.n
            and self.edges == other.edges
            and self.family_of == other.family_of
        )

    def __repr__(self):
        fam = f", families={self.num_families}" if self.family_of else ""
        return f"Hypergraph(n={self.n}, edges={self.num_edges}{fam})"

    # -- flat layout shared by the numeric kernels --------------------------

    @cached_property
    def edge_sizes(self) -> np.ndarray:
        sizes = np.array([len(e) for e in self.edges], dtype=np.int64)
        sizes.flags.writeable = False
        return sizes

    @cached_property
    def members_flat(self) -> np.ndarray:
        """All edge members concatenated, in edge order."""
        flat = np.fromiter(
            (v for e in self.edges for v in e),
            dtype=np.int64,
            count=int(self.edge_sizes.sum()) if self.edges else 0,
        )
        flat.flags.writeable = False
        return flat

    @cached_property
    def edge_offsets(self) -> np.ndarray:
        """CSR-style offsets into members_flat, length num_edges + 1."""
        off = np.zeros(self.num_edges + 1, dtype=np.int64)
        np.cumsum(self.edge_sizes, out=off[1:])
        off.flags.writeable = False
        return off

    @cached_property
    def node_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(edge_ids, offsets): edges containing each node, CSR by node id."""
        edge_ids = np.repeat(np.arange(self.num_edges, dtype=np.int64), self.edge_sizes)
        order = np.argsort(self.members_flat, kind="stable")
        by_node = edge_ids[order]
        counts = np.bincount(self.members_flat, minlength=self.n)
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        by_node.flags.writeable = False
        offsets.flags.writeable = False
        return by_node, offsets

    # -- co-membership -------------------------------------------------------

    def _incidence(self, edge_mask=None):
        m = self.num_edges
        if edge_mask is None:
            rows, sizes = self.members_flat, self.edge_sizes
            cols = np.repeat(np.arange(m, dtype=np.int64), sizes)
        else:
            keep = np.repeat(edge_mask, self.edge_sizes)
            rows = self.members_flat[keep]
            cols = np.repeat(np.arange(m, dtype=np.int64), self.edge_sizes)[keep]
        data = np.ones(rows.size, dtype=np.int64)
        return sp.csr_array((data, (rows, cols)), shape=(self.n, m), dtype=np.int64)

    def comembership(self):
        """Symmetric matrix counting hyperedges containing each node pair.

        The diagonal entry counts hyperedges containing the node itself.
        Dense int64 for small node counts, sparse CSR beyond.
        """
        inc = self._incidence()
        w = inc @ inc.T
        if self.n <= _DENSE_LIMIT:
            return np.asarray(w.todense(), dtype=np.int64)
        return w.tocsr()

    def family_comembership(self):
        """Per-family co-membership matrices; they sum to comembership()."""
        if self.family_of is None:
            raise ValidationError("hypergraph carries no family assignments")
        fams = np.asarray(self.family_of, dtype=np.int64)
        out = []
        for s in range(1, self.num_families + 1):
            inc = self._incidence(edge_mask=(fams == s))
            w = inc @ inc.T
            out.append(
                np.asarray(w.todense(), dtype=np.int64)
                if self.n <= _DENSE_LIMIT
                else w.tocsr()
            )
        return out

    # -- serialization -------------------------------------------------------

    def save(self, path) -> None:
        """Write the JSON form; identical hypergraphs produce identical bytes."""
        obj = {"n": self.n, "edges": [list(e) for e in self.edges]}
        if self.family_of is not None:
            obj["families"] = list(self.family_of)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Hypergraph":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}"
            ) from exc
        if not isinstance(obj, dict):
            raise ValidationError(f"{path}: expected a JSON object at top level")
        for field in ("n", "edges"):
            if field not in obj:
                raise ValidationError(f"{path}: missing field {field!r}")
        if not isinstance(obj["edges"], list):
            raise ValidationError(f"{path}: field 'edges' must be a list")
        return cls(obj["n"], obj["edges"], obj.get("families"))


@dataclass(frozen=True)
class SizeSpec:
    """Recipe for random generation: (size, count) pairs plus the seed."""

    sizes: tuple[tuple[int, int], ...]
    seed: int

    def __post_init__(self):
        pairs = tuple((int(k), int(c)) for k, c in self.sizes)
        object.__setattr__(self, "sizes", pairs)
        for k, c in pairs:
            if k < 2:
                raise ValidationError(f"hyperedge size {k} < 2")
            if c < 0:
                raise ValidationError(f"negative count {c} for size {k}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def total_edges(self) -> int:
        return sum(c for _, c in self.sizes)


def generate_random(n: int, spec: SizeSpec) -> Hypergraph:
    """Draw each hyperedge as `size` distinct nodes chosen uniformly.

    Edges are generated independently, so duplicates can occur and are
    kept.  The same (n, spec) reproduces the identical hypergraph.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError("node count n must be an integer >= 1")
    for k, _ in spec.sizes:
        if k > n:
            raise ValidationError(f"hyperedge size {k} exceeds node count {n}")
    rng = np.random.default_rng(spec.seed)
    edges = []
    for k, count in spec.sizes:
        for _ in range(count):
            edges.append(rng.choice(n, size=k, replace=False))
    return Hypergraph(n, edges)


def partition_by_size(hg: Hypergraph) -> tuple[Hypergraph, tuple[int, ...]]:
    """Assign one family per distinct hyperedge size, ascending.

    Returns the re-tagged hypergraph and the size of each family, so a
    per-size kernel list can be built to match.
    """
    if hg.num_edges == 0:
        raise ValidationError("cannot partition an edgeless hypergraph by size")
    sizes = sorted(set(len(e) for e in hg.edges))
    family = {k: s + 1 for s, k in enumerate(sizes)}
    fams = [family[len(e)] for e in hg.edges]
    return Hypergraph(hg.n, hg.edges, fams), tuple(sizes)
