"""Nonlinear infection-rate kernels.

A kernel maps the number of infected members of a group to that group's
contribution to a node's infection rate.  Every kernel satisfies f(0) = 0:
a group with no infected members transmits nothing.

Kernels are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import UnsupportedModelError, ValidationError

__all__ = [
    "InfectionKernel",
    "Identity",
    "Arctan",
    "LogOnePlus",
    "SaturatingMin",
    "Threshold",
    "Tabulated",
    "kernel_from_config",
    "parse_kernel_arg",
    "graded_threshold_kernels",
    "family_tables",
]


class InfectionKernel:
    """Base class for infection-rate kernels.

    Subclasses define evaluation at integer counts (`eval_int`), the
    continuous extension used by the expectation-commuted mean-field model
    (`eval_real`), and the analysis metadata consumed by the threshold
    conditions: `value_at_one`, `slope_at_zero`, `max_secant_slope`, and
    the `concave` flag.
    """

    concave: bool = False
    kind: str = "?"
    supports_real: bool = True

    def __init__(self):
        self._tables: dict[int, np.ndarray] = {}

    def eval_int(self, count: int) -> float:
        """Rate value at an integer number of infected members."""
        raise NotImplementedError

    def eval_real(self, x):
        """Continuous-argument extension; accepts scalars or arrays."""
        raise NotImplementedError

    @property
    def value_at_one(self) -> float:
        """f(1), the coefficient of the local-stability condition."""
        return self.eval_int(1)

    @property
    def slope_at_zero(self) -> float:
        """Declared derivative at 0, used by the expectation-commuted condition.

        Raises ValidationError for kernels that do not carry one (step
        kernels are not differentiable at 0; tabulated kernels declare none).
        """
        raise ValidationError(
            f"kernel {self.kind!r} has no declared derivative at 0"
        )

    def max_secant_slope(self, max_count: int) -> float:
        """Largest f(x)/x over integer x in 1..max_count.

        This is the coefficient of the linear upper-bound model and of the
        exact-process mean-decay condition.
        """
        if max_count < 1:
            raise ValidationError("max_count must be >= 1")
        values = self.table(max_count)[1:]
        best = float(np.max(values / np.arange(1, max_count + 1)))
        if best <= 0.0:
            raise ValidationError(
                f"kernel {self.kind!r} is identically zero on 1..{max_count}; "
                "threshold analysis is undefined"
            )
        return best

    def table(self, max_count: int) -> np.ndarray:
        """Read-only vector of f(0..max_count); cached per max_count."""
        if max_count not in self._tables:
            vals = np.array(
                [self.eval_int(i) for i in range(max_count + 1)], dtype=np.float64
            )
            vals.flags.writeable = False
            self._tables[max_count] = vals
        return self._tables[max_count]

    def verify_concave(self, max_count: int) -> None:
        """Check that successive increments f(l+1)-f(l) are nonincreasing.

        Raises ValidationError if the kernel declares concavity but the
        finite differences up to max_count contradict it.
        """
        if not self.concave:
            raise ValidationError(f"kernel {self.kind!r} is not declared concave")
        if max_count >= 2:
            diffs = np.diff(self.table(max_count))
            if np.any(np.diff(diffs) > 1e-12):
                raise ValidationError(
                    f"kernel {self.kind!r} declared concave but increments "
                    f"increase within 0..{max_count}"
                )

    def to_config(self) -> dict:
        return {"kind": self.kind}

    def __repr__(self):
        params = {k: v for k, v in self.to_config().items() if k != "kind"}
        inner = ", ".join(f"{k}={v!r}" for k, v in params.items())
        return f"{type(self).__name__}({inner})"


def _match_scalar(x, out):
    # np.where promotes scalars to 0-d arrays; hand plain floats back
    if isinstance(x, np.ndarray) and x.ndim > 0:
        return out
    return float(out)


class Identity(InfectionKernel):
    """f(x) = x, the classical linear rate."""

    concave = True
    kind = "identity"

    def eval_int(self, count):
        if count < 0:
            raise ValidationError("count must be >= 0")
        return float(count)

    def eval_real(self, x):
        return x * 1.0

    @property
    def slope_at_zero(self):
        return 1.0


class Arctan(InfectionKernel):
    """f(x) = arctan(x), a saturating concave rate."""

    concave = True
    kind = "arctan"

    def eval_int(self, count):
        if count < 0:
            raise ValidationError("count must be >= 0")
        return math.atan(count)

    def eval_real(self, x):
        return np.arctan(x)

    @property
    def slope_at_zero(self):
        return 1.0


class LogOnePlus(InfectionKernel):
    """f(x) = scale * log(1 + x)."""

    concave = True
    kind = "log1p"

    def __init__(self, scale: float):
        super().__init__()
        if not (math.isfinite(scale) and scale > 0):
            raise ValidationError("log1p scale must be a positive real")
        self.scale = float(scale)

    def eval_int(self, count):
        if count < 0:
            raise ValidationError("count must be >= 0")
        return self.scale * math.log1p(count)

    def eval_real(self, x):
        return self.scale * np.log1p(x)

    @property
    def slope_at_zero(self):
        return self.scale

    def to_config(self):
        return {"kind": self.kind, "scale": self.scale}


class SaturatingMin(InfectionKernel):
    """f(x) = min(cap, x): linear up to a hard cap."""

    concave = True
    kind = "min"

    def __init__(self, cap: int):
        super().__init__()
        if not (isinstance(cap, (int, np.integer)) and cap >= 1):
            raise ValidationError("min cap must be a positive integer")
        self.cap = int(cap)

    def eval_int(self, count):
        if count < 0:
            raise ValidationError("count must be >= 0")
        return float(min(self.cap, count))

    def eval_real(self, x):
        return np.minimum(self.cap, x) * 1.0

    @property
    def slope_at_zero(self):
        return 1.0

    def to_config(self):
        return {"kind": self.kind, "cap": self.cap}


class Threshold(InfectionKernel):
    """f(x) = c2 * 1(x >= c1): zero until c1 infected members, then c2.

    Not differentiable at 0, so it carries no slope_at_zero and the
    expectation-commuted stability condition is not evaluable for it.
    """

    concave = False
    kind = "threshold"

    def __init__(self, c1: int, c2: float):
        super().__init__()
        if not (isinstance(c1, (int, np.integer)) and c1 >= 1):
            raise ValidationError("threshold c1 must be an integer >= 1")
        if not (math.isfinite(c2) and c2 > 0):
            raise ValidationError("threshold c2 must be a positive real")
        self.c1 = int(c1)
        self.c2 = float(c2)

    def eval_int(self, count):
        if count < 0:
            raise ValidationError("count must be >= 0")
        return self.c2 if count >= self.c1 else 0.0

    def eval_real(self, x):
        out = np.where(np.greater_equal(x, self.c1), self.c2, 0.0)
        return _match_scalar(x, out)

    def to_config(self):
        return {"kind": self.kind, "c1": self.c1, "c2": self.c2}


class Tabulated(InfectionKernel):
    """Kernel given by an explicit value table f(0..K).

    Has no continuous extension, so it cannot drive the
    expectation-commuted mean-field model.
    """

    kind = "table"
    supports_real = False

    def __init__(self, values, concave: bool = False):
        super().__init__()
        vals = np.asarray(values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 1:
            raise ValidationError("table values must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValidationError("table values must be finite and nonnegative")
        if vals[0] != 0.0:
            raise ValidationError("table must start with f(0) = 0")
        self.values = vals.copy()
        self.values.flags.writeable = False
        self.concave = bool(concave)
        if self.concave:
            self.verify_concave(vals.size - 1)

    def eval_int(self, count):
        if count < 0:
            raise ValidationError("count must be >= 0")
        if count >= self.values.size:
            raise ValidationError(
                f"tabulated kernel defined only up to {self.values.size - 1}, "
                f"got {count}"
            )
        return float(self.values[count])

    def eval_real(self, x):
        raise UnsupportedModelError(
            "tabulated kernels have no continuous extension; the "
            "expectation-commuted model cannot use them"
        )

    def to_config(self):
        return {
            "kind": self.kind,
            "values": [float(v) for v in self.values],
            "concave": self.concave,
        }


_KINDS = {
    "identity": Identity,
    "arctan": Arctan,
    "log1p": LogOnePlus,
    "min": SaturatingMin,
    "threshold": Threshold,
    "table": Tabulated,
}


def kernel_from_config(cfg: dict) -> InfectionKernel:
    """Build a kernel from its JSON config form, e.g. {"kind": "log1p", "scale": 2}."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValidationError("kernel config must be an object with a 'kind' field")
    kind = cfg["kind"]
    if kind not in _KINDS:
        raise ValidationError(
            f"unknown kernel kind {kind!r}; expected one of {sorted(_KINDS)}"
        )
    params = {k: v for k, v in cfg.items() if k != "kind"}
    try:
        if kind == "identity":
            return Identity(**params)
        if kind == "arctan":
            return Arctan(**params)
        if kind == "log1p":
            return LogOnePlus(**params)
        if kind == "min":
            cap = params.pop("cap")
            return SaturatingMin(int(cap), **params)
        if kind == "threshold":
            c1 = params.pop("c1")
            return Threshold(int(c1), **params)
        return Tabulated(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for kernel {kind!r}: {exc}") from exc
    except KeyError as exc:
        raise ValidationError(f"kernel {kind!r} missing parameter {exc}") from exc


def parse_kernel_arg(text: str) -> InfectionKernel:
    """Parse the CLI shorthand: identity | arctan | log1p:A | min:C | threshold:C1,C2 | table:V0,V1,..."""
    name, _, rest = text.strip().partition(":")
    name = name.lower()
    if name not in _KINDS:
        raise ValidationError(
            f"unknown kernel {name!r}; expected one of {sorted(_KINDS)}"
        )
    try:
        if name == "identity":
            return Identity()
        if name == "arctan":
            return Arctan()
        if name == "log1p":
            return LogOnePlus(float(rest))
        if name == "min":
            return SaturatingMin(int(rest))
        if name == "threshold":
            c1, c2 = rest.split(",")
            return Threshold(int(c1), float(c2))
        return Tabulated([float(v) for v in rest.split(",")])
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"cannot parse kernel spec {text!r}: {exc}") from exc


def graded_threshold_kernels(sizes) -> list[InfectionKernel]:
    """Per-size kernel family: linear on pairs, step kernels on larger groups.

    For group size s >= 3 the rate is (s-2) once at least s-2 members are
    infected; pairs keep the linear kernel.  `sizes` lists the distinct
    hyperedge sizes in ascending family order.
    """
    kernels: list[InfectionKernel] = []
    for s in sizes:
        if s < 2:
            raise ValidationError("group sizes must be >= 2")
        if s == 2:
            kernels.append(Identity())
        else:
            kernels.append(Threshold(s - 2, float(s - 2)))
    return kernels


def family_tables(hg, kernels) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-family kernel tables for the flat edge arrays.

    Returns (tables, family_index): `tables[family_index[e], l]` is the rate
    at l infected members for edge e.  A single kernel applies to all edges;
    a sequence of kernels requires the hypergraph to carry a family per edge
    (families are numbered 1..S, matched to kernels in order).
    """
    if isinstance(kernels, InfectionKernel):
        width = max(hg.max_size, 1)
        tables = kernels.table(width)[None, :]
        findex = np.zeros(hg.num_edges, dtype=np.int64)
        return tables, findex

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
    width = max(hg.max_size, 1)
    tables = np.zeros((len(kernel_list), width + 1), dtype=np.float64)
    sizes = hg.edge_sizes
    for s, kern in enumerate(kernel_list):
        in_family = findex == s
        if not np.any(in_family):
            continue
        fam_k = int(sizes[in_family].max())
        tables[s, : fam_k + 1] = kern.table(fam_k)
    return tables, findex
