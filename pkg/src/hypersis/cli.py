"""Config-driven command line front end.

Subcommands: `generate` (random hypergraphs), `threshold` (stability report
as JSON), `simulate` (one parameter point, CSV per model), and `experiment`
(a JSON config or named preset: time evolution, beta sweep, or i0 sweep).

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .hypergraph import Hypergraph, SizeSpec, generate_random, partition_by_size
from .kernels import (
    InfectionKernel,
    graded_threshold_kernels,
    kernel_from_config,
    parse_kernel_arg,
)
from .meanfield import ModelParams, integrate, make_rhs
from .spectral import evaluate_conditions
from .stochastic import BACKENDS, RunConfig, run_ensemble

log = logging.getLogger("hypersis")

MF_MODELS = ("mf_integer", "mf_commuted", "mf_linear_bound")
ALL_MODELS = ("exact",) + MF_MODELS
DEFAULT_MODELS = ("exact", "mf_integer", "mf_commuted")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract reserves 2 for
    # numerical failures, so remap usage errors to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    pairs = []
    for chunk in text.split(","):
        size, _, count = chunk.partition(":")
        try:
            pairs.append((int(size), int(count)))
        except ValueError as exc:
            raise ValidationError(
                f"bad --sizes entry {chunk!r}; expected SIZE:COUNT"
            ) from exc
    if not pairs:
        raise ValidationError("--sizes must list at least one SIZE:COUNT pair")
    return pairs


def _load_kernels(specs: list[str], hg: Hypergraph, partition: bool):
    kernels = [parse_kernel_arg(s) for s in specs]
    if partition:
        hg, sizes = partition_by_size(hg)
        if len(kernels) == 1:
            kernels = kernels * len(sizes)
        if len(kernels) != len(sizes):
            raise ValidationError(
                f"--partition-by-size found {len(sizes)} size families but "
                f"{len(kernels)} kernels were given"
            )
        return hg, kernels
    if len(kernels) == 1:
        return hg, kernels[0]
    return hg, kernels


# -- subcommands --------------------------------------------------------------


def cmd_generate(args) -> int:
    spec = SizeSpec(tuple(_parse_sizes(args.sizes)), args.seed)
    hg = generate_random(args.n, spec)
    hg.save(args.out)
    log.info("wrote %s (%d nodes, %d edges)", args.out, hg.n, hg.num_edges)
    return 0


def cmd_threshold(args) -> int:
    hg = Hypergraph.load(args.hypergraph)
    hg, kernels = _load_kernels(args.kernel, hg, args.partition_by_size)
    params = ModelParams(args.beta, args.delta)
    report = evaluate_conditions(hg, kernels, params)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        log.info("wrote %s", args.out)
    else:
        print(text)
    return 0


def _mf_trajectory(hg, kernels, params, i0, T, dt, model, stride=1):
    rhs = make_rhs(hg, kernels, params, model)
    p0 = np.full(hg.n, float(i0))
    return integrate(rhs, p0, dt, T, stride=stride)


def _run_point(hg, kernels, params, *, i0, T, dt, runs, seed, models, backend,
               outdir, full_state=False) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for model in models:
        if model == "exact":
            cfg = RunConfig(hg, kernels, params, i0, T, dt=dt, backend=backend)
            summary = run_ensemble(cfg, runs, seed)
            summary.to_csv(outdir / "exact_ensemble.csv")
            summary.extinction_to_csv(outdir / "exact_extinction.csv")
            log.info("exact: %d runs, final mean prevalence %.6g",
                     runs, summary.mean[-1])
        else:
            traj = _mf_trajectory(hg, kernels, params, i0, T, dt, model)
            traj.to_csv(outdir / f"{model}.csv", aggregate=not full_state)
            log.info("%s: final prevalence %.6g", model, traj.prevalence[-1])


def cmd_simulate(args) -> int:
    hg = Hypergraph.load(args.hypergraph)
    hg, kernels = _load_kernels(args.kernel, hg, args.partition_by_size)
    params = ModelParams(args.beta, args.delta)
    models = _parse_models(args.models)
    _run_point(
        hg, kernels, params, i0=args.i0, T=args.T, dt=args.dt, runs=args.runs,
        seed=args.seed, models=models, backend=args.backend, outdir=args.out,
        full_state=args.full_state,
    )
    return 0


def _parse_models(text) -> tuple[str, ...]:
    if isinstance(text, str):
        models = tuple(m.strip() for m in text.split(",") if m.strip())
    else:
        models = tuple(text)
    if not models:
        raise ValidationError("models: at least one model must be selected")
    for m in models:
        if m not in ALL_MODELS:
            raise ValidationError(
                f"models: unknown model {m!r}; expected subset of {ALL_MODELS}"
            )
    return models


# -- experiment configs --------------------------------------------------------

PRESETS: dict[str, dict] = {
    # time evolution of all three models at one parameter point
    "fig-time-evolution": {
        "hypergraph": {
            "n": 400,
            "sizes": [[2, 400], [3, 200], [4, 100], [5, 50]],
            "seed": 7,
        },
        "kernel": {"kind": "arctan"},
        "beta": 0.05,
        "delta": 1.0,
        "i0": 0.3,
        "T": 50.0,
        "dt": 0.05,
        "runs": 100,
        "models": ["exact", "mf_integer", "mf_commuted"],
        "seed": 1000,
    },
    # final prevalence against infection strength, with critical betas
    "fig-beta-sweep": {
        "hypergraph": {
            "n": 400,
            "sizes": [[2, 400], [3, 200], [4, 100], [5, 50]],
            "seed": 7,
        },
        "kernel": {"kind": "arctan"},
        "beta": [round(0.005 * i, 10) for i in range(1, 27)],
        "delta": 1.0,
        "i0": 0.5,
        "T": 200.0,
        "dt": 0.05,
        "runs": 10,
        "models": ["exact", "mf_integer", "mf_commuted"],
        "seed": 2000,
    },
    # final prevalence against the initial infection level, no pairwise edges
    "fig-i0-sweep": {
        "hypergraph": {"n": 400, "sizes": [[4, 200], [5, 100]], "seed": 7},
        "kernels": "graded-threshold",
        "beta": 0.1,
        "delta": 1.0,
        "i0": [round(0.025 * i, 10) for i in range(0, 21)],
        "T": 100.0,
        "dt": 0.05,
        "runs": 5,
        "models": ["exact", "mf_integer", "mf_commuted"],
        "seed": 3000,
    },
}


def _cfg_error(path: str, message: str):
    raise ValidationError(f"{path}: {message}")


def _cfg_number(cfg, key, default=None, positive=False):
    if key not in cfg:
        if default is None:
            _cfg_error(key, "required field missing")
        return default
    v = cfg[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        _cfg_error(key, "expected a finite number")
    if positive and v <= 0:
        _cfg_error(key, "expected a positive number")
    return float(v)


def _cfg_scalar_or_list(cfg, key, default):
    if key not in cfg:
        return float(default), False
    v = cfg[key]
    if isinstance(v, list):
        if not v:
            _cfg_error(key, "sweep list must be nonempty")
        for j, item in enumerate(v):
            if not isinstance(item, (int, float)) or isinstance(item, bool):
                _cfg_error(f"{key}[{j}]", "expected a number")
        return [float(x) for x in v], True
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v), False
    _cfg_error(key, "expected a number or a list of numbers")


def _cfg_hypergraph(cfg) -> Hypergraph:
    spec = cfg.get("hypergraph")
    if not isinstance(spec, dict):
        _cfg_error("hypergraph", "expected an object with 'path' or 'n'+'sizes'+'seed'")
    if "path" in spec:
        return Hypergraph.load(spec["path"])
    for field in ("n", "sizes", "seed"):
        if field not in spec:
            _cfg_error(f"hypergraph.{field}", "required field missing")
    sizes = spec["sizes"]
    if isinstance(sizes, dict):
        pairs = tuple((int(k), int(v)) for k, v in sizes.items())
    elif isinstance(sizes, list):
        pairs = tuple((int(k), int(c)) for k, c in sizes)
    else:
        _cfg_error("hypergraph.sizes", "expected a list of [size, count] pairs")
    return generate_random(int(spec["n"]), SizeSpec(pairs, int(spec["seed"])))


def _cfg_kernels(cfg, hg: Hypergraph):
    has_single = "kernel" in cfg
    has_multi = "kernels" in cfg
    if has_single == has_multi:
        _cfg_error("kernel", "exactly one of 'kernel' or 'kernels' is required")
    if has_single:
        return hg, kernel_from_config(cfg["kernel"])
    spec = cfg["kernels"]
    if spec == "graded-threshold":
        hg, sizes = partition_by_size(hg)
        return hg, graded_threshold_kernels(sizes)
    if not isinstance(spec, list) or not spec:
        _cfg_error("kernels", "expected 'graded-threshold' or a nonempty list")
    kernels = [kernel_from_config(k) for k in spec]
    if cfg.get("partition") == "by-size":
        hg, sizes = partition_by_size(hg)
        if len(kernels) != len(sizes):
            _cfg_error(
                "kernels",
                f"{len(sizes)} size families but {len(kernels)} kernels",
            )
    elif hg.family_of is None:
        _cfg_error("kernels", "hypergraph carries no families; set partition='by-size'")
    return hg, kernels


def _critical_beta_lines(hg, kernels, delta) -> list[str]:
    report = evaluate_conditions(hg, kernels, ModelParams(1.0, delta))
    picks = {}
    if isinstance(kernels, InfectionKernel):
        name_map = {
            "exact": "exact_mean_decay",
            "mf_integer": "mf_integer_global",
            "mf_commuted": "mf_commuted_global",
        }
        fallback = {"mf_integer": "mf_integer_local"}
    else:
        name_map = {"mf_integer": "multitype_global"}
        fallback = {"mf_integer": "multitype_local"}
    for label, cond_name in name_map.items():
        cond = report.get(cond_name)
        if not cond.evaluable and label in fallback:
            cond = report.get(fallback[label])
        if cond.evaluable and math.isfinite(cond.critical_beta):
            picks[label] = cond.critical_beta
    return [f"# critical_beta_{label}={picks[label]!r}" for label in sorted(picks)]


def _final_prevalences(hg, kernels, params, *, i0, T, dt, runs, seed, models,
                       backend) -> dict[str, float]:
    stride = max(1, int(round(T / dt)))
    finals = {}
    for model in models:
        if model == "exact":
            cfg = RunConfig(hg, kernels, params, i0, T, dt=dt, backend=backend)
            summary = run_ensemble(cfg, runs, seed)
            finals["exact_mean"] = float(summary.mean[-1])
        else:
            traj = _mf_trajectory(hg, kernels, params, i0, T, dt, model, stride)
            finals[model] = float(traj.prevalence[-1])
    return finals


def _write_sweep_csv(path, header_lines, var_name, var_values, columns, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        fh.write(",".join([var_name] + columns) + "\n")
        for value, row in zip(var_values, rows):
            cells = [repr(float(value))] + [repr(float(row[c])) for c in columns]
            fh.write(",".join(cells) + "\n")


def run_experiment(cfg: dict, outdir) -> None:
    """Run a validated experiment config; writes CSV datasets into outdir."""
    hg = _cfg_hypergraph(cfg)
    hg, kernels = _cfg_kernels(cfg, hg)
    delta = _cfg_number(cfg, "delta", 1.0, positive=True)
    dt = _cfg_number(cfg, "dt", 0.05, positive=True)
    T = _cfg_number(cfg, "T", positive=True)
    runs = int(_cfg_number(cfg, "runs", 10, positive=True))
    seed = int(_cfg_number(cfg, "seed", 0))
    backend = cfg.get("backend", "discretized")
    if backend not in BACKENDS:
        _cfg_error("backend", f"expected one of {BACKENDS}")
    models = _parse_models(cfg.get("models", list(DEFAULT_MODELS)))
    beta, beta_sweep = _cfg_scalar_or_list(cfg, "beta", None)
    i0, i0_sweep = _cfg_scalar_or_list(cfg, "i0", None)
    if beta_sweep and i0_sweep:
        _cfg_error("beta", "beta and i0 cannot both be sweep lists")

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "resolved_config.json").write_text(
        json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    columns = ["exact_mean" if m == "exact" else m for m in models]
    if beta_sweep:
        rows = []
        for j, b in enumerate(beta):
            log.info("beta sweep %d/%d: beta=%g", j + 1, len(beta), b)
            rows.append(_final_prevalences(
                hg, kernels, ModelParams(b, delta), i0=i0, T=T, dt=dt, runs=runs,
                seed=seed + j * runs, models=models, backend=backend,
            ))
        header = ["# hypersis beta sweep", f"# delta={delta!r}", f"# i0={i0!r}",
                  f"# T={T!r}"] + _critical_beta_lines(hg, kernels, delta)
        _write_sweep_csv(outdir / "beta_sweep.csv", header, "beta", beta, columns, rows)
    elif i0_sweep:
        rows = []
        for j, level in enumerate(i0):
            log.info("i0 sweep %d/%d: i0=%g", j + 1, len(i0), level)
            rows.append(_final_prevalences(
                hg, kernels, ModelParams(beta, delta), i0=level, T=T, dt=dt,
                runs=runs, seed=seed + j * runs, models=models, backend=backend,
            ))
        header = ["# hypersis i0 sweep", f"# beta={beta!r}", f"# delta={delta!r}",
                  f"# T={T!r}"] + _critical_beta_lines(hg, kernels, delta)
        _write_sweep_csv(outdir / "i0_sweep.csv", header, "i0", i0, columns, rows)
    else:
        _run_point(
            hg, kernels, ModelParams(beta, delta), i0=i0, T=T, dt=dt, runs=runs,
            seed=seed, models=models, backend=backend, outdir=outdir,
        )


def cmd_experiment(args) -> int:
    if args.preset:
        if args.preset not in PRESETS:
            raise ValidationError(
                f"unknown preset {args.preset!r}; expected one of {sorted(PRESETS)}"
            )
        cfg = json.loads(json.dumps(PRESETS[args.preset]))
    elif args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"{args.config}: invalid JSON at line {exc.lineno}: {exc.msg}"
            ) from exc
        if not isinstance(cfg, dict):
            raise ValidationError(f"{args.config}: expected a JSON object")
    else:
        raise ValidationError("experiment needs a config path or --preset")
    outdir = args.out or cfg.get("out")
    if not outdir:
        raise ValidationError("out: set --out or the config 'out' field")
    run_experiment(cfg, outdir)
    log.info("experiment outputs in %s", outdir)
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypersis", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a random hypergraph file")
    gen.add_argument("--n", type=int, required=True, help="node count")
    gen.add_argument("--sizes", required=True,
                     help="comma list of SIZE:COUNT, e.g. 2:400,3:200")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output hypergraph JSON path")
    gen.set_defaults(func=cmd_generate)

    thr = sub.add_parser("threshold", help="evaluate stability conditions")
    thr.add_argument("--hypergraph", required=True)
    thr.add_argument("--kernel", action="append", required=True,
                     help="kernel spec, repeatable for per-family kernels")
    thr.add_argument("--partition-by-size", action="store_true",
                     help="retag edge families by hyperedge size")
    thr.add_argument("--beta", type=float, default=1.0)
    thr.add_argument("--delta", type=float, default=1.0)
    thr.add_argument("--out", help="write the JSON report here instead of stdout")
    thr.set_defaults(func=cmd_threshold)

    sim = sub.add_parser("simulate", help="run selected models at one point")
    sim.add_argument("--hypergraph", required=True)
    sim.add_argument("--kernel", action="append", required=True)
    sim.add_argument("--partition-by-size", action="store_true")
    sim.add_argument("--beta", type=float, required=True)
    sim.add_argument("--delta", type=float, default=1.0)
    sim.add_argument("--i0", type=float, required=True)
    sim.add_argument("--T", type=float, required=True)
    sim.add_argument("--dt", type=float, default=0.05)
    sim.add_argument("--runs", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--models", default=",".join(DEFAULT_MODELS))
    sim.add_argument("--backend", choices=BACKENDS, default="discretized")
    sim.add_argument("--full-state", action="store_true",
                     help="write per-node columns for mean-field CSVs")
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    exp = sub.add_parser("experiment", help="run a config file or preset")
    exp.add_argument("config", nargs="?", help="experiment config JSON path")
    exp.add_argument("--preset", choices=sorted(PRESETS),
                     help="run a built-in experiment instead of a config file")
    exp.add_argument("--out", help="output directory (overrides config)")
    exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
