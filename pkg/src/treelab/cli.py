"""Command line entry point: ``treelab {sample,stats,moments,verify,experiment}``.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness, moments
from .automorphisms import BranchShape
from .patterns import Pattern
from .sampler import sample_trees
from .tree import LabelledTree, TreeError, format_trees, parse_trees


class UsageError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _pattern_from(obj) -> Pattern:
    try:
        return Pattern.from_json(obj)
    except (KeyError, TypeError, ValueError, TreeError) as exc:
        raise UsageError(f"bad pattern: {exc}") from exc


def _shape(obj) -> BranchShape:
    if obj in ("singleton", None):
        return BranchShape.singleton()
    if obj in ("edge", "rooted-edge"):
        return BranchShape.rooted_edge()
    return BranchShape.from_code(str(obj))


def _tree_from(obj) -> LabelledTree:
    return LabelledTree(int(obj["l"] if "l" in obj else obj["n"]), obj["edges"])


def _lambda_series(p):
    ls = moments.lambda_series(int(p.get("s_max", 12)), p.get("n"))
    return {
        "formula": "lambda-series",
        "s_max": ls.s_max,
        "sums": list(ls.sums),
        "intervals": [list(ls.interval(j)) for j in range(3)],
        "counts": list(ls.counts),
    }


def _poisson(p):
    lam = float(p["lam"])
    vals = moments.poisson_log_moments(lam)
    bounds = moments.poisson_log_bounds(lam)
    keys = ("log_fact", "log_fact_shift", "log_fact_sq")
    return {
        "formula": "poisson-log",
        "lam": lam,
        "values": dict(zip(keys, vals)),
        "bounds": {k: list(bounds[k]) for k in keys},
    }


def _forest(p):
    spec = moments.ForestSpec.build(int(p["n"]), [tuple(c) for c in p["components"]])
    return {"formula": "forest-extensions", "value": moments.forest_extension_count(spec)}


def _identity(p):
    lhs, rhs = moments.path_variance_identity(int(p["l"]))
    return {"formula": "path-variance-identity", "lhs": lhs, "rhs": rhs, "holds": lhs == rhs}


FORMULAS = {
    "pattern-expectation": lambda p: moments.pattern_expectation_exact(int(p["n"]), _pattern_from(p["pattern"])),
    "pattern-limit": lambda p: {
        "formula": "pattern-limit",
        "value": moments.pattern_expectation_limit(int(p["n"]), _pattern_from(p["pattern"])),
    },
    "path-variance": lambda p: {
        "formula": "path-variance",
        "value": moments.path_variance_asymptotic(int(p["n"]), int(p["l"])),
    },
    "path-variance-identity": _identity,
    "multinomial": lambda p: moments.multinomial_factorial_moment(int(p["n"]), p["a"], p["b"]),
    "conditional": lambda p: moments.conditional_pattern_expectation(p["x"], _tree_from(p["H"])),
    "branch-moment": lambda p: moments.branch_factorial_moment_exact(
        int(p["n"]), _shape(p.get("shape")), int(p["k"]), bool(p.get("root_flag", False))
    ),
    "forest-extensions": _forest,
    "poisson-log": _poisson,
    "lambda-series": _lambda_series,
}


def _jsonable(obj):
    if isinstance(obj, moments.MomentReport):
        return obj.to_dict()
    return obj


# subcommands


def cmd_sample(args) -> int:
    if args.n is None or args.count is None:
        raise UsageError("sample needs --n and --count")
    trees = sample_trees(args.n, args.count, args.seed, args.method)
    _emit(format_trees(trees), args.out)
    return 0


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config_from_args(args, parameter: str | None = None) -> harness.ExperimentConfig:
    d = _load_json(args.config) if getattr(args, "config", None) else {}
    flags = {
        "n": args.n,
        "M": args.count,
        "seed": args.seed,
        "parameter": parameter or args.parameter,
        "l": args.l,
        "root": args.root,
        "vertex": args.vertex,
        "threshold": args.threshold,
        "degree_cap": args.degree_cap,
        "beta_filter": args.beta_filter,
        "method": args.method,
        "block_size": getattr(args, "block_size", None),
        "workers": getattr(args, "workers", None),
        "out": args.out,
        "fmt": args.format,
    }
    for k, v in flags.items():
        if v is not None:
            d[k] = v
    if args.pattern_file:
        d["pattern"] = _pattern_from(_load_json(args.pattern_file))
    if "n" not in d or "M" not in d:
        raise UsageError("need --n and --count (or a config file with n and M)")
    cfg = harness.ExperimentConfig.from_dict(d)
    cfg.validate()
    return cfg


def cmd_stats(args) -> int:
    if args.input:
        if args.parameter is None:
            raise UsageError("stats needs --parameter")
        try:
            trees = parse_trees(Path(args.input).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from exc
        if not trees:
            raise UsageError("no trees in input")
        args.n = args.n or trees[0].n
        args.count = len(trees)
        cfg = _config_from_args(args)
        values = np.array([harness.evaluate(T, cfg) for T in trees], dtype=np.float64)
        stats = harness.SummaryStats.from_values(values)
        if cfg.out:
            harness.write_outputs(cfg, values, stats)
    else:
        if args.parameter is None and not args.config:
            raise UsageError("stats needs --parameter")
        cfg = _config_from_args(args)
        stats = harness.run_experiment(cfg)
    print(json.dumps({"parameter": cfg.parameter, "n": cfg.n, **stats.to_dict()}, indent=2, sort_keys=True))
    return 0


def cmd_moments(args) -> int:
    fn = FORMULAS.get(args.formula)
    if fn is None:
        raise UsageError(f"unknown formula {args.formula!r}; choose from {sorted(FORMULAS)}")
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is not valid JSON: {exc}") from exc
    try:
        result = fn(params)
    except KeyError as exc:
        raise UsageError(f"missing parameter {exc}") from exc
    print(json.dumps(_jsonable(result), sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    from .verify import oracle_suite

    if args.suite != "oracle":
        raise UsageError(f"unknown suite {args.suite!r}")
    if not 3 <= args.n <= 7:
        raise UsageError("verify --n must be in 3..7")
    rows = oracle_suite(args.n)
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if all(r[1] for r in rows) else 1


def cmd_experiment(args) -> int:
    if args.tails:
        if args.n is None or args.count is None:
            raise UsageError("--tails needs --n and --count")
        rep = harness.tail_report(args.n, args.count, args.seed, window=args.beta_window,
                                  workers=args.workers, block_size=args.block_size)
        for line in rep.lines():
            print(line)
        return 0
    cfg = _config_from_args(args)
    stats = harness.run_experiment(cfg)
    print(json.dumps({"parameter": cfg.parameter, "n": cfg.n, "seed": cfg.seed, **stats.to_dict()},
                     indent=2, sort_keys=True))
    return 0


def _add_stats_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--parameter", choices=harness.PARAMETERS)
    p.add_argument("--pattern-file")
    p.add_argument("--l", type=int)
    p.add_argument("--root", type=int)
    p.add_argument("--vertex", type=int)
    p.add_argument("--threshold", type=int)
    p.add_argument("--degree-cap", type=int)
    p.add_argument("--beta-filter", type=float)
    p.add_argument("--method", choices=("aldous-broder", "prufer"))
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treelab", description="Uniform random labelled trees: sampling, statistics, moments.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("sample", help="sample uniform labelled trees")
    _add_shared(p)
    p.add_argument("--method", choices=("aldous-broder", "prufer"), default="aldous-broder")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("stats", help="evaluate a parameter on sampled or given trees")
    _add_shared(p)
    _add_stats_flags(p)
    p.add_argument("--input", help="tree text file instead of sampling")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("moments", help="evaluate a closed-form moment formula")
    p.add_argument("--formula", required=True, help=", ".join(sorted(FORMULAS)))
    p.add_argument("--params", default="{}", help="JSON object of formula arguments")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("verify", help="run oracle cross-checks")
    p.add_argument("--suite", default="oracle")
    p.add_argument("--n", type=int, default=5)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="Monte Carlo run with summary and optional tail report")
    _add_shared(p)
    _add_stats_flags(p)
    p.add_argument("--block-size", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--tails", action="store_true", help="max-degree and beta tail report")
    p.add_argument("--beta-window", type=int, default=harness.BETA_WINDOW)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, harness.ConfigError, TreeError, ValueError) as exc:
        print(f"treelab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
