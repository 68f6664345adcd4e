"""Monte Carlo driver: replicate blocks, parameter evaluation, summaries.

Replicates are grouped into blocks of a fixed size; block b draws all of its
randomness from ``SeedSpec(seed, b)``.  Blocks may run on any number of
worker threads (the numba kernels release the GIL) and are reduced by block
index, so results depend only on (seed, n, M, block size).

Label-invariant parameters are evaluated on the stage-I tree T(U) without the
relabelling step, which does not change their distribution.  Rooted
parameters use vertex 1 of T(U) as the root: the start vertex of the
construction is independent of the resulting uniform tree, so this is the
law of a uniform tree with a uniform (equivalently, any fixed) root.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import ndtr

from . import _kernels as K
from .automorphisms import aut_rooted_order, aut_full_order, branch_table, default_threshold
from .patterns import Pattern, degree_count, path_count, pattern_count
from .sampler import SeedSpec, aldous_broder_block, prufer_block, stage1_parents_block
from .tree import LabelledTree, beta

DEFAULT_BLOCK_ELEMS = 1 << 20
BETA_WINDOW = 8


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    n: int
    M: int
    seed: int = 0
    parameter: str = "leaves"
    pattern: Pattern | None = None
    l: int = 3
    root: int = 1
    vertex: int = 2
    threshold: int | None = None
    degree_cap: int | None = None
    beta_filter: float | None = None
    beta_window: int = BETA_WINDOW
    method: str = "aldous-broder"
    block_size: int | None = None
    workers: int | None = None
    out: str | None = None
    fmt: str = "csv"

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"need n >= 2, got {self.n}")
        if self.M < 1:
            raise ConfigError(f"need M >= 1, got {self.M}")
        if self.parameter not in PARAMETERS:
            raise ConfigError(f"unknown parameter {self.parameter!r}; choose from {sorted(PARAMETERS)}")
        if self.parameter == "pattern" and self.pattern is None:
            raise ConfigError("parameter 'pattern' needs a pattern")
        if self.method not in ("aldous-broder", "prufer"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.parameter.startswith("branch") and self.n < 3:
            raise ConfigError("branch counts need n >= 3")

    @property
    def blocks(self) -> list[tuple[int, int]]:
        bs = self.block_size or max(1, DEFAULT_BLOCK_ELEMS // self.n)
        return [(b, min(bs, self.M - b * bs)) for b in range((self.M + bs - 1) // bs)]

    @property
    def small_threshold(self) -> int:
        return default_threshold(self.n) if self.threshold is None else self.threshold

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "pattern" in d and isinstance(d["pattern"], dict):
            p = d["pattern"]
            d["pattern"] = Pattern.from_edges(int(p["l"]), p["edges"], p["theta"])
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**d)


@dataclass
class SummaryStats:
    M: int
    mean: float
    variance: float
    delta_k: float | None
    min: float
    max: float
    tails: dict = field(default_factory=dict)

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.M)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_values(cls, values: np.ndarray, tails: dict | None = None) -> "SummaryStats":
        values = np.asarray(values, dtype=np.float64)
        M = int(values.size)
        var = float(values.var(ddof=1)) if M > 1 else 0.0
        try:
            dk = ks_normal(values)
        except ValueError:
            dk = None
        return cls(M, float(values.mean()), var, dk, float(values.min()), float(values.max()), tails or {})


def ks_normal(sample) -> float:
    """sup_t |F_m(t) - Phi(t)| after standardising by the sample mean and sd."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    m = x.size
    if m < 2:
        raise ValueError("need at least two observations")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise ValueError("degenerate sample (zero variance)")
    cdf = ndtr((x - x.mean()) / sd)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - cdf), np.max(cdf - (i - 1) / m)))


def ks_standard_error(m: int) -> float:
    """0.2603 / sqrt(m): the sd of the Kolmogorov limit law.  With estimated
    mean and sd the true spread is smaller, so this is conservative."""
    return 0.2603 / math.sqrt(m)


# parameters

def _branch_vertex_roots(rng, n, size):
    roots = rng.integers(1, n + 1, size=size)
    verts = rng.integers(1, n, size=size)
    verts += verts >= roots
    return roots, verts


def _degree_family(cfg, par, rng):
    return K.degree_stats_block(par, cfg.n)


def _aut_family(cfg, par, rng):
    return K.aut_stage1_block(par, cfg.n, cfg.small_threshold)


def _branch_family(cfg, par, rng):
    roots, verts = _branch_vertex_roots(rng, cfg.n, par.shape[0])
    return K.branch_block(par, roots, verts, cfg.n).astype(np.float64)


def _beta_family(cfg, par, rng):
    return K.beta_window_block(par, cfg.n, cfg.beta_window)


FAMILY_COLUMNS = {
    _degree_family: ("leaves", "paths3", "max-degree"),
    _aut_family: ("log-aut-rooted", "log-aut-small", "log-aut-full"),
    _branch_family: ("branch-singleton", "branch-edge"),
    _beta_family: ("max-degree", "beta-window", "beta-upper"),
}


# name -> (fast family, column) or None when only the exact evaluator exists
_FAST = {
    "leaves": (_degree_family, 0),
    "paths3": (_degree_family, 1),
    "max-degree": (_degree_family, 2),
    "log-aut-rooted": (_aut_family, 0),
    "log-aut-small": (_aut_family, 1),
    "log-aut-full": (_aut_family, 2),
    "branch-singleton": (_branch_family, 0),
    "branch-edge": (_branch_family, 1),
    "beta-window": (_beta_family, 1),
    "beta-upper": (_beta_family, 2),
}


def _exact_evaluator(cfg: ExperimentConfig) -> Callable[[LabelledTree], float]:
    name = cfg.parameter
    if name == "leaves":
        return lambda T: degree_count(T, 1)
    if name == "paths3":
        return lambda T: path_count(T, 3)
    if name == "max-degree":
        return lambda T: max(T.degrees())
    if name == "edges":
        return lambda T: len(T.edges)
    if name == "log-aut-rooted":
        return lambda T: math.log(aut_rooted_order(T, cfg.root))
    if name == "log-aut-small":
        return lambda T: math.log(aut_rooted_order(T, cfg.root, cfg.small_threshold))
    if name == "log-aut-full":
        return lambda T: math.log(aut_full_order(T))
    if name == "branch-singleton":
        return lambda T: branch_table(T, cfg.root)[cfg.vertex].get("()", 0)
    if name == "branch-edge":
        return lambda T: branch_table(T, cfg.root)[cfg.vertex].get("(())", 0)
    if name in ("beta", "beta-window", "beta-upper"):
        return lambda T: float(beta(T))
    if name == "pattern":
        return lambda T: pattern_count(T, cfg.pattern, cfg.degree_cap)
    if name == "path":
        return lambda T: path_count(T, cfg.l, cfg.beta_filter)
    raise ConfigError(f"unknown parameter {name!r}")


PARAMETERS = sorted(set(_FAST) | {"edges", "beta", "pattern", "path"})


def evaluate(T: LabelledTree, cfg: ExperimentConfig) -> float:
    """Exact value of ``cfg.parameter`` on one tree (root and vertex from cfg)."""
    return float(_exact_evaluator(cfg)(T))


def _edges_to_trees(n, a, b):
    return [LabelledTree._trusted(n, zip(a[r].tolist(), b[r].tolist())) for r in range(a.shape[0])]


def _eval_block(cfg: ExperimentConfig, block: int, size: int, all_columns: bool = False) -> np.ndarray:
    rng = SeedSpec(cfg.seed, block).generator()
    n = cfg.n
    fast = _FAST.get(cfg.parameter)
    if fast is not None and cfg.method == "aldous-broder":
        family, col = fast
        par = stage1_parents_block(n, size, rng)
        out = family(cfg, par, rng)
        return np.ascontiguousarray(out if all_columns else out[:, col], dtype=np.float64)
    if all_columns:
        raise ConfigError(f"parameter {cfg.parameter!r} has no column family")
    if cfg.method == "prufer":
        a, b = prufer_block(n, size, rng)
    else:
        a, b = aldous_broder_block(n, size, rng, relabelled=True)
    f = _exact_evaluator(cfg)
    return np.array([f(T) for T in _edges_to_trees(n, a, b)], dtype=np.float64)


def _sample(cfg: ExperimentConfig, all_columns: bool) -> np.ndarray:
    cfg.validate()
    blocks = cfg.blocks
    workers = cfg.workers or os.cpu_count() or 1
    parts: list = [None] * len(blocks)
    if workers == 1 or len(blocks) == 1:
        for idx, (b, size) in enumerate(blocks):
            parts[idx] = _eval_block(cfg, b, size, all_columns)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {pool.submit(_eval_block, cfg, b, size, all_columns): idx for idx, (b, size) in enumerate(blocks)}
            for fut, idx in futs.items():
                parts[idx] = fut.result()
    return np.concatenate(parts)


def sample_values(cfg: ExperimentConfig) -> np.ndarray:
    return _sample(cfg, False)


def sample_family(cfg: ExperimentConfig) -> dict[str, np.ndarray]:
    """Every column computed alongside ``cfg.parameter`` by its kernel, from
    the same trees; e.g. leaves, paths3 and max-degree in one pass."""
    if cfg.parameter not in _FAST or cfg.method != "aldous-broder":
        raise ConfigError(f"parameter {cfg.parameter!r} has no column family")
    mat = _sample(cfg, True)
    names = FAMILY_COLUMNS[_FAST[cfg.parameter][0]]
    return {name: mat[:, j] for j, name in enumerate(names)}


def run_experiment(cfg: ExperimentConfig) -> SummaryStats:
    values = sample_values(cfg)
    stats = SummaryStats.from_values(values)
    if cfg.out:
        write_outputs(cfg, values, stats)
    return stats


def write_outputs(cfg: ExperimentConfig, values: np.ndarray, stats: SummaryStats) -> None:
    path = Path(cfg.out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        summary = {"n": cfg.n, "M": cfg.M, "seed": cfg.seed, "parameter": cfg.parameter, **stats.to_dict()}
        if cfg.fmt == "csv":
            with open(path, "w", newline="") as fh:
                fh.write("replicate,value\n")
                fh.writelines(f"{i},{v:.17g}\n" for i, v in enumerate(values.tolist()))
            with open(path.with_name(path.name + ".summary.json"), "w") as fh:
                json.dump(summary, fh, indent=2, sort_keys=True)
        else:
            summary["values"] = [float(f"{v:.17g}") for v in values.tolist()]
            with open(path, "w") as fh:
                json.dump(summary, fh, indent=2, sort_keys=True)
    except OSError as exc:
        raise ConfigError(f"cannot write output {path}: {exc}") from exc


# tails


@dataclass
class TailRow:
    d: int
    exceed: int
    freq: float
    bound: float
    std_error: float

    @property
    def ok(self) -> bool:
        return self.freq <= self.bound + 3 * self.std_error


@dataclass
class TailReport:
    n: int
    M: int
    window: int
    rows: list
    beta_threshold: float
    beta_lower_quantiles: dict
    beta_upper_quantiles: dict
    beta_reach_lower: int
    beta_reach_upper: int
    star_max_degree: int
    star_beta: float

    @property
    def moon_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def lines(self) -> list[str]:
        out = [f"n={self.n} M={self.M} window D={self.window}", "d  exceed  freq  bound  3se"]
        for r in self.rows:
            out.append(f"{r.d:2d} {r.exceed:7d} {r.freq:.6f} {r.bound:.6g} {3 * r.std_error:.2e} {'ok' if r.ok else 'FAIL'}")
        out.append(f"(ln n)^4 = {self.beta_threshold:.1f}; samples reaching it: {self.beta_reach_upper} (certified)")
        out.append("beta quantiles lower " + json.dumps(self.beta_lower_quantiles))
        out.append("beta quantiles upper " + json.dumps(self.beta_upper_quantiles))
        out.append(f"star fixture: max degree {self.star_max_degree}, beta {self.star_beta:g}")
        return out


def _moon_bound(n: int, d: int) -> float:
    lg = math.log(n) - math.lgamma(d + 1)
    return 1.0 if lg >= 0 else math.exp(lg)


def tail_report(n: int, M: int, seed=0, d_grid=None, window: int = BETA_WINDOW, workers=None, block_size=None) -> TailReport:
    """Max-degree tail frequencies against n/d! and beta(T) against (ln n)^4.

    beta is bracketed per tree by the window-D value (a lower bound, exact
    whenever it already dominates) and a certified upper bound.
    """
    cfg = ExperimentConfig(n=n, M=M, seed=seed, parameter="beta-window", beta_window=window,
                           workers=workers, block_size=block_size)
    cfg.validate()
    blocks = cfg.blocks

    def one(bs):
        b, size = bs
        rng = SeedSpec(seed, b).generator()
        return K.beta_window_block(stage1_parents_block(n, size, rng), n, window)

    if (workers or os.cpu_count() or 1) == 1 or len(blocks) == 1:
        parts = [one(bs) for bs in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers or os.cpu_count()) as pool:
            parts = list(pool.map(one, blocks))
    arr = np.concatenate(parts)
    maxdeg, lo, hi = arr[:, 0], arr[:, 1], arr[:, 2]
    if d_grid is None:
        d_grid = []
        d = 1
        while True:
            d_grid.append(d)
            if _moon_bound(n, d) < 1e-9 or d >= n - 1:
                break
            d += 1
    rows = []
    for d in d_grid:
        bound = _moon_bound(n, d)
        exceed = int(np.count_nonzero(maxdeg > d))
        rows.append(TailRow(d, exceed, exceed / M, bound, math.sqrt(bound * (1 - bound) / M)))
    thr = math.log(n) ** 4
    qs = (0.5, 0.9, 0.99, 1.0)
    star_par = np.ones((1, n - 1), np.int64)
    star = K.beta_window_block(star_par, n, window)[0]
    return TailReport(
        n, M, window, rows, thr,
        {str(q): float(np.quantile(lo, q)) for q in qs},
        {str(q): float(np.quantile(hi, q)) for q in qs},
        int(np.count_nonzero(lo >= thr)),
        int(np.count_nonzero(hi >= thr)),
        int(star[0]),
        float(star[1]) if star[1] >= star[2] else float("nan"),
    )


# chi-square indexing at small n


def tree_index_table(n: int):
    """(trees, lut): every labelled tree on [n] and a table mapping the edge
    bitmask of a tree to its position in ``trees``."""
    from .oracle import enumerate_trees

    npairs = n * (n - 1) // 2
    if npairs > 24:
        raise ValueError("edge-bitmask table only for n <= 7")
    trees = list(enumerate_trees(n))
    lut = np.full(1 << npairs, -1, dtype=np.int64)
    for idx, T in enumerate(trees):
        mask = 0
        for u, v in T.edges:
            mask |= 1 << ((u - 1) * (2 * n - u) // 2 + (v - u - 1))
        lut[mask] = idx
    return trees, lut


def tree_histogram(n: int, M: int, seed=0, method: str = "aldous-broder", block_size: int = 1 << 16) -> np.ndarray:
    """Counts of each labelled tree (indexed as in :func:`tree_index_table`) over M samples."""
    trees, lut = tree_index_table(n)
    counts = np.zeros(len(trees), dtype=np.int64)
    done = 0
    b = 0
    while done < M:
        size = min(block_size, M - done)
        rng = SeedSpec(seed, b).generator()
        if method == "prufer":
            a, c = prufer_block(n, size, rng)
        else:
            a, c = aldous_broder_block(n, size, rng, relabelled=True)
        idx = K.edge_index_block(a, c, lut, n)
        if idx.min() < 0:
            raise AssertionError("sampler produced a non-tree")
        counts += np.bincount(idx, minlength=len(trees))
        done += size
        b += 1
    return counts
