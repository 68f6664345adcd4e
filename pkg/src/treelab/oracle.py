"""Exact ground truth at small n.

Everything here is brute force: all n^{n-2} trees from all Pruefer
sequences, automorphisms by backtracking over edge-preserving bijections,
Doob martingales by summing over every attachment vector.  Values are exact
rationals; floats never enter an equality check.
"""

from __future__ import annotations

import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Callable, Iterator


from .sampler import _as_generator, aldous_broder_stage1, prufer_decode
from .tree import LabelledTree, Perturbation, _norm, relabel

MAX_ENUM_N = 9


def _guard(n: int, lo: int = 2, hi: int = MAX_ENUM_N) -> None:
    if not lo <= n <= hi:
        raise ValueError(f"n={n} outside the exact-enumeration range [{lo}, {hi}]")


def enumerate_trees(n: int) -> Iterator[LabelledTree]:
    """Every labelled tree on [n] exactly once."""
    _guard(n)
    for seq in product(range(1, n + 1), repeat=n - 2):
        yield prufer_decode(seq, n)


@dataclass
class ExactDistribution:
    parameter: str
    n: int
    counts: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def mean(self) -> Fraction:
        return sum((Fraction(v) * c for v, c in self.counts.items()), Fraction(0)) / self.total

    @property
    def second_moment(self) -> Fraction:
        return sum((Fraction(v) ** 2 * c for v, c in self.counts.items()), Fraction(0)) / self.total

    @property
    def variance(self) -> Fraction:
        return self.second_moment - self.mean**2


def exact_statistics(n: int, parameter: Callable[[LabelledTree], object], name: str | None = None) -> ExactDistribution:
    _guard(n)
    counts: Counter = Counter()
    for T in enumerate_trees(n):
        counts[parameter(T)] += 1
    return ExactDistribution(name or getattr(parameter, "__name__", "F"), n, dict(counts))


def brute_aut(T: LabelledTree, max_n: int = 8) -> int:
    """Number of permutations of [n] mapping edges to edges.

    Backtracks over images in BFS order, only trying neighbours of the parent's
    image with equal degree; n = max_n + 1 is allowed with a warning.
    """
    n = T.n
    if n > max_n + 1:
        raise ValueError(f"brute_aut limited to n <= {max_n + 1}, got {n}")
    if n == max_n + 1:
        warnings.warn(f"brute_aut at n={n} is slow", RuntimeWarning, stacklevel=2)
    order, parent = T.bfs(1)
    deg = T.degrees()
    img = [0] * (n + 1)
    used = [False] * (n + 1)
    count = 0

    def rec(idx):
        nonlocal count
        if idx == n:
            count += 1
            return
        v = order[idx]
        cands = T.adj[img[parent[v]]] if idx else range(1, n + 1)
        for w in cands:
            if used[w] or deg[w] != deg[v]:
                continue
            img[v] = w
            used[w] = True
            rec(idx + 1)
            used[w] = False

    rec(0)
    return count


def forest_extensions_bruteforce(n: int, components, attach) -> int:
    """Trees on [n] containing every edge of the forest and with
    deg_T(v) = deg_S(v) for all v outside the attachment sets."""
    _guard(n)
    forest_edges = set()
    for comp_edges in components:
        forest_edges.update(_norm(u, v) for u, v in comp_edges)
    deg_s = [0] * (n + 1)
    for u, v in forest_edges:
        deg_s[u] += 1
        deg_s[v] += 1
    allowed = set().union(*map(set, attach))
    fixed = [v for v in range(1, n + 1) if v not in allowed]
    total = 0
    for T in enumerate_trees(n):
        if not forest_edges <= T.edges:
            continue
        if all(len(T.adj[v]) == deg_s[v] for v in fixed):
            total += 1
    return total


@dataclass
class MartingaleTrace:
    """Y_i(u_1..u_i) = E[F_hat(T(U)) | U_1..U_i] for every prefix."""

    n: int
    parameter: str
    levels: list[dict]  # levels[i] maps prefix tuples of length i to Y_i

    @property
    def final(self) -> dict:
        return self.levels[-1]

    def martingale_defects(self) -> list[tuple]:
        """Prefixes where the mean of Y_i over the next draw differs from Y_{i-1}."""
        n = self.n
        bad = []
        for i in range(1, len(self.levels)):
            for prefix, y in self.levels[i - 1].items():
                avg = sum((self.levels[i][prefix + (x,)] for x in range(1, n + 1)), Fraction(0)) / n
                if avg != y:
                    bad.append((i, prefix, y, avg))
        return bad

    def increment_second_moments(self) -> list[Fraction]:
        """E[(Y_i - Y_{i-1})^2] for i = 1..n-1 (all prefixes equally likely)."""
        out = []
        for i in range(1, len(self.levels)):
            prev = self.levels[i - 1]
            s = Fraction(0)
            for prefix, y in self.levels[i].items():
                s += (y - prev[prefix[:-1]]) ** 2
            out.append(s / len(self.levels[i]))
        return out

    def final_variance(self) -> Fraction:
        vals = list(self.final.values())
        m = sum(vals, Fraction(0)) / len(vals)
        return sum(((v - m) ** 2 for v in vals), Fraction(0)) / len(vals)


def doob_stage1_trace(
    n: int, parameter: Callable[[LabelledTree], object], symmetric: bool = True, name: str | None = None
) -> MartingaleTrace:
    """Exact Doob martingale of F_hat(T(U)) over U uniform on [n]^{n-1}.

    For a relabelling-invariant F pass ``symmetric=True`` (F_hat = F).
    Otherwise F_hat(T) averages F over all n! relabellings (n <= 4).
    """
    _guard(n, 2, 5 if symmetric else 4)
    perms = None if symmetric else list(permutations(range(1, n + 1)))

    def fhat(T):
        if perms is None:
            return Fraction(parameter(T))
        return sum((Fraction(parameter(relabel(T, w))) for w in perms), Fraction(0)) / len(perms)

    final = {}
    for u in product(range(1, n + 1), repeat=n - 1):
        final[u] = fhat(aldous_broder_stage1(u))
    levels: list[dict] = [dict() for _ in range(n)]
    levels[n - 1] = final
    # conditional expectations summed directly over all completions
    for i in range(n - 1):
        sums: dict = defaultdict(Fraction)
        for u, v in final.items():
            sums[u[:i]] += v
        width = n ** (n - 1 - i)
        levels[i] = {p: s / width for p, s in sums.items()}
    return MartingaleTrace(n, name or getattr(parameter, "__name__", "F"), levels)


def stage_grid_counts(n: int) -> Counter:
    """How often each tree arises over the full (u, omega) grid of the two-stage sampler."""
    _guard(n, 2, 5)
    counts: Counter = Counter()
    perms = list(permutations(range(1, n + 1)))
    for u in product(range(1, n + 1), repeat=n - 1):
        T = aldous_broder_stage1(u)
        for w in perms:
            counts[relabel(T, w)] += 1
    return counts


def rooted_shape_labellings(s: int) -> dict[str, int]:
    """For every rooted shape on s vertices, the number of labelled trees on
    [s] that have this shape when rooted at 1."""
    from . import _shapes

    if s == 1:
        return {"()": 1}
    _guard(s, 2, 8)
    out: Counter = Counter()
    for T in enumerate_trees(s):
        out[_shapes.rooted_code(T.adj, 1)] += 1
    return dict(out)


# Lipschitz / superposition tester


@dataclass
class PropertyReport:
    trials: int = 0
    perturbations: int = 0
    max_delta: float = 0.0
    lipschitz_violations: int = 0
    superposition_checked: int = 0
    superposition_violations: int = 0
    examples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.lipschitz_violations == 0 and self.superposition_violations == 0


class _Euler:
    """Entry/exit times of a DFS from vertex 1, for O(1) side-of-edge queries."""

    def __init__(self, T: LabelledTree):
        n = T.n
        self.tin = [0] * (n + 1)
        self.tout = [0] * (n + 1)
        self.parent = [0] * (n + 1)
        self.by_time = [0] * n
        t = 0
        stack = [(1, 0, False)]
        while stack:
            v, p, done = stack.pop()
            if done:
                self.tout[v] = t
                continue
            self.parent[v] = p
            self.tin[v] = t
            self.by_time[t] = v
            t += 1
            stack.append((v, p, True))
            for y in T.adj[v]:
                if y != p:
                    stack.append((y, v, False))

    def inside(self, v, c) -> bool:
        return self.tin[c] <= self.tin[v] < self.tout[c]


def random_perturbation(T: LabelledTree, rng, euler: _Euler | None = None) -> Perturbation | None:
    """A uniformly chosen edge ij (random orientation) and a uniform k on j's side."""
    n = T.n
    if n < 3:
        return None
    e = euler or _Euler(T)
    for _ in range(64):
        # tin order puts vertex 1 first, so every c >= 2 has a parent
        c = e.by_time[int(rng.integers(1, n))]
        p = e.parent[c]
        if rng.integers(0, 2):
            i, j = p, c
            lo, hi = e.tin[c], e.tout[c]
            if hi - lo < 2:
                continue
            k = e.by_time[int(rng.integers(lo, hi))]
            if k == j:
                continue
        else:
            i, j = c, p
            lo, hi = e.tin[c], e.tout[c]
            outside = n - (hi - lo)
            if outside < 2:
                continue
            r = int(rng.integers(0, outside))
            k = e.by_time[r if r < lo else r + (hi - lo)]
            if k == j:
                continue
        return Perturbation(i, j, k)
    return None


def _apply(T: LabelledTree, p: Perturbation) -> LabelledTree:
    edges = set(T.edges)
    edges.remove(_norm(p.i, p.j))
    edges.add(_norm(p.i, p.k))
    return LabelledTree._trusted(T.n, edges)


def check_lipschitz_superposable(
    parameter: Callable[[LabelledTree], float],
    n,
    trials: int,
    alpha: float,
    rho: float,
    seed=0,
    per_tree: int = 8,
    tol: float = 1e-9,
    max_examples: int = 5,
) -> PropertyReport:
    """Random search for counterexamples to alpha-Lipschitz / rho-superposable.

    ``n`` is an int or an inclusive (lo, hi) range sampled per tree.  Each
    trial is one pair of perturbations of a fresh-or-reused random tree; both
    single moves feed the Lipschitz check and, when the pair composes to a
    tree with d_T({j,k},{b,c}) >= rho, the additivity identity is checked.
    """
    from .sampler import sample_uniform

    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = _as_generator(seed)
    lo, hi = (n, n) if isinstance(n, int) else (int(n[0]), int(n[1]))
    if lo < 3:
        raise ValueError("perturbations need n >= 3")
    rep = PropertyReport()
    T = None
    F0 = None
    cache: list = []
    while rep.trials < trials:
        if T is None or len(cache) >= per_tree:
            nn = int(rng.integers(lo, hi + 1))
            T = sample_uniform(nn, rng)
            F0 = parameter(T)
            euler = _Euler(T)
            cache = []
        p = random_perturbation(T, rng, euler)
        if p is None:
            T = None
            continue
        Tp = _apply(T, p)
        Fp = parameter(Tp)
        d = abs(Fp - F0)
        rep.perturbations += 1
        rep.max_delta = max(rep.max_delta, float(d))
        if d > alpha + tol:
            rep.lipschitz_violations += 1
            if len(rep.examples) < max_examples:
                rep.examples.append(("lipschitz", T, p, d))
        dist_jk = T.distances_from((p.j, p.k))
        for q, Tq, Fq, _ in cache:
            rep.trials += 1
            if min(dist_jk[q.j], dist_jk[q.k]) < rho or not p.is_valid(Tq):
                continue
            Fpq = parameter(_apply(Tq, p))
            rep.superposition_checked += 1
            if abs((Fpq - F0) - ((Fp - F0) + (Fq - F0))) > tol:
                rep.superposition_violations += 1
                if len(rep.examples) < max_examples:
                    rep.examples.append(("superposition", T, p, q))
            if rep.trials >= trials:
                break
        cache.append((p, Tp, Fp, dist_jk))
    return rep
