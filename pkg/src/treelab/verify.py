"""Cross-checks between the fast code paths and the brute-force oracle.

Each check returns (name, passed, detail).  Used by ``treelab verify`` and
by the test-suite.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

from . import moments, oracle
from .automorphisms import aut_full_order, aut_rooted_order
from .patterns import (
    Pattern,
    path_count,
    path_count_bruteforce,
    pattern_census,
    pattern_count,
    pattern_counts_bruteforce,
)
from .tree import LabelledTree

FIGURE_PATTERN_TREE = LabelledTree(
    12, [(7, 2), (8, 12), (1, 2), (2, 4), (9, 7), (7, 10), (1, 5), (5, 8), (8, 11), (1, 3), (3, 6)]
)
FIGURE_BRANCH_TREE = LabelledTree(9, [(1, 2), (1, 3), (1, 4), (2, 5), (2, 6), (2, 7), (3, 8), (4, 9)])


def small_patterns(max_l: int = 3) -> list[Pattern]:
    """Every (H, theta) with 2 <= l <= max_l, one H per isomorphism class."""
    from . import _shapes

    out = []
    for l in range(2, max_l + 1):
        seen = set()
        for H in oracle.enumerate_trees(l):
            code = _shapes.unrooted_code(H.adj, H.vertices())
            if code in seen:
                continue
            seen.add(code)
            for theta in product((0, 1), repeat=l):
                out.append(Pattern(H, theta))
    return out


def check_sampler_grid(n: int = 4):
    counts = oracle.stage_grid_counts(n)
    total = sum(counts.values())
    vals = set(counts.values())
    ok = len(counts) == n ** (n - 2) and len(vals) == 1
    return "sampler grid", ok, f"{len(counts)} trees, counts {sorted(vals)} of {total}"


def check_figures():
    p101 = pattern_count(FIGURE_PATTERN_TREE, Pattern.path(3, (1, 0, 1)))
    p100 = pattern_count(FIGURE_PATTERN_TREE, Pattern.path(3, (1, 0, 0)))
    aut = aut_rooted_order(FIGURE_BRANCH_TREE, 1)
    ok = (p101, p100, aut) == (2, 1, 12)
    return "figure fixtures", ok, f"N(P3,101)={p101} N(P3,100)={p100} |Aut_1|={aut}"


def check_patterns(n: int, max_l: int = 3):
    """pattern_count against brute force on every tree, and the exact means
    against the closed-form expectation."""
    pats = [P for P in small_patterns(max_l) if P.l <= n]
    bad = 0
    sums = [0] * len(pats)
    for T in oracle.enumerate_trees(n):
        census = {l: pattern_census(T, l) for l in {P.l for P in pats}}
        fast = [census[P.l].get(P._code, 0) for P in pats]
        brute = pattern_counts_bruteforce(T, pats)
        bad += sum(1 for x, y in zip(fast, brute) if x != y)
        sums = [a + b for a, b in zip(sums, fast)]
    total = n ** (n - 2)
    bad_mean = sum(
        1
        for P, s in zip(pats, sums)
        if n > P.l and Fraction(s, total) != moments.pattern_expectation_exact(n, P).exact
    )
    ok = bad == 0 and bad_mean == 0
    return f"pattern counts and means n={n}", ok, f"{bad} count mismatches, {bad_mean} mean mismatches"


def check_pattern_count_direct(n: int, trees: int = 200, seed: int = 0):
    """Single-pattern counting agrees with the census on random trees."""
    from .sampler import sample_uniform

    pats = small_patterns(3)
    bad = 0
    for r in range(trees):
        T = sample_uniform(n, seed * 100003 + r)
        census = {l: pattern_census(T, l) for l in (2, 3)}
        bad += sum(1 for P in pats if pattern_count(T, P) != census[P.l].get(P._code, 0))
    return f"pattern_count vs census n={n}", bad == 0, f"{bad} mismatches"


def check_paths(n: int, max_l: int = 4):
    bad = 0
    for T in oracle.enumerate_trees(n):
        for l in range(2, min(max_l, n) + 1):
            if path_count(T, l) != path_count_bruteforce(T, l):
                bad += 1
    return f"path_count n={n}", bad == 0, f"{bad} mismatches"


def check_aut(n: int):
    bad = 0
    for T in oracle.enumerate_trees(n):
        if aut_full_order(T) != oracle.brute_aut(T):
            bad += 1
    return f"|Aut| n={n}", bad == 0, f"{bad} mismatches"


def check_martingale(n: int = 4):
    tr = oracle.doob_stage1_trace(n, lambda T: sum(1 for v in T.vertices() if len(T.adj[v]) == 1), name="leaves")
    defects = tr.martingale_defects()
    tele = sum(tr.increment_second_moments(), Fraction(0))
    ok = not defects and tele == tr.final_variance()
    return f"martingale n={n}", ok, f"defects={len(defects)} sum E[dY^2]={tele} Var={tr.final_variance()}"


def random_forest_spec(n: int, rng: random.Random):
    """Random partition of [n] into trees with random non-empty attachment sets."""
    verts = list(range(1, n + 1))
    rng.shuffle(verts)
    comps = []
    i = 0
    while i < n:
        size = rng.randint(1, n - i)
        part = verts[i : i + size]
        edges = [(part[t], part[rng.randrange(t)]) for t in range(1, size)]
        attach = rng.sample(part, rng.randint(1, size))
        comps.append((part, edges, attach))
        i += size
    return moments.ForestSpec.build(n, comps), comps


def check_forests(count: int = 100, sizes=(5, 6, 7), seed: int = 0):
    rng = random.Random(seed)
    bad = 0
    for t in range(count):
        n = sizes[t % len(sizes)]
        spec, comps = random_forest_spec(n, rng)
        brute = oracle.forest_extensions_bruteforce(n, [c[1] for c in comps], [c[2] for c in comps])
        if brute != moments.forest_extension_count(spec):
            bad += 1
    edge = moments.ForestSpec.build(4, [([1, 2], [(1, 2)], [1, 2]), ([3], [], [3]), ([4], [], [4])])
    ok_edge = moments.forest_extension_count(edge) == 8 == oracle.forest_extensions_bruteforce(4, [[(1, 2)]], [[1, 2], [3], [4]])
    return "forest lemma", bad == 0 and ok_edge, f"{bad} mismatches of {count}; n=4 edge case {'ok' if ok_edge else 'FAIL'}"


def oracle_suite(n: int = 5) -> list[tuple[str, bool, str]]:
    return [
        check_sampler_grid(4),
        check_figures(),
        check_patterns(n),
        check_paths(n),
        check_aut(n),
        check_pattern_count_direct(12, 50),
        check_martingale(4),
        check_forests(30),
    ]
