"""Branch decomposition of rooted labelled trees and automorphism counts.

For a root r every vertex i has a multiset of branches (fringe subtrees at
its children).  With N_i(B) the number of branches at i of shape B,

    |Aut_r(T)| = prod_i prod_B N_i(B)!

and restricting the product to branches with at most ``threshold`` vertices
gives the subgroup of small automorphisms.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from . import _shapes
from .tree import LabelledTree


@dataclass(frozen=True)
class BranchShape:
    code: str
    size: int
    labellings: int

    @property
    def aut(self) -> int:
        return math.factorial(self.size) // self.labellings

    @classmethod
    def from_code(cls, code: str) -> "BranchShape":
        size, aut = _code_stats(code)
        return cls(code, size, math.factorial(size) // aut)

    @classmethod
    def singleton(cls) -> "BranchShape":
        return cls.from_code("()")

    @classmethod
    def rooted_edge(cls) -> "BranchShape":
        return cls.from_code("(())")

    @classmethod
    def rooted_at(cls, T: LabelledTree, root: int) -> "BranchShape":
        return cls.from_code(_shapes.rooted_code(T.adj, root))


@lru_cache(maxsize=4096)
def _code_stats(code: str) -> tuple[int, int]:
    """(vertex count, rooted automorphism order) of an uncoloured bracket code."""
    if not code or code[0] != "(":
        raise ValueError(f"malformed shape code {code!r}")
    # stack of child-code lists; each frame collects its children
    stack: list[list[tuple[str, int, int]]] = []
    start: list[int] = []
    result = None
    for pos, ch in enumerate(code):
        if ch == "(":
            if result is not None:
                raise ValueError(f"malformed shape code {code!r}")
            stack.append([])
            start.append(pos)
        elif ch == ")":
            if not stack:
                raise ValueError(f"malformed shape code {code!r}")
            kids = stack.pop()
            s0 = start.pop()
            size = 1 + sum(k[1] for k in kids)
            aut = 1
            for k in kids:
                aut *= k[2]
            for m in Counter(k[0] for k in kids).values():
                aut *= math.factorial(m)
            node = (code[s0 : pos + 1], size, aut)
            if stack:
                stack[-1].append(node)
            else:
                result = node
        else:
            raise ValueError(f"malformed shape code {code!r}")
    if result is None or stack:
        raise ValueError(f"malformed shape code {code!r}")
    return result[1], result[2]


class BranchTable:
    """``table[i]`` maps branch code -> N_i(B) for the tree rooted at ``root``."""

    def __init__(self, T: LabelledTree, root: int = 1):
        if not 1 <= root <= T.n:
            raise ValueError(f"root {root} not in [1, {T.n}]")
        self.root = root
        interner = _shapes.ShapeInterner()
        _, _, ids, sizes, children = _shapes.rooted_ids(T.adj, root, interner)
        self._interner = interner
        self._ids = ids
        self._sizes = sizes
        self._children = children
        self._codes: dict[int, str] = {}

    def code_of(self, sid: int) -> str:
        c = self._codes.get(sid)
        if c is None:
            c = self._codes[sid] = self._interner.code(sid)
        return c

    def counts(self, i: int) -> dict[str, int]:
        cnt = Counter(self._ids[c] for c in self._children[i])
        return {self.code_of(sid): m for sid, m in cnt.items()}

    def __getitem__(self, i: int) -> dict[str, int]:
        return self.counts(i)

    def items(self):
        for v in self._children:
            yield v, self.counts(v)

    def multiplicities(self, threshold: int | None = None):
        """Yield N_i(B) over all (i, B), optionally only for |B| <= threshold."""
        for v, kids in self._children.items():
            cnt = Counter(self._ids[c] for c in kids if threshold is None or self._sizes[c] <= threshold)
            yield from cnt.values()

    def fringe_size(self, v: int) -> int:
        return self._sizes[v]


def branch_table(T: LabelledTree, r: int = 1) -> BranchTable:
    return BranchTable(T, r)


def aut_rooted_order(T: LabelledTree, r: int = 1, threshold: int | None = None) -> int:
    """Exact |Aut_r(T)|, or the small-automorphism order with ``threshold``."""
    out = 1
    for m in branch_table(T, r).multiplicities(threshold):
        if m > 1:
            out *= math.factorial(m)
    return out


def log_aut_rooted(T: LabelledTree, r: int = 1) -> float:
    return math.log(aut_rooted_order(T, r))


def log_aut_small(T: LabelledTree, r: int = 1, threshold: int | None = None) -> float:
    """log |Aut_small|; threshold defaults to floor(4 ln n)."""
    if threshold is None:
        threshold = default_threshold(T.n)
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    return math.log(aut_rooted_order(T, r, threshold))


def default_threshold(n: int) -> int:
    return int(math.floor(4 * math.log(n)))


def aut_full_order(T: LabelledTree) -> int:
    return _shapes.aut_order(T.adj, T.vertices())


def log_aut_full(T: LabelledTree) -> float:
    return math.log(aut_full_order(T))


def lambda_branch(B: BranchShape, n: float | None = None) -> float:
    """L(B) / (e^b b!) * e^{b/(2n)}; ``n=None`` or inf gives the limit."""
    b = B.size
    if b < 1:
        raise ValueError("branch must have at least one vertex")
    corr = 0.0 if n is None or math.isinf(n) else b / (2.0 * n)
    return math.exp(-b + corr) / B.aut


def rooted_unlabelled_trees(s_max: int) -> list[list[BranchShape]]:
    """``out[s]`` lists every rooted unlabelled tree on s vertices, 1 <= s <= s_max."""
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    # flat list ordered by size; each entry (code, size, aut)
    flat: list[tuple[str, int, int]] = []
    out: list[list[BranchShape]] = [[] for _ in range(s_max + 1)]

    def forests(remaining, max_idx):
        # multisets of trees with indices <= max_idx, non-increasing, sizes summing to remaining
        if remaining == 0:
            yield ()
            return
        for idx in range(max_idx, -1, -1):
            sz = flat[idx][1]
            if sz > remaining:
                continue
            for rest in forests(remaining - sz, idx):
                yield (idx,) + rest

    for s in range(1, s_max + 1):
        new = []
        for kids in forests(s - 1, len(flat) - 1):
            code = "(" + "".join(sorted(flat[k][0] for k in kids)) + ")"
            aut = 1
            for k in kids:
                aut *= flat[k][2]
            for m in Counter(kids).values():
                aut *= math.factorial(m)
            new.append((code, s, aut))
        new.sort()
        flat.extend(new)
        out[s] = [BranchShape(c, s, math.factorial(s) // a) for c, _, a in new]
    return out
