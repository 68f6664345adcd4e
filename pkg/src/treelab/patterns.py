"""Tree parameters built from local structure: degree counts, rooted shape
codes, generalised pattern counts N_{H,theta} and path counts P_l."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from . import _shapes
from .tree import LabelledTree, layer_sizes

ShapeCode = str


def degree_count(T: LabelledTree, d: int) -> int:
    if d < 1:
        raise ValueError("degree must be >= 1")
    return sum(1 for v in T.vertices() if len(T.adj[v]) == d)


def leaf_count(T: LabelledTree) -> int:
    return degree_count(T, 1)


def canonical_code(T: LabelledTree, root: int) -> ShapeCode:
    """AHU bracket code of T hung at ``root``; equal iff rooted-isomorphic."""
    if not 1 <= root <= T.n:
        raise ValueError(f"root {root} not in [1, {T.n}]")
    return _shapes.rooted_code(T.adj, root)


def fringe_code(T: LabelledTree, root: int, v: int) -> ShapeCode:
    """Code of the fringe subtree at ``v`` when T is rooted at ``root``."""
    _, parent = T.bfs(root)
    allowed = set()
    stack = [v]
    while stack:
        x = stack.pop()
        allowed.add(x)
        stack.extend(y for y in T.adj[x] if parent[y] == x)
    return _shapes.rooted_code(T.adj, v, allowed=allowed)


@dataclass(frozen=True)
class Pattern:
    """A tree H on [l] with a 0/1 vector theta; theta_i = 1 marks an
    "empty" vertex that may have further neighbours in the host tree."""

    H: LabelledTree
    theta: tuple[int, ...]
    _code: str = field(init=False, repr=False, compare=False)
    _degs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        theta = tuple(int(t) for t in self.theta)
        if len(theta) != self.H.n:
            raise ValueError(f"theta has length {len(theta)}, H has {self.H.n} vertices")
        if any(t not in (0, 1) for t in theta):
            raise ValueError("theta entries must be 0 or 1")
        object.__setattr__(self, "theta", theta)
        colours = (None,) + theta
        object.__setattr__(self, "_code", _shapes.unrooted_code(self.H.adj, self.H.vertices(), colours))
        object.__setattr__(self, "_degs", tuple(sorted(self.H.degrees()[1:])))

    @classmethod
    def from_edges(cls, l: int, edges, theta) -> "Pattern":
        return cls(LabelledTree(l, edges), tuple(theta))

    @classmethod
    def path(cls, l: int, theta=None) -> "Pattern":
        theta = (1,) * l if theta is None else theta
        return cls(LabelledTree(l, [(i, i + 1) for i in range(1, l)]), tuple(theta))

    @property
    def l(self) -> int:
        return self.H.n

    @property
    def s(self) -> int:
        return sum(self.theta)

    def aut_order(self) -> int:
        """Number of automorphisms of H that preserve theta."""
        return _shapes.aut_order(self.H.adj, self.H.vertices(), (None,) + self.theta)

    def to_json(self) -> str:
        return json.dumps({"l": self.l, "edges": [list(e) for e in self.H.sorted_edges()], "theta": list(self.theta)})

    @classmethod
    def from_json(cls, text) -> "Pattern":
        d = json.loads(text) if isinstance(text, (str, bytes)) else text
        return cls.from_edges(int(d["l"]), d["edges"], d["theta"])


def _host(T: LabelledTree, keep=None):
    """Adjacency of the host forest: T itself or T induced on ``keep``."""
    if keep is None:
        return T.adj, list(T.vertices())
    keep = set(keep)
    adj = [()] * (T.n + 1)
    for v in keep:
        adj[v] = tuple(y for y in T.adj[v] if y in keep)
    return adj, sorted(keep)


def connected_subsets(adj, vertices: Iterable[int], k: int):
    """Every connected k-subset exactly once (ESU enumeration)."""
    if k < 1:
        return
    for v in vertices:
        ext = [u for u in adj[v] if u > v]
        yield from _extend([v], {v}, ext, v, k, adj)


def _extend(sub, subset, ext, v, k, adj):
    if len(sub) == k:
        yield frozenset(sub)
        return
    ext = list(ext)
    # vertices adjacent to the current subgraph
    nbhd = set(subset)
    for x in sub:
        nbhd.update(adj[x])
    while ext:
        w = ext.pop()
        excl = [u for u in adj[w] if u > v and u not in nbhd]
        sub.append(w)
        subset.add(w)
        yield from _extend(sub, subset, ext + excl, v, k, adj)
        sub.pop()
        subset.discard(w)


def pattern_count(T: LabelledTree, P: Pattern, degree_cap: int | None = None) -> int:
    """Number of occurrence pairs (U, W) of (H, theta) in T.

    With ``degree_cap`` the host is the forest induced on vertices of degree
    at most the cap, and "outside edges" are edges of that forest.
    """
    keep = None
    if degree_cap is not None:
        keep = [v for v in T.vertices() if len(T.adj[v]) <= degree_cap]
    adj, verts = _host(T, keep)
    return _count_in_forest(adj, verts, P)


def _count_in_forest(adj, verts, P: Pattern) -> int:
    l, s = P.l, P.s
    total = 0
    for U in connected_subsets(adj, verts, l):
        boundary = [u for u in U if any(y not in U for y in adj[u])]
        if len(boundary) > s:
            continue
        local = {u: tuple(y for y in adj[u] if y in U) for u in U}
        if tuple(sorted(len(x) for x in local.values())) != P._degs:
            continue
        free = [u for u in U if u not in boundary]
        for extra in combinations(free, s - len(boundary)):
            W = set(boundary).union(extra)
            colours = {u: (1 if u in W else 0) for u in U}
            if _shapes.unrooted_code(local, U, colours) == P._code:
                total += 1
    return total


def pattern_census(T: LabelledTree, l: int, degree_cap: int | None = None) -> dict[str, int]:
    """Occurrence counts of every (H, theta) on l vertices at once.

    Keys are the coloured canonical codes used by :class:`Pattern`, so
    ``census.get(P._code, 0) == pattern_count(T, P)`` for every P with P.l == l.
    """
    keep = None
    if degree_cap is not None:
        keep = [v for v in T.vertices() if len(T.adj[v]) <= degree_cap]
    adj, verts = _host(T, keep)
    out: dict[str, int] = {}
    for U in connected_subsets(adj, verts, l):
        boundary = [u for u in U if any(y not in U for y in adj[u])]
        local = {u: tuple(y for y in adj[u] if y in U) for u in U}
        free = [u for u in U if u not in boundary]
        for r in range(len(free) + 1):
            for extra in combinations(free, r):
                W = set(boundary).union(extra)
                code = _shapes.unrooted_code(local, U, {u: (1 if u in W else 0) for u in U})
                out[code] = out.get(code, 0) + 1
    return out


def ordered_embeddings(T: LabelledTree, P: Pattern) -> int:
    """Injective maps phi: V(H) -> [n] carrying H onto an occurrence.

    Equals pattern_count * |Aut(H, theta)|; used as a cross-check.
    """
    H, theta = P.H, P.theta
    l = H.n
    order, parent = H.bfs(1)
    hdeg = H.degrees()
    count = 0
    phi = [0] * (l + 1)
    used = set()

    def ok(hv, tv):
        if theta[hv - 1] == 0 and len(T.adj[tv]) != hdeg[hv]:
            return False
        return True

    def rec(idx):
        nonlocal count
        if idx == l:
            count += 1
            return
        hv = order[idx]
        cands = T.adj[phi[parent[hv]]] if idx else T.vertices()
        for tv in cands:
            if tv in used or not ok(hv, tv):
                continue
            phi[hv] = tv
            used.add(tv)
            rec(idx + 1)
            used.discard(tv)

    rec(0)
    return count


def good_vertices(T: LabelledTree, c) -> list[int]:
    """Vertices i with |{j : d(i, j) = d}| <= d * c for every d >= 1."""
    c = Fraction(c) if not isinstance(c, float) else c
    out = []
    for i in T.vertices():
        layers = layer_sizes(T, i)
        if all(layers[d] <= d * c for d in range(1, len(layers))):
            out.append(i)
    return out


def path_count(T: LabelledTree, l: int, beta_filter=None) -> int:
    """Number of vertex sets inducing a path on ``l`` vertices.

    With ``beta_filter`` = c, count inside T[V_good] where V_good is
    :func:`good_vertices` (T, c).
    """
    if l < 2:
        raise ValueError("path length l must be >= 2")
    keep = None if beta_filter is None else good_vertices(T, beta_filter)
    adj, verts = _host(T, keep)
    target = l - 1
    total = 0
    for src in verts:
        dist = {src: 0}
        frontier = [src]
        for d in range(1, target + 1):
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = d
                        nxt.append(y)
            frontier = nxt
        # after target rounds the frontier is the sphere of radius l-1
        total += sum(1 for y in frontier if y > src)
    return total


def pattern_count_bruteforce(T: LabelledTree, P: Pattern) -> int:
    """Reference count: all l-subsets U, all bijections V(H) -> U."""
    from itertools import permutations

    l = P.l
    Hedges = [(u - 1, v - 1) for u, v in P.H.edges]
    found = set()
    for U in combinations(T.vertices(), l):
        Uset = set(U)
        induced = sum(1 for a, b in combinations(U, 2) if T.has_edge(a, b))
        if induced != l - 1:
            continue
        for img in permutations(U):
            if not all(T.has_edge(img[a], img[b]) for a, b in Hedges):
                continue
            W = frozenset(img[i] for i in range(l) if P.theta[i] == 1)
            if any(y not in Uset for u in Uset - W for y in T.adj[u]):
                continue
            found.add((frozenset(U), W))
    return len(found)


def pattern_counts_bruteforce(T: LabelledTree, patterns: Sequence[Pattern]) -> list[int]:
    """:func:`pattern_count_bruteforce` for many patterns, sharing the subset scan."""
    from itertools import permutations

    found = [set() for _ in patterns]
    by_l: dict[int, list[int]] = {}
    for idx, P in enumerate(patterns):
        by_l.setdefault(P.l, []).append(idx)
    for l, idxs in by_l.items():
        Hedges = {idx: [(u - 1, v - 1) for u, v in patterns[idx].H.edges] for idx in idxs}
        for U in combinations(T.vertices(), l):
            Uset = set(U)
            if sum(1 for a, b in combinations(U, 2) if T.has_edge(a, b)) != l - 1:
                continue
            for img in permutations(U):
                for idx in idxs:
                    P = patterns[idx]
                    if not all(T.has_edge(img[a], img[b]) for a, b in Hedges[idx]):
                        continue
                    W = frozenset(img[i] for i in range(l) if P.theta[i] == 1)
                    if any(y not in Uset for u in Uset - W for y in T.adj[u]):
                        continue
                    found[idx].add((frozenset(U), W))
    return [len(f) for f in found]


def path_count_bruteforce(T: LabelledTree, l: int) -> int:
    """Reference count: l-subsets inducing a connected subgraph with max degree <= 2."""
    total = 0
    for U in combinations(T.vertices(), l):
        Uset = set(U)
        degs = [sum(1 for y in T.adj[u] if y in Uset) for u in U]
        if sum(degs) == 2 * (l - 1) and max(degs) <= 2:
            # l-1 induced edges on l vertices in a forest => connected
            total += 1
    return total
