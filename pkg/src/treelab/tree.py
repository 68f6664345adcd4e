"""Labelled trees on [n] = {1, ..., n}: construction, distances, beta, perturbations."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class TreeError(ValueError):
    """Raised when an edge list does not describe a tree on [n]."""


class PerturbationError(ValueError):
    reason = "invalid"


class EdgeAbsentError(PerturbationError):
    reason = "edge-absent"


class CycleError(PerturbationError):
    reason = "cycle"


class EdgePresentError(CycleError):
    # ik in T forces the j-k path to be j, i, k, so this is a special cycle.
    reason = "edge-present"


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class LabelledTree:
    """An immutable tree on the vertex labels 1..n.

    ``adj[v]`` is the sorted tuple of neighbours of ``v``; ``adj[0]`` is empty
    so that labels can index it directly.
    """

    __slots__ = ("n", "edges", "adj", "_hash")

    def __init__(self, n: int, edges: Iterable[Sequence[int]]):
        n = int(n)
        if n < 2:
            raise TreeError(f"need n >= 2, got {n}")
        normed = set()
        for e in edges:
            if len(e) != 2:
                raise TreeError(f"malformed edge {e!r}")
            u, v = int(e[0]), int(e[1])
            if not (1 <= u <= n and 1 <= v <= n):
                raise TreeError(f"label out of range in edge ({u}, {v}) for n={n}")
            if u == v:
                raise TreeError(f"loop at vertex {u}")
            normed.add(_norm(u, v))
        if len(normed) != n - 1:
            raise TreeError(f"expected {n - 1} distinct edges, got {len(normed)}")
        nbrs: list[list[int]] = [[] for _ in range(n + 1)]
        for u, v in normed:
            nbrs[u].append(v)
            nbrs[v].append(u)
        # n-1 edges + connected => acyclic
        seen = [False] * (n + 1)
        seen[1] = True
        stack = [1]
        count = 1
        while stack:
            x = stack.pop()
            for y in nbrs[x]:
                if not seen[y]:
                    seen[y] = True
                    count += 1
                    stack.append(y)
        if count != n:
            raise TreeError("edge list is not connected (contains a cycle)")
        self._set(n, frozenset(normed), nbrs)

    def _set(self, n, edges, nbrs):
        self.n = n
        self.edges = edges
        self.adj = tuple(tuple(sorted(x)) for x in nbrs)
        self._hash = None

    @classmethod
    def _trusted(cls, n: int, edges: Iterable[tuple[int, int]]) -> "LabelledTree":
        """Build without validation; callers guarantee a tree."""
        obj = cls.__new__(cls)
        es = frozenset(_norm(u, v) for u, v in edges)
        nbrs: list[list[int]] = [[] for _ in range(n + 1)]
        for u, v in es:
            nbrs[u].append(v)
            nbrs[v].append(u)
        obj._set(n, es, nbrs)
        return obj

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def degrees(self) -> list[int]:
        """Degrees indexed by label (index 0 is unused and 0)."""
        return [len(a) for a in self.adj]

    def has_edge(self, u: int, v: int) -> bool:
        return _norm(u, v) in self.edges

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def bfs(self, root: int) -> tuple[list[int], list[int]]:
        """Return (order, parent) of a breadth-first search from ``root``.

        ``parent[root]`` is 0.
        """
        parent = [0] * (self.n + 1)
        parent[root] = -1
        order = [root]
        adj = self.adj
        for x in order:
            for y in adj[x]:
                if parent[y] == 0:
                    parent[y] = x
                    order.append(y)
        parent[root] = 0
        return order, parent

    def distances_from(self, sources: Iterable[int]) -> list[int]:
        """Multi-source BFS distances; -1 never occurs for a tree."""
        dist = [-1] * (self.n + 1)
        q = deque()
        for s in sources:
            if dist[s] != 0:
                dist[s] = 0
                q.append(s)
        adj = self.adj
        while q:
            x = q.popleft()
            dx = dist[x] + 1
            for y in adj[x]:
                if dist[y] < 0:
                    dist[y] = dx
                    q.append(y)
        return dist

    def __eq__(self, other):
        if not isinstance(other, LabelledTree):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.edges))
        return self._hash

    def __repr__(self):
        return f"LabelledTree(n={self.n}, edges={self.sorted_edges()})"


def build_tree(n: int, edges: Iterable[Sequence[int]]) -> LabelledTree:
    return LabelledTree(n, edges)


def star(n: int, center: int = 1) -> LabelledTree:
    return LabelledTree(n, [(center, v) for v in range(1, n + 1) if v != center])


def path(n: int) -> LabelledTree:
    return LabelledTree(n, [(v, v + 1) for v in range(1, n)])


def _check_vertex_set(T: LabelledTree, A) -> list[int]:
    A = list(A)
    if not A:
        raise ValueError("vertex set must be non-empty")
    for v in A:
        if not 1 <= v <= T.n:
            raise ValueError(f"vertex {v} not in [1, {T.n}]")
    return A


def distance(T: LabelledTree, A: Iterable[int] | int, B: Iterable[int] | int) -> int:
    """Number of edges between the closest pair (a, b) with a in A, b in B."""
    if isinstance(A, int):
        A = (A,)
    if isinstance(B, int):
        B = (B,)
    A = _check_vertex_set(T, A)
    B = set(_check_vertex_set(T, B))
    dist = [-1] * (T.n + 1)
    q = deque()
    for a in A:
        if a in B:
            return 0
        dist[a] = 0
        q.append(a)
    adj = T.adj
    while q:
        x = q.popleft()
        for y in adj[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                if y in B:
                    return dist[y]
                q.append(y)
    raise AssertionError("unreachable for a tree")


def layer_sizes(T: LabelledTree, i: int) -> list[int]:
    """``out[d]`` is the number of vertices at distance exactly d from ``i``."""
    dist = T.distances_from((i,))
    out = [0] * (max(dist) + 1)
    for v in range(1, T.n + 1):
        out[dist[v]] += 1
    return out


def beta(T: LabelledTree) -> Fraction:
    """max over vertices i and radii d >= 1 of |{j : d(i, j) = d}| / d, exactly."""
    best = Fraction(0)
    for i in T.vertices():
        layers = layer_sizes(T, i)
        for d in range(1, len(layers)):
            if layers[d] > best * d:
                best = Fraction(layers[d], d)
    return best


def beta_float(T: LabelledTree) -> float:
    return float(beta(T))


@dataclass(frozen=True)
class Perturbation:
    """The move S_i^{jk}: delete edge ij, insert edge ik."""

    i: int
    j: int
    k: int

    def __post_init__(self):
        if len({self.i, self.j, self.k}) != 3:
            raise ValueError(f"perturbation labels must be distinct: {self}")

    def check(self, T: LabelledTree) -> None:
        i, j, k = self.i, self.j, self.k
        for v in (i, j, k):
            if not 1 <= v <= T.n:
                raise ValueError(f"vertex {v} not in [1, {T.n}]")
        if not T.has_edge(i, j):
            raise EdgeAbsentError(f"edge {i}-{j} is not in the tree")
        if T.has_edge(i, k):
            raise EdgePresentError(f"edge {i}-{k} is already in the tree")
        if _on_path(T, j, k, i):
            raise CycleError(f"path {j}..{k} passes through {i}")

    def is_valid(self, T: LabelledTree) -> bool:
        try:
            self.check(T)
        except PerturbationError:
            return False
        return True

    def inverse(self) -> "Perturbation":
        return Perturbation(self.i, self.k, self.j)


def _on_path(T: LabelledTree, a: int, b: int, x: int) -> bool:
    """Whether x lies on the a-b path in T."""
    _, parent = T.bfs(a)
    v = b
    while v:
        if v == x:
            return True
        v = parent[v]
    return False


def perturb(T: LabelledTree, p: Perturbation) -> LabelledTree:
    p.check(T)
    edges = set(T.edges)
    edges.remove(_norm(p.i, p.j))
    edges.add(_norm(p.i, p.k))
    return LabelledTree._trusted(T.n, edges)


def relabel(T: LabelledTree, omega: Sequence[int]) -> LabelledTree:
    """Vertex v becomes omega[v - 1]; edge uv becomes omega_u omega_v."""
    omega = [int(x) for x in omega]
    if len(omega) != T.n or sorted(omega) != list(range(1, T.n + 1)):
        raise ValueError("omega must be a permutation of 1..n")
    return LabelledTree._trusted(T.n, ((omega[u - 1], omega[v - 1]) for u, v in T.edges))


def format_tree(T: LabelledTree) -> str:
    lines = [str(T.n)]
    lines.extend(f"{u} {v}" for u, v in T.sorted_edges())
    return "\n".join(lines) + "\n"


def format_trees(trees: Iterable[LabelledTree]) -> str:
    return "\n".join(format_tree(T) for T in trees)


def parse_trees(text: str) -> list[LabelledTree]:
    """Parse blank-line separated blocks of the "n" / "u v" text format."""
    trees = []
    block: list[str] = []
    for raw in text.splitlines() + [""]:
        line = raw.strip()
        if line.startswith("#"):
            continue
        if line:
            block.append(line)
            continue
        if not block:
            continue
        n = int(block[0])
        edges = []
        for ln in block[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise TreeError(f"bad edge line {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
        trees.append(LabelledTree(n, edges))
        block = []
    return trees


def parse_tree(text: str) -> LabelledTree:
    trees = parse_trees(text)
    if len(trees) != 1:
        raise TreeError(f"expected one tree, found {len(trees)}")
    return trees[0]
