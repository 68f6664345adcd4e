"""Rooted shape interning shared by pattern counting and automorphism code.

Trees are given as an adjacency table indexed by label (``adj[v]`` iterable of
neighbours) plus an optional ``allowed`` vertex set restricting attention to
an induced sub-forest.  Shapes are interned bottom-up: a vertex's id is the
index of the sorted tuple of its children's ids (prefixed by its colour), so
two vertices get equal ids iff their fringe subtrees are isomorphic as
rooted, coloured trees.
"""

from __future__ import annotations

from collections import Counter
from math import factorial


class ShapeInterner:
    """Maps (colour, sorted child ids) keys to dense ids, across many trees."""

    def __init__(self):
        self._ids: dict[tuple, int] = {}
        self.keys: list[tuple] = []

    def intern(self, key: tuple) -> int:
        i = self._ids.get(key)
        if i is None:
            i = len(self.keys)
            self._ids[key] = i
            self.keys.append(key)
        return i

    def code(self, sid: int) -> str:
        """Bracket string of a shape; colour 0 / uncoloured prints nothing."""
        memo: dict[int, str] = {}
        stack = [sid]
        while stack:
            s = stack[-1]
            if s in memo:
                stack.pop()
                continue
            colour, kids = self.keys[s]
            missing = [k for k in kids if k not in memo]
            if missing:
                stack.extend(missing)
                continue
            stack.pop()
            inner = "".join(sorted(memo[k] for k in kids))
            tag = "" if colour is None else str(colour)
            memo[s] = "(" + tag + inner + ")"
        return memo[sid]


def bfs_order(adj, root: int, allowed=None) -> tuple[list[int], dict[int, int]]:
    parent = {root: 0}
    order = [root]
    for x in order:
        for y in adj[x]:
            if y not in parent and (allowed is None or y in allowed):
                parent[y] = x
                order.append(y)
    return order, parent


def rooted_ids(adj, root: int, interner: ShapeInterner, colours=None, allowed=None):
    """Return (order, parent, ids, sizes, children) for the tree hung at ``root``."""
    order, parent = bfs_order(adj, root, allowed)
    children: dict[int, list[int]] = {v: [] for v in order}
    for v in order[1:]:
        children[parent[v]].append(v)
    ids: dict[int, int] = {}
    sizes: dict[int, int] = {}
    for v in reversed(order):
        kids = children[v]
        colour = None if colours is None else colours[v]
        ids[v] = interner.intern((colour, tuple(sorted(ids[c] for c in kids))))
        sizes[v] = 1 + sum(sizes[c] for c in kids)
    return order, parent, ids, sizes, children


def rooted_code(adj, root: int, colours=None, allowed=None) -> str:
    interner = ShapeInterner()
    _, _, ids, _, _ = rooted_ids(adj, root, interner, colours, allowed)
    return interner.code(ids[root])


def centers(adj, vertices) -> list[int]:
    """One or two centres of the tree induced on ``vertices`` (iterative leaf stripping)."""
    vs = set(vertices)
    if len(vs) <= 2:
        return sorted(vs)
    deg = {v: sum(1 for y in adj[v] if y in vs) for v in vs}
    layer = [v for v in vs if deg[v] <= 1]
    remaining = len(vs)
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            deg[v] = 0
            for y in adj[v]:
                if y in vs and deg[y] > 0:
                    deg[y] -= 1
                    if deg[y] == 1:
                        nxt.append(y)
        layer = nxt
    return sorted(layer)


def multiplicity_product(ids, children, root, skip=None) -> int:
    """prod over vertices of prod over shapes of (number of equal child shapes)!"""
    out = 1
    for v, kids in children.items():
        counts = Counter(ids[c] for c in kids if c != skip or v != root)
        for m in counts.values():
            if m > 1:
                out *= factorial(m)
    return out


def rooted_aut_order(adj, root: int, colours=None, allowed=None) -> int:
    interner = ShapeInterner()
    _, _, ids, _, children = rooted_ids(adj, root, interner, colours, allowed)
    return multiplicity_product(ids, children, root)


def aut_order(adj, vertices, colours=None) -> int:
    """|Aut| of the (coloured) tree induced on ``vertices``."""
    vertices = list(vertices)
    allowed = set(vertices)
    cs = centers(adj, vertices)
    if len(cs) == 1:
        return rooted_aut_order(adj, cs[0], colours, allowed)
    c1, c2 = cs
    interner = ShapeInterner()
    _, _, ids, _, children = rooted_ids(adj, c1, interner, colours, allowed)
    # c1's half is c1 without the child c2
    half1 = interner.intern(
        (None if colours is None else colours[c1], tuple(sorted(ids[c] for c in children[c1] if c != c2)))
    )
    order = multiplicity_product(ids, children, c1, skip=c2)
    return order * 2 if half1 == ids[c2] else order


def unrooted_code(adj, vertices, colours=None) -> str:
    """Canonical string of an unrooted (coloured) tree: min over centre-rooted codes."""
    allowed = set(vertices)
    return min(rooted_code(adj, c, colours, allowed) for c in centers(adj, allowed))
