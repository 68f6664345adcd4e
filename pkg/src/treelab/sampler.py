"""Uniform random labelled trees.

Two independent routes are provided: the two-stage Aldous-Broder construction
for the complete graph (attach vertex i+1 to min(i, U_i), then relabel by a
uniform permutation) and Pruefer decoding of a uniform sequence.

Randomness comes from counter-based Philox streams keyed on
``(seed, stream)``, so a replicate block always sees the same draws no matter
which worker evaluates it.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tree import LabelledTree, relabel


@dataclass(frozen=True)
class SeedSpec:
    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.Philox(ss))


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.generator()
    return SeedSpec(int(seed)).generator()


def _check_attachment(u: Sequence[int]) -> int:
    n = len(u) + 1
    if n < 2:
        raise ValueError("attachment vector must have length n-1 >= 1")
    for x in u:
        if not 1 <= int(x) <= n:
            raise ValueError(f"attachment entry {x} outside [1, {n}]")
    return n


def aldous_broder_stage1(u: Sequence[int]) -> LabelledTree:
    """Tree T(u): for i = 1..n-1 join vertex i+1 to min(i, u_i)."""
    n = _check_attachment(u)
    return LabelledTree._trusted(n, ((i + 1, min(i, int(u[i - 1]))) for i in range(1, n)))


def sample_uniform(n: int, seed) -> LabelledTree:
    """One uniform labelled tree via Aldous-Broder stage I + stage II."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = _as_generator(seed)
    u = rng.integers(1, n + 1, size=n - 1)
    omega = rng.permutation(n) + 1
    return relabel(aldous_broder_stage1(u.tolist()), omega.tolist())


def prufer_decode(seq: Sequence[int], n: int | None = None) -> LabelledTree:
    """Smallest-leaf Pruefer decoding; ``n`` defaults to len(seq) + 2."""
    seq = [int(x) for x in seq]
    if n is None:
        n = len(seq) + 2
    if len(seq) != n - 2:
        raise ValueError(f"Pruefer sequence for n={n} must have length {n - 2}")
    for x in seq:
        if not 1 <= x <= n:
            raise ValueError(f"Pruefer entry {x} outside [1, {n}]")
    degree = [1] * (n + 1)
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(1, n + 1) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return LabelledTree._trusted(n, edges)


def prufer_encode(T: LabelledTree) -> list[int]:
    n = T.n
    degree = T.degrees()
    removed = [False] * (n + 1)
    leaves = [v for v in range(1, n + 1) if degree[v] == 1]
    heapq.heapify(leaves)
    seq = []
    for _ in range(n - 2):
        leaf = heapq.heappop(leaves)
        removed[leaf] = True
        nb = next(y for y in T.adj[leaf] if not removed[y])
        seq.append(nb)
        degree[nb] -= 1
        if degree[nb] == 1:
            heapq.heappush(leaves, nb)
    return seq


def sample_prufer(n: int, seed) -> LabelledTree:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = _as_generator(seed)
    return prufer_decode(rng.integers(1, n + 1, size=n - 2).tolist(), n)


def sample_trees(n: int, count: int, seed: int, method: str = "aldous-broder") -> list[LabelledTree]:
    """``count`` trees; tree r is drawn from stream ``SeedSpec(seed, r)``."""
    draw = {"aldous-broder": sample_uniform, "prufer": sample_prufer}.get(method)
    if draw is None:
        raise ValueError(f"unknown sampling method {method!r}")
    return [draw(n, SeedSpec(seed, r)) for r in range(count)]


# Batch sampling.  Each block of replicates owns one stream; arrays use 1-based
# labels and store edge r of a tree as (a[r], b[r]).

def stage1_parents_block(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Parents of vertices 2..n in T(U) for ``size`` independent U."""
    U = rng.integers(1, n + 1, size=(size, n - 1), dtype=np.int64)
    return np.minimum(U, np.arange(1, n, dtype=np.int64))


def aldous_broder_block(n: int, size: int, rng: np.random.Generator, relabelled: bool = True):
    """Edge arrays ``(a, b)`` of shape (size, n-1) for uniform trees.

    With ``relabelled=False`` stage II is skipped and the trees are returned
    as T(U), rooted at 1 with every parent label below its child; only use
    this for label-invariant statistics.
    """
    parents = stage1_parents_block(n, size, rng)
    child = np.broadcast_to(np.arange(2, n + 1, dtype=np.int64), parents.shape)
    if not relabelled:
        return np.ascontiguousarray(child), parents
    X = rng.permuted(np.broadcast_to(np.arange(1, n + 1, dtype=np.int64), (size, n)), axis=1)
    a = X[:, 1:]
    b = np.take_along_axis(X, parents - 1, axis=1)
    return np.ascontiguousarray(a), np.ascontiguousarray(b)


def prufer_block(n: int, size: int, rng: np.random.Generator):
    from ._kernels import prufer_decode_block

    seqs = rng.integers(1, n + 1, size=(size, max(n - 2, 0)), dtype=np.int64)
    return prufer_decode_block(seqs, n)
