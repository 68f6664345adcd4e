from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treelab import _kernels as K
from treelab.automorphisms import aut_full_order, aut_rooted_order, branch_table
from treelab.harness import tree_index_table
from treelab.sampler import aldous_broder_block, stage1_parents_block
from treelab.tree import LabelledTree, beta, path, star


def _tree(par_row, n):
    return LabelledTree(n, [(v, int(par_row[v - 2])) for v in range(2, n + 1)])


def _block(n, size, seed):
    return stage1_parents_block(n, size, np.random.default_rng(seed))


def test_log_factorials():
    lf = K.log_factorials(10)
    assert lf[0] == 0 and lf[10] == pytest.approx(math.log(math.factorial(10)))


@given(st.integers(2, 40), st.integers(0, 10**6))
def test_degree_stats(n, seed):
    par = _block(n, 8, seed)
    out = K.degree_stats_block(par, n)
    for r in range(8):
        T = _tree(par[r], n)
        d = T.degrees()[1:]
        assert out[r, 0] == sum(1 for x in d if x == 1)
        assert out[r, 1] == sum(x * (x - 1) // 2 for x in d)
        assert out[r, 2] == max(d)


@given(st.integers(2, 60), st.integers(0, 10**6), st.integers(0, 6))
def test_aut_stage1_matches_exact(n, seed, thr):
    par = _block(n, 6, seed)
    out = K.aut_stage1_block(par, n, thr)
    for r in range(6):
        T = _tree(par[r], n)
        assert out[r, 0] == pytest.approx(math.log(aut_rooted_order(T, 1)), abs=1e-9)
        assert out[r, 1] == pytest.approx(math.log(aut_rooted_order(T, 1, thr)), abs=1e-9)
        assert out[r, 2] == pytest.approx(math.log(aut_full_order(T)), abs=1e-9)


@pytest.mark.parametrize("T", [star(9), path(9), path(2), LabelledTree(6, [(1, 2), (2, 3), (3, 4), (4, 5), (3, 6)])])
def test_aut_stage1_fixtures(T):
    # relabel so that every parent (towards 1) has a smaller label
    order, parent = T.bfs(1)
    pos = {v: i + 1 for i, v in enumerate(order)}
    par = np.array([[pos[parent[v]] for v in sorted(order[1:], key=pos.get)]], np.int64)
    out = K.aut_stage1_block(par, T.n, T.n)
    assert out[0, 0] == pytest.approx(math.log(aut_rooted_order(T, 1)))
    assert out[0, 2] == pytest.approx(math.log(aut_full_order(T)))


@given(st.integers(3, 40), st.integers(0, 10**6))
def test_aut_edges_matches_exact(n, seed):
    rng = np.random.default_rng(seed)
    a, b = aldous_broder_block(n, 5, rng)
    roots = rng.integers(1, n + 1, size=5)
    out = K.aut_edges_block(a, b, roots, n, 3)
    for r in range(5):
        T = LabelledTree(n, zip(a[r].tolist(), b[r].tolist()))
        assert out[r, 0] == pytest.approx(math.log(aut_rooted_order(T, int(roots[r]))), abs=1e-9)
        assert out[r, 1] == pytest.approx(math.log(aut_rooted_order(T, int(roots[r]), 3)), abs=1e-9)
        assert out[r, 2] == pytest.approx(math.log(aut_full_order(T)), abs=1e-9)


@given(st.integers(3, 40), st.integers(0, 10**6))
def test_branch_block_matches_table(n, seed):
    rng = np.random.default_rng(seed)
    par = stage1_parents_block(n, 10, rng)
    roots = rng.integers(1, n + 1, size=10)
    verts = rng.integers(1, n, size=10)
    verts += verts >= roots
    out = K.branch_block(par, roots, verts, n)
    for r in range(10):
        bt = branch_table(_tree(par[r], n), int(roots[r]))[int(verts[r])]
        assert out[r, 0] == bt.get("()", 0)
        assert out[r, 1] == bt.get("(())", 0)


@given(st.integers(2, 40), st.integers(0, 10**6), st.integers(1, 6))
def test_beta_window_brackets_beta(n, seed, D):
    par = _block(n, 6, seed)
    out = K.beta_window_block(par, n, D)
    full = K.beta_window_block(par, n, n)
    for r in range(6):
        T = _tree(par[r], n)
        b = float(beta(T))
        assert out[r, 0] == max(T.degrees())
        assert out[r, 1] <= b + 1e-12 <= out[r, 2] + 2e-12
        assert full[r, 1] == pytest.approx(b)


def test_beta_window_star():
    n = 50
    out = K.beta_window_block(np.ones((1, n - 1), np.int64), n, 5)
    assert tuple(out[0]) == (n - 1, n - 1, n - 1)


def test_edge_index_block_roundtrip():
    trees, lut = tree_index_table(5)
    a = np.array([[u for u, _ in T.sorted_edges()] for T in trees], np.int64)
    b = np.array([[v for _, v in T.sorted_edges()] for T in trees], np.int64)
    assert (K.edge_index_block(b, a, lut, 5) == np.arange(len(trees))).all()
