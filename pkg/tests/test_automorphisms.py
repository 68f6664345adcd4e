from __future__ import annotations

import math
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from strategies import trees
from treelab.automorphisms import (
    BranchShape,
    aut_full_order,
    aut_rooted_order,
    branch_table,
    default_threshold,
    lambda_branch,
    log_aut_full,
    log_aut_rooted,
    log_aut_small,
    rooted_unlabelled_trees,
)
from treelab.oracle import brute_aut, rooted_shape_labellings
from treelab.tree import path, relabel, star


def _brute_rooted(T, r):
    n = T.n
    out = 0
    for p in permutations(range(1, n + 1)):
        if p[r - 1] != r:
            continue
        if all(T.has_edge(p[u - 1], p[v - 1]) for u, v in T.edges):
            out += 1
    return out


def test_branch_table_figure(branch_tree):
    bt = branch_table(branch_tree, 1)
    assert bt[2] == {"()": 3}
    assert bt[1] == {"(()()())": 1, "(())": 2}
    assert bt[5] == {}
    assert bt.fringe_size(2) == 4


def test_rooted_examples(branch_tree):
    assert aut_rooted_order(branch_tree, 1) == 12
    assert log_aut_rooted(branch_tree, 1) == pytest.approx(math.log(12))
    assert log_aut_rooted(path(7), 1) == 0
    assert log_aut_rooted(star(7), 1) == pytest.approx(math.log(720))


def test_small_examples(branch_tree):
    assert log_aut_small(branch_tree, 1, threshold=1) == pytest.approx(math.log(6))
    assert log_aut_small(branch_tree, 1, threshold=9) == log_aut_rooted(branch_tree, 1)
    assert log_aut_small(star(8), 1, threshold=1) == pytest.approx(math.log(math.factorial(7)))
    assert default_threshold(10000) == 36
    with pytest.raises(ValueError):
        log_aut_small(star(5), 1, threshold=-1)


def test_full_examples(branch_tree):
    assert log_aut_full(path(6)) == pytest.approx(math.log(2))
    assert aut_full_order(path(5)) == 2
    assert aut_full_order(star(5)) == 24
    assert aut_full_order(branch_tree) == 12


def test_lambda_branch_limits():
    assert lambda_branch(BranchShape.singleton()) == pytest.approx(0.3678794, abs=1e-7)
    assert lambda_branch(BranchShape.rooted_edge()) == pytest.approx(0.1353353, abs=1e-7)
    assert lambda_branch(BranchShape.singleton(), 10) == pytest.approx(math.exp(-1 + 0.05))
    assert lambda_branch(BranchShape.singleton(), math.inf) == lambda_branch(BranchShape.singleton())


def test_branch_shape_codes():
    assert BranchShape.singleton().aut == 1
    B = BranchShape.from_code("(()()())")
    assert (B.size, B.aut, B.labellings) == (4, 6, 4)
    with pytest.raises(ValueError):
        BranchShape.from_code("x")


def test_rooted_unlabelled_counts():
    shapes = rooted_unlabelled_trees(9)
    assert [len(shapes[s]) for s in range(1, 10)] == [1, 1, 2, 4, 9, 20, 48, 115, 286]
    # sum_B s!/|Aut(B)| = s^{s-1} rooted labelled trees
    for s in range(1, 10):
        assert sum(B.labellings for B in shapes[s]) == s ** (s - 1)


@pytest.mark.parametrize("s", [1, 2, 3, 4, 5, 6])
def test_labellings_match_enumeration(s):
    shapes = rooted_unlabelled_trees(s)[s]
    want = rooted_shape_labellings(s)
    # rooting at 1 fixes one label, so each shape appears labellings/s times
    assert {B.code: B.labellings // s for B in shapes} == want


@given(trees(2, 8))
def test_full_matches_bruteforce(T):
    assert aut_full_order(T) == brute_aut(T)


@given(trees(2, 7), st.data())
def test_rooted_matches_bruteforce(T, data):
    r = data.draw(st.integers(1, T.n))
    assert aut_rooted_order(T, r) == _brute_rooted(T, r)


@given(trees(2, 30), st.permutations(range(1, 31)), st.integers(0, 10))
def test_invariance_and_divisibility(T, perm, thr):
    omega = [v for v in perm if v <= T.n]
    T2 = relabel(T, omega)
    assert aut_full_order(T2) == aut_full_order(T)
    assert aut_rooted_order(T2, omega[0]) == aut_rooted_order(T, 1)
    full_r = aut_rooted_order(T, 1)
    assert full_r % aut_rooted_order(T, 1, thr) == 0
    assert aut_full_order(T) % full_r == 0  # stabiliser of the root
