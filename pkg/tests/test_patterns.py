from __future__ import annotations

from math import comb

import pytest
from hypothesis import given, strategies as st

from strategies import trees
from treelab.patterns import (
    Pattern,
    canonical_code,
    degree_count,
    fringe_code,
    good_vertices,
    leaf_count,
    ordered_embeddings,
    path_count,
    path_count_bruteforce,
    pattern_census,
    pattern_count,
    pattern_count_bruteforce,
    pattern_counts_bruteforce,
)
from treelab.tree import LabelledTree, beta, path, star
from treelab.verify import small_patterns

PATS = small_patterns(3)


def test_degree_counts(fig_tree):
    assert degree_count(star(8), 1) == 7
    assert degree_count(path(8), 1) == 2
    assert degree_count(fig_tree, 1) == 6 == leaf_count(fig_tree)


def test_canonical_codes():
    P3 = path(3)
    assert canonical_code(LabelledTree(2, [(1, 2)]), 2) == "(())"
    assert canonical_code(P3, 1) != canonical_code(P3, 2)
    with pytest.raises(ValueError):
        canonical_code(P3, 4)


def test_fringe_code(fig_tree):
    assert fringe_code(fig_tree, 1, 6) == "()"
    assert fringe_code(fig_tree, 1, 3) == "(())"
    assert fringe_code(fig_tree, 1, 1) == canonical_code(fig_tree, 1)


def test_figure_pattern_counts(fig_tree):
    assert pattern_count(fig_tree, Pattern.path(3, (1, 0, 1))) == 2
    assert pattern_count(fig_tree, Pattern.path(3, (1, 0, 0))) == 1
    assert pattern_count(fig_tree, Pattern.path(3, (0, 0, 1))) == 1
    assert pattern_count(fig_tree, Pattern.path(3)) == 14
    assert sum(comb(d, 2) for d in fig_tree.degrees()) == 14


@given(trees(2, 14))
def test_single_edge_all_empty_counts_edges(T):
    assert pattern_count(T, Pattern.path(2)) == T.n - 1


def test_path_count_examples(fig_tree):
    assert path_count(star(9), 3) == comb(8, 2)
    for l in range(2, 8):
        assert path_count(path(10), l) == 10 - l + 1
    assert path_count(fig_tree, 3) == 14
    assert path_count(fig_tree, 3, beta_filter=fig_tree.n) == 14
    with pytest.raises(ValueError):
        path_count(fig_tree, 1)


def test_pattern_validation():
    with pytest.raises(ValueError):
        Pattern(path(3), (1, 0))
    with pytest.raises(ValueError):
        Pattern(path(3), (1, 2, 0))


def test_pattern_json_roundtrip():
    P = Pattern.from_edges(4, [(1, 2), (1, 3), (1, 4)], (0, 1, 1, 0))
    Q = Pattern.from_json(P.to_json())
    assert Q == P and Q.s == 2 and Q.l == 4


def test_pattern_aut_order():
    assert Pattern.path(3).aut_order() == 2
    assert Pattern.path(3, (1, 0, 0)).aut_order() == 1
    assert Pattern.from_edges(4, [(1, 2), (1, 3), (1, 4)], (1, 1, 1, 1)).aut_order() == 6


@given(trees(2, 9), st.sampled_from(PATS))
def test_pattern_count_matches_bruteforce(T, P):
    if P.l > T.n:
        return
    assert pattern_count(T, P) == pattern_count_bruteforce(T, P)


@given(trees(2, 20), st.sampled_from(PATS))
def test_ordered_embeddings_is_aut_times_count(T, P):
    assert ordered_embeddings(T, P) == P.aut_order() * pattern_count(T, P)


@given(trees(4, 9))
def test_census_matches_single_counts_l4(T):
    pats = small_patterns(4)
    census = pattern_census(T, 4)
    for P in pats:
        if P.l == 4:
            assert census.get(P._code, 0) == pattern_count(T, P)


@given(trees(3, 8))
def test_bruteforce_batch_matches_single(T):
    pats = [P for P in PATS if P.l <= T.n]
    assert pattern_counts_bruteforce(T, pats) == [pattern_count_bruteforce(T, P) for P in pats]


@given(trees(2, 12), st.integers(2, 6))
def test_path_count_matches_bruteforce(T, l):
    if l > T.n:
        return
    assert path_count(T, l) == path_count_bruteforce(T, l)
    assert path_count(T, l) == pattern_count(T, Pattern.path(l))


@given(trees(2, 16))
def test_degree_cap_vacuous_and_monotone(T):
    P = Pattern.path(3)
    assert pattern_count(T, P, degree_cap=T.n) == pattern_count(T, P)
    assert pattern_count(T, P, degree_cap=2) <= pattern_count(T, P)


@given(trees(2, 14))
def test_good_vertices_thresholds(T):
    assert good_vertices(T, beta(T)) == list(T.vertices())
    assert path_count(T, 3, beta_filter=beta(T)) == path_count(T, 3)
    assert path_count(T, 3, beta_filter=0.5) == 0
