from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from strategies import trees
from treelab.oracle import (
    _Euler,
    brute_aut,
    check_lipschitz_superposable,
    doob_stage1_trace,
    enumerate_trees,
    exact_statistics,
    forest_extensions_bruteforce,
    random_perturbation,
    stage_grid_counts,
)
from treelab.patterns import leaf_count
from treelab.tree import path, star


@pytest.mark.parametrize("n,count", [(2, 1), (3, 3), (4, 16), (5, 125), (6, 1296)])
def test_enumerate_counts(n, count):
    ts = list(enumerate_trees(n))
    assert len(ts) == count == len(set(ts))


def test_enumerate_guard():
    with pytest.raises(ValueError):
        list(enumerate_trees(10))
    with pytest.raises(ValueError):
        list(enumerate_trees(1))


def test_exact_statistics_leaves():
    d = exact_statistics(4, leaf_count)
    assert d.total == 16
    assert d.counts == {2: 12, 3: 4}
    assert d.mean == Fraction(9, 4)
    assert d.variance == Fraction(3, 16)


def test_brute_aut_examples(branch_tree):
    assert brute_aut(path(5)) == 2
    assert brute_aut(star(5)) == 24
    with pytest.warns(RuntimeWarning):
        assert brute_aut(branch_tree) == 12
    with pytest.raises(ValueError):
        brute_aut(path(10))


def test_forest_bruteforce_edge_case():
    assert forest_extensions_bruteforce(4, [[(1, 2)]], [[1, 2], [3], [4]]) == 8


def test_martingale_leaves_n4():
    tr = doob_stage1_trace(4, leaf_count, name="leaves")
    assert tr.martingale_defects() == []
    assert sum(tr.increment_second_moments()) == tr.final_variance() == Fraction(3, 16)
    assert tr.levels[0][()] == Fraction(9, 4)


def test_martingale_non_invariant_parameter():
    # degree of vertex 1 is not relabelling invariant; the trace symmetrises it
    tr = doob_stage1_trace(4, lambda T: T.degree(1), symmetric=False)
    assert tr.levels[0][()] == Fraction(3, 2)
    assert tr.martingale_defects() == []
    assert sum(tr.increment_second_moments()) == tr.final_variance()
    with pytest.raises(ValueError):
        doob_stage1_trace(5, leaf_count, symmetric=False)


def test_stage_grid_n3():
    c = stage_grid_counts(3)
    assert set(c.values()) == {3 ** 2 * 6 // 3}


@given(trees(3, 25), st.integers(0, 10**6))
def test_random_perturbation_is_valid(T, seed):
    rng = np.random.default_rng(seed)
    e = _Euler(T)
    for _ in range(5):
        p = random_perturbation(T, rng, e)
        if p is not None:
            assert p.is_valid(T)


def test_tester_leaves_small():
    rep = check_lipschitz_superposable(leaf_count, (3, 40), 3000, alpha=1, rho=1, seed=1)
    assert rep.ok and rep.trials >= 3000
    assert rep.superposition_checked > 0
    assert rep.max_delta == 1


def test_tester_constant_parameter():
    rep = check_lipschitz_superposable(lambda T: len(T.edges), 12, 500, alpha=0, rho=1)
    assert rep.ok and rep.max_delta == 0


def test_tester_flags_edge_indicator():
    rep = check_lipschitz_superposable(lambda T: int(T.has_edge(1, 2)), (3, 6), 2000, alpha=0, rho=1, seed=3)
    assert not rep.ok and rep.lipschitz_violations > 0
    assert rep.examples


def test_tester_flags_non_superposable():
    # max degree is 1-Lipschitz, but two far-apart moves onto tied maxima do not add up
    f = lambda T: max(T.degrees())
    rep = check_lipschitz_superposable(f, (6, 20), 5000, alpha=1, rho=1, seed=4)
    assert rep.lipschitz_violations == 0
    assert rep.superposition_violations > 0


def test_tester_arguments():
    with pytest.raises(ValueError):
        check_lipschitz_superposable(leaf_count, 2, 10, 1, 1)
    with pytest.raises(ValueError):
        check_lipschitz_superposable(leaf_count, 5, 0, 1, 1)
