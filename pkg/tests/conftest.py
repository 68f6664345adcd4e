from __future__ import annotations

import pytest
from hypothesis import settings

from treelab.tree import LabelledTree

# numba kernels compile or load from cache on first call
settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIGURE_EDGES = [(7, 2), (8, 12), (1, 2), (2, 4), (9, 7), (7, 10), (1, 5), (5, 8), (8, 11), (1, 3), (3, 6)]
BRANCH_EDGES = [(1, 2), (1, 3), (1, 4), (2, 5), (2, 6), (2, 7), (3, 8), (4, 9)]


@pytest.fixture
def fig_tree():
    return LabelledTree(12, FIGURE_EDGES)


@pytest.fixture
def branch_tree():
    return LabelledTree(9, BRANCH_EDGES)


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record():
    def _record(num: int, ok: bool, detail: str) -> None:
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[num] = line
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for num in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[num])
