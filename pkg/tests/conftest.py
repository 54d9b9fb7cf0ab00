"""Shared fixtures, hypothesis strategies and naive reference oracles.

The oracles below work on plain Python lists and frozensets and share no
code with the package, so they can referee its verifiers and solvers.
"""
from __future__ import annotations

import itertools
from pathlib import Path

import pytest
from hypothesis import strategies as st

from fairdiv import Allocation, Instance, SetValuation

FIXTURES = Path(__file__).parent / "fixtures"

# PASS/FAIL lines from the acceptance run, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def fixture_path(name: str) -> Path:
    return FIXTURES / name


# -- the three-item instance used all over -------------------------------------

def efx_table() -> list[int]:
    """1 for singletons, -1 for two or more items, over x1 x2 x3."""
    return [0 if s == 0 else (1 if bin(s).count("1") == 1 else -1) for s in range(8)]


@pytest.fixture
def efx_instance() -> Instance:
    return Instance.identical_agents(2, SetValuation(3, efx_table()))


# -- naive oracles -------------------------------------------------------------

def _val(table, items) -> int:
    mask = 0
    for x in items:
        mask |= 1 << x
    return int(table[mask])


def naive_ef1_pair(table, own, other) -> bool:
    """True iff the envy of the owner of ``own`` toward ``other`` is excused."""
    own, other = frozenset(own), frozenset(other)
    if _val(table, own) >= _val(table, other):
        return True
    return any(_val(table, own - {x}) >= _val(table, other - {x}) for x in own | other)


def naive_is_ef1(tables, bundles) -> bool:
    n = len(bundles)
    return all(
        naive_ef1_pair(tables[i], bundles[i], bundles[k])
        for i in range(n) for k in range(n) if i != k
    )


def naive_efxpm_pair(table, own, other) -> bool:
    own, other = frozenset(own), frozenset(other)
    if _val(table, own) >= _val(table, other):
        return True
    plus = {x for x in other if _val(table, other - {x}) < _val(table, other)}
    minus = {x for x in own if _val(table, own - {x}) > _val(table, own)}
    union = plus | minus
    return bool(union) and all(_val(table, own - {x}) >= _val(table, other - {x}) for x in union)


def naive_is_efxpm(tables, bundles) -> bool:
    n = len(bundles)
    return all(
        naive_efxpm_pair(tables[i], bundles[i], bundles[k])
        for i in range(n) for k in range(n) if i != k
    )


def naive_allocations(n: int, m: int, partial: bool = False):
    """Every allocation as a list of item lists, item 0 varying slowest."""
    choices = n + 1 if partial else n
    for assign in itertools.product(range(choices), repeat=m):
        bundles = [[] for _ in range(n)]
        for item, agent in enumerate(assign):
            if agent < n:
                bundles[agent].append(item)
        yield bundles


def naive_exists_ef1(tables, n: int, m: int) -> bool:
    return any(naive_is_ef1(tables, b) for b in naive_allocations(n, m))


def tables_of(inst: Instance) -> list[list[int]]:
    return [v.table.tolist() for v in inst.valuations]


def bundles_of(alloc: Allocation) -> list[list[int]]:
    return alloc.as_lists()


def naive_quantity_ef1(values, grid) -> bool:
    """Quantity EF1 for separable tables ``values[i][j][count]``."""
    n, t = len(grid), len(grid[0]) if grid else 0

    def val(i, row):
        return sum(values[i][j][row[j]] for j in range(t))

    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            own, other = list(grid[i]), list(grid[k])
            if val(i, own) >= val(i, other):
                continue
            ok = False
            for j in range(t):
                if own[j] > 0:
                    trial = own.copy()
                    trial[j] -= 1
                    ok |= val(i, trial) >= val(i, other)
                if other[j] > 0:
                    trial = other.copy()
                    trial[j] -= 1
                    ok |= val(i, own) >= val(i, trial)
            if not ok:
                return False
    return True


# -- SSP run checks -------------------------------------------------------------

def values_of(inst):
    return [[list(tab) for tab in inst.tables[i]] for i in range(inst.n)]


def _qval(values, i, row):
    return sum(values[i][j][row[j]] for j in range(len(row)))


def envy_resolved_from_envied(values, grid):
    """Every envy i -> k disappears after removing some item from A_k."""
    n, t = len(grid), len(grid[0]) if len(grid) else 0
    for i, k in itertools.permutations(range(n), 2):
        own = _qval(values, i, grid[i])
        if own >= _qval(values, i, grid[k]):
            continue
        ok = False
        for j in range(t):
            if grid[k][j] > 0:
                row = list(grid[k])
                row[j] -= 1
                ok |= own >= _qval(values, i, row)
        if not ok:
            return False
    return True


class Recorder:
    """Observer that checks invariants at every step of a run."""

    def __init__(self, inst, cap=None):
        self.values = values_of(inst)
        self.cap = cap
        self.steps = []
        self.failures = []

    def __call__(self, phase, step, grid):
        grid = grid.tolist()
        self.steps.append((phase, step, grid))
        if phase == 1:
            if not envy_resolved_from_envied(self.values, grid):
                self.failures.append(("phase1", step, grid))
            if self.cap is not None and any(
                grid[i][j] > self.cap[j] for i in range(len(grid)) for j in range(len(self.cap))
            ):
                self.failures.append(("cap", step, grid))
        elif not naive_quantity_ef1(self.values, grid):
            self.failures.append(("phase2", step, grid))


# -- strategies ------------------------------------------------------------------

@st.composite
def tables(draw, m: int, values=(0, -1, 1)):
    rest = draw(st.lists(st.sampled_from(values), min_size=(1 << m) - 1, max_size=(1 << m) - 1))
    return [0] + rest


@st.composite
def identical_instances(draw, values=(0, -1, 1), max_n=4, min_m=0, max_m=6):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(min_m, max_m))
    return Instance.identical_agents(n, SetValuation(m, draw(tables(m, values))))


@st.composite
def instances(draw, values=(0, -1, 1), max_n=3, max_m=5):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    vals = tuple(SetValuation(m, draw(tables(m, values))) for _ in range(n))
    return Instance(vals, identical_flag=False)


@st.composite
def allocations_for(draw, n: int, m: int, partial: bool = True):
    choices = n + 1 if partial else n
    assign = draw(st.lists(st.integers(0, choices - 1), min_size=m, max_size=m))
    bundles = [0] * n
    for item, agent in enumerate(assign):
        if agent < n:
            bundles[agent] |= 1 << item
    return Allocation(tuple(bundles))

