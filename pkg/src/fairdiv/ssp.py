"""Separable single-peaked (SSP) valuations and their EF1 algorithms.

Items come in types; agent i's value for ``a`` items of type j is
``tables[i][j][a]``, single-peaked around the threshold ``thresholds[i][j]``,
and values add up across types.  Items of one type are interchangeable, so
allocations are count grids ``a[i][j]``.

``ssp3_ef1`` handles three agents with arbitrary thresholds and
``ssp_common_threshold_ef1`` any number of agents sharing one threshold per
type.  Both accept an ``observer(phase, step, grid)`` callback invoked after
every change to the allocation, which the tests use to check invariants
mid-run.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .envy import EnvyGraph, build_envy_graph, cycle_swap, find_cycle, topological_order
from .errors import InvalidRange, NotCommonThreshold, StructuralError, WrongAgentCount
from .valuation import MAX_ITEMS, Allocation, Instance, SetValuation

Observer = Callable[[int, str, np.ndarray], None]


def is_single_peaked(table: Sequence[int], theta: int) -> bool:
    for x in range(1, len(table)):
        if x <= theta and table[x] < table[x - 1]:
            return False
        if x > theta and table[x] > table[x - 1]:
            return False
    return True


@dataclass(frozen=True)
class SSPInstance:
    counts: tuple[int, ...]
    thresholds: tuple[tuple[int, ...], ...]  # [agent][type]
    tables: tuple[tuple[tuple[int, ...], ...], ...]  # [agent][type][count]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        thresholds = tuple(tuple(int(x) for x in row) for row in self.thresholds)
        tables = tuple(tuple(tuple(int(x) for x in tab) for tab in row) for row in self.tables)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "tables", tables)
        if not thresholds:
            raise StructuralError("an SSP instance needs at least one agent")
        if len(tables) != len(thresholds):
            raise StructuralError("thresholds and tables disagree on the agent count")
        t = len(counts)
        for i in range(len(thresholds)):
            if len(thresholds[i]) != t or len(tables[i]) != t:
                raise StructuralError(f"agent {i} does not describe {t} types")
            for j in range(t):
                if counts[j] < 0:
                    raise StructuralError(f"type {j} has a negative count")
                tab, theta = tables[i][j], thresholds[i][j]
                if len(tab) != counts[j] + 1:
                    raise StructuralError(f"table [{i}][{j}] needs {counts[j] + 1} entries")
                if theta < 0:
                    raise InvalidRange(f"threshold [{i}][{j}] is negative")
                if tab[0] != 0:
                    raise InvalidRange(f"table [{i}][{j}] must start at 0")
                if not is_single_peaked(tab, theta):
                    raise InvalidRange(f"table [{i}][{j}] is not single-peaked at {theta}")

    @property
    def n(self) -> int:
        return len(self.thresholds)

    @property
    def t(self) -> int:
        return len(self.counts)

    def common_thresholds(self) -> tuple[int, ...] | None:
        first = self.thresholds[0]
        return first if all(row == first for row in self.thresholds) else None

    def value(self, i: int, row: Sequence[int]) -> int:
        """Agent i's value for a bundle given as per-type counts."""
        if len(row) != self.t:
            raise StructuralError(f"bundle has {len(row)} types, expected {self.t}")
        total = 0
        for j, a in enumerate(row):
            if not 0 <= a <= self.counts[j]:
                raise InvalidRange(f"count {a} of type {j} outside 0..{self.counts[j]}")
            total += self.tables[i][j][a]
        return total

    def value_matrix(self, grid) -> list[list[int]]:
        """``V[i][k]``: agent i's value for agent k's bundle."""
        grid = np.asarray(grid)
        return [[self.value(i, grid[k]) for k in range(self.n)] for i in range(self.n)]


@dataclass(frozen=True)
class QuantityAllocation:
    grid: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        grid = tuple(tuple(int(x) for x in row) for row in self.grid)
        if any(x < 0 for row in grid for x in row):
            raise StructuralError("negative item count")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def from_array(cls, arr) -> "QuantityAllocation":
        return cls(tuple(tuple(row) for row in np.asarray(arr).tolist()))

    @property
    def n(self) -> int:
        return len(self.grid)

    def totals(self) -> list[int]:
        if not self.grid:
            return []
        return [sum(col) for col in zip(*self.grid)]

    def check_within(self, inst: SSPInstance) -> None:
        if self.n != inst.n or any(len(r) != inst.t for r in self.grid):
            raise StructuralError("allocation shape does not match the instance")
        for j, total in enumerate(self.totals()):
            if total > inst.counts[j]:
                raise StructuralError(f"type {j}: {total} items allocated of {inst.counts[j]}")

    def is_complete(self, inst: SSPInstance) -> bool:
        return list(inst.counts) == (self.totals() if inst.t else [])


def ssp_value(inst: SSPInstance, i: int, row: Sequence[int]) -> int:
    return inst.value(i, row)


# -- quantity fairness checks -------------------------------------------------

def _pair_ok(inst, i, own, other, from_own=True, from_other=True) -> bool:
    vi = inst.value(i, own)
    vk = inst.value(i, other)
    if vi >= vk:
        return True
    for j in range(inst.t):
        if from_other and other[j] > 0:
            less = list(other)
            less[j] -= 1
            if vi >= inst.value(i, less):
                return True
        if from_own and own[j] > 0:
            less = list(own)
            less[j] -= 1
            if inst.value(i, less) >= vk:
                return True
    return False


def quantity_ef1_violations(inst: SSPInstance, grid, envied_only: bool = False):
    """Ordered pairs whose envy no single removal fixes.

    With ``envied_only`` the removal must come from the envied bundle.
    """
    grid = [list(r) for r in np.asarray(grid).tolist()]
    return [
        (i, k)
        for i in range(inst.n)
        for k in range(inst.n)
        if i != k and not _pair_ok(inst, i, grid[i], grid[k], from_own=not envied_only)
    ]


def is_ef1_quantity(inst: SSPInstance, alloc) -> bool:
    grid = alloc.grid if isinstance(alloc, QuantityAllocation) else alloc
    return not quantity_ef1_violations(inst, grid)


def is_efxpm_quantity(inst: SSPInstance, alloc) -> bool:
    """EFX+- for count grids: every strictly positive marginal type in the
    envied bundle and every strictly negative one in the own bundle resolves."""
    grid = alloc.grid if isinstance(alloc, QuantityAllocation) else alloc
    for i in range(inst.n):
        own = list(grid[i])
        vi = inst.value(i, own)
        for k in range(inst.n):
            if k == i:
                continue
            other = list(grid[k])
            vk = inst.value(i, other)
            if vi >= vk:
                continue
            seen = False
            for j in range(inst.t):
                tab = inst.tables[i][j]
                if other[j] and tab[other[j]] > tab[other[j] - 1]:
                    seen = True
                    if vi < vk - tab[other[j]] + tab[other[j] - 1]:
                        return False
                if own[j] and tab[own[j]] < tab[own[j] - 1]:
                    seen = True
                    if vi - tab[own[j]] + tab[own[j] - 1] < vk:
                        return False
            if not seen:
                return False
    return True


# -- conversions ----------------------------------------------------------------

def expand_to_item_sets(inst: SSPInstance, alloc: QuantityAllocation) -> Allocation:
    """Label items type by type; within a type agents take ids in agent order."""
    bundles = [0] * inst.n
    offset = 0
    for j, m_j in enumerate(inst.counts):
        nxt = offset
        for i in range(inst.n):
            for _ in range(alloc.grid[i][j]):
                bundles[i] |= 1 << nxt
                nxt += 1
        offset += m_j
    return Allocation(tuple(bundles))


def ssp_to_set_instance(inst: SSPInstance) -> Instance:
    """Dense set-function instance over the labeled items (needs <= 20 items)."""
    m = sum(inst.counts)
    if m > MAX_ITEMS:
        raise StructuralError(f"{m} items exceed the dense-table cap of {MAX_ITEMS}")
    masks = np.arange(1 << m, dtype=np.int64)
    vals = []
    for i in range(inst.n):
        table = np.zeros(1 << m, dtype=np.int64)
        offset = 0
        for j, m_j in enumerate(inst.counts):
            cnt = np.zeros(1 << m, dtype=np.int64)
            for b in range(offset, offset + m_j):
                cnt += (masks >> b) & 1
            table += np.asarray(inst.tables[i][j], dtype=np.int64)[cnt]
            offset += m_j
        vals.append(SetValuation(m, table))
    return Instance(tuple(vals))


# -- algorithms ------------------------------------------------------------------

class _Run:
    """Mutable allocation state shared by both algorithms."""

    def __init__(self, inst: SSPInstance, observer: Observer | None):
        self.inst = inst
        self.grid = np.zeros((inst.n, inst.t), dtype=np.int64)
        self.observer = observer
        self.phase = 1

    def notify(self, step: str) -> None:
        if self.observer is not None:
            self.observer(self.phase, step, self.grid.copy())

    def graph(self, top_trading: bool = False) -> EnvyGraph:
        return build_envy_graph(self.inst.value_matrix(self.grid), top_trading)

    def swap(self, cycle) -> None:
        rows = cycle_swap(list(self.grid), cycle)
        self.grid = np.array(rows, dtype=np.int64).reshape(self.grid.shape)
        self.notify("swap")

    def resolve(self, top_trading: bool, once: bool = False) -> None:
        while True:
            cycle = find_cycle(self.graph(top_trading))
            if cycle is None:
                return
            self.swap(cycle)
            if once:
                return

    def sink(self) -> int:
        sinks = self.graph().sinks()
        if not sinks:
            # top-trading cycles run to a fixpoint always leave a sink
            self.resolve(top_trading=True)
            sinks = self.graph().sinks()
        return sinks[0]

    def give(self, i: int, j: int, k: int = 1, step: str = "assign") -> None:
        self.grid[i, j] += k
        self.notify(step)


def ssp3_ef1(inst: SSPInstance, observer: Observer | None = None) -> QuantityAllocation:
    """EF1 allocation for three agents with arbitrary thresholds."""
    if inst.n != 3:
        raise WrongAgentCount(f"three agents required, got {inst.n}")
    run = _Run(inst, observer)
    mbar = [m // 3 for m in inst.counts]
    mhat = [m % 3 for m in inst.counts]
    wants = [[i for i in range(3) if inst.thresholds[i][j] > mbar[j]] for j in range(inst.t)]

    for j in range(inst.t):
        if len(wants[j]) < mhat[j]:
            continue
        run.resolve(top_trading=False)
        order = topological_order(run.graph())
        run.grid[:, j] = mbar[j]
        run.notify("equipartition")
        left = mhat[j]
        for i in order:
            if i in wants[j] and left > 0:
                run.give(i, j)
                left -= 1

    run.phase = 2
    for j in range(inst.t):
        if mhat[j] <= len(wants[j]):
            continue
        run.resolve(top_trading=True, once=True)
        run.grid[:, j] = mbar[j]
        run.notify("equipartition")
        if not wants[j]:
            left = mhat[j]
            while left > 0:
                run.give(run.sink(), j, step="sink")
                left -= 1
                run.resolve(top_trading=True, once=True)
        else:
            (k,) = wants[j]
            ell = run.sink()
            run.give(k, j, step="wanting")
            run.give(ell, j, step="sink")
    return QuantityAllocation.from_array(run.grid)


def ssp_common_threshold_ef1(inst: SSPInstance, observer: Observer | None = None) -> QuantityAllocation:
    """EF1 allocation for any number of agents sharing each type's threshold."""
    theta = inst.common_thresholds()
    if theta is None:
        raise NotCommonThreshold("agents disagree on some type's threshold")
    run = _Run(inst, observer)
    left = list(inst.counts)

    for j in range(inst.t):
        while left[j] > 0:
            run.resolve(top_trading=False)
            hungry = [i for i in range(inst.n) if run.grid[i, j] < theta[j]]
            if not hungry:
                break
            run.give(run.graph().sources(hungry)[0], j)
            left[j] -= 1

    run.phase = 2
    for j in range(inst.t):
        while left[j] > 0:
            run.resolve(top_trading=True)
            run.give(run.sink(), j, step="sink")
            left[j] -= 1
    return QuantityAllocation.from_array(run.grid)
