"""Solver-independent fairness predicates and exhaustive allocation search.

The predicates read nothing but the valuation tables and the bundles, so
they can audit any solver's output.  The exhaustive searches enumerate
assignments item by item (item 0 most significant, agents in index order)
and report the lexicographically first hit.
"""
from __future__ import annotations

import os
from itertools import product
from dataclasses import dataclass
from typing import Iterator, Sequence

from . import _pykernels, kernels
from .errors import BudgetExceeded, StructuralError
from .valuation import AgentClass, Allocation, Instance, Kind, SetValuation, _as_kind, items_of

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class ViolationWitness:
    """Why agent ``envious``'s envy toward ``envied`` is not excused.

    For EF1 no item resolves the envy (``item`` is None).  For EFX+- either
    the marginal union is empty (``item`` None) or ``item`` is a member of
    the union whose removal leaves the envy in place.
    """

    envious: int
    envied: int
    kind: str
    item: int | None = None

    def describe(self) -> str:
        head = f"agent {self.envious} envies agent {self.envied}"
        if self.kind == "EF1":
            return f"{head}; no single item removal resolves it"
        if self.item is None:
            return f"{head}; no strictly positive/negative marginal item exists"
        return f"{head}; removing item {self.item} leaves the envy"

    def recheck(self, inst: Instance, alloc: Allocation) -> bool:
        """True iff the witness still certifies a violation on ``alloc``."""
        v = inst.valuations[self.envious]
        bi, bk = alloc.bundles[self.envious], alloc.bundles[self.envied]
        if v.table[bi] >= v.table[bk]:
            return False
        if self.kind == "EF1":
            return not any(
                v.table[bi & ~(1 << x)] >= v.table[bk & ~(1 << x)]
                for x in items_of(bi | bk)
            )
        plus, _ = marginal_sets(v, bk)
        _, minus = marginal_sets(v, bi)
        union = plus | minus
        if self.item is None:
            return union == 0
        x = self.item
        if not union >> x & 1:
            return False
        return v.table[bi & ~(1 << x)] < v.table[bk & ~(1 << x)]


def _prepare(inst: Instance, alloc: Allocation) -> None:
    if alloc.n != inst.n:
        raise StructuralError(f"allocation has {alloc.n} bundles for {inst.n} agents")
    alloc.check_within(inst.m)


def is_ef1(inst: Instance, alloc: Allocation):
    """``(True, None)`` if EF1, else ``(False, witness)`` for the first bad pair."""
    _prepare(inst, alloc)
    i, k = kernels.ef1_violation(inst.tables, list(alloc.bundles))
    if i < 0:
        return True, None
    return False, ViolationWitness(i, k, "EF1")


def ef1_violations(inst: Instance, alloc: Allocation) -> list[tuple[int, int]]:
    """Every ordered pair ``(envious, envied)`` that breaks EF1."""
    _prepare(inst, alloc)
    rows = inst.tables
    b = alloc.bundles
    return [
        (i, k)
        for i in range(inst.n)
        for k in range(inst.n)
        if i != k and not _pykernels._ef1_pair(rows[i], b[i], b[k])
    ]


def marginal_sets(v: SetValuation, mask: int) -> tuple[int, int]:
    """Items of ``mask`` with strictly positive / strictly negative marginal value."""
    base = v.value(mask)
    plus = minus = 0
    for x in items_of(mask):
        rest = v.table[mask ^ (1 << x)]
        if base > rest:
            plus |= 1 << x
        elif base < rest:
            minus |= 1 << x
    return plus, minus


def is_efxpm(inst: Instance, alloc: Allocation):
    """EFX with removals limited to positive-marginal envied / negative-marginal own items."""
    _prepare(inst, alloc)
    i, k, x = kernels.efxpm_violation(inst.tables, list(alloc.bundles))
    if i < 0:
        return True, None
    return False, ViolationWitness(i, k, "EFX", None if x < 0 else x)


# -- class patterns -------------------------------------------------------------

_A = AgentClass
_NEG_PATTERNS = (
    (_A.BAD_PLUS, _A.ZERO | _A.FLEX_MINUS | _A.RES_MINUS | _A.BAD_MINUS),
    (_A.BAD_MINUS, _A.ZERO | _A.FLEX_PLUS | _A.RES_PLUS | _A.BAD_PLUS),
    (_A.RES_PLUS, _A.RES_MINUS),
)
_POS_PATTERNS = (
    (_A.BAD, _A.ZERO | _A.FLEX | _A.RES_STAR),
    (_A.ZERO, _A.RES | _A.RES_STAR),
)


def class_violation_filter(classes: Sequence[AgentClass], regime) -> list[tuple[int, int]]:
    """Unordered agent pairs whose classes permit an EF1 violation.

    Pairs absent from the result are mutually EF1 whatever their bundles.
    """
    kind = _as_kind(regime)
    patterns = _NEG_PATTERNS if kind is Kind.NEG_TRILEAN else _POS_PATTERNS
    out = []
    n = len(classes)
    for i in range(n):
        for j in range(i + 1, n):
            ci, cj = classes[i], classes[j]
            for left, right in patterns:
                if (ci & left and cj & right) or (cj & left and ci & right):
                    out.append((i, j))
                    break
    return out


# -- exhaustive search ------------------------------------------------------------

def assignment_budget() -> int:
    raw = os.environ.get("FAIRDIV_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


def _check_budget(inst: Instance, complete_only: bool, budget: int | None) -> None:
    budget = assignment_budget() if budget is None else budget
    choices = inst.n if complete_only else inst.n + 1
    if choices**inst.m > budget:
        raise BudgetExceeded(
            f"{choices}^{inst.m} assignments exceed the budget of {budget}"
        )


def allocation_from_assignment(assignment: Sequence[int], n: int) -> Allocation:
    bundles = [0] * n
    for item, agent in enumerate(assignment):
        if agent < n:
            bundles[agent] |= 1 << item
    return Allocation(tuple(bundles))


def _first(inst, mode, complete_only, budget):
    _check_budget(inst, complete_only, budget)
    found = kernels.first_fair(inst.tables, inst.m, mode, complete_only)
    return None if found is None else allocation_from_assignment(found, inst.n)


def brute_force_find_ef1(inst: Instance, complete_only: bool = True, budget: int | None = None):
    """First EF1 allocation in lexicographic assignment order, or None."""
    return _first(inst, kernels.EF1, complete_only, budget)


def brute_force_find_efxpm(inst: Instance, complete_only: bool = True, budget: int | None = None):
    return _first(inst, kernels.EFXPM, complete_only, budget)


def fairness_flags(inst: Instance, mode: str = "ef1", budget: int | None = None):
    """Flag per complete assignment (lexicographic order) for ``ef1`` or ``efxpm``."""
    _check_budget(inst, True, budget)
    code = kernels.EF1 if mode == "ef1" else kernels.EFXPM
    return kernels.fair_flags(inst.tables, inst.m, code)


def complete_allocations(n: int, m: int) -> Iterator[Allocation]:
    """Every complete allocation, in the same order as the searches."""
    for assignment in product(range(n), repeat=m):
        yield allocation_from_assignment(assignment, n)
