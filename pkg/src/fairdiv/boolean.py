"""EF1 solvers for Boolean valuations.

``neg_boolean_ef1`` handles possibly nonidentical {0,-1} valuations by
handing out inclusion-wise minimal sets that every remaining agent dislikes.
``boolean_ef1_identical`` handles identical {0,1} valuations by handing out
minimal liked sets.  Both can run on a sub-problem (a subset of agents and
items) so the trilean solvers can delegate their Boolean residue.
"""
from __future__ import annotations

from typing import Sequence

from .errors import InvalidRange, NotIdentical
from .subsets import find_any_subset_with_value, find_minimal_common_value
from .valuation import (
    NEG_TRILEAN,
    AgentClass,
    Allocation,
    Instance,
    SetValuation,
    classify_bundle,
    full_mask,
)


def _scope(inst: Instance, agents, items):
    agents = list(range(inst.n)) if agents is None else sorted(agents)
    items = full_mask(inst.m) if items is None else items
    return agents, items


def _require_range(vs: Sequence[SetValuation], items: int, allowed: set[int]) -> None:
    for idx, v in enumerate(vs):
        extra = v.range_on(items) - allowed
        if extra:
            raise InvalidRange(f"valuation {idx} takes values {sorted(extra)}")


def neg_boolean_ef1(
    inst: Instance,
    agents: Sequence[int] | None = None,
    items: int | None = None,
    log: list | None = None,
) -> Allocation:
    """EF1 allocation of ``items`` among ``agents`` for {0,-1} valuations.

    Returns a full-length allocation in which only ``agents`` receive items.
    When ``log`` is given, ``(agent, items)`` is appended for each bundle
    handed out by the main loop, in order.
    """
    agents, remaining = _scope(inst, agents, items)
    vals = inst.valuations
    _require_range([vals[i] for i in agents], remaining, {0, -1})
    bundles = [0] * inst.n
    left = list(agents)

    while (
        remaining
        and len(left) >= 2
        and all(vals[i].table[remaining] == -1 for i in left)
    ):
        chosen = find_minimal_common_value([vals[i] for i in left], remaining, -1)
        # minimality guarantees an agent for whom some child is valued 0
        i = next(i for i in left if vals[i].child_summary(chosen).has_arrow(-1, 0))
        bundles[i] = chosen
        if log is not None:
            log.append((i, chosen))
        left.remove(i)
        remaining &= ~chosen

    if remaining and len(left) >= 2:
        i = next(i for i in left if vals[i].table[remaining] == 0)
    else:
        i = left[0]
    bundles[i] |= remaining
    return Allocation(tuple(bundles))


def boolean_ef1_identical(
    inst: Instance, agents: Sequence[int] | None = None, items: int | None = None
) -> Allocation:
    """EF1 allocation for identical {0,1} valuations.

    Each of the first ``k - 1`` agents takes a smallest liked set (value 1,
    every child 0) while one exists.  Whatever is left goes to the next
    agent: either it has no liked subset at all, or ``k - 1`` agents are
    served and the last agent takes it.
    """
    agents, remaining = _scope(inst, agents, items)
    vals = [inst.valuations[i] for i in agents]
    v = vals[0]
    if any(w != v for w in vals[1:]):
        raise NotIdentical("boolean_ef1_identical requires identical valuations")
    _require_range([v], remaining, {0, 1})
    bundles = [0] * inst.n
    pos = 0
    while pos < len(agents) - 1:
        liked = find_any_subset_with_value(v, remaining, 1)
        if liked is None:
            break
        bundles[agents[pos]] = liked
        remaining &= ~liked
        pos += 1
    bundles[agents[pos]] |= remaining
    return Allocation(tuple(bundles))


def boolean_structure_holds(
    v: SetValuation, alloc: Allocation, agents: Sequence[int], sign: int
) -> bool:
    """Output contract of the Boolean solvers on identical valuations.

    Either every agent is resolved (``sign -> 0``) or zero-valued, or every
    agent except the last one of ``agents`` is resolved.
    """
    res = AgentClass.RES_PLUS if sign > 0 else AgentClass.RES_MINUS
    flags = [classify_bundle(v, alloc.bundles[i], NEG_TRILEAN) for i in agents]
    if all(f & (res | AgentClass.ZERO) for f in flags):
        return True
    return all(f & res for f in flags[:-1])
