"""EF1 solvers for identical trilean valuations.

Negative regime (values in {-1,0,1}) and positive regime (values in
{0,1,2}) share one skeleton: hand out favourable sets, then flexible sets,
then finish the Boolean-valued residue and repair the few EF1 violations
that can remain between flexible agents and the last agent.  Any identical
instance with values in {0,a,b} is relabeled into one of the two regimes
first (see :func:`trilean_ef1`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .boolean import boolean_ef1_identical, neg_boolean_ef1
from .errors import InvalidRange, NotTrilean, UnexpectedViolation
from .subsets import find_any_subset_with_value, find_favourable, grow_to_maximal
from .valuation import (
    NEG_TRILEAN,
    POS_TRILEAN,
    AgentClass,
    Allocation,
    Instance,
    Kind,
    SetValuation,
    canonicalize_trilean,
    classify_bundle,
    detect_kind,
    full_mask,
    items_of,
)
from .verify import ef1_violations, is_ef1

A = AgentClass


@dataclass(frozen=True)
class TraceEvent:
    phase: str
    agent: int
    items: int
    flags: AgentClass


@dataclass(frozen=True)
class Transition:
    """Classes of the chosen agent and the last agent around one outer pass."""

    agent: int
    agent_before: AgentClass
    agent_after: AgentClass
    last_before: AgentClass
    last_after: AgentClass
    moved: int


@dataclass
class FixerStats:
    sign: int  # +1 when the last agent started Bad+ (or Bad), -1 for Bad-
    entry_size: int
    inner_iterations: int = 0
    transitions: list[Transition] = field(default_factory=list)
    violations_at_entry: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class SolverTrace:
    """What a trilean solve did; events are dropped when ``keep_events`` is off."""

    keep_events: bool = True
    events: list[TraceEvent] = field(default_factory=list)
    terminal: str = ""
    boolean_agents: tuple[int, ...] = ()
    boolean_sign: int = 0
    pre_fix: Allocation | None = None
    fixer: FixerStats | None = None

    def record(self, phase, agent, items, flags):
        if self.keep_events:
            self.events.append(TraceEvent(phase, agent, items, flags))


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _require_values(v: SetValuation, allowed: set[int]) -> None:
    extra = v.range_on(full_mask(v.m)) - allowed
    if extra:
        raise InvalidRange(f"values {sorted(extra)} outside {sorted(allowed)}")


# -- fixers ------------------------------------------------------------------------

def _run_fixer(inst, alloc, regime, bad, flex, res, stats):
    v = inst.valuations[0]
    bundles = list(alloc.bundles)
    last = inst.n - 1

    def cls(k):
        return classify_bundle(v, bundles[k], regime)

    def flex_agents():
        return [k for k in range(last) if cls(k) & flex]

    while cls(last) & bad and flex_agents():
        i = flex_agents()[0]
        i_before, n_before = cls(i), cls(last)
        moved = 0
        while True:
            if not bundles[last]:
                raise UnexpectedViolation("last bundle emptied before either side resolved")
            x = _lowest(bundles[last])
            bundles[last] &= ~(1 << x)
            bundles[i] |= 1 << x
            moved += 1
            if cls(i) & res or cls(last) & res:
                break
        stats.inner_iterations += moved
        stats.transitions.append(Transition(i, i_before, cls(i), n_before, cls(last), moved))
    return Allocation(tuple(bundles))


def fix_ef1_violations_neg(inst: Instance, alloc: Allocation, stats: FixerStats | None = None):
    """Repair EF1 violations between flexible agents and the last agent.

    Every violating pair must pair a Flex- agent with a Bad+ last agent, or
    a Flex+ agent with a Bad- last agent; anything else raises
    :class:`UnexpectedViolation`.  Items move from the last bundle, lowest
    index first, to the lowest-index flexible agent of the opposite sign.
    """
    v = inst.require_identical()
    last = inst.n - 1
    if stats is None:
        stats = FixerStats(0, 0)
    stats.entry_size = len(items_of(alloc.bundles[last]))
    if is_ef1(inst, alloc)[0]:
        return alloc
    classes = [classify_bundle(v, b, NEG_TRILEAN) for b in alloc.bundles]
    bad_violations = []
    pairs = ef1_violations(inst, alloc)
    for i, k in pairs:
        other = i if k == last else k if i == last else None
        ok = other is not None and (
            (classes[other] & A.FLEX_MINUS and classes[last] & A.BAD_PLUS)
            or (classes[other] & A.FLEX_PLUS and classes[last] & A.BAD_MINUS)
        )
        if not ok:
            bad_violations.append((i, k))
    if bad_violations:
        i, k = bad_violations[0]
        raise UnexpectedViolation(
            f"violation {i}->{k} with classes {classes[i]} / {classes[k]} is not repairable"
        )
    sign = 1 if classes[last] & A.BAD_PLUS else -1
    stats.sign = sign
    stats.violations_at_entry = pairs
    if sign > 0:
        return _run_fixer(inst, alloc, NEG_TRILEAN, A.BAD_PLUS, A.FLEX_MINUS, A.RES_PLUS, stats)
    return _run_fixer(inst, alloc, NEG_TRILEAN, A.BAD_MINUS, A.FLEX_PLUS, A.RES_MINUS, stats)


def fix_ef1_violations_pos(inst: Instance, alloc: Allocation, stats: FixerStats | None = None):
    """Positive-regime repair: the last agent is Bad (2 with all children 2)
    and some agent is Flex (1 with a child 0)."""
    v = inst.require_identical()
    last = inst.n - 1
    if stats is None:
        stats = FixerStats(1, 0)
    stats.entry_size = len(items_of(alloc.bundles[last]))
    if is_ef1(inst, alloc)[0]:
        return alloc
    classes = [classify_bundle(v, b, POS_TRILEAN) for b in alloc.bundles]
    pairs = ef1_violations(inst, alloc)
    for i, k in pairs:
        other = i if k == last else k if i == last else None
        if other is None or not (classes[other] & A.FLEX and classes[last] & A.BAD):
            raise UnexpectedViolation(
                f"violation {i}->{k} with classes {classes[i]} / {classes[k]} is not repairable"
            )
    stats.violations_at_entry = pairs
    return _run_fixer(inst, alloc, POS_TRILEAN, A.BAD, A.FLEX, A.RES, stats)


# -- solvers -----------------------------------------------------------------------

def _has_both(v: SetValuation, ground: int, a: int, b: int) -> bool:
    rng = v.range_on(ground)
    return a in rng and b in rng


def trilean_neg_ef1(inst: Instance, keep_events: bool = True):
    """EF1 allocation for identical valuations with values in {-1,0,1}.

    Returns ``(allocation, trace)``.
    """
    v = inst.require_identical()
    _require_values(v, {-1, 0, 1})
    n = inst.n
    trace = SolverTrace(keep_events)
    bundles = [0] * n
    rest = full_mask(inst.m)
    i = 0

    def give(phase, agent, items):
        bundles[agent] |= items
        trace.record(phase, agent, items, classify_bundle(v, bundles[agent], NEG_TRILEAN))

    while i < n - 1:
        fav = find_favourable(v, rest, NEG_TRILEAN)
        if fav is None:
            break
        give("favourable", i, fav)
        rest &= ~fav
        i += 1

    while rest and i < n - 1 and _has_both(v, rest, 1, -1) and v.value(rest) != 0:
        target = -1 if v.value(rest) == 1 else 1
        seed = find_any_subset_with_value(v, rest, target)
        if seed is None:  # pragma: no cover - both signs present means a seed exists
            break
        s = grow_to_maximal(v, seed, rest, target)
        chosen = s | (1 << _lowest(rest & ~s))
        give("flexible", i, chosen)
        rest &= ~chosen
        i += 1

    if not rest:
        trace.terminal = "empty"
    elif v.value(rest) == 0:
        give("zero", i, rest)
        trace.terminal = "zero"
    else:
        if i == n - 1:
            give("last", i, rest)
            trace.terminal = "last-agent"
        else:
            agents = tuple(range(i, n))
            if v.range_on(rest) <= {0, 1}:
                sub = boolean_ef1_identical(inst, agents, rest)
                trace.terminal, trace.boolean_sign = "boolean-pos", 1
            else:
                sub = neg_boolean_ef1(inst, agents, rest)
                trace.terminal, trace.boolean_sign = "boolean-neg", -1
            trace.boolean_agents = agents
            for k in agents:
                if sub.bundles[k]:
                    give("boolean", k, sub.bundles[k])
        pre = Allocation(tuple(bundles))
        trace.pre_fix = pre
        trace.fixer = FixerStats(0, 0)
        alloc = fix_ef1_violations_neg(inst, pre, trace.fixer)
        _record_transfers(trace, pre, alloc, v, NEG_TRILEAN)
        return alloc, trace
    return Allocation(tuple(bundles)), trace


def trilean_pos_ef1(inst: Instance, keep_events: bool = True):
    """EF1 allocation for identical valuations with values in {0,1,2}.

    Returns ``(allocation, trace)``.
    """
    v = inst.require_identical()
    _require_values(v, {0, 1, 2})
    n = inst.n
    trace = SolverTrace(keep_events)
    bundles = [0] * n
    rest = full_mask(inst.m)
    i = 0

    def give(phase, agent, items):
        bundles[agent] |= items
        trace.record(phase, agent, items, classify_bundle(v, bundles[agent], POS_TRILEAN))

    while i < n - 1:
        fav = find_favourable(v, rest, POS_TRILEAN)
        if fav is None:
            break
        give("favourable", i, fav)
        rest &= ~fav
        i += 1

    while rest and i < n - 1 and _has_both(v, rest, 1, 2) and v.value(rest) != 0:
        s = grow_to_maximal(v, 0, rest, 0)
        chosen = s | (1 << _lowest(rest & ~s))
        give("flexible", i, chosen)
        rest &= ~chosen
        i += 1

    if not rest:
        trace.terminal = "empty"
    elif v.value(rest) == 0:
        give("zero", i, rest)
        trace.terminal = "zero"
    elif i == n - 1:
        give("last", i, rest)
        trace.terminal = "last-agent"
        pre = Allocation(tuple(bundles))
        trace.pre_fix = pre
        trace.fixer = FixerStats(1, 0)
        alloc = fix_ef1_violations_pos(inst, pre, trace.fixer)
        _record_transfers(trace, pre, alloc, v, POS_TRILEAN)
        return alloc, trace
    else:
        if not v.range_on(rest) <= {0, 1}:
            # without favourable sets a value-2 set always passes through 1
            raise NotTrilean("residue is neither trilean nor Boolean {0,1}")
        agents = tuple(range(i, n))
        sub = boolean_ef1_identical(inst, agents, rest)
        trace.terminal, trace.boolean_sign = "boolean-pos", 1
        trace.boolean_agents = agents
        for k in agents:
            if sub.bundles[k]:
                give("boolean", k, sub.bundles[k])
    return Allocation(tuple(bundles)), trace


def _record_transfers(trace, before, after, v, regime):
    if not trace.keep_events:
        return
    for k, (b0, b1) in enumerate(zip(before.bundles, after.bundles)):
        if b0 != b1:
            trace.record("transfer", k, b1 ^ b0, classify_bundle(v, b1, regime))


def trilean_ef1(inst: Instance, keep_events: bool = False):
    """EF1 allocation for identical agents whose values lie in some {0,a,b}.

    Returns ``(allocation, solver_name, trace)``; ``trace`` is None for the
    Boolean solvers.  The allocation is EF1 under the original values.
    """
    inst.require_identical()
    kind = detect_kind(inst)
    work = inst
    if kind.tag is Kind.GENERAL:
        work, _ = canonicalize_trilean(inst, kind.a, kind.b)
        kind = detect_kind(work)
    if kind.tag is Kind.NEG_TRILEAN:
        alloc, trace = trilean_neg_ef1(work, keep_events)
        return alloc, "trilean-neg", trace
    if kind.tag is Kind.POS_TRILEAN:
        alloc, trace = trilean_pos_ef1(work, keep_events)
        return alloc, "trilean-pos", trace
    if kind.tag is Kind.BOOL_POS:
        return boolean_ef1_identical(work), "boolean-pos", None
    return neg_boolean_ef1(work), "boolean-neg", None
