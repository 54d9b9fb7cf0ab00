"""Set-function valuations, allocations and the bundle classification lattice.

Item sets are plain ``int`` bit masks: item ``k`` is present iff bit ``k`` is
set.  A :class:`SetValuation` stores one integer per subset of the ``m`` items,
indexed by that subset's mask, so every value query is a table lookup.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidRange,
    InvalidRegime,
    NotIdentical,
    NotTrilean,
    StructuralError,
)

MAX_ITEMS = 20


# -- bit-set helpers ---------------------------------------------------------

def items_of(mask: int) -> list[int]:
    """Item indices present in ``mask``, ascending."""
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def mask_of(items: Iterable[int]) -> int:
    mask = 0
    for k in items:
        if k < 0:
            raise StructuralError(f"negative item index {k}")
        mask |= 1 << k
    return mask


def full_mask(m: int) -> int:
    return (1 << m) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def popcounts(masks: np.ndarray) -> np.ndarray:
    """Vectorized popcount of an int64 mask array."""
    masks = np.asarray(masks, dtype=np.int64)
    sizes = np.zeros(masks.shape, dtype=np.int64)
    for k in range(MAX_ITEMS):
        sizes += (masks >> k) & 1
    return sizes


@lru_cache(maxsize=None)
def subset_order(m: int) -> np.ndarray:
    """All masks over ``m`` items sorted by cardinality, then by bit pattern."""
    masks = np.arange(1 << m, dtype=np.int64)
    sizes = popcounts(masks)
    order = np.lexsort((masks, sizes))
    order.setflags(write=False)
    return order


def submasks_in_order(m: int, ground: int) -> np.ndarray:
    """Subsets of ``ground`` in (cardinality, bit pattern) order."""
    order = subset_order(m)
    return order[(order & ~ground) == 0]


# -- valuations --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SetValuation:
    """Dense integer set function on ``m`` items; ``table[mask]`` is v(mask)."""

    m: int
    table: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.m <= MAX_ITEMS:
            raise StructuralError(f"item count {self.m} outside 0..{MAX_ITEMS}")
        table = np.array(self.table, dtype=np.int64).reshape(-1)
        if table.shape[0] != 1 << self.m:
            raise StructuralError(
                f"table has {table.shape[0]} entries, expected 2^{self.m}"
            )
        if table[0] != 0:
            raise InvalidRange("value of the empty set must be 0")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, m: int, fn) -> "SetValuation":
        """Tabulate ``fn(mask)`` over every subset."""
        return cls(m, [fn(mask) for mask in range(1 << m)])

    def __eq__(self, other):
        if not isinstance(other, SetValuation):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.m, self.table.tobytes()))

    def _check(self, mask: int) -> None:
        if mask < 0 or mask >> self.m:
            raise StructuralError(f"item set {mask:#b} not within {self.m} items")

    def value(self, mask: int) -> int:
        self._check(mask)
        return int(self.table[mask])

    __call__ = value

    def child_summary(self, mask: int) -> "ChildSummary":
        self._check(mask)
        table = self.table
        children = sorted(int(table[mask ^ (1 << k)]) for k in items_of(mask))
        return ChildSummary(int(table[mask]), tuple(children))

    def range_on(self, ground: int) -> set[int]:
        """Distinct values taken by subsets of ``ground``."""
        self._check(ground)
        subs = submasks_in_order(self.m, ground)
        return set(np.unique(self.table[subs]).tolist())

    def has_child_valued(self, c: int) -> np.ndarray:
        """Boolean array: entry S is true iff some child of S has value ``c``."""
        key = ("child", c)
        arr = self._cache.get(key)
        if arr is None:
            masks = np.arange(1 << self.m, dtype=np.int64)
            arr = np.zeros(1 << self.m, dtype=bool)
            hit = self.table == c
            for k in range(self.m):
                bit = 1 << k
                arr |= ((masks & bit) != 0) & hit[masks ^ bit]
            arr.setflags(write=False)
            self._cache[key] = arr
        return arr

    def relabel(self, mapping: dict[int, int]) -> "SetValuation":
        try:
            table = [mapping[int(x)] for x in self.table]
        except KeyError as exc:
            raise InvalidRange(f"value {exc.args[0]} has no relabeling") from None
        return SetValuation(self.m, table)


@dataclass(frozen=True)
class ChildSummary:
    """Value of a set and the sorted multiset of its children's values."""

    value: int
    child_values: tuple[int, ...]

    def has_arrow(self, a: int, b: int) -> bool:
        """``v(S) = a -> b``: value a and some child valued b."""
        return self.value == a and b in self.child_values

    def has_double_arrow(self, a: int, allowed) -> bool:
        """``v(S) = a => B``: value a and every child valued inside B."""
        if isinstance(allowed, int):
            allowed = (allowed,)
        allowed = set(allowed)
        return self.value == a and all(c in allowed for c in self.child_values)


# -- instances and allocations ------------------------------------------------

@dataclass(frozen=True, eq=False)
class Instance:
    """``n`` agents with set valuations over the same ``m`` items."""

    valuations: tuple[SetValuation, ...]
    identical_flag: bool | None = None
    _tables: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vals = tuple(self.valuations)
        if not vals:
            raise StructuralError("an instance needs at least one agent")
        m = vals[0].m
        if any(v.m != m for v in vals):
            raise StructuralError("valuations disagree on the item count")
        object.__setattr__(self, "valuations", vals)
        if self.identical_flag and not self.identical:
            raise NotIdentical("instance flagged identical but tables differ")

    @classmethod
    def identical_agents(cls, n: int, valuation: SetValuation) -> "Instance":
        return cls((valuation,) * n, identical_flag=True)

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def m(self) -> int:
        return self.valuations[0].m

    @property
    def identical(self) -> bool:
        first = self.valuations[0]
        return all(v is first or v == first for v in self.valuations[1:])

    @property
    def tables(self) -> np.ndarray:
        """``(n, 2^m)`` contiguous int64 stack used by the kernels."""
        if self._tables is None:
            stacked = np.ascontiguousarray(
                np.stack([v.table for v in self.valuations]), dtype=np.int64
            )
            stacked.setflags(write=False)
            object.__setattr__(self, "_tables", stacked)
        return self._tables

    def require_identical(self) -> SetValuation:
        if not self.identical:
            raise NotIdentical("solver requires identical valuations")
        return self.valuations[0]

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.valuations == other.valuations

    def __hash__(self):
        return hash(self.valuations)


@dataclass(frozen=True)
class Allocation:
    """Per-agent disjoint item masks; possibly partial."""

    bundles: tuple[int, ...]

    def __post_init__(self):
        bundles = tuple(int(b) for b in self.bundles)
        seen = 0
        for b in bundles:
            if b < 0:
                raise StructuralError("negative bundle mask")
            if seen & b:
                raise StructuralError("bundles overlap")
            seen |= b
        object.__setattr__(self, "bundles", bundles)

    @classmethod
    def empty(cls, n: int) -> "Allocation":
        return cls((0,) * n)

    @classmethod
    def from_lists(cls, lists: Sequence[Iterable[int]]) -> "Allocation":
        return cls(tuple(mask_of(items) for items in lists))

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def allocated(self) -> int:
        out = 0
        for b in self.bundles:
            out |= b
        return out

    def check_within(self, m: int) -> None:
        if self.allocated >> m:
            raise StructuralError(f"allocation uses items beyond {m}")

    def is_complete(self, m: int) -> bool:
        return self.allocated == full_mask(m)

    def as_lists(self) -> list[list[int]]:
        return [items_of(b) for b in self.bundles]

    def __getitem__(self, i: int) -> int:
        return self.bundles[i]


# -- value regimes ------------------------------------------------------------

class Kind(enum.Enum):
    NEG_TRILEAN = "neg-trilean"
    POS_TRILEAN = "pos-trilean"
    BOOL_POS = "bool-pos"
    BOOL_NEG = "bool-neg"
    GENERAL = "general"


_KIND_RANGES = {
    Kind.NEG_TRILEAN: frozenset({0, -1, 1}),
    Kind.POS_TRILEAN: frozenset({0, 1, 2}),
    Kind.BOOL_POS: frozenset({0, 1}),
    Kind.BOOL_NEG: frozenset({0, -1}),
}


@dataclass(frozen=True)
class TrileanKind:
    """A value regime; ``GENERAL`` carries its two nonzero values.

    A general regime with a single nonzero value keeps ``b = None``.
    """

    tag: Kind
    a: int | None = None
    b: int | None = None

    def __post_init__(self):
        if self.tag is Kind.GENERAL:
            if self.a is None or self.a == 0 or self.b == 0 or self.a == self.b:
                raise StructuralError(
                    f"general regime needs distinct nonzero values, got {self.a}, {self.b}"
                )
        elif self.a is not None or self.b is not None:
            raise StructuralError("only the general regime carries values")

    @property
    def values(self) -> frozenset[int]:
        if self.tag is Kind.GENERAL:
            return frozenset(x for x in (0, self.a, self.b) if x is not None)
        return _KIND_RANGES[self.tag]

    def __str__(self):
        if self.tag is Kind.GENERAL:
            vals = ",".join(str(x) for x in (0, self.a, self.b) if x is not None)
            return f"general{{{vals}}}"
        return self.tag.value


NEG_TRILEAN = TrileanKind(Kind.NEG_TRILEAN)
POS_TRILEAN = TrileanKind(Kind.POS_TRILEAN)
BOOL_POS = TrileanKind(Kind.BOOL_POS)
BOOL_NEG = TrileanKind(Kind.BOOL_NEG)


def _as_kind(regime) -> Kind:
    return regime.tag if isinstance(regime, TrileanKind) else Kind(regime)


def detect_kind(inst: Instance) -> TrileanKind:
    """Most specific regime containing every value of every table."""
    nonzero = sorted(set(np.unique(inst.tables).tolist()) - {0})
    vals = set(nonzero)
    for kind in (Kind.BOOL_POS, Kind.BOOL_NEG, Kind.NEG_TRILEAN, Kind.POS_TRILEAN):
        if vals <= _KIND_RANGES[kind]:
            return TrileanKind(kind)
    if len(nonzero) == 1:
        return TrileanKind(Kind.GENERAL, nonzero[0], None)
    if len(nonzero) == 2:
        lo, hi = nonzero
        if hi < 0:
            return TrileanKind(Kind.GENERAL, hi, lo)
        return TrileanKind(Kind.GENERAL, lo, hi)
    raise NotTrilean(f"valuations take {len(nonzero)} distinct nonzero values")


def canonical_map(a: int, b: int | None) -> dict[int, int]:
    """Relabeling of ``{0, a, b}`` onto ``{0,-1,1}`` or ``{0,1,2}``.

    Order-preserving unless both values are negative, in which case the
    order is reversed (a -> 1 and b -> 2 for ``0 > a > b``).
    """
    nonzero = sorted(x for x in {a, b} if x is not None and x != 0)
    if not nonzero:
        return {0: 0}
    if len(nonzero) == 1:
        c = nonzero[0]
        return {0: 0, c: 1 if c > 0 else -1}
    lo, hi = nonzero
    if lo > 0:
        return {0: 0, lo: 1, hi: 2}
    if hi < 0:
        return {0: 0, hi: 1, lo: 2}
    return {0: 0, lo: -1, hi: 1}


def canonicalize_trilean(inst: Instance, a: int, b: int | None):
    """Relabel an identical ``{0,a,b}`` instance into a canonical regime.

    Returns ``(instance, back_map)`` where ``back_map`` sends canonical values
    back to the original ones.  An allocation that is EF1 for the returned
    instance is EF1 for ``inst``.
    """
    v = inst.require_identical()
    allowed = {0, a} | ({b} if b is not None else set())
    present = set(np.unique(v.table).tolist())
    if not present <= allowed:
        raise InvalidRange(f"values {sorted(present - allowed)} outside {{0,{a},{b}}}")
    forward = canonical_map(a, b)
    back = {new: old for old, new in forward.items()}
    relabeled = v.relabel(forward)
    return Instance.identical_agents(inst.n, relabeled), back


# -- classification -------------------------------------------------------------

class AgentClass(enum.Flag):
    U = enum.auto()
    ZERO = enum.auto()
    FAV = enum.auto()
    # negative regime
    FLEX_PLUS = enum.auto()
    FLEX_MINUS = enum.auto()
    RES_PLUS = enum.auto()
    RES_MINUS = enum.auto()
    BAD_PLUS = enum.auto()
    BAD_MINUS = enum.auto()
    # positive regime
    FLEX = enum.auto()
    RES = enum.auto()
    RES_STAR = enum.auto()
    BAD = enum.auto()

    def __str__(self):
        return "|".join(f.name for f in AgentClass if f in self and f.value) or "-"


NONE = AgentClass(0)


def classify_bundle(v: SetValuation, bundle: int, regime) -> AgentClass:
    """Classification flags of a bundle under the negative or positive regime."""
    kind = _as_kind(regime)
    if kind not in (Kind.NEG_TRILEAN, Kind.POS_TRILEAN):
        raise InvalidRegime(f"classification undefined for {kind.value}")
    cs = v.child_summary(bundle)
    allowed = _KIND_RANGES[kind]
    if cs.value not in allowed or any(c not in allowed for c in cs.child_values):
        raise InvalidRegime(f"bundle {bundle:#b} has values outside {sorted(allowed)}")
    val, arrow, all_in = cs.value, cs.has_arrow, cs.has_double_arrow
    nonempty = bool(cs.child_values)
    flags = NONE
    if bundle == 0:
        flags |= AgentClass.U
    if val == 0:
        flags |= AgentClass.ZERO
    if kind is Kind.NEG_TRILEAN:
        if arrow(1, -1) or arrow(-1, 1):
            flags |= AgentClass.FAV
        if arrow(0, 1):
            flags |= AgentClass.FLEX_PLUS
        if arrow(0, -1):
            flags |= AgentClass.FLEX_MINUS
        if arrow(1, 0):
            flags |= AgentClass.RES_PLUS
        if arrow(-1, 0):
            flags |= AgentClass.RES_MINUS
        if nonempty and all_in(1, 1):
            flags |= AgentClass.BAD_PLUS
        if nonempty and all_in(-1, -1):
            flags |= AgentClass.BAD_MINUS
    else:
        if arrow(2, 0) or arrow(0, 2):
            flags |= AgentClass.FAV
        if arrow(1, 0):
            flags |= AgentClass.FLEX
        if arrow(2, 1):
            flags |= AgentClass.RES
        if nonempty and all_in(1, (1, 2)):
            flags |= AgentClass.RES_STAR
        if nonempty and all_in(2, 2):
            flags |= AgentClass.BAD
    return flags


def classify_allocation(v: SetValuation, alloc: Allocation, regime) -> list[AgentClass]:
    return [classify_bundle(v, b, regime) for b in alloc.bundles]
