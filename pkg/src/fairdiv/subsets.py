"""Searches over the subset lattice: minimal, maximal and favourable sets.

All searches are deterministic.  Enumeration runs by increasing cardinality
and then ascending bit pattern; greedy passes scan items by index.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidRegime, PreconditionFailed, StructuralError
from .valuation import (
    Kind,
    SetValuation,
    _as_kind,
    items_of,
    popcounts,
    submasks_in_order,
)


def _check_subset(mask: int, ground: int) -> None:
    if mask & ~ground:
        raise StructuralError(f"{mask:#b} is not a subset of {ground:#b}")


def find_minimal_common_value(
    vs: Sequence[SetValuation], ground: int, target: int
) -> int:
    """Inclusion-wise minimal ``S`` within ``ground`` valued ``target`` by every ``v``.

    Greedy shrink first: items are tried for removal from the highest index
    down, so low-index items are kept preferentially, and passes repeat until
    no single removal works.  For nonmonotone valuations that fixpoint can
    still hide a smaller witness deeper in the lattice, so the result is then
    checked against all proper subsets and replaced by the first (smallest)
    one found.
    """
    if not vs:
        raise PreconditionFailed("need at least one valuation")
    if any(v.value(ground) != target for v in vs):
        raise PreconditionFailed(f"not every valuation values the ground set at {target}")

    def ok(mask: int) -> bool:
        return all(v.table[mask] == target for v in vs)

    current = ground
    changed = True
    while changed:
        changed = False
        for k in reversed(items_of(current)):
            trial = current & ~(1 << k)
            if ok(trial):
                current = trial
                changed = True

    m = vs[0].m
    subs = submasks_in_order(m, current)[:-1]  # drop current itself (last in order)
    if len(subs):
        hit = np.ones(len(subs), dtype=bool)
        for v in vs:
            hit &= v.table[subs] == target
        idx = np.flatnonzero(hit)
        if len(idx):
            # first in cardinality order has no smaller witness below it
            current = int(subs[idx[0]])
    return current


def find_any_subset_with_value(v: SetValuation, ground: int, target: int) -> int | None:
    """First subset of ``ground`` (by size, then bit pattern) valued ``target``."""
    v._check(ground)
    subs = submasks_in_order(v.m, ground)
    idx = np.flatnonzero(v.table[subs] == target)
    return int(subs[idx[0]]) if len(idx) else None


def grow_to_maximal(v: SetValuation, seed: int, ground: int, target: int) -> int:
    """Inclusion-wise maximal ``S`` with ``seed <= S <= ground`` and ``v(S) == target``.

    Adds items greedily by ascending index until no single addition keeps
    the value.  A remaining larger superset (possible when values dip and
    recover) replaces the result; the largest such superset is taken, which
    is maximal by construction.
    """
    _check_subset(seed, ground)
    if v.value(seed) != target:
        raise PreconditionFailed(f"seed is valued {v.value(seed)}, not {target}")
    table = v.table
    current = seed
    changed = True
    while changed:
        changed = False
        for k in items_of(ground & ~current):
            trial = current | (1 << k)
            if table[trial] == target:
                current = trial
                changed = True

    subs = submasks_in_order(v.m, ground)
    sup = subs[((subs & current) == current) & (subs != current)]
    hits = sup[table[sup] == target]
    if len(hits):
        # order is by cardinality, so the last hit is a largest one
        sizes = popcounts(hits)
        current = int(hits[np.flatnonzero(sizes == sizes.max())[0]])
    return current


def favourable_mask(v: SetValuation, regime) -> np.ndarray:
    """Boolean array over all subsets marking the favourable ones."""
    kind = _as_kind(regime)
    t = v.table
    if kind is Kind.NEG_TRILEAN:
        return ((t == 1) & v.has_child_valued(-1)) | ((t == -1) & v.has_child_valued(1))
    if kind is Kind.POS_TRILEAN:
        return ((t == 2) & v.has_child_valued(0)) | ((t == 0) & v.has_child_valued(2))
    raise InvalidRegime(f"favourable sets undefined for {kind.value}")


def find_favourable(v: SetValuation, ground: int, regime) -> int | None:
    """First favourable subset of ``ground`` in enumeration order, if any."""
    v._check(ground)
    fav = favourable_mask(v, regime)
    subs = submasks_in_order(v.m, ground)
    idx = np.flatnonzero(fav[subs])
    return int(subs[idx[0]]) if len(idx) else None
