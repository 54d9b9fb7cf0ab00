"""Seeded random instance generators.

Every generator takes an integer seed and builds its own
``numpy.random.Generator``, so equal arguments give equal instances.
"""
from __future__ import annotations

import numpy as np

from .errors import StructuralError
from .ssp import SSPInstance
from .valuation import Instance, SetValuation, popcounts

MAX_GENERATED_ITEMS = 12


def _check_m(m: int) -> None:
    if not 0 <= m <= MAX_GENERATED_ITEMS:
        raise StructuralError(f"generated instances need 0 <= m <= {MAX_GENERATED_ITEMS}, got {m}")


def _check_n(n: int) -> None:
    if n < 1:
        raise StructuralError(f"need at least one agent, got {n}")


def _draw_table(rng, m: int, values) -> SetValuation:
    table = rng.choice(np.asarray(values, dtype=np.int64), size=1 << m)
    table[0] = 0
    return SetValuation(m, table)


def _assemble(rng, n, m, values, identical) -> Instance:
    if identical:
        return Instance.identical_agents(n, _draw_table(rng, m, values))
    return Instance(tuple(_draw_table(rng, m, values) for _ in range(n)), identical_flag=False)


def gen_trilean(n: int, m: int, a: int, b: int | None, identical: bool = True, seed: int = 0) -> Instance:
    """Each nonempty subset's value uniform over {0, a, b}."""
    _check_n(n)
    _check_m(m)
    if a == 0 or b == 0 or a == b:
        raise StructuralError(f"values must be distinct and nonzero, got {a}, {b}")
    values = [0, a] if b is None else [0, a, b]
    return _assemble(np.random.default_rng(seed), n, m, values, identical)


def gen_boolean(n: int, m: int, sign: int = -1, identical: bool = False, seed: int = 0) -> Instance:
    """Values uniform over {0, sign} with ``sign`` = 1 or -1."""
    if sign not in (1, -1):
        raise StructuralError(f"sign must be 1 or -1, got {sign}")
    return gen_trilean(n, m, sign, None, identical, seed)


def gen_layered_trilean(n: int, m: int, regime: str = "neg", seed: int = 0) -> Instance:
    """Identical trilean instance whose value depends on how many "active"
    items a set holds.

    The per-size profile never jumps between the two values that would make
    a favourable set, so the flexible-set and repair stages do real work
    far more often than with uniform tables.
    """
    _check_n(n)
    _check_m(m)
    if regime not in ("neg", "pos"):
        raise StructuralError(f"regime must be 'neg' or 'pos', got {regime!r}")
    rng = np.random.default_rng(seed)
    values = (0, -1, 1) if regime == "neg" else (0, 1, 2)
    forbidden = {-1, 1} if regime == "neg" else {0, 2}
    profile = [0]
    for _ in range(m):
        opts = [x for x in values if {profile[-1], x} != forbidden]
        profile.append(int(rng.choice(opts)))
    active = 0
    for k in range(m):
        if rng.random() < 0.85:
            active |= 1 << k
    sizes = popcounts(np.arange(1 << m, dtype=np.int64) & active)
    table = np.asarray(profile, dtype=np.int64)[sizes]
    return Instance.identical_agents(n, SetValuation(m, table))


def single_peaked_table(rng, count: int, theta: int, bound: int) -> list[int]:
    tab = [0]
    for x in range(1, count + 1):
        step = int(rng.integers(0, bound + 1))
        tab.append(tab[-1] + step if x <= theta else tab[-1] - step)
    return tab


def gen_ssp(
    n: int, t: int, max_count: int, value_bound: int, common_thresholds: bool = False, seed: int = 0
) -> SSPInstance:
    """Counts uniform in 0..max_count, thresholds uniform in 0..m_j, and
    tables rising then falling by steps uniform in 0..value_bound."""
    _check_n(n)
    if t < 0 or max_count < 0 or value_bound < 0:
        raise StructuralError("t, max_count and value_bound must be nonnegative")
    rng = np.random.default_rng(seed)
    counts = [int(rng.integers(0, max_count + 1)) for _ in range(t)]
    thresholds = [[0] * t for _ in range(n)]
    tables = [[None] * t for _ in range(n)]
    for j, count in enumerate(counts):
        shared = int(rng.integers(0, count + 1))
        for i in range(n):
            theta = shared if common_thresholds else int(rng.integers(0, count + 1))
            thresholds[i][j] = theta
            tables[i][j] = single_peaked_table(rng, count, theta, value_bound)
    return SSPInstance(tuple(counts), thresholds, tables)
