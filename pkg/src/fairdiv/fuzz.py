"""Solve-and-verify fuzzing with greedy shrinking of failing instances.

Instance ``k`` of a run with seed ``s`` is generated from a seed derived
from ``(s, k)``, so a run is reproducible and any single instance can be
regenerated on its own.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import generate
from .boolean import neg_boolean_ef1
from .solve import verified
from .ssp import SSPInstance, ssp3_ef1, ssp_common_threshold_ef1
from .trilean import trilean_neg_ef1, trilean_pos_ef1
from .valuation import Instance, SetValuation

CLASSES = ("negtrilean", "postrilean", "boolneg", "ssp3", "ssp-common")


def instance_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def make_instance(cls: str, seed: int):
    rng = np.random.default_rng(seed)
    if cls in ("negtrilean", "postrilean", "boolneg"):
        n, m = int(rng.integers(2, 5)), int(rng.integers(4, 9))
        sub = int(rng.integers(0, 2**31))
        if cls == "boolneg":
            return generate.gen_boolean(n, m, -1, identical=False, seed=sub)
        regime = "neg" if cls == "negtrilean" else "pos"
        # half uniform tables, half layered ones that reach the repair stage
        if rng.random() < 0.5:
            return generate.gen_layered_trilean(n, m, regime, seed=sub)
        a, b = (-1, 1) if regime == "neg" else (1, 2)
        return generate.gen_trilean(n, m, a, b, identical=True, seed=sub)
    if cls == "ssp3":
        return generate.gen_ssp(3, int(rng.integers(0, 5)), 9, 50, False, int(rng.integers(0, 2**31)))
    if cls == "ssp-common":
        n = int(rng.integers(1, 6))
        return generate.gen_ssp(n, int(rng.integers(0, 5)), 9, 50, True, int(rng.integers(0, 2**31)))
    raise ValueError(f"unknown fuzz class {cls!r}; choose from {', '.join(CLASSES)}")


def default_solver(cls: str) -> Callable:
    return {
        "negtrilean": lambda inst: trilean_neg_ef1(inst, keep_events=False)[0],
        "postrilean": lambda inst: trilean_pos_ef1(inst, keep_events=False)[0],
        "boolneg": neg_boolean_ef1,
        "ssp3": ssp3_ef1,
        "ssp-common": ssp_common_threshold_ef1,
    }[cls]


def check(inst, solver) -> str | None:
    """Failure description, or None when the solver's output verifies."""
    try:
        alloc = solver(inst)
    except Exception as exc:  # a crash is a finding, not a harness error
        return f"solver raised {type(exc).__name__}: {exc}"
    try:
        ok = verified(inst, alloc)
    except Exception as exc:
        return f"malformed allocation: {exc}"
    return None if ok else "output is incomplete or not EF1"


# -- shrinking -------------------------------------------------------------------

def _drop_item(inst: Instance, k: int) -> Instance:
    m = inst.m
    keep = np.array([s for s in range(1 << m) if not s >> k & 1], dtype=np.int64)
    vals = tuple(SetValuation(m - 1, v.table[keep]) for v in inst.valuations)
    return Instance(vals, identical_flag=inst.identical_flag)


def _drop_agent(inst: Instance, i: int) -> Instance:
    vals = inst.valuations[:i] + inst.valuations[i + 1:]
    return Instance(vals, identical_flag=inst.identical_flag)


def _contract_item(inst: Instance, k: int) -> Instance | None:
    """Item ``k`` merged into every set: v'(S) = v(S + k), needs v({k}) = 0."""
    if any(v.table[1 << k] != 0 for v in inst.valuations):
        return None
    m = inst.m
    keep = np.array([s for s in range(1 << m) if not s >> k & 1], dtype=np.int64)
    vals = tuple(SetValuation(m - 1, v.table[keep | (1 << k)]) for v in inst.valuations)
    return Instance(vals, identical_flag=inst.identical_flag)


def _zero_entry(inst: Instance, s: int) -> Instance:
    vals = []
    for v in inst.valuations:
        table = v.table.copy()
        table[s] = 0
        vals.append(SetValuation(v.m, table))
    return Instance(tuple(vals), identical_flag=inst.identical_flag)


def _set_candidates(inst: Instance):
    if inst.n > 2:
        for i in reversed(range(inst.n)):
            yield _drop_agent(inst, i)
    for k in reversed(range(inst.m)):
        yield _drop_item(inst, k)
    for k in reversed(range(inst.m)):
        merged = _contract_item(inst, k)
        if merged is not None:
            yield merged
    nonzero = sorted({int(s) for v in inst.valuations for s in np.flatnonzero(v.table)})
    for s in reversed(nonzero):
        yield _zero_entry(inst, s)


def _ssp_candidates(inst: SSPInstance, keep_n: bool):
    t = inst.t
    cols = lambda drop: [j for j in range(t) if j != drop]  # noqa: E731
    for d in reversed(range(t)):
        js = cols(d)
        yield SSPInstance(
            tuple(inst.counts[j] for j in js),
            [[inst.thresholds[i][j] for j in js] for i in range(inst.n)],
            [[inst.tables[i][j] for j in js] for i in range(inst.n)],
        )
    for d in range(t):
        if inst.counts[d] == 0:
            continue
        counts = list(inst.counts)
        counts[d] -= 1
        yield SSPInstance(
            tuple(counts),
            [[min(inst.thresholds[i][j], counts[j]) for j in range(t)] for i in range(inst.n)],
            [[inst.tables[i][j][: counts[j] + 1] for j in range(t)] for i in range(inst.n)],
        )
    if not keep_n and inst.n > 1:
        for i in reversed(range(inst.n)):
            yield SSPInstance(
                inst.counts,
                inst.thresholds[:i] + inst.thresholds[i + 1:],
                inst.tables[:i] + inst.tables[i + 1:],
            )


def shrink(inst, fails: Callable[[object], bool], keep_agent_count: bool = False):
    """Greedy one-step reductions until none keeps ``fails`` true."""
    current = inst
    progress = True
    while progress:
        progress = False
        if isinstance(current, SSPInstance):
            cands = _ssp_candidates(current, keep_agent_count)
        else:
            cands = _set_candidates(current)
        for cand in cands:
            if keep_agent_count and getattr(cand, "n", None) != getattr(current, "n", None):
                continue
            try:
                bad = fails(cand)
            except Exception:
                bad = False
            if bad:
                current = cand
                progress = True
                break
    return current


@dataclass
class Failure:
    index: int
    seed: int
    reason: str
    instance: object
    minimal: object


@dataclass
class FuzzReport:
    cls: str
    seed: int
    count: int
    failures: list[Failure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def fuzz(cls: str, count: int, seed: int, solver: Callable | None = None, stop_on_failure: bool = True) -> FuzzReport:
    solver = solver or default_solver(cls)
    report = FuzzReport(cls, seed, count)
    for k in range(count):
        s = instance_seed(seed, k)
        inst = make_instance(cls, s)
        reason = check(inst, solver)
        if reason is None:
            continue
        minimal = shrink(
            inst,
            lambda cand: check(cand, solver) is not None,
            keep_agent_count=cls == "ssp3",
        )
        report.failures.append(Failure(k, s, reason, inst, minimal))
        if stop_on_failure:
            break
    report.failures.sort(key=lambda f: f.seed)
    return report
