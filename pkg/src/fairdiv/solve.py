"""One entry point that picks the right solver for any loaded instance."""
from __future__ import annotations

from dataclasses import dataclass

from .boolean import neg_boolean_ef1
from .errors import NotIdentical, StructuralError
from .ssp import (
    QuantityAllocation,
    SSPInstance,
    expand_to_item_sets,
    is_ef1_quantity,
    is_efxpm_quantity,
    quantity_ef1_violations,
    ssp3_ef1,
    ssp_common_threshold_ef1,
    ssp_to_set_instance,
)
from .trilean import trilean_ef1
from .valuation import MAX_ITEMS, Allocation, Instance, Kind, detect_kind
from .verify import is_ef1, is_efxpm


@dataclass
class SolveResult:
    allocation: Allocation | QuantityAllocation
    solver: str
    trace: dict


def solve(inst: Instance | SSPInstance) -> SolveResult:
    if isinstance(inst, SSPInstance):
        if inst.common_thresholds() is not None:
            return SolveResult(ssp_common_threshold_ef1(inst), "ssp-common-threshold", {})
        if inst.n == 3:
            return SolveResult(ssp3_ef1(inst), "ssp-three-agents", {})
        raise StructuralError(
            f"no SSP solver for {inst.n} agents with differing thresholds"
        )
    kind = detect_kind(inst)
    if not inst.identical:
        if kind.tag is Kind.BOOL_NEG:
            return SolveResult(neg_boolean_ef1(inst), "boolean-neg", {})
        raise NotIdentical(f"nonidentical agents are only supported for {{0,-1}} values, got {kind}")
    alloc, name, trace = trilean_ef1(inst)
    summary = {"kind": str(kind)}
    if trace is not None:
        summary["terminal"] = trace.terminal
        if trace.fixer is not None:
            summary["fixer_inner_iterations"] = trace.fixer.inner_iterations
            summary["fixer_entry_size"] = trace.fixer.entry_size
    return SolveResult(alloc, name, summary)


def fairness_report(inst, alloc) -> dict:
    """EF1 and EFX+- status with readable witnesses."""
    if isinstance(inst, SSPInstance):
        ef1 = is_ef1_quantity(inst, alloc)
        witnesses = [
            f"agent {i} envies agent {k}; no single removal resolves it"
            for i, k in quantity_ef1_violations(inst, alloc.grid)
        ]
        report = {"ef1": ef1, "efxpm": is_efxpm_quantity(inst, alloc), "witnesses": witnesses}
        if sum(inst.counts) <= MAX_ITEMS:
            # cross-check on labeled items with the set-function verifier
            report["ef1_item_sets"] = is_ef1(ssp_to_set_instance(inst), expand_to_item_sets(inst, alloc))[0]
        return report
    ef1, w1 = is_ef1(inst, alloc)
    efx, w2 = is_efxpm(inst, alloc)
    witnesses = [w.describe() for w in (w1, w2) if w is not None]
    return {"ef1": ef1, "efxpm": efx, "witnesses": witnesses}


def verified(inst, alloc) -> bool:
    if isinstance(inst, SSPInstance):
        alloc.check_within(inst)
        return alloc.is_complete(inst) and is_ef1_quantity(inst, alloc)
    return alloc.n == inst.n and alloc.is_complete(inst.m) and is_ef1(inst, alloc)[0]
