"""JSON instance and allocation files.

Set-function instances list, per agent, the value of every subset indexed
by its bit pattern (bit k is item k).  SSP instances list per type the item
count, one threshold per agent and one value table per agent.  Files are
written with sorted keys and two-space indentation, so loading and saving a
file written here reproduces it byte for byte.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .errors import FairDivError, InstanceFileError
from .ssp import QuantityAllocation, SSPInstance
from .valuation import Allocation, Instance, SetValuation, mask_of


@lru_cache(maxsize=None)
def _schema(name: str) -> dict:
    text = resources.files("fairdiv").joinpath("schemas", name).read_text("utf-8")
    return json.loads(text)


def _field_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "$"


def _validate(doc: Any, schema_name: str) -> None:
    validator = jsonschema.Draft202012Validator(_schema(schema_name))
    best = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if best is not None:
        raise InstanceFileError(best.message, _field_path(best.absolute_path))


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _read_json(path) -> Any:
    text = Path(path).read_text("utf-8")  # OSError propagates to the caller
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFileError(f"invalid JSON ({exc.msg} at line {exc.lineno})", "$") from None


# -- instances ---------------------------------------------------------------------

@dataclass
class InstanceDoc:
    """A loaded instance plus the file-level fields kept for round trips."""

    instance: Instance | SSPInstance
    identical: bool
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "ssp" if isinstance(self.instance, SSPInstance) else "set-function"


def _set_function_from(doc: dict) -> Instance:
    n, m = doc["agents"], doc["items"]
    values = doc["values"]
    if len(values) != n:
        raise InstanceFileError(f"expected {n} value arrays, got {len(values)}", "values")
    vals = []
    for i, row in enumerate(values):
        if len(row) != 1 << m:
            raise InstanceFileError(f"expected {1 << m} values, got {len(row)}", f"values[{i}]")
        if row[0] != 0:
            raise InstanceFileError("value of the empty set must be 0", f"values[{i}][0]")
        vals.append(SetValuation(m, row))
    identical = bool(doc.get("identical", False))
    if identical and any(r != values[0] for r in values[1:]):
        bad = next(i for i, r in enumerate(values) if r != values[0])
        raise InstanceFileError("identical instance with differing tables", f"values[{bad}]")
    return Instance(tuple(vals), identical_flag=identical)


def _ssp_from(doc: dict) -> SSPInstance:
    n = doc["agents"]
    counts, thresholds, tables = [], [[] for _ in range(n)], [[] for _ in range(n)]
    for j, typ in enumerate(doc["types"]):
        base = f"types[{j}]"
        count = typ["count"]
        if len(typ["thresholds"]) != n:
            raise InstanceFileError(f"expected {n} thresholds", f"{base}.thresholds")
        if len(typ["tables"]) != n:
            raise InstanceFileError(f"expected {n} tables", f"{base}.tables")
        for i in range(n):
            tab = typ["tables"][i]
            where = f"{base}.tables[{i}]"
            if len(tab) != count + 1:
                raise InstanceFileError(f"expected {count + 1} entries", where)
            if tab[0] != 0:
                raise InstanceFileError("value of zero items must be 0", f"{where}[0]")
            thresholds[i].append(typ["thresholds"][i])
            tables[i].append(tab)
        counts.append(count)
    try:
        inst = SSPInstance(tuple(counts), thresholds, tables)
    except FairDivError as exc:
        raise InstanceFileError(str(exc), "types") from None
    if doc.get("identical") and any(
        tables[i] != tables[0] or thresholds[i] != thresholds[0] for i in range(n)
    ):
        raise InstanceFileError("identical instance with differing agents", "types")
    return inst


def parse_instance(doc: Any) -> InstanceDoc:
    # the schema's oneOf would blame the whole document for a bad kind
    if isinstance(doc, dict) and doc.get("kind") not in ("set-function", "ssp"):
        raise InstanceFileError(f"kind must be 'set-function' or 'ssp', got {doc.get('kind')!r}", "kind")
    _validate(doc, "instance.schema.json")
    try:
        inst = _set_function_from(doc) if doc["kind"] == "set-function" else _ssp_from(doc)
    except InstanceFileError:
        raise
    except FairDivError as exc:
        raise InstanceFileError(str(exc), "values") from None
    return InstanceDoc(inst, bool(doc.get("identical", False)), doc.get("seed"), doc.get("meta", {}))


def read_instance(path) -> InstanceDoc:
    return parse_instance(_read_json(path))


def load_instance(path) -> Instance | SSPInstance:
    return read_instance(path).instance


def instance_to_doc(
    inst: Instance | SSPInstance, identical: bool | None = None, seed=None, meta=None
) -> dict:
    if isinstance(inst, SSPInstance):
        if identical is None:
            identical = all(
                inst.tables[i] == inst.tables[0] and inst.thresholds[i] == inst.thresholds[0]
                for i in range(inst.n)
            )
        doc = {
            "kind": "ssp",
            "agents": inst.n,
            "types": [
                {
                    "count": inst.counts[j],
                    "thresholds": [inst.thresholds[i][j] for i in range(inst.n)],
                    "tables": [list(inst.tables[i][j]) for i in range(inst.n)],
                }
                for j in range(inst.t)
            ],
        }
    else:
        if identical is None:
            identical = inst.identical_flag if inst.identical_flag is not None else inst.identical
        doc = {
            "kind": "set-function",
            "agents": inst.n,
            "items": inst.m,
            "values": [v.table.tolist() for v in inst.valuations],
        }
    doc["identical"] = bool(identical)
    if seed is not None:
        doc["seed"] = int(seed)
    if meta:
        doc["meta"] = meta
    return doc


def save_instance(path, inst, identical=None, seed=None, meta=None) -> None:
    Path(path).write_text(dumps(instance_to_doc(inst, identical, seed, meta)), "utf-8")


def save_instance_doc(path, doc: InstanceDoc) -> None:
    save_instance(path, doc.instance, doc.identical, doc.seed, doc.meta)


# -- allocations -------------------------------------------------------------------

def allocation_to_doc(
    alloc: Allocation | QuantityAllocation,
    solver: str | None = None,
    trace: dict | None = None,
    fairness: dict | None = None,
) -> dict:
    if isinstance(alloc, QuantityAllocation):
        doc = {"kind": "ssp", "bundles": [list(r) for r in alloc.grid]}
    else:
        doc = {"kind": "set-function", "bundles": alloc.as_lists()}
    if solver:
        doc["solver"] = solver
    if trace:
        doc["trace"] = trace
    if fairness is not None:
        doc["fairness"] = fairness
    return doc


def parse_allocation(doc: Any, kind: str):
    """Allocation for an instance of ``kind`` ("set-function" or "ssp")."""
    _validate(doc, "allocation.schema.json")
    declared = doc.get("kind", kind)
    if declared != kind:
        raise InstanceFileError(f"allocation is for {declared}, instance is {kind}", "kind")
    bundles = doc["bundles"]
    try:
        if kind == "ssp":
            return QuantityAllocation(tuple(tuple(r) for r in bundles))
        for i, b in enumerate(bundles):
            if len(set(b)) != len(b):
                raise InstanceFileError("repeated item", f"bundles[{i}]")
        return Allocation(tuple(mask_of(b) for b in bundles))
    except InstanceFileError:
        raise
    except FairDivError as exc:
        raise InstanceFileError(str(exc), "bundles") from None


def load_allocation(path, kind: str = "set-function"):
    return parse_allocation(_read_json(path), kind)


def save_allocation(path, alloc, solver=None, trace=None, fairness=None) -> None:
    Path(path).write_text(dumps(allocation_to_doc(alloc, solver, trace, fairness)), "utf-8")
