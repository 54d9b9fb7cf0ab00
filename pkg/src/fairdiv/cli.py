"""Command-line interface: ``fairdiv solve|verify|brute|fuzz|demo``.

Exit codes: 0 success, 1 verification failed (verify), 2 solver output
failed its own verification (solve), 3 no fair allocation exists (brute),
4 fuzzing found a failure, 64 usage error, 65 invalid instance data,
74 file I/O error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .errors import BudgetExceeded, FairDivError
from .fuzz import CLASSES, fuzz
from .solve import fairness_report, solve, verified
from .ssp import SSPInstance, ssp_to_set_instance
from .valuation import Instance, SetValuation
from .verify import (
    brute_force_find_ef1,
    brute_force_find_efxpm,
    complete_allocations,
    is_ef1,
    is_efxpm,
)

EX_OK = 0
EX_VERIFY_FAILED = 1
EX_SELF_CHECK = 2
EX_NONE_FOUND = 3
EX_FUZZ_FAILURE = 4
EX_USAGE = 64
EX_DATAERR = 65
EX_IOERR = 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairdiv", description="EF1 solvers and fairness oracles.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance file and verify the result")
    s.add_argument("instance")
    s.add_argument("-o", "--output", help="allocation file to write (default: stdout)")

    v = sub.add_parser("verify", help="check an allocation against an instance")
    v.add_argument("instance")
    v.add_argument("allocation")
    v.add_argument("--efx", action="store_true", help="check EFX+- instead of EF1")

    b = sub.add_parser("brute", help="exhaustively search for a fair allocation")
    b.add_argument("instance")
    b.add_argument("--efx", action="store_true", help="search for EFX+- instead of EF1")
    b.add_argument("--partial", action="store_true", help="also allow unassigned items")

    f = sub.add_parser("fuzz", help="solve and verify random instances")
    f.add_argument("--class", dest="cls", required=True, choices=CLASSES)
    f.add_argument("--count", type=int, required=True)
    f.add_argument("--seed", type=int, required=True)
    f.add_argument("--out", help="where to write a failing instance (default: ./fuzz-failure-CLASS-SEED.json)")

    d = sub.add_parser("demo", help="run a built-in demonstration")
    d.add_argument("name", choices=["efx-nonexistence"])
    return p


# -- commands ------------------------------------------------------------------------

def _cmd_solve(args) -> int:
    doc = io.read_instance(args.instance)
    inst = doc.instance
    result = solve(inst)
    report = fairness_report(inst, result.allocation)
    text = io.dumps(io.allocation_to_doc(result.allocation, result.solver, result.trace, report))
    if args.output:
        Path(args.output).write_text(text, "utf-8")
    else:
        sys.stdout.write(text)
    if not verified(inst, result.allocation):
        print(f"solver {result.solver} produced an allocation that failed verification", file=sys.stderr)
        return EX_SELF_CHECK
    return EX_OK


def _cmd_verify(args) -> int:
    inst = io.load_instance(args.instance)
    kind = "ssp" if isinstance(inst, SSPInstance) else "set-function"
    alloc = io.load_allocation(args.allocation, kind)
    if isinstance(inst, SSPInstance):
        alloc.check_within(inst)
        report = fairness_report(inst, alloc)
        key = "efxpm" if args.efx else "ef1"
        ok = report[key]
        label = "EFX+-" if args.efx else "EF1"
        print(f"{label}: {'pass' if ok else 'fail'}")
        if not ok and not args.efx:
            for w in report["witnesses"]:
                print(f"  {w}")
        return EX_OK if ok else EX_VERIFY_FAILED
    if alloc.n != inst.n:
        raise FairDivError(f"allocation has {alloc.n} bundles for {inst.n} agents")
    ok, witness = (is_efxpm if args.efx else is_ef1)(inst, alloc)
    print(f"{'EFX+-' if args.efx else 'EF1'}: {'pass' if ok else 'fail'}")
    if witness is not None:
        print(f"  {witness.describe()}")
    if not alloc.is_complete(inst.m):
        print("  note: allocation is partial")
    return EX_OK if ok else EX_VERIFY_FAILED


def _cmd_brute(args) -> int:
    inst = io.load_instance(args.instance)
    set_inst = ssp_to_set_instance(inst) if isinstance(inst, SSPInstance) else inst
    search = brute_force_find_efxpm if args.efx else brute_force_find_ef1
    found = search(set_inst, complete_only=not args.partial)
    if found is None:
        print("none")
        return EX_NONE_FOUND
    for i, items in enumerate(found.as_lists()):
        print(f"agent {i}: {items}")
    return EX_OK


def _cmd_fuzz(args) -> int:
    if args.count < 0:
        raise UsageError("fairdiv fuzz: error: --count must be nonnegative")
    report = fuzz(args.cls, args.count, args.seed)
    if report.ok:
        print(f"{args.cls}: {args.count} instances solved and verified (seed {args.seed})")
        return EX_OK
    fail = report.failures[0]
    out = args.out or f"fuzz-failure-{args.cls}-{args.seed}.json"
    meta = {"class": args.cls, "fuzz_seed": args.seed, "index": fail.index, "reason": fail.reason}
    io.save_instance(out, fail.minimal, seed=fail.seed, meta=meta)
    print(f"{args.cls}: instance {fail.index} failed: {fail.reason}")
    print(f"minimal reproduction written to {out}")
    return EX_FUZZ_FAILURE


def efx_counterexample() -> Instance:
    """Two identical agents, three items: singletons are worth 1, larger sets -1."""
    v = SetValuation.from_function(3, lambda s: 0 if s == 0 else (1 if s & (s - 1) == 0 else -1))
    return Instance.identical_agents(2, v)


def _fmt(items) -> str:
    return "{" + ",".join(f"x{k + 1}" for k in items) + "}"


def _cmd_demo(args) -> int:
    inst = efx_counterexample()
    v = inst.valuations[0]
    print("Two identical agents, items x1 x2 x3; v(S) = 1 if |S| = 1, -1 if |S| >= 2.")
    print(f"{'A_1':<12}{'A_2':<12}{'values':<10}{'EF1':<6}{'EFX+-':<7}reason")
    count = 0
    efx_count = 0
    for alloc in complete_allocations(inst.n, inst.m):
        a1, a2 = alloc.as_lists()
        ef1, _ = is_ef1(inst, alloc)
        efx, w = is_efxpm(inst, alloc)
        count += 1
        efx_count += efx
        vals = f"{v.value(alloc[0])},{v.value(alloc[1])}"
        reason = "no envy" if w is None else w.describe()
        print(f"{_fmt(a1):<12}{_fmt(a2):<12}{vals:<10}{'yes' if ef1 else 'no':<6}{'yes' if efx else 'no':<7}{reason}")
    print(f"{efx_count} of {count} complete allocations are EFX+-")
    ef1_alloc = brute_force_find_ef1(inst)
    if ef1_alloc is not None:
        a1, a2 = ef1_alloc.as_lists()
        print(f"first EF1 allocation: A_1={_fmt(a1)} A_2={_fmt(a2)}")
    if brute_force_find_efxpm(inst) is not None or efx_count:
        print("unexpected: an EFX+- allocation exists", file=sys.stderr)
        return EX_VERIFY_FAILED
    return EX_OK if ef1_alloc is not None else EX_VERIFY_FAILED


_COMMANDS = {
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "brute": _cmd_brute,
    "fuzz": _cmd_fuzz,
    "demo": _cmd_demo,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EX_USAGE
    except OSError as exc:
        print(f"fairdiv: {exc}", file=sys.stderr)
        return EX_IOERR
    except BudgetExceeded as exc:
        print(f"fairdiv: {exc} (raise FAIRDIV_BUDGET to allow it)", file=sys.stderr)
        return EX_DATAERR
    except FairDivError as exc:
        print(f"fairdiv: {exc}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
