"""Time the compiled and pure-Python fairness kernels on the same inputs.

    python benchmarks/bench_kernels.py [--agents 3] [--items 8] [--repeat 3]

Reports the best of ``--repeat`` runs for an exhaustive EF1 flag sweep and
an exhaustive EFX+- search, and checks that both backends agree.
"""
import argparse
import sys
import time

from fairdiv import kernels
from fairdiv.generate import gen_trilean


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--agents", type=int, default=3)
    p.add_argument("--items", type=int, default=8)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    inst = gen_trilean(args.agents, args.items, -1, 1, identical=False, seed=args.seed)
    tables, m = inst.tables, inst.m
    backends = kernels.backends()
    print(f"{args.agents} agents, {m} items, {args.agents ** m} complete allocations")
    if "cython" not in backends:
        print("compiled kernels not built; only the Python backend is timed")

    results = {}
    for name, mod in backends.items():
        t_flags, flags = best_time(lambda: mod.fair_flags(tables, m, kernels.EF1), args.repeat)
        t_search, found = best_time(lambda: mod.first_fair(tables, m, kernels.EFXPM, True), args.repeat)
        results[name] = (t_flags, t_search, list(flags), None if found is None else list(found))
        print(f"{name:>7}: ef1 sweep {t_flags * 1e3:9.2f} ms   efx+- search {t_search * 1e3:9.2f} ms")

    if len(results) == 2:
        c, py = results["cython"], results["python"]
        if c[2:] != py[2:]:
            print("backends disagree", file=sys.stderr)
            return 1
        print(f"speedup: ef1 sweep {py[0] / c[0]:.1f}x, efx+- search {py[1] / max(c[1], 1e-9):.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
