"""Envy graphs, top-trading envy graphs, cycle detection and cycle swaps.

Graphs are built from a value matrix ``V`` where ``V[i][k]`` is agent i's
value for agent k's bundle, so the same code serves set-function and
quantity allocations.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

from .errors import StructuralError


@dataclass(frozen=True)
class EnvyGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    top_trading: bool = False

    def successors(self, i: int) -> list[int]:
        return [k for a, k in self.edges if a == i]

    def has_edge(self, i: int, k: int) -> bool:
        return (i, k) in self.edges

    def sinks(self) -> list[int]:
        out = {a for a, _ in self.edges}
        return [i for i in range(self.n) if i not in out]

    def sources(self, within: Sequence[int] | None = None) -> list[int]:
        """Nodes of ``within`` (default: all) with no edge from inside ``within``."""
        nodes = list(range(self.n)) if within is None else sorted(within)
        keep = set(nodes)
        hit = {k for a, k in self.edges if a in keep and k in keep}
        return [i for i in nodes if i not in hit]


def build_envy_graph(values, top_trading: bool = False) -> EnvyGraph:
    """Edge ``i -> k`` iff ``V[i][k] > V[i][i]``; with ``top_trading`` also
    ``V[i][k]`` must be the largest entry of row i."""
    n = len(values)
    edges = []
    for i in range(n):
        row = values[i]
        best = max(row[k] for k in range(n))
        for k in range(n):
            if k != i and row[k] > row[i] and (not top_trading or row[k] == best):
                edges.append((i, k))
    return EnvyGraph(n, tuple(edges), top_trading)


def find_cycle(g: EnvyGraph) -> list[int] | None:
    """A simple directed cycle ``[c0, c1, ...]`` (edges c0->c1->...->c0), or None.

    Depth-first from the lowest unvisited node, neighbours ascending.
    """
    succ = [sorted(g.successors(i)) for i in range(g.n)]
    state = [0] * g.n  # 0 new, 1 on stack, 2 done
    for root in range(g.n):
        if state[root]:
            continue
        path = [root]
        iters = [iter(succ[root])]
        state[root] = 1
        while path:
            nxt = next(iters[-1], None)
            if nxt is None:
                state[path.pop()] = 2
                iters.pop()
            elif state[nxt] == 1:
                return path[path.index(nxt):]
            elif state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                iters.append(iter(succ[nxt]))
    return None


def check_cycle(cycle: Sequence[int], n: int, g: EnvyGraph | None = None) -> None:
    if len(set(cycle)) != len(cycle) or any(not 0 <= c < n for c in cycle):
        raise StructuralError(f"{list(cycle)} is not a simple cycle over {n} agents")
    if len(cycle) == 1:
        raise StructuralError("a cycle needs at least two agents")
    if g is not None:
        for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
            if not g.has_edge(a, b):
                raise StructuralError(f"edge {a}->{b} missing from the graph")


def cycle_swap(bundles: Sequence, cycle: Sequence[int], g: EnvyGraph | None = None) -> list:
    """Each agent on the cycle takes the bundle of its successor."""
    out = list(bundles)
    if not cycle:
        return out
    check_cycle(cycle, len(bundles), g)
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        out[a] = bundles[b]
    return out


def topological_order(g: EnvyGraph) -> list[int]:
    """Kahn's algorithm, smallest ready node first; raises on a cycle."""
    indeg = [0] * g.n
    for _, k in g.edges:
        indeg[k] += 1
    ready = [i for i in range(g.n) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for k in g.successors(i):
            indeg[k] -= 1
            if indeg[k] == 0:
                heapq.heappush(ready, k)
    if len(order) != g.n:
        raise StructuralError("graph has a cycle; no topological order")
    return order
