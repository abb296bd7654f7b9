"""Envy graphs, envy-cycle elimination and the picking order derived from them.

The routines here work on a square value table ``values[i][j] = v_i(A_j)``, so
they serve both explicit allocations and the pointer-based bundles of
:mod:`softef1.general`.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import Allocation, Instance, _bundle_tables, _check_fits


class EnvyCycleError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnvyGraph:
    """Directed graph on agents with an edge ``(i, j)`` whenever ``i`` envies ``j``."""

    n: int
    edges: frozenset[tuple[int, int]]

    def successors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.edges if a == i)

    def find_cycle(self) -> list[int] | None:
        """First cycle met by a DFS started from the lowest-id agent.

        Returned as ``[c0, c1, ..., ck]`` meaning ``c0 -> c1 -> ... -> ck -> c0``.
        """
        succ = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            succ[i].append(j)
        state = [0] * self.n  # 0 new, 1 on stack, 2 done
        for root in range(self.n):
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

    def is_acyclic(self) -> bool:
        return self.find_cycle() is None


def envy_graph_from_values(values: Sequence[Sequence]) -> EnvyGraph:
    n = len(values)
    return EnvyGraph(
        n,
        frozenset((i, j) for i in range(n) for j in range(n) if i != j and values[i][i] < values[i][j]),
    )


def build_envy_graph(instance: Instance, allocation: Allocation) -> EnvyGraph:
    _check_fits(instance, allocation, complete=False)
    vals, _ = _bundle_tables(instance, allocation)
    return envy_graph_from_values(vals)


def rotation_steps(values: Sequence[Sequence]) -> Iterator[list[int]]:
    """Yield the bundle permutation after each cycle rotation.

    ``sigma[i]`` is the (original) agent whose bundle agent ``i`` now holds.
    Every agent on a rotated cycle takes the bundle it envies, so its own value
    strictly increases and nobody else's changes.
    """
    n = len(values)
    sigma = list(range(n))
    while True:
        current = [[values[i][sigma[j]] for j in range(n)] for i in range(n)]
        cycle = envy_graph_from_values(current).find_cycle()
        if cycle is None:
            return
        taken = [sigma[cycle[(t + 1) % len(cycle)]] for t in range(len(cycle))]
        for agent, bundle in zip(cycle, taken):
            sigma[agent] = bundle
        yield list(sigma)


def elimination_permutation(values: Sequence[Sequence]) -> list[int]:
    sigma = list(range(len(values)))
    for sigma in rotation_steps(values):
        pass
    return sigma


def eliminate_envy_cycles(instance: Instance, allocation: Allocation) -> Allocation:
    """Permute bundles among agents until the envy graph is acyclic.

    Bundle contents never change, so violations are preserved; an EF1 input
    stays EF1.
    """
    _check_fits(instance, allocation, complete=False)
    vals, _ = _bundle_tables(instance, allocation)
    return allocation.permuted(elimination_permutation(vals))


def topological_order(graph: EnvyGraph) -> list[int]:
    """Kahn's algorithm, lowest available agent first; enviers come before the envied."""
    indeg = [0] * graph.n
    succ = [[] for _ in range(graph.n)]
    for i, j in graph.edges:
        succ[i].append(j)
        indeg[j] += 1
    heap = [i for i in range(graph.n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, j)
    if len(order) != graph.n:
        raise EnvyCycleError("envy graph not acyclic")
    return order
