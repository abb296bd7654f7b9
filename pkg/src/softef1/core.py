"""Instances, allocations and the verifiers every solver is checked against.

Goods and agents are 0-based here. The text formats in :mod:`softef1.instance_io`
are 1-based and convert at the boundary.

Valuations and edge weights are exact :class:`~fractions.Fraction` values. For
speed the solvers work on integer copies: each agent's row is multiplied by the
lcm of its denominators (every EF1 comparison involves one agent's valuation
only, so a positive per-row scale changes nothing), and the weights share one
common scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

UNASSIGNED = -1


class InstanceError(ValueError):
    """Raised for malformed instances (self-loops, duplicate edges, negative values...)."""


class AllocationError(ValueError):
    """Raised when an allocation does not fit the instance it is checked against."""


def _lcm_of_denominators(values: Iterable[Fraction]) -> int:
    return reduce(math.lcm, (v.denominator for v in values), 1)


_ONE = Fraction(1)


@dataclass(frozen=True)
class Instance:
    """A fair-division instance with a soft conflict graph on the goods.

    ``valuations[i][g]`` is agent ``i``'s value for good ``g``. ``edges`` holds
    unordered pairs of goods; ``weights`` is ``None`` for the unit-weight case.
    """

    valuations: tuple[tuple[Fraction, ...], ...]
    edges: tuple[tuple[int, int], ...] = ()
    weights: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.valuations)
        if not rows:
            raise InstanceError("an instance needs at least one agent")
        m = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != m:
                raise InstanceError(f"valuation row {i + 1} has {len(row)} entries, expected {m}")
            for g, x in enumerate(row):
                if x < 0:
                    raise InstanceError(f"negative valuation {x} for agent {i + 1}, good {g + 1}")
        object.__setattr__(self, "valuations", rows)

        edges = tuple((int(u), int(v)) for u, v in self.edges)
        seen = set()
        for u, v in edges:
            if not (0 <= u < m and 0 <= v < m):
                raise InstanceError(f"edge ({u + 1}, {v + 1}) references a good outside [1, {m}]")
            if u == v:
                raise InstanceError(f"self-loop at good {u + 1}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise InstanceError(f"duplicate edge ({u + 1}, {v + 1})")
            seen.add(key)
        object.__setattr__(self, "edges", edges)

        if self.weights is not None:
            weights = tuple(Fraction(w) for w in self.weights)
            if len(weights) != len(edges):
                raise InstanceError("weights must be given for every edge or for none")
            for (u, v), w in zip(edges, weights):
                if w < 0:
                    raise InstanceError(f"negative weight {w} on edge ({u + 1}, {v + 1})")
            # all-unit weights are the unweighted case
            object.__setattr__(self, "weights", None if all(w == 1 for w in weights) else weights)

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def m(self) -> int:
        return len(self.valuations[0])

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    @cached_property
    def identical(self) -> bool:
        first = self.valuations[0]
        return all(row == first for row in self.valuations[1:])

    def weight(self, e: int) -> Fraction:
        return _ONE if self.weights is None else self.weights[e]

    @cached_property
    def total_weight(self) -> Fraction:
        if self.weights is None:
            return Fraction(len(self.edges))
        return sum(self.weights, Fraction(0))

    @cached_property
    def value_scale(self) -> tuple[int, ...]:
        return tuple(_lcm_of_denominators(row) for row in self.valuations)

    @cached_property
    def int_values(self) -> list[list[int]]:
        """Row-scaled integer valuations (see module docstring)."""
        out = []
        for row, s in zip(self.valuations, self.value_scale):
            if s == 1:
                out.append([x.numerator for x in row])
            else:
                out.append([x.numerator * (s // x.denominator) for x in row])
        return out

    @cached_property
    def weight_scale(self) -> int:
        return 1 if self.weights is None else _lcm_of_denominators(self.weights)

    @cached_property
    def int_weights(self) -> list[int]:
        if self.weights is None:
            return [1] * len(self.edges)
        s = self.weight_scale
        return [w.numerator * (s // w.denominator) for w in self.weights]

    @cached_property
    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.m)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    @cached_property
    def neighbor_weights(self) -> list[list[int]]:
        """Scaled integer weights parallel to :attr:`neighbors`."""
        wadj: list[list[int]] = [[] for _ in range(self.m)]
        for (u, v), w in zip(self.edges, self.int_weights):
            wadj[u].append(w)
            wadj[v].append(w)
        return wadj

    @cached_property
    def degree(self) -> list[int]:
        return [len(a) for a in self.neighbors]

    @cached_property
    def weighted_degree(self) -> list[int]:
        """Incident weight per good, in units of ``1 / weight_scale``."""
        return [sum(ws) for ws in self.neighbor_weights]

    @classmethod
    def from_edges(cls, valuations, edges: Iterable[Sequence] = ()) -> "Instance":
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples (0-based ids)."""
        pairs, weights = [], []
        for e in edges:
            pairs.append((e[0], e[1]))
            weights.append(Fraction(e[2]) if len(e) > 2 else _ONE)
        return cls(tuple(valuations), tuple(pairs), tuple(weights) if weights else None)


@dataclass(frozen=True)
class Allocation:
    """Owner of every good; ``UNASSIGNED`` marks goods of a partial allocation."""

    n: int
    owner: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "owner", tuple(self.owner))
        for g, a in enumerate(self.owner):
            if a != UNASSIGNED and not 0 <= a < self.n:
                raise AllocationError(f"good {g + 1} assigned to unknown agent {a + 1}")

    @property
    def m(self) -> int:
        return len(self.owner)

    @property
    def complete(self) -> bool:
        return UNASSIGNED not in self.owner

    def bundles(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for g, a in enumerate(self.owner):
            if a != UNASSIGNED:
                out[a].append(g)
        return out

    def bundle_sizes(self) -> list[int]:
        sizes = [0] * self.n
        for a in self.owner:
            if a != UNASSIGNED:
                sizes[a] += 1
        return sizes

    def permuted(self, sigma: Sequence[int]) -> "Allocation":
        """Agent ``i`` receives the bundle previously held by agent ``sigma[i]``."""
        new_owner_of = [0] * self.n
        for i, old in enumerate(sigma):
            new_owner_of[old] = i
        return Allocation(self.n, tuple(a if a == UNASSIGNED else new_owner_of[a] for a in self.owner))

    @classmethod
    def from_bundles(cls, m: int, bundles: Sequence[Iterable[int]]) -> "Allocation":
        owner = [UNASSIGNED] * m
        for a, bundle in enumerate(bundles):
            for g in bundle:
                if owner[g] != UNASSIGNED:
                    raise AllocationError(f"good {g + 1} appears in two bundles")
                owner[g] = a
        return cls(len(bundles), tuple(owner))


@dataclass(frozen=True)
class AllocationReport:
    violations: int | Fraction
    baseline: Fraction
    ef1: bool
    balanced: bool
    bundle_sizes: tuple[int, ...]
    bundle_values: tuple[tuple[Fraction, ...], ...]


def _check_fits(instance: Instance, allocation: Allocation, *, complete: bool = True) -> None:
    if allocation.n != instance.n or allocation.m != instance.m:
        raise AllocationError(
            f"allocation is for n={allocation.n}, m={allocation.m}; "
            f"instance has n={instance.n}, m={instance.m}"
        )
    if complete and not allocation.complete:
        raise AllocationError("incomplete allocation")


def violation_count(instance: Instance, allocation: Allocation) -> int | Fraction:
    """Number of edges (total weight, for weighted instances) inside a bundle."""
    _check_fits(instance, allocation)
    owner = allocation.owner
    if instance.weights is None:
        return sum(1 for u, v in instance.edges if owner[u] == owner[v])
    return sum(
        (w for (u, v), w in zip(instance.edges, instance.weights) if owner[u] == owner[v]),
        Fraction(0),
    )


def _bundle_tables(instance: Instance, allocation: Allocation):
    """Scaled ``v_i(A_j)`` and ``max_{g in A_j} v_i(g)`` tables."""
    n = instance.n
    iv = instance.int_values
    vals = [[0] * n for _ in range(n)]
    best = [[0] * n for _ in range(n)]
    for g, j in enumerate(allocation.owner):
        if j == UNASSIGNED:
            continue
        for i in range(n):
            x = iv[i][g]
            vals[i][j] += x
            if x > best[i][j]:
                best[i][j] = x
    return vals, best


def bundle_values(instance: Instance, allocation: Allocation) -> list[list[Fraction]]:
    """``out[i][j] = v_i(A_j)``; partial allocations are allowed."""
    _check_fits(instance, allocation, complete=False)
    vals, _ = _bundle_tables(instance, allocation)
    return [[Fraction(x, s) for x in row] for row, s in zip(vals, instance.value_scale)]


def is_ef1(instance: Instance, allocation: Allocation) -> bool:
    _check_fits(instance, allocation)
    vals, best = _bundle_tables(instance, allocation)
    n = instance.n
    for i in range(n):
        own = vals[i][i]
        for j in range(n):
            # an empty A_j has vals == best == 0, so the test passes trivially
            if j != i and own < vals[i][j] - best[i][j]:
                return False
    return True


def is_balanced(allocation: Allocation) -> bool:
    if not allocation.complete:
        raise AllocationError("incomplete allocation")
    sizes = allocation.bundle_sizes()
    return max(sizes) - min(sizes) <= 1


def baseline(instance: Instance) -> Fraction:
    """``|E| / n`` (total weight / n when weighted)."""
    return instance.total_weight / instance.n


def clique_components(instance: Instance) -> list[list[int]]:
    """Connected components of the conflict graph, each verified to be complete."""
    m = instance.m
    comp = [-1] * m
    components: list[list[int]] = []
    adj = instance.neighbors
    for s in range(m):
        if comp[s] != -1:
            continue
        cid = len(components)
        comp[s] = cid
        stack, members = [s], []
        while stack:
            g = stack.pop()
            members.append(g)
            for h in adj[g]:
                if comp[h] == -1:
                    comp[h] = cid
                    stack.append(h)
        components.append(sorted(members))
    for members in components:
        c = len(members)
        if sum(len(adj[g]) for g in members) != c * (c - 1):
            raise InstanceError("graph is not a union of cliques")
    return components


def component_balance_check(instance: Instance, allocation: Allocation) -> bool:
    """Every agent holds between ``c/n - sqrt(m)`` and ``c/n + sqrt(m)`` goods of each clique.

    This is the necessary condition for an allocation of a clique-union instance
    to stay within ``|E|/n`` violations.
    """
    components = clique_components(instance)
    _check_fits(instance, allocation)
    n, m = instance.n, instance.m
    owner = allocation.owner
    for members in components:
        c = len(members)
        counts = [0] * n
        for g in members:
            counts[owner[g]] += 1
        # |x - c/n| <= sqrt(m)  <=>  (n x - c)^2 <= n^2 m
        if any((n * x - c) ** 2 > n * n * m for x in counts):
            return False
    return True


def pad_with_dummies(instance: Instance) -> tuple[Instance, list[int]]:
    """Append zero-valued, edge-free goods until ``m`` is divisible by ``n``."""
    k = -instance.m % instance.n
    if k == 0:
        return instance, []
    zeros = (Fraction(0),) * k
    padded = Instance(tuple(row + zeros for row in instance.valuations), instance.edges, instance.weights)
    return padded, list(range(instance.m, instance.m + k))


def strip_dummies(allocation: Allocation, m: int) -> Allocation:
    return Allocation(allocation.n, allocation.owner[:m])


def report(instance: Instance, allocation: Allocation) -> AllocationReport:
    _check_fits(instance, allocation)
    return AllocationReport(
        violations=violation_count(instance, allocation),
        baseline=baseline(instance),
        ef1=is_ef1(instance, allocation),
        balanced=is_balanced(allocation),
        bundle_sizes=tuple(allocation.bundle_sizes()),
        bundle_values=tuple(tuple(r) for r in bundle_values(instance, allocation)),
    )


@dataclass
class OpCounter:
    """Work counters used for the runtime-scaling checks (not wall clock)."""

    edge_scans: int = 0
    grid_ops: int = 0
    rebuckets: int = 0
    comparisons: int = 0
    rounds: int = 0

    @property
    def total(self) -> int:
        return self.edge_scans + self.grid_ops + self.rebuckets + self.comparisons + self.rounds
