"""EF1 with few violations for general additive valuations.

Goods are handed out in rounds of ``n``, as in cardinality-constrained
round robin: before every round the bundles are permuted
until nobody is part of an envy cycle, then agents pick in topological order of
the envy graph. Whatever the picks, every bundle gains one good per round, and
the allocation stays EF1.

Which ``n`` goods form a round is up to us. Each remaining good carries a
profile vector (how many more of its neighbours sit in bundle ``j`` than in
bundle 1), and we take ``n`` goods from one cell of a :class:`GridIndex` over
those vectors, so whoever ends up with which good, the round's violation
increase stays close to ``1/n`` of its edges to the placed goods.

:func:`graph_ef1` runs this bucket by bucket, highest degrees first, with a
shrinking coordinate bound per bucket.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import UNASSIGNED, Allocation, Instance, OpCounter
from .cyclic import cut_and_choose
from .envy import elimination_permutation, envy_graph_from_values, topological_order
from .grid import GridIndex

MAX_AGENTS = 8


class PhysicalBundles:
    """Bundles that never move; agents point at them.

    ``value_cache[i][b]`` is agent ``i``'s value for physical bundle ``b``.
    Goods with id ``>= instance.m`` are zero-valued, edge-free dummies.
    """

    def __init__(self, instance: Instance, dummies: int = 0):
        n = instance.n
        self.instance = instance
        self.n = n
        self.m = instance.m
        self.total_goods = instance.m + dummies
        zeros = [0] * dummies
        self.values = [row + zeros if dummies else row for row in instance.int_values]
        self.bundles: list[list[int]] = [[] for _ in range(n)]
        self.agent_of_bundle = list(range(n))
        self.bundle_of_agent = list(range(n))
        self.value_cache = [[0] * n for _ in range(n)]
        self.where = [UNASSIGNED] * self.total_goods

    def add(self, b: int, g: int) -> None:
        self.bundles[b].append(g)
        self.where[g] = b
        for i in range(self.n):
            self.value_cache[i][b] += self.values[i][g]

    def agent_values(self) -> list[list[int]]:
        """``out[i][j]`` = agent ``i``'s value for the bundle agent ``j`` holds."""
        boa = self.bundle_of_agent
        return [[row[boa[j]] for j in range(self.n)] for row in self.value_cache]

    def permute(self, sigma: Sequence[int]) -> None:
        old = self.bundle_of_agent
        self.bundle_of_agent = [old[s] for s in sigma]
        for a, b in enumerate(self.bundle_of_agent):
            self.agent_of_bundle[b] = a

    def to_allocation(self) -> Allocation:
        aob = self.agent_of_bundle
        owner = tuple(aob[b] if b != UNASSIGNED else UNASSIGNED for b in self.where[: self.m])
        return Allocation(self.n, owner)

    def neighbour_counts(self, g: int) -> list[int]:
        """``d_{A'_b}(g)`` for every physical bundle ``b`` (scaled weights)."""
        counts = [0] * self.n
        if g < self.m:
            where = self.where
            for h, w in zip(self.instance.neighbors[g], self.instance.neighbor_weights[g]):
                b = where[h]
                if b != UNASSIGNED:
                    counts[b] += w
        return counts


def bb_round(bundles: PhysicalBundles, category: Sequence[int], counter: OpCounter | None = None) -> list[tuple[int, int]]:
    """Assign ``n`` unassigned goods, one per bundle; returns ``(good, bundle)`` pairs.

    Envy cycles are removed by re-pointing agents to bundles, then agents pick
    their favourite remaining good in topological order of the envy graph
    (lowest good id on ties).
    """
    n = bundles.n
    if len(category) != n:
        raise ValueError(f"a round needs exactly {n} goods, got {len(category)}")
    for g in category:
        if bundles.where[g] != UNASSIGNED:
            raise ValueError(f"good {g + 1} is already assigned")
    sigma = elimination_permutation(bundles.agent_values())
    bundles.permute(sigma)
    order = topological_order(envy_graph_from_values(bundles.agent_values()))
    remaining = sorted(category)
    placed = []
    for agent in order:
        row = bundles.values[agent]
        best = remaining[0]
        for g in remaining[1:]:
            if row[g] > row[best]:
                best = g
        remaining.remove(best)
        b = bundles.bundle_of_agent[agent]
        bundles.add(b, best)
        placed.append((best, b))
    if counter is not None:
        counter.rounds += n
    return placed


def compute_profile_vector(bundles: PhysicalBundles, g: int) -> tuple[int, ...]:
    counts = bundles.neighbour_counts(g)
    base = counts[0]
    return tuple(c - base for c in counts[1:])


@dataclass
class RoundRecord:
    """Per-round measurements, all in scaled weight units."""

    group: list[int]
    profiles: list[tuple[int, ...]]
    z: list[list[int]]  # z[i][b] = d_{A'_b}(group[i]) before the round
    spread: int
    cross: int  # weight between the placed goods and the group
    increase: int
    assignment: list[int] = field(default_factory=list)  # physical bundle of group[i]


def _spread(profiles: Sequence[Sequence[int]]) -> int:
    if not profiles or not profiles[0]:
        return 0
    return max(max(col) - min(col) for col in zip(*profiles))


def degree_ef1(
    bundles: PhysicalBundles,
    goods: Iterable[int],
    delta: int,
    *,
    counter: OpCounter | None = None,
    trace: list | None = None,
    audit: bool = False,
) -> PhysicalBundles:
    """Place ``goods`` (a multiple of ``n`` of them) round by round.

    ``delta`` bounds every profile coordinate, in scaled weight units, for the
    whole run; the grid raises if it is exceeded.
    """
    n = bundles.n
    goods = list(goods)
    if len(goods) % n:
        raise ValueError(f"{len(goods)} goods cannot be split into rounds of {n}")
    if n < 2:
        raise ValueError("need at least two agents")
    d = n - 1
    nbrs = bundles.instance.neighbors
    wts = bundles.instance.neighbor_weights
    m = bundles.m
    live = [False] * bundles.total_goods
    profile: dict[int, list[int]] = {}
    for g in goods:
        live[g] = True
        profile[g] = list(compute_profile_vector(bundles, g))
        if counter is not None and g < m:
            counter.edge_scans += len(nbrs[g])
    grid = GridIndex(d, n, delta, ((g, profile[g]) for g in goods), counter)

    for _ in range(len(goods) // n):
        group = grid.find_group()
        record = None
        if trace is not None:
            profiles = [tuple(profile[g]) for g in group]
            z = [bundles.neighbour_counts(g) for g in group]
            record = RoundRecord(group, profiles, z, _spread(profiles), sum(map(sum, z)), 0)
        for g in group:
            grid.remove(g)
            live[g] = False
        placed = bb_round(bundles, group, counter)

        touched: dict[int, None] = {}
        for g, b in placed:
            if g >= m:
                continue
            ws = wts[g]
            for k, h in enumerate(nbrs[g]):
                if live[h]:
                    p = profile[h]
                    w = ws[k]
                    if b == 0:
                        for c in range(d):
                            p[c] -= w
                    else:
                        p[b - 1] += w
                    touched[h] = None
            if counter is not None:
                counter.edge_scans += len(ws)
        for h in touched:
            grid.move(h, profile[h])
        grid.maybe_rebuild()

        if record is not None:
            where = dict(placed)
            record.assignment = [where[g] for g in group]
            record.increase = sum(record.z[i][b] for i, b in enumerate(record.assignment))
            trace.append(record)
        if audit:
            grid.audit()
            for h in grid.points:
                if list(compute_profile_vector(bundles, h)) != profile[h]:
                    raise AssertionError(f"stale profile vector for good {h + 1}")
    return bundles


def degree_order(degrees: Sequence[int], goods: Iterable[int], *, descending: bool = True) -> list[int]:
    """Counting sort by degree; goods of equal degree keep their input order."""
    goods = list(goods)
    if not goods:
        return []
    top = max(degrees[g] for g in goods)
    slots: list[list[int]] = [[] for _ in range(top + 1)]
    for g in goods:
        slots[degrees[g]].append(g)
    if descending:
        slots.reverse()
    return [g for slot in slots for g in slot]


def degree_bucket_partition(instance: Instance, goods: Iterable[int]) -> list[list[int]]:
    """Split ``goods`` by decreasing degree into ``L_0, L_1, ...``.

    Sizes are ``s, s, 2s, 4s, ...`` with ``s = n * ceil(sqrt(|E|))``; there are
    ``ceil(log2 m) + 1`` buckets and the later ones may be empty.
    """
    E = instance.num_edges
    if E < 1:
        raise ValueError("bucketing needs at least one edge")
    unit = instance.n * _ceil_sqrt(E)
    ordered = degree_order(instance.degree, goods)
    count = max(instance.m - 1, 0).bit_length() + 1
    buckets, start = [], 0
    for i in range(count):
        size = unit << max(i - 1, 0)
        buckets.append(ordered[start:start + size])
        start += size
    assert start >= len(ordered)
    return buckets


def _ceil_sqrt(x: int) -> int:
    r = math.isqrt(x)
    return r if r * r == x else r + 1


def bucket_delta(num_edges: int, n: int, i: int) -> int:
    """Coordinate bound for bucket ``i``: ``ceil(sqrt|E|)`` for ``i = 0``,
    else ``ceil(sqrt|E| / (2**(i-2) * n))``, computed exactly."""
    if i == 0:
        return _ceil_sqrt(num_edges)
    # smallest D with D * n * 2**i >= 4 * sqrt(E)
    a = n << i
    D = max(0, math.isqrt(16 * num_edges) // a)
    while (D * a) ** 2 < 16 * num_edges:
        D += 1
    return D


def lowest_degree_goods(degrees: Sequence[int], m: int, count: int) -> list[int]:
    """The ``count`` goods of lowest degree, lowest id first among ties."""
    return degree_order(degrees, range(m), descending=False)[:count]


def graph_ef1(
    instance: Instance,
    *,
    counter: OpCounter | None = None,
    trace: list | None = None,
    audit: bool = False,
) -> Allocation:
    """Balanced EF1 allocation with ``|E|/n + O(|E|^(1 - 1/(2n-2)))`` violations.

    Two agents go to :func:`~softef1.cyclic.cut_and_choose`; one agent takes
    everything. Weighted instances are handled by :func:`degree_ef1_solve`.
    """
    n, m = instance.n, instance.m
    if n == 1:
        return Allocation(1, (0,) * m)
    if n == 2:
        return cut_and_choose(instance, counter=counter)
    if n > MAX_AGENTS:
        raise ValueError(f"at most {MAX_AGENTS} agents are supported")
    if instance.weighted:
        raise ValueError("weighted instances need the degree solver (algo=degree)")
    E = instance.num_edges
    r = m % n
    state = PhysicalBundles(instance, -m % n)
    kw = dict(counter=counter, trace=trace, audit=audit)

    if E == 0:
        degree_ef1(state, range(state.total_goods), 0, **kw)
        return state.to_allocation()

    last = lowest_degree_goods(instance.degree, m, r) if r else []
    skip = set(last)
    rest = [g for g in range(m) if g not in skip]
    for i, bucket in enumerate(degree_bucket_partition(instance, rest)):
        if bucket:
            degree_ef1(state, bucket, bucket_delta(E, n, i), **kw)
    if r:
        bb_round(state, last + list(range(m, state.total_goods)), counter)
    return state.to_allocation()


def degree_ef1_solve(
    instance: Instance,
    delta=None,
    *,
    counter: OpCounter | None = None,
    trace: list | None = None,
    audit: bool = False,
) -> Allocation:
    """Run the bounded-degree solver on all goods from empty bundles.

    ``delta`` is in the instance's weight units and defaults to the largest
    incident weight of any good. Works for weighted instances.
    """
    n, m = instance.n, instance.m
    if n == 1:
        return Allocation(1, (0,) * m)
    if n > MAX_AGENTS:
        raise ValueError(f"at most {MAX_AGENTS} agents are supported")
    if delta is None:
        scaled = max(instance.weighted_degree, default=0)
    else:
        delta = Fraction(delta)
        if delta < 0:
            raise ValueError("delta must be non-negative")
        scaled = math.ceil(delta * instance.weight_scale)
    # the m mod n lightest goods go last, together with the dummies, so every
    # bundle ends up with the same number of real goods give or take one
    r = m % n
    wd = instance.weighted_degree
    last = sorted(range(m), key=lambda g: (wd[g], g))[:r]
    skip = set(last)
    state = PhysicalBundles(instance, -m % n)
    degree_ef1(state, [g for g in range(m) if g not in skip], scaled, counter=counter, trace=trace, audit=audit)
    if r:
        bb_round(state, last + list(range(m, state.total_goods)), counter)
    return state.to_allocation()
