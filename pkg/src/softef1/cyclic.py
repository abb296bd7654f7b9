"""Cyclic-shift round robin for identical valuations, and cut-and-choose for two agents.

Goods are sorted by decreasing value and cut into blocks of ``n``. Each block is
handed out as one of the ``n`` rotations of the agent list, the rotation that
adds the fewest violations against the goods already placed. Every edge from a
block to earlier goods is violated under exactly one rotation, so the best
rotation costs at most ``1/n`` of those edges and the total stays within
``|E|/n``.
"""
from __future__ import annotations

import functools
from fractions import Fraction
from typing import Sequence

from .core import UNASSIGNED, Allocation, Instance, OpCounter


class ValuationError(ValueError):
    pass


def _sorted_desc(values: Sequence[int], counter: OpCounter | None) -> list[int]:
    if counter is None:
        return sorted(range(len(values)), key=values.__getitem__, reverse=True)

    def cmp(a, b):
        counter.comparisons += 1
        if values[a] != values[b]:
            return -1 if values[a] > values[b] else 1
        return -1 if a < b else (1 if a > b else 0)

    return sorted(range(len(values)), key=functools.cmp_to_key(cmp))


def sort_goods_desc(instance: Instance, *, counter: OpCounter | None = None) -> list[int]:
    """Goods by decreasing common value; ties keep ascending id."""
    if not instance.identical:
        raise ValuationError("requires identical valuations")
    # sorted(..., reverse=True) keeps the original order of equal keys
    return _sorted_desc(instance.int_values[0], counter)


def _shift_deltas(block, owner, nbrs, wts, n, counter=None) -> list[int]:
    deltas = [0] * n
    scans = 0
    for b, g in enumerate(block):
        if g >= len(nbrs):
            continue  # dummy good
        ws = wts[g]
        for k, h in enumerate(nbrs[g]):
            o = owner[h]
            if o != UNASSIGNED:
                # g lands on agent o under exactly one rotation
                deltas[(b - o) % n] += ws[k]
        scans += len(ws)
    if counter is not None:
        counter.edge_scans += scans
    return deltas


def _cyclic_rounds(values, n, nbrs, wts, counter=None, trace=None) -> list[int]:
    """Owner array over ``len(values)`` real goods plus trailing dummies."""
    m = len(values)
    pad = -m % n
    order = _sorted_desc(values, counter) + list(range(m, m + pad))
    owner = [UNASSIGNED] * (m + pad)
    for start in range(0, m + pad, n):
        block = order[start:start + n]
        deltas = _shift_deltas(block, owner, nbrs, wts, n, counter)
        s = min(range(n), key=deltas.__getitem__)
        for a in range(n):
            owner[block[(s + a) % n]] = a
        if counter is not None:
            counter.rounds += n
        if trace is not None:
            trace.append((block, deltas, s))
    return owner


def _unscale(instance: Instance, x: int):
    return x if instance.weights is None else Fraction(x, instance.weight_scale)


def shift_deltas(instance: Instance, allocation: Allocation, block: Sequence[int]) -> list:
    """Violation increase for each of the ``n`` rotations of ``block``.

    Entry ``s`` (0-based) is the increase when agent ``a`` receives
    ``block[(s + a) % n]``. ``len(block)`` must equal ``n``.
    """
    n = instance.n
    if len(block) != n:
        raise ValueError(f"block must hold {n} goods")
    owner = allocation.owner
    if any(owner[g] != UNASSIGNED for g in block):
        raise ValueError("block goods must be unassigned")
    raw = _shift_deltas(block, owner, instance.neighbors, instance.neighbor_weights, n)
    return [_unscale(instance, d) for d in raw]


def round_violation_delta(instance: Instance, allocation: Allocation, block: Sequence[int], s: int):
    """Increase for rotation ``s`` in ``1..n`` (agent 1 takes the ``s``-th block good)."""
    if not 1 <= s <= instance.n:
        raise ValueError(f"shift must lie in [1, {instance.n}]")
    return shift_deltas(instance, allocation, block)[s - 1]


def cyclic_shift_rr(instance: Instance, *, counter: OpCounter | None = None, trace: list | None = None) -> Allocation:
    """Balanced round-robin EF1 allocation with at most ``|E|/n`` violations.

    Requires identical valuations. ``trace`` (if given) receives one
    ``(block, deltas, chosen_shift)`` tuple per round, shift 0-based.
    """
    if not instance.identical:
        raise ValuationError("requires identical valuations")
    owner = _cyclic_rounds(
        instance.int_values[0], instance.n, instance.neighbors, instance.neighbor_weights, counter, trace
    )
    return Allocation(instance.n, tuple(owner[: instance.m]))


def is_round_robin(instance: Instance, allocation: Allocation, order: Sequence[int] | None = None) -> bool:
    """Each consecutive block of ``n`` goods in ``order`` goes to distinct agents."""
    if order is None:
        order = sort_goods_desc(instance)
    n = instance.n
    for start in range(0, len(order), n):
        owners = [allocation.owner[g] for g in order[start:start + n]]
        if len(set(owners)) != len(owners):
            return False
    return True


def cut_and_choose(instance: Instance, *, counter: OpCounter | None = None) -> Allocation:
    """Two agents, general additive valuations: agent 1 cuts, agent 2 chooses.

    The split is the cyclic-shift allocation computed as if both agents had
    agent 1's valuation; agent 2 then takes whichever bundle it values more and
    keeps its own on a tie.
    """
    if instance.n != 2:
        raise ValuationError("cut-and-choose requires exactly 2 agents")
    owner = _cyclic_rounds(instance.int_values[0], 2, instance.neighbors, instance.neighbor_weights, counter)
    owner = owner[: instance.m]
    v2 = instance.int_values[1]
    worth = [0, 0]
    for g, a in enumerate(owner):
        worth[a] += v2[g]
    if worth[0] > worth[1]:
        owner = [1 - a for a in owner]
    return Allocation(2, tuple(owner))
