"""Instance families.

All randomness comes from one ``numpy.random.default_rng(seed)`` per call, so
the same family, parameters and seed always give the same instance.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Instance

FAMILIES = ("star", "cliques", "gnp", "regular-weighted")


def star(n: int) -> Instance:
    """``n`` unit goods all conflicting with one zero-valued centre (good ``n+1``)."""
    row = (1,) * n + (0,)
    return Instance((row,) * n, tuple((g, n) for g in range(n)))


def _valuations(rng, n, m, identical, max_value):
    if identical:
        row = tuple(int(x) for x in rng.integers(0, max_value + 1, size=m))
        return (row,) * n
    return tuple(tuple(int(x) for x in rng.integers(0, max_value + 1, size=m)) for _ in range(n))


def cliques(n: int, sizes: Sequence[int], seed: int | None = None, identical: bool = True, max_value: int = 10) -> Instance:
    """Disjoint complete graphs of the given sizes.

    Without a seed every good is worth 1 to every agent.
    """
    m = sum(sizes)
    if seed is None:
        vals = ((1,) * m,) * n
    else:
        vals = _valuations(np.random.default_rng(seed), n, m, identical, max_value)
    edges, start = [], 0
    for c in sizes:
        edges.extend((start + a, start + b) for a in range(c) for b in range(a + 1, c))
        start += c
    return Instance(vals, tuple(edges))


def gnp(n: int, m: int, p: float, seed: int, identical: bool = False, max_value: int = 100) -> Instance:
    """Erdos-Renyi conflict graph; each pair is an edge with probability ``p``."""
    rng = np.random.default_rng(seed)
    vals = _valuations(rng, n, m, identical, max_value)
    edges = []
    for u in range(m - 1):
        hits = np.flatnonzero(rng.random(m - u - 1) < p)
        edges.extend((u, int(v) + u + 1) for v in hits)
    return Instance(vals, tuple(edges))


def regular_weighted(
    n: int, m: int, degree: int, seed: int, identical: bool = False, max_value: int = 100, max_weight: int = 10
) -> Instance:
    """Near-regular graph (union of random Hamiltonian cycles, plus a matching for
    odd ``degree``) with weights in ``{1/2, 1, ..., max_weight/2}``."""
    rng = np.random.default_rng(seed)
    vals = _valuations(rng, n, m, identical, max_value)
    seen, edges = set(), []

    def add(u, v):
        key = (min(u, v), max(u, v))
        if u != v and key not in seen:
            seen.add(key)
            edges.append(key)

    if m >= 2:
        for _ in range(degree // 2):
            perm = [int(x) for x in rng.permutation(m)]
            for i in range(m):
                add(perm[i], perm[(i + 1) % m])
        if degree % 2:
            perm = [int(x) for x in rng.permutation(m)]
            for i in range(0, m - 1, 2):
                add(perm[i], perm[i + 1])
    weights = tuple(Fraction(int(k), 2) for k in rng.integers(1, max_weight + 1, size=len(edges)))
    return Instance(vals, tuple(edges), weights if edges else None)


def generate(family: str, **params) -> Instance:
    if family == "star":
        return star(params["n"])
    if family == "cliques":
        return cliques(params["n"], params["sizes"], params.get("seed"), params.get("identical", True))
    if family == "gnp":
        return gnp(params["n"], params["m"], params["p"], params["seed"], params.get("identical", False))
    if family == "regular-weighted":
        return regular_weighted(
            params["n"], params["m"], params["degree"], params["seed"], params.get("identical", False)
        )
    raise ValueError(f"unknown family {family!r} (choose from {', '.join(FAMILIES)})")
