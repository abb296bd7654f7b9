"""Exhaustive ground truth for small instances.

Everything here enumerates: all ``n**m`` allocations, all ``n!`` assignments of
a round. Nothing calls into the solvers. :func:`is_ef1_bruteforce` follows the
EF1 definition literally (try removing each good) and stays independent of the
max-good shortcut used by :func:`softef1.core.is_ef1`.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .core import Allocation, Instance, is_ef1, violation_count

ORACLE_LIMIT = 10**7
_CHUNK = 1 << 15


class OracleLimitError(ValueError):
    pass


def is_ef1_bruteforce(instance: Instance, allocation: Allocation) -> bool:
    bundles = allocation.bundles()
    v = instance.valuations
    for i in range(instance.n):
        own = sum((v[i][g] for g in bundles[i]), Fraction(0))
        for j, other in enumerate(bundles):
            if j == i or not other:
                continue
            total = sum((v[i][g] for g in other), Fraction(0))
            if not any(own >= total - v[i][g] for g in other):
                return False
    return True


def _check_size(instance: Instance) -> int:
    count = instance.n ** instance.m
    if count > ORACLE_LIMIT:
        raise OracleLimitError(f"oracle size limit: {instance.n}^{instance.m} allocations exceed {ORACLE_LIMIT}")
    return count


def _fits_int64(instance: Instance) -> bool:
    cap = 1 << 62
    return all(sum(row) < cap for row in instance.int_values) and sum(instance.int_weights) < cap


def enumerate_allocations(instance: Instance, chunk: int = _CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield ``(owners, violations, ef1)`` blocks over all allocations.

    Row ``r`` of the enumeration reads the allocation index in base ``n`` with
    good 1 as the most significant digit. Violations are in scaled weight units
    (``instance.weight_scale``).
    """
    total = _check_size(instance)
    n, m = instance.n, instance.m
    if not _fits_int64(instance):
        raise OracleLimitError("values too large for the vectorised oracle")
    V = np.array(instance.int_values, dtype=np.int64).reshape(n, m)
    if instance.edges:
        eu, ev = (np.array(c, dtype=np.int64) for c in zip(*instance.edges))
    else:
        eu = ev = np.zeros(0, dtype=np.int64)
    ew = np.array(instance.int_weights, dtype=np.int64)
    powers = n ** np.arange(m - 1, -1, -1, dtype=np.int64)
    agents = np.arange(n)
    off_diag = ~np.eye(n, dtype=bool)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        owners = (idx[:, None] // powers[None, :]) % n  # (R, m)
        if len(eu):
            violations = ((owners[:, eu] == owners[:, ev]) * ew).sum(axis=1)
        else:
            violations = np.zeros(len(idx), dtype=np.int64)
        onehot = owners[:, :, None] == agents[None, None, :]  # (R, m, n)
        vals = np.einsum("ig,rgj->rij", V, onehot.astype(np.int64))
        best = (V[None, :, :, None] * onehot[:, None, :, :]).max(axis=2) if m else np.zeros_like(vals)
        own = np.einsum("rii->ri", vals)
        ok = own[:, :, None] >= vals - best
        ef1 = (ok | ~off_diag[None]).all(axis=(1, 2))
        yield owners, violations, ef1


def min_violations_ef1(instance: Instance):
    """Minimum violations over all EF1 allocations, with the first witness found."""
    _check_size(instance)
    if not _fits_int64(instance):
        return _min_violations_python(instance)
    best = None
    witness = None
    for owners, violations, ef1 in enumerate_allocations(instance):
        if not ef1.any():
            continue
        masked = np.where(ef1, violations, np.iinfo(np.int64).max)
        r = int(np.argmin(masked))  # first minimum in enumeration order
        if best is None or masked[r] < best:
            best = int(masked[r])
            witness = tuple(int(a) for a in owners[r])
    if witness is None:  # pragma: no cover - EF1 allocations always exist
        raise RuntimeError("no EF1 allocation found")
    count = best if instance.weights is None else Fraction(best, instance.weight_scale)
    return count, Allocation(instance.n, witness)


def _min_violations_python(instance: Instance):
    best = None
    for owner in itertools.product(range(instance.n), repeat=instance.m):
        alloc = Allocation(instance.n, owner)
        if is_ef1(instance, alloc):
            c = violation_count(instance, alloc)
            if best is None or c < best[0]:
                best = (c, alloc)
    return best


def enumerate_assignment_extremes(z: Sequence[Sequence]) -> tuple:
    """Min, max and mean of ``sum_i z[i][sigma(i)]`` over all permutations ``sigma``."""
    n = len(z)
    if n > 8:
        raise ValueError("at most 8 rows")
    lo = hi = None
    total = 0
    for sigma in itertools.permutations(range(n)):
        f = sum(z[i][sigma[i]] for i in range(n))
        total += f
        lo = f if lo is None or f < lo else lo
        hi = f if hi is None or f > hi else hi
    if n == 0:
        return 0, 0, Fraction(0)
    return lo, hi, Fraction(total, math.factorial(n))
