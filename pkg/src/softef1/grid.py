"""Bucketed point index answering "give me n points that lie in one grid cell".

Points live in the box ``[-delta, delta]^d``, which is cut into ``q^d`` equal
cells with ``q`` a power of two. With ``k = ceil(count / n)``, ``q`` is the
largest power of two with ``q^d <= k``; then some cell holds at least ``n``
points whenever ``count >= n * q^d`` and any ``n`` of them differ by at most
``2 * delta / q`` per coordinate.

``q`` is only recomputed when ``k`` drops below ``q^d``, so a full drain costs
``k0 + 2^(td) + ... + 2^d`` rebucketings in total.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import islice
from typing import Iterable, Sequence

from .core import OpCounter


class GridError(RuntimeError):
    pass


def level_for(count: int, n: int, d: int) -> int:
    """Exponent ``t`` with ``q = 2**t = 2**floor(log2(k ** (1/d)))``, ``k = ceil(count/n)``."""
    k = -(-count // n)
    t = 0
    while (1 << ((t + 1) * d)) <= k:
        t += 1
    return t


class GridIndex:
    def __init__(
        self,
        d: int,
        n: int,
        delta,
        points: Iterable[tuple[int, Sequence]] = (),
        counter: OpCounter | None = None,
    ):
        if d < 1:
            raise ValueError("dimension must be at least 1")
        if n < 1:
            raise ValueError("group size must be at least 1")
        if delta < 0:
            raise ValueError("half width must be non-negative")
        self.d = d
        self.n = n
        self.delta = delta
        self.counter = counter
        self.points: dict[int, tuple] = {}
        self.cells: dict[tuple, dict[int, None]] = {}
        self.heavy: dict[tuple, None] = {}  # insertion ordered
        self.rebuilds = 0
        self.rebucketings = 0
        for pid, coords in points:
            coords = tuple(coords)
            self._check_coords(coords)
            if pid in self.points:
                raise GridError(f"duplicate point id {pid}")
            self.points[pid] = coords
        self._set_level(level_for(len(self.points), n, d))
        self._bucket_all()

    @property
    def q(self) -> int:
        return 1 << self.level

    @property
    def cell_width(self) -> Fraction:
        return Fraction(2 * self.delta) / self.q

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, pid) -> bool:
        return pid in self.points

    def _set_level(self, t: int) -> None:
        self.level = t
        self._threshold = 1 << (t * self.d)  # rebuild once k < q^d

    def _check_coords(self, coords: tuple) -> None:
        if len(coords) != self.d:
            raise GridError(f"expected {self.d} coordinates, got {len(coords)}")
        delta = self.delta
        for c in coords:
            if c < -delta or c > delta:
                raise GridError(f"coordinate out of range: {c} not in [-{delta}, {delta}]")

    def cell_key(self, coords: Sequence) -> tuple:
        q = self.q
        if q == 1 or self.delta == 0:
            return (0,) * self.d
        span = 2 * self.delta
        top = q - 1
        # values equal to +delta land in the last cell
        return tuple(min(int((c + self.delta) * q // span), top) for c in coords)

    def _bucket_all(self) -> None:
        self.cells = {}
        self.heavy = {}
        for pid, coords in self.points.items():
            self._add(pid, self.cell_key(coords))
        self.rebucketings += len(self.points)
        if self.counter is not None:
            self.counter.rebuckets += len(self.points)

    def _add(self, pid, key) -> None:
        cell = self.cells.get(key)
        if cell is None:
            cell = self.cells[key] = {}
        cell[pid] = None
        if len(cell) == self.n:
            self.heavy[key] = None

    def _discard(self, pid, key) -> None:
        cell = self.cells[key]
        del cell[pid]
        if len(cell) == self.n - 1:
            self.heavy.pop(key, None)
        if not cell:
            del self.cells[key]

    def _tick(self) -> None:
        if self.counter is not None:
            self.counter.grid_ops += 1

    def insert(self, pid, coords: Sequence) -> None:
        self._tick()
        if pid in self.points:
            raise GridError(f"duplicate point id {pid}")
        coords = tuple(coords)
        self._check_coords(coords)
        self.points[pid] = coords
        self._add(pid, self.cell_key(coords))

    def remove(self, pid) -> None:
        self._tick()
        coords = self.points.pop(pid, None)
        if coords is None:
            raise GridError(f"unknown point id {pid}")
        self._discard(pid, self.cell_key(coords))

    def move(self, pid, coords: Sequence) -> None:
        self._tick()
        old = self.points.get(pid)
        if old is None:
            raise GridError(f"unknown point id {pid}")
        coords = tuple(coords)
        self._check_coords(coords)
        self.points[pid] = coords
        old_key, new_key = self.cell_key(old), self.cell_key(coords)
        if old_key != new_key:
            self._discard(pid, old_key)
            self._add(pid, new_key)

    def find_group(self) -> list:
        """``n`` point ids sharing the most recently filled heavy cell."""
        self._tick()
        if not self.heavy:
            raise GridError(
                f"no cell holds {self.n} points ({len(self.points)} points, q={self.q}, d={self.d})"
            )
        key = next(reversed(self.heavy))
        return list(islice(self.cells[key], self.n))

    def maybe_rebuild(self) -> bool:
        k = -(-len(self.points) // self.n)
        if self.level == 0 or k >= self._threshold:
            return False
        self._set_level(level_for(len(self.points), self.n, self.d))
        self._bucket_all()
        self.rebuilds += 1
        return True

    def audit(self) -> None:
        """Recompute every bucket from the stored coordinates and compare."""
        expected: dict[tuple, set] = {}
        for pid, coords in self.points.items():
            self._check_coords(coords)
            expected.setdefault(self.cell_key(coords), set()).add(pid)
        actual = {key: set(cell) for key, cell in self.cells.items()}
        if expected != actual:
            raise GridError("cell map out of sync with stored points")
        heavy = {key for key, ids in expected.items() if len(ids) >= self.n}
        if heavy != set(self.heavy):
            raise GridError("heavy cell set out of sync")
        if (1 << (self.level * self.d)) > max(1, -(-len(self.points) // self.n)) and self.level > 0:
            raise GridError("grid resolution above the current point count allows")
