"""Per-sampler cell machinery: grid + hash + cached trailing-zero counts.

Every sampler instance (and every level of the sliding-window sampler)
shares one :class:`CellProbe`. ``probe(coords)`` returns the cells within
``alpha`` of a point together with the two numbers the samplers branch on:

* ``own_tz``: the point's own cell is sampled at rate ``1/2**k`` iff ``own_tz >= k``;
* ``adj_tz``: some cell in ``adj(p)`` is sampled at ``1/2**k`` iff ``adj_tz >= k``.

Cells are identified internally by their mixed field element (the input
of the polynomial hash), which is what the samplers use as a dict key.

Stored representatives are kept in a :class:`RepIndex` keyed by their own
cell. A stored ``u`` with ``d(u, p) <= alpha`` lies in a closed cell at
distance ``<= alpha`` from ``p``, so looking only at the cells of
``adj(p)`` finds exactly the matches a full scan would.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from robust_l0.errors import UsageError
from robust_l0.grid import Grid, Point, adjacent_list
from robust_l0.hashing import HashSampler, mix_cell, trailing_zeros

Probe = tuple[list[int], int, int]


class CellProbe:
    __slots__ = ("grid", "hasher", "alpha", "alpha2", "_tz")

    def __init__(self, grid: Grid, hasher: HashSampler, alpha: float):
        self.grid = grid
        self.hasher = hasher
        self.alpha = float(alpha)
        self.alpha2 = self.alpha * self.alpha
        self._tz: dict[int, int] = {}

    def tz(self, key: int) -> int:
        t = self._tz.get(key)
        if t is None:
            t = trailing_zeros(self.hasher.eval_mixed(key), self.hasher.range_bits)
            self._tz[key] = t
        return t

    def probe(self, coords: Sequence[float]) -> Probe:
        keys = [mix_cell(c) for c in adjacent_list(self.grid, coords, self.alpha2)]
        tz = self.tz
        own = tz(keys[0])
        best = own
        for c in keys[1:]:
            t = tz(c)
            if t > best:
                best = t
        return keys, own, best

    def probe_many(self, coords) -> list[Probe]:
        """``probe`` for every row of an ``(m, dim)`` array, computed by the compiled kernel."""
        from robust_l0._kernels import probe_batch

        arr = np.ascontiguousarray(coords, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != self.grid.dim:
            raise UsageError(f"expected an (m, {self.grid.dim}) array, got shape {arr.shape}")
        if len(arr) == 0:
            return []
        if not np.isfinite(arr).all():
            raise UsageError("coordinates must be finite")
        h = self.hasher
        keys, ptr, own, adj = probe_batch(
            arr, np.asarray(self.grid.offset, dtype=np.float64), self.grid.side, self.alpha2,
            h.coefficients, np.uint64(h._mask), h.range_bits)
        keys = keys.tolist()
        ptr = ptr.tolist()
        return [(keys[ptr[i]:ptr[i + 1]], o, a) for i, (o, a) in enumerate(zip(own.tolist(), adj.tolist()))]


def dist2(a: Sequence[float], b: Sequence[float]) -> float:
    s = 0.0
    for x, y in zip(a, b):
        t = x - y
        s += t * t
    return s


class Entry:
    """A stored representative and its bookkeeping.

    ``latest`` is the most recent point of the representative's group
    (sliding windows) or the reservoir candidate (infinite window).
    """

    __slots__ = ("point", "cell", "own_tz", "adj_tz", "accepted", "latest", "count", "level")

    def __init__(self, point: Point, cell: int, own_tz: int, adj_tz: int, accepted: bool,
                 level: int = 0):
        self.point = point
        self.cell = cell
        self.own_tz = own_tz
        self.adj_tz = adj_tz
        self.accepted = accepted
        self.latest = point
        self.count = 1
        self.level = level

    def copy(self) -> "Entry":
        e = Entry(self.point, self.cell, self.own_tz, self.adj_tz, self.accepted, self.level)
        e.latest = self.latest
        e.count = self.count
        return e

    def __repr__(self) -> str:
        kind = "acc" if self.accepted else "rej"
        return f"Entry({kind}, rep={self.point.index}, latest={self.latest.index})"


class RepIndex:
    """Stored representatives bucketed by their own cell."""

    __slots__ = ("_by_cell",)

    def __init__(self):
        self._by_cell: dict[int, list[Entry]] = {}

    def add(self, e: Entry) -> None:
        bucket = self._by_cell.get(e.cell)
        if bucket is None:
            self._by_cell[e.cell] = [e]
        else:
            bucket.append(e)

    def remove(self, e: Entry) -> None:
        bucket = self._by_cell[e.cell]
        bucket.remove(e)
        if not bucket:
            del self._by_cell[e.cell]

    def clear(self) -> None:
        self._by_cell.clear()

    def find(self, coords: Sequence[float], cells: Sequence[int], a2: float) -> Entry | None:
        """A stored entry within distance ``alpha`` of ``coords``; accepted ones win ties."""
        by_cell = self._by_cell
        fallback = None
        for c in cells:
            bucket = by_cell.get(c)
            if bucket is None:
                continue
            for e in bucket:
                if dist2(e.point.coords, coords) <= a2:
                    if e.accepted:
                        return e
                    if fallback is None:
                        fallback = e
        return fallback
