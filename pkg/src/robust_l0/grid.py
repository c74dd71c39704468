"""Randomly shifted grids over R^d and the cells within distance alpha of a point.

A grid is an axis-aligned lattice of cubes of side ``side`` shifted by a
random ``offset``. Cells are identified by their integer coordinate tuple,
so there is no bounded-domain assumption and negative coordinates work.

``adjacent_cells`` walks the per-axis choices (stay in the point's cell or
step over the nearest boundaries) and prunes a branch as soon as the
accumulated squared displacement exceeds ``alpha**2``.
``adjacent_cells_bruteforce`` enumerates the whole block around the
point's cell and is kept as an independent oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from robust_l0.errors import ConfigError, UsageError

CellId = tuple[int, ...]

#: Largest dimension the brute-force oracle agrees to enumerate.
BRUTEFORCE_MAX_DIM = 12


class Point(NamedTuple):
    """A stream element: coordinates plus its 0-based arrival index."""

    coords: tuple[float, ...]
    index: int
    timestamp: int | None = None


def make_points(rows, timestamps: Sequence[int] | None = None) -> list[Point]:
    """Wrap an ``(m, d)`` array-like as points with arrival indices ``0..m-1``."""
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2:
        raise UsageError(f"expected a 2-d array of coordinates, got shape {arr.shape}")
    if timestamps is None:
        return [Point(tuple(row), i) for i, row in enumerate(arr.tolist())]
    if len(timestamps) != len(arr):
        raise UsageError("timestamps and rows differ in length")
    return [Point(tuple(row), i, int(t)) for i, (row, t) in enumerate(zip(arr.tolist(), timestamps))]


@dataclass(frozen=True)
class Grid:
    """An axis-aligned grid of cubes with side ``side`` shifted by ``offset``."""

    dim: int
    side: float
    offset: tuple[float, ...]
    seed: int | None = None

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ConfigError(f"dim must be a positive integer, got {self.dim!r}")
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ConfigError(f"side must be a positive finite real, got {self.side!r}")
        if len(self.offset) != self.dim:
            raise ConfigError(f"offset has {len(self.offset)} components, expected {self.dim}")
        if any(not (0.0 <= o < self.side) for o in self.offset):
            raise ConfigError("offset components must lie in [0, side)")


def new_grid(dim: int, side: float, seed: int) -> Grid:
    """Grid whose offset is drawn uniformly from ``[0, side)^dim`` by a seeded generator."""
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ConfigError(f"dim must be a positive integer, got {dim!r}")
    if not (side > 0 and math.isfinite(side)):
        raise ConfigError(f"side must be a positive finite real, got {side!r}")
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    offset = rng.uniform(0.0, side, size=dim)
    # uniform() may round up to ``side`` itself
    offset = tuple(float(o) if o < side else 0.0 for o in offset)
    return Grid(int(dim), float(side), offset, int(seed))


def _coords_of(grid: Grid, p) -> Sequence[float]:
    coords = p.coords if isinstance(p, Point) else p
    if len(coords) != grid.dim:
        raise UsageError(f"point has dimension {len(coords)}, grid has {grid.dim}")
    return coords


def cell_of(grid: Grid, p) -> CellId:
    """Integer coordinates of the cell containing ``p`` (a Point or a coordinate sequence)."""
    coords = _coords_of(grid, p)
    side = grid.side
    return tuple(math.floor((x - o) / side) for x, o in zip(coords, grid.offset))


def _axis_moves(x: float, o: float, side: float, b: int, a2: float) -> list[tuple[int, float]]:
    # (cell coordinate, squared gap to that cell) along one axis, nearest first
    moves = [(b, 0.0)]
    k = b - 1
    while True:
        g = x - (o + (k + 1) * side)
        g2 = g * g
        if g2 > a2:
            break
        moves.append((k, g2))
        k -= 1
    k = b + 1
    while True:
        g = (o + k * side) - x
        g2 = g * g
        if g2 > a2:
            break
        moves.append((k, g2))
        k += 1
    return moves


def adjacent_list(grid: Grid, coords: Sequence[float], a2: float) -> list[CellId]:
    """Cells within squared distance ``a2`` of ``coords``; the containing cell comes first.

    No validation; this is the hot path used by the samplers. Only axes
    where stepping over a boundary costs at most ``a2`` branch the search.
    """
    side = grid.side
    floor = math.floor
    far = a2 > side * side
    base = []
    branching = []  # (axis, [(cell coordinate, squared gap), ...]) for axes that branch
    for i, (x, o) in enumerate(zip(coords, grid.offset)):
        b = floor((x - o) / side)
        base.append(b)
        if far:
            moves = _axis_moves(x, o, side, b, a2)[1:]
        else:
            moves = []
            g = x - (o + b * side)
            if g * g <= a2:
                moves.append((b - 1, g * g))
            g = (o + (b + 1) * side) - x
            if g * g <= a2:
                moves.append((b + 1, g * g))
        if moves:
            branching.append((i, moves))

    found = [tuple(base)]
    if not branching:
        return found
    # extend partial move sets axis by axis, pruning once the squared displacement exceeds a2
    partial: list[tuple[tuple[tuple[int, int], ...], float]] = [((), 0.0)]
    for i, moves in branching:
        grown = []
        for chosen, s in partial:
            grown.append((chosen, s))
            for k, g2 in moves:
                t = s + g2
                if t <= a2:
                    grown.append((chosen + ((i, k),), t))
        partial = grown
    for chosen, _ in partial[1:]:
        cell = base[:]
        for i, k in chosen:
            cell[i] = k
        found.append(tuple(cell))
    return found


def adjacent_cells(grid: Grid, p, alpha: float) -> set[CellId]:
    """All cells ``C`` with ``d(p, C) <= alpha``, found by the pruned per-axis search."""
    if not alpha > 0:
        raise UsageError(f"alpha must be positive, got {alpha!r}")
    coords = _coords_of(grid, p)
    return set(adjacent_list(grid, coords, alpha * alpha))


def adjacent_cells_bruteforce(grid: Grid, p, alpha: float) -> set[CellId]:
    """Reference implementation: test every cell of the surrounding block.

    The block spans ``floor(alpha / side) + 1`` cells on each side of the
    containing cell, which always includes every cell within ``alpha``.
    """
    if not alpha > 0:
        raise UsageError(f"alpha must be positive, got {alpha!r}")
    coords = np.asarray(_coords_of(grid, p), dtype=float)
    d = grid.dim
    reach = int(math.floor(alpha / grid.side)) + 1
    if d > BRUTEFORCE_MAX_DIM or (2 * reach + 1) ** d > 5_000_000:
        raise UsageError(f"block of {(2 * reach + 1)}^{d} cells is too large to enumerate")
    base = np.array(cell_of(grid, coords), dtype=np.int64)
    steps = np.array(list(itertools.product(range(-reach, reach + 1), repeat=d)), dtype=np.int64)
    cells = base + steps
    offset = np.asarray(grid.offset, dtype=float)
    lo = offset + cells * grid.side
    hi = offset + (cells + 1) * grid.side
    gap = np.maximum(np.maximum(lo - coords, 0.0), coords - hi)
    # accumulate axis by axis so rounding matches a sequential sum
    s = np.zeros(len(cells))
    for i in range(d):
        s = s + gap[:, i] * gap[:, i]
    keep = cells[s <= alpha * alpha]
    return {tuple(int(c) for c in row) for row in keep}
