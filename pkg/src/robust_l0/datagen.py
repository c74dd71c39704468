"""Synthetic noisy streams with known groups.

The recipe: draw (or load) base points, rescale them so the closest pair
is at distance 1, then surround every base point with near-duplicates at
distance below ``1 / (2 * d**1.5)`` and shuffle. Any two points of a group
are then within ``alpha = 1 / d**1.5`` of each other, and points of
different groups are at least ``1 - alpha`` apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from robust_l0.errors import DataError
from robust_l0.grid import Point

DUP_MODES = ("uniform", "powerlaw")


def group_alpha(dim: int) -> float:
    """Intra-group diameter bound ``1 / d**1.5`` used as the samplers' ``alpha``."""
    return 1.0 / dim ** 1.5


@dataclass(frozen=True)
class LabeledStream:
    """A shuffled stream together with the group id of every point."""

    points: tuple[Point, ...]
    labels: tuple[int, ...]
    n_groups: int
    alpha_truth: float
    dim: int

    def __len__(self) -> int:
        return len(self.points)

    def coords(self) -> np.ndarray:
        return np.array([p.coords for p in self.points], dtype=float).reshape(len(self.points), self.dim)

    def pairs(self) -> list[tuple[Point, int]]:
        return list(zip(self.points, self.labels))

    def window_groups(self, w: int, end: int | None = None) -> set[int]:
        """Group ids of the ``w`` items ending at position ``end`` (default: the last)."""
        end = len(self.points) if end is None else end
        return set(self.labels[max(0, end - w):end])


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def random_dataset(n: int, dim: int, seed: int) -> list[Point]:
    """``n`` points with coordinates uniform in ``(0, 1)``."""
    if n < 2:
        raise DataError(f"need at least 2 points, got n={n}")
    if dim < 1:
        raise DataError(f"dim must be positive, got {dim}")
    rng = _rng(seed)
    arr = rng.random((n, dim))
    while (arr == 0.0).any():  # keep the interval open
        arr[arr == 0.0] = rng.random(int((arr == 0.0).sum()))
    return [Point(tuple(row), i) for i, row in enumerate(arr.tolist())]


def rescale_min_distance(points) -> list[Point]:
    """Scale all coordinates so the minimum pairwise distance becomes 1."""
    pts = list(points)
    if len(pts) < 2:
        raise DataError("need at least 2 points to rescale")
    arr = np.array([p.coords for p in pts], dtype=float)
    delta = float(pdist(arr).min())
    if delta == 0.0:
        raise DataError("dataset contains duplicate points")
    scaled = (arr / delta).tolist()
    return [Point(tuple(row), p.index, p.timestamp) for row, p in zip(scaled, pts)]


def add_near_duplicates(centers, mode: str = "uniform", seed: int = 0, max_dups: int = 100) -> LabeledStream:
    """Surround every center with near-duplicates and shuffle.

    ``uniform``: center ``i`` gets ``k_i ~ Uniform{1..max_dups}`` duplicates.
    ``powerlaw``: the centers are put in a random order and the ``i``-th
    (1-based) gets ``ceil(n / i)``.
    Group ids are the centers' positions in ``centers``.
    """
    cs = list(centers)
    if not cs:
        raise DataError("no centers given")
    if mode not in DUP_MODES:
        raise DataError(f"mode must be one of {DUP_MODES}, got {mode!r}")
    if max_dups < 1:
        raise DataError(f"max_dups must be positive, got {max_dups}")
    dim = len(cs[0].coords)
    if any(len(c.coords) != dim for c in cs):
        raise DataError("centers have mixed dimensions")
    rng = _rng(seed)
    n = len(cs)
    if mode == "uniform":
        counts = rng.integers(1, max_dups + 1, size=n)
    else:
        counts = np.empty(n, dtype=np.int64)
        order = rng.permutation(n)
        for rank, ci in enumerate(order, start=1):
            counts[ci] = math.ceil(n / rank)
    radius = 1.0 / (2.0 * dim ** 1.5)
    rows = []
    labels = []
    for gid, (c, k) in enumerate(zip(cs, counts.tolist())):
        center = np.asarray(c.coords, dtype=float)
        rows.append(center)
        labels.append(gid)
        z = rng.random((k, dim))
        norms = np.linalg.norm(z, axis=1)
        lengths = rng.uniform(0.0, radius, size=k)
        rows.extend(center + z * (lengths / norms)[:, None])
        labels.extend([gid] * k)
    perm = rng.permutation(len(rows))
    points = tuple(Point(tuple(rows[j].tolist()), i) for i, j in enumerate(perm.tolist()))
    return LabeledStream(points, tuple(labels[j] for j in perm.tolist()), n, group_alpha(dim), dim)


def noisy_dataset(n: int, dim: int, seed: int, mode: str = "uniform", max_dups: int = 100) -> LabeledStream:
    """``random_dataset`` -> ``rescale_min_distance`` -> ``add_near_duplicates``, one seed for all."""
    base_seed, dup_seed = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF).generate_state(2, dtype=np.uint64)
    centers = rescale_min_distance(random_dataset(n, dim, int(base_seed)))
    return add_near_duplicates(centers, mode, int(dup_seed), max_dups)
