"""Infinite-window robust distinct sampler.

Each group of near-duplicates is judged by its first point. A group whose
first point lands in a sampled cell is *accepted*; one whose first point
misses but has a sampled cell within ``alpha`` is *rejected* and kept only
so that its later points are recognised and skipped. When the accept set
outgrows ``threshold`` the sample rate halves (``R`` doubles) and both sets
are refiltered.

Example:
    >>> from robust_l0 import IwSampler, make_points
    >>> s = IwSampler(alpha=0.1, dim=2, m_bound=1024, seed=3)
    >>> for p in make_points([[0.0, 0.0], [0.05, 0.0], [5.0, 5.0]]):
    ...     s.insert(p)
    >>> len(s.accept_set)
    2
"""

from __future__ import annotations

import math
import random

import numpy as np

from robust_l0.errors import ConfigError, UsageError
from robust_l0.grid import Grid, Point, new_grid
from robust_l0.hashing import HashSampler, default_degree
from robust_l0.probe import CellProbe, Entry, RepIndex

GRID_MODES = ("planar", "highdim")


def grid_side(alpha: float, dim: int, grid_mode: str | None) -> float:
    """Cell side for a sampler: ``alpha/2`` (planar) or ``dim*alpha`` (highdim)."""
    mode = resolve_grid_mode(dim, grid_mode)
    return alpha / 2.0 if mode == "planar" else dim * alpha


def resolve_grid_mode(dim: int, grid_mode: str | None) -> str:
    if grid_mode is None:
        return "planar" if dim <= 2 else "highdim"
    if grid_mode not in GRID_MODES:
        raise ConfigError(f"grid_mode must be one of {GRID_MODES}, got {grid_mode!r}")
    return grid_mode


def derive_seeds(seed: int, n: int) -> list[int]:
    """Independent 64-bit child seeds for the grid, the hash, and the local RNG."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)
    return [int(s) for s in ss.generate_state(n, dtype=np.uint64)]


def build_probe(alpha: float, dim: int, m_bound: int, seed: int, grid_mode: str | None,
                degree: int | None = None) -> tuple[CellProbe, int]:
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ConfigError(f"alpha must be a positive real, got {alpha!r}")
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ConfigError(f"dim must be a positive integer, got {dim!r}")
    g_seed, h_seed, r_seed = derive_seeds(seed, 3)
    grid = new_grid(int(dim), grid_side(alpha, dim, grid_mode), g_seed)
    hasher = HashSampler(h_seed, degree or default_degree(m_bound))
    return CellProbe(grid, hasher, alpha), r_seed


def log_threshold(kappa0: float, k: int, m_bound: int) -> int:
    """``ceil(kappa0 * k * log2(m_bound))``."""
    if not isinstance(m_bound, (int, np.integer)) or m_bound < 2:
        raise ConfigError(f"m_bound must be an integer >= 2, got {m_bound!r}")
    if not kappa0 > 0:
        raise ConfigError(f"kappa0 must be positive, got {kappa0!r}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    # guard against 3.2 * 10 landing a hair above an integer
    return max(1, math.ceil(kappa0 * k * math.log2(m_bound) - 1e-9))


class IwSampler:
    """Robust l0-sampler over an infinite window.

    Args:
        alpha: Group diameter threshold.
        dim: Dimension of the points.
        m_bound: Upper bound on the stream length; sets the threshold and hash degree.
        k: Number of groups returned by :meth:`query` (sampled without replacement).
        kappa0: Threshold constant; ``threshold = ceil(kappa0 * k * log2(m_bound))``.
        seed: Seed for the grid offset, the hash function and the reservoir RNG.
        grid_mode: ``"planar"`` (side ``alpha/2``), ``"highdim"`` (side ``dim*alpha``),
            or ``None`` to pick planar for ``dim <= 2``.
        track_members: Keep a reservoir-sampled member for every accepted group.
        threshold: Override the accept-set bound (used by the F0 estimator).
    """

    def __init__(self, alpha: float, dim: int, m_bound: int, k: int = 1, kappa0: float = 3.2,
                 seed: int = 0, grid_mode: str | None = None, track_members: bool = False,
                 threshold: int | None = None):
        base = log_threshold(kappa0, k, m_bound)
        if threshold is not None:
            if not isinstance(threshold, (int, np.integer)) or threshold < 1:
                raise ConfigError(f"threshold must be a positive integer, got {threshold!r}")
            base = int(threshold)
        self.alpha = float(alpha)
        self.dim = int(dim)
        self.m_bound = int(m_bound)
        self.k = int(k)
        self.kappa0 = float(kappa0)
        self.seed = int(seed)
        self.threshold = base
        self.grid_mode = resolve_grid_mode(dim, grid_mode)
        self._probe, r_seed = build_probe(alpha, dim, m_bound, seed, self.grid_mode)
        self._rng = random.Random(r_seed) if track_members else None
        self.track_members = bool(track_members)
        self._level = 0  # R = 2**level
        self._entries: dict[int, Entry] = {}
        self._index = RepIndex()
        self._n_acc = 0
        self.peak_accept = 0
        self.peak_reject = 0
        self.peak_words = 0
        self.empty_inserts = 0  # inserts after which the accept set was empty

    # ------------------------------------------------------------------ state
    @property
    def grid(self) -> Grid:
        return self._probe.grid

    @property
    def hash(self) -> HashSampler:
        return self._probe.hasher

    @property
    def R(self) -> int:
        return 1 << self._level

    @property
    def accept_set(self) -> list[Point]:
        return [e.point for e in self._entries.values() if e.accepted]

    @property
    def reject_set(self) -> list[Point]:
        return [e.point for e in self._entries.values() if not e.accepted]

    @property
    def member_state(self) -> dict[Point, tuple[Point, int]] | None:
        if not self.track_members:
            return None
        return {e.point: (e.latest, e.count) for e in self._entries.values() if e.accepted}

    @property
    def accept_count(self) -> int:
        return self._n_acc

    @property
    def reject_count(self) -> int:
        return len(self._entries) - self._n_acc

    def space_words(self) -> int:
        """Logical state size in 64-bit words (coords + index + tag per stored point)."""
        per_point = self.dim + 2
        words = len(self._entries) * per_point
        if self.track_members:
            words += self._n_acc * per_point
        return words

    # ---------------------------------------------------------------- updates
    def insert(self, p: Point) -> None:
        coords = p.coords
        if len(coords) != self.dim:
            raise UsageError(f"point has dimension {len(coords)}, sampler has {self.dim}")
        self._insert_probed(p, *self._probe.probe(coords))
        if not self._n_acc:
            self.empty_inserts += 1

    def extend(self, points) -> None:
        """Insert points in order; the cell probes are computed in one batch."""
        points = list(points)
        if not points:
            return
        probes = self._probe.probe_many([p.coords for p in points])
        for p, pr in zip(points, probes):
            self._insert_probed(p, *pr)
            if not self._n_acc:
                self.empty_inserts += 1

    def _insert_probed(self, p: Point, cells: list[int], own: int, adj: int) -> None:
        hit = self._index.find(p.coords, cells, self._probe.alpha2)
        if hit is not None:
            if self._rng is not None and hit.accepted:
                hit.count += 1
                if self._rng.random() * hit.count < 1.0:
                    hit.latest = p
            return
        level = self._level
        if own >= level:
            e = Entry(p, cells[0], own, adj, True)
            self._n_acc += 1
        elif adj >= level:
            e = Entry(p, cells[0], own, adj, False)
        else:
            return
        self._entries[p.index] = e
        self._index.add(e)
        while self._n_acc > self.threshold:
            self._double()
        # sizes only grow here; doubling shrinks them
        if self._n_acc > self.peak_accept:
            self.peak_accept = self._n_acc
        n_rej = len(self._entries) - self._n_acc
        if n_rej > self.peak_reject:
            self.peak_reject = n_rej
        words = self.space_words()
        if words > self.peak_words:
            self.peak_words = words

    def _double(self) -> None:
        self._level += 1
        level = self._level
        for key in list(self._entries):
            e = self._entries[key]
            if e.accepted:
                if e.own_tz >= level:
                    continue
                self._n_acc -= 1
                if e.adj_tz >= level:
                    # its own cell dropped out but a neighbour is still sampled
                    e.accepted = False
                    e.latest, e.count = e.point, 1
                    continue
            elif e.adj_tz >= level:
                continue
            del self._entries[key]
            self._index.remove(e)

    # ---------------------------------------------------------------- queries
    def query(self, rng_seed: int | None = None) -> list[Point]:
        """Up to ``k`` accepted representatives drawn without replacement."""
        acc = self.accept_set
        if not acc:
            return []
        rng = random.Random(rng_seed)
        return rng.sample(acc, min(self.k, len(acc)))

    def query_member(self, rng_seed: int | None = None) -> Point | None:
        """A reservoir-sampled member of a uniformly chosen accepted group."""
        if not self.track_members:
            raise UsageError("member tracking was not enabled for this sampler")
        acc = [e for e in self._entries.values() if e.accepted]
        if not acc:
            return None
        return random.Random(rng_seed).choice(acc).latest

    def check_invariants(self) -> None:
        """Re-derive every stored entry's status by brute force; raise AssertionError on mismatch."""
        probe = self._probe
        level = self._level
        assert self._n_acc <= self.threshold, "accept set above threshold"
        assert self._n_acc == sum(e.accepted for e in self._entries.values())
        stored = list(self._entries.values())
        for e in stored:
            cells, own, adj = probe.probe(e.point.coords)
            assert cells[0] == e.cell
            if e.accepted:
                assert own >= level, "accepted point no longer sampled"
            else:
                assert own < level <= adj, "reject point fails the reject condition"
        for i, a in enumerate(stored):
            for b in stored[i + 1:]:
                d2 = sum((x - y) ** 2 for x, y in zip(a.point.coords, b.point.coords))
                assert d2 > probe.alpha2, "two stored representatives within alpha"
