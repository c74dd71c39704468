"""Sliding-window robust distinct sampler.

Level ``l`` (``l = 0..L``, ``L = ceil(log2 w)``) is a fixed-rate instance
at rate ``1/2**l``. The levels partition the window into stretches by the
last point of each group: level 0 covers the newest stretch, older
stretches sit at sparser levels, and every tracked group has exactly one
pair, at the level of its stretch.

A new point always lands at level 0, where everything is sampled. If its
group already has a pair at a higher level, that pair (representative
unchanged) moves down with it. When a level's accept set outgrows the
threshold it is split at its newest accepted pair that survives the next
rate; the older part is resampled at that rate and appended to the level
above, possibly cascading. A query reweights the accepted pairs of each
level to the sparsest non-empty rate and picks one of the survivors.

Example:
    >>> from robust_l0 import SwSampler, make_points
    >>> s = SwSampler(alpha=0.1, dim=2, w=2, m_bound=1024, seed=1)
    >>> s.extend(make_points([[0.0, 0.0], [5.0, 5.0], [9.0, 9.0]]))
    >>> s.query(rng_seed=0).index in (1, 2)
    True
"""

from __future__ import annotations

import random
from collections import deque

import numpy as np

from robust_l0.errors import ConfigError, SwError, UsageError
from robust_l0.grid import Point
from robust_l0.iw import build_probe, log_threshold, resolve_grid_mode
from robust_l0.probe import Entry, dist2
from robust_l0.sw_fixed import FixedRateInstance, check_order, make_window, window_now


def num_levels(w: int) -> int:
    """``L = ceil(log2 w)``, i.e. the index of the sparsest level."""
    return (int(w) - 1).bit_length()


class SwSampler:
    """Robust l0-sampler over the last ``w`` items (or time units).

    Args:
        alpha: Group diameter threshold.
        dim: Dimension of the points.
        w: Window width.
        m_bound: Upper bound on the stream length; sets the threshold and hash degree.
        kappa0: Threshold constant, as for :class:`~robust_l0.iw.IwSampler`.
        seed: Seed for the grid offset and the hash function.
        grid_mode: ``"planar"``, ``"highdim"`` or ``None`` (planar for ``dim <= 2``).
        window_mode: ``"sequence"`` (last ``w`` items) or ``"time"`` (last ``w`` time units).
        threshold: Override the per-level accept-set bound.
        track_space: Record the peak state size after every insert in ``peak_words``.
    """

    def __init__(self, alpha: float, dim: int, w: int, m_bound: int, kappa0: float = 3.2,
                 seed: int = 0, grid_mode: str | None = None, window_mode: str = "sequence",
                 threshold: int | None = None, track_space: bool = False):
        self.window = make_window(w, window_mode)
        base = log_threshold(kappa0, 1, m_bound)
        if threshold is not None:
            if not isinstance(threshold, (int, np.integer)) or threshold < 1:
                raise ConfigError(f"threshold must be a positive integer, got {threshold!r}")
            base = int(threshold)
        self.alpha = float(alpha)
        self.dim = int(dim)
        self.w = int(w)
        self.m_bound = int(m_bound)
        self.kappa0 = float(kappa0)
        self.seed = int(seed)
        self.threshold = base
        self.grid_mode = resolve_grid_mode(dim, grid_mode)
        self._probe, _ = build_probe(alpha, dim, m_bound, seed, self.grid_mode)
        self.L = num_levels(w)
        self.levels = [FixedRateInstance(self._probe, l, self.window) for l in range(self.L + 1)]
        self._last: Point | None = None
        self._error: SwError | None = None
        # own-cell key -> stored entries of every level
        self._where: dict[int, list[Entry]] = {}
        self._timeline: deque[tuple[int, Entry]] = deque()
        self.cascades = 0  # number of split/merge steps performed
        self.handbacks = 0  # pairs moved back to level 0 by a new point
        # levels whose newest pair was handed back since the last promotion into them
        self._tail_moved: set[int] = set()
        self.peak_accept = 0  # largest per-level accept set seen after an insert
        self.track_space = bool(track_space)
        self.peak_words = 0

    @property
    def grid(self):
        return self._probe.grid

    @property
    def hash(self):
        return self._probe.hasher

    @property
    def failed(self) -> bool:
        return self._error is not None

    def accept_counts(self) -> list[int]:
        return [lv.accept_count for lv in self.levels]

    def top_level(self, now: int | None = None) -> int | None:
        """The sparsest rate ``1/2**l`` at which some in-window group is sampled.

        This is the largest ``l`` such that an accepted pair's own cell is
        kept at rate ``1/2**l`` (not capped at ``L``); ``None`` for an empty window.
        """
        self.sweep(now)
        top = -1
        for lv in self.levels:
            for e in lv._entries.values():
                if e.accepted and e.own_tz > top:
                    top = e.own_tz
        return None if top < 0 else top

    def space_words(self) -> int:
        return sum(lv.space_words() for lv in self.levels)

    # ---------------------------------------------------------------- updates
    def insert(self, p: Point) -> None:
        """Process ``p``; raises :class:`SwError` if the sampler fails (and on every later call)."""
        self._check(p)
        self._insert_probed(p, *self._probe.probe(p.coords))

    def extend(self, points) -> None:
        """Insert points in order; the cell probes are computed in one batch."""
        points = list(points)
        if not points:
            return
        for p in points:
            if len(p.coords) != self.dim:
                raise UsageError(f"point has dimension {len(p.coords)}, sampler has {self.dim}")
        probes = self._probe.probe_many([p.coords for p in points])
        for p, pr in zip(points, probes):
            self._check(p)
            self._insert_probed(p, *pr)

    def _check(self, p: Point) -> None:
        if self._error is not None:
            raise self._error
        if len(p.coords) != self.dim:
            raise UsageError(f"point has dimension {len(p.coords)}, sampler has {self.dim}")
        check_order(self.window, self._last, p)
        self._last = p

    def _insert_probed(self, p: Point, cells: list[int], own: int, adj: int) -> None:
        # Works on the levels' internals directly: the cross-level cell index and
        # the expiry timeline stand in for the per-level index and expiry scans.
        levels = self.levels
        where = self._where
        now = p.index if self.window.mode == "sequence" else p.timestamp
        self._expire_through(now - self.window.width)
        seen = self._timeline
        hit: Entry | None = None  # the group's pair; accepted ones win ties
        coords = p.coords
        a2 = self._probe.alpha2
        for c in cells:
            bucket = where.get(c)
            if not bucket:
                continue
            for e in bucket:
                if dist2(e.point.coords, coords) <= a2:
                    if hit is None or (e.accepted and not hit.accepted):
                        hit = e
        lv0 = levels[0]
        if hit is None:
            e = Entry(p, cells[0], own, adj, True, 0)
            lv0._entries[p.index] = e
            lv0._n_acc += 1
            bucket = where.get(e.cell)
            if bucket is None:
                where[e.cell] = [e]
            else:
                bucket.append(e)
        else:
            e = hit
            e.latest = p
            if e.level == 0:
                lv0._entries.move_to_end(e.point.index)
            else:
                # the group's last point moves to the newest stretch: hand the
                # pair, representative unchanged, back to the rate-1 level
                old = levels[e.level]
                if next(reversed(old._entries)) == e.point.index:
                    self._tail_moved.add(e.level)
                del old._entries[e.point.index]
                if e.accepted:
                    old._n_acc -= 1
                e.level = 0
                e.accepted = True
                lv0._entries[e.point.index] = e
                lv0._n_acc += 1
                self.handbacks += 1
        seen.append((now, e))
        if lv0._n_acc > self.threshold:
            self._cascade(0)
        elif lv0._n_acc > self.peak_accept:
            self.peak_accept = lv0._n_acc
        if self.track_space:
            words = self.space_words()
            if words > self.peak_words:
                self.peak_words = words

    def _expire_through(self, cutoff: int) -> None:
        # (position, entry) events in arrival order; stale ones are skipped
        seen = self._timeline
        seq = self.window.mode == "sequence"
        levels = self.levels
        while seen and seen[0][0] <= cutoff:
            pos, e = seen.popleft()
            if (e.latest.index if seq else e.latest.timestamp) != pos:
                continue  # updated since
            lv = levels[e.level]
            if lv._entries.get(e.point.index) is not e:
                continue  # cleared, or replaced by a split/merge copy
            del lv._entries[e.point.index]
            self._where[e.cell].remove(e)
            if e.accepted:
                lv._n_acc -= 1

    def _cascade(self, j: int) -> None:
        # split/merge in place: the same steps as split() and merge(), without copies
        levels = self.levels
        where = self._where
        while levels[j]._n_acc > self.threshold:
            if j == self.L:
                self._error = SwError(SwError.OVERFLOW, f"level {j} holds {levels[j].accept_count} "
                                      f"accepted pairs, above {self.threshold}")
                raise self._error
            nxt = j + 1
            src = levels[j]._entries
            t = -1
            for e in src.values():
                if e.accepted and e.own_tz >= nxt:
                    t = e.latest.index
            if t < 0:
                self._error = SwError(SwError.DEGENERATE_SPLIT, f"no accepted point at rate {1 << j} "
                                      f"survives resampling at {1 << nxt}")
                raise self._error
            dst = levels[nxt]
            n_moved = 0
            while src:
                e = src[next(iter(src))]
                if e.latest.index > t:
                    break
                src.popitem(last=False)
                if e.accepted:
                    n_moved += 1
                if e.adj_tz >= nxt:
                    e.level = nxt
                    e.accepted = e.own_tz >= nxt
                    dst._entries[e.point.index] = e
                    if e.accepted:
                        dst._n_acc += 1
                else:
                    where[e.cell].remove(e)
            levels[j]._n_acc -= n_moved
            if levels[j]._n_acc > self.threshold:
                # what stays behind has no survivor at the next rate either
                self._error = SwError(SwError.DEGENERATE_SPLIT, f"level {j} keeps {levels[j]._n_acc} "
                                      f"accepted pairs after a split, above {self.threshold}")
                raise self._error
            self._tail_moved.discard(nxt)
            self.cascades += 1
            j = nxt
        for lv in levels[:j + 1]:
            if lv._n_acc > self.peak_accept:
                self.peak_accept = lv._n_acc

    def sweep(self, now: int | None = None) -> None:
        """Expire pairs at every level relative to ``now`` (default: the last arrival)."""
        if now is None:
            if self._last is None:
                return
            now = window_now(self.window, self._last)
        self._expire_through(now - self.window.width)

    # ---------------------------------------------------------------- queries
    def query(self, rng_seed: int | None = None, now: int | None = None) -> Point | None:
        """A latest point of a near-uniformly chosen group in the window, or ``None`` if it is empty.

        ``now`` (time mode) moves the window end past the last arrival.
        """
        if self._error is not None:
            raise self._error
        self.sweep(now)
        c = -1
        for l, lv in enumerate(self.levels):
            if lv.accept_count:
                c = l
        if c < 0:
            return None
        rng = random.Random(rng_seed)
        pool: list[Point] = list(self.levels[c].accepted_latest())
        for l in range(c):
            keep = 1.0 / (1 << (c - l))
            for q in self.levels[l].accepted_latest():
                if rng.random() < keep:
                    pool.append(q)
        return rng.choice(pool)

    def check_invariants(self) -> None:
        """Assert the level invariants; raises AssertionError on a violation.

        * level ``l`` runs at rate ``2**l`` and holds at most ``threshold`` accepted pairs;
        * each stored pair matches its level's sampling condition, its latest
          point is within ``alpha`` of the representative and inside the window;
        * levels are ordered by age: every pair at level ``l`` is newer than
          every pair above ``l``;
        * the newest pair of every non-empty level ``l >= 1`` is accepted, unless
          that pair's group has since moved back to level 0;
        * the newest arrival is the accepted newest pair of the lowest non-empty level;
        * no group is tracked twice.
        """
        cutoff = None
        if self._last is not None:
            cutoff = window_now(self.window, self._last) - self.window.width
        seq = self.window.mode == "sequence"
        a2 = self._probe.alpha2
        newer = None  # oldest latest index among the levels below the current one
        reps = set()
        for l in range(self.L + 1):
            lv = self.levels[l]
            assert lv.level == l and lv.R == 1 << l, f"rate ladder broken at level {l}"
            assert lv.accept_count <= self.threshold, f"level {l} accept set above threshold"
            ents = lv.entries()
            assert lv.accept_count == sum(e.accepted for e in ents)
            prev = -1
            for e in ents:
                assert e.level == l
                assert e.latest.index > prev, f"level {l} pairs out of order"
                prev = e.latest.index
                if newer is not None:
                    assert e.latest.index < newer, f"level {l} pair newer than a pair below it"
                if e.accepted:
                    assert e.own_tz >= l, f"level {l} accepted pair not sampled"
                else:
                    assert e.own_tz < l <= e.adj_tz, f"level {l} reject pair fails the reject condition"
                assert dist2(e.point.coords, e.latest.coords) <= a2, \
                    "pair latest point is farther than alpha from its representative"
                if cutoff is not None:
                    pos = e.latest.index if seq else e.latest.timestamp
                    assert pos > cutoff, "expired pair still stored"
                assert e.point.index not in reps, "group tracked twice"
                reps.add(e.point.index)
            if ents:
                if l >= 1 and l not in self._tail_moved:
                    assert ents[-1].accepted, f"newest pair of level {l} is not accepted"
                newer = ents[0].latest.index
        if self._last is not None and self._error is None:
            low = next((lv for lv in self.levels if len(lv)), None)
            assert low is not None, "nothing tracked after an arrival"
            tail = low.entries()[-1]
            assert tail.accepted and tail.latest is self._last, "newest arrival is not the accepted tail"

    def tail_accepted(self) -> list[bool | None]:
        """Per level: is the newest pair accepted (``None`` for an empty level)?"""
        out = []
        for lv in self.levels:
            ents = lv._entries
            out.append(ents[next(reversed(ents))].accepted if ents else None)
        return out
