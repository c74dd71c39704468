"""Sliding-window candidate tracking at one fixed sample rate.

A :class:`FixedRateInstance` stores, for every candidate group, a pair
``(u, p)``: ``u`` is the group's representative and ``p`` its latest point.
A pair disappears once ``p`` leaves the window, so ``u`` itself may be
older than the window. The representative of a group is therefore the
latest group point whose preceding ``w`` items (sequence mode) contain no
other point of the group.

The same class is used as a level of :class:`robust_l0.sw.SwSampler`; the
levels there share one :class:`~robust_l0.probe.CellProbe`.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import NamedTuple

import numpy as np

from robust_l0.errors import ConfigError, SwError, UsageError
from robust_l0.grid import Point
from robust_l0.hashing import log2_rate
from robust_l0.iw import build_probe
from robust_l0.probe import CellProbe, Entry, RepIndex

WINDOW_MODES = ("sequence", "time")

# outcome of recording one point at one instance
IGNORED, NEW_ACCEPT, NEW_REJECT, UPDATE_ACCEPT, UPDATE_REJECT = range(5)


class Window(NamedTuple):
    """The last ``width`` items (sequence mode) or time units (time mode)."""

    mode: str
    width: int


def make_window(width: int, mode: str = "sequence") -> Window:
    if mode not in WINDOW_MODES:
        raise ConfigError(f"window mode must be one of {WINDOW_MODES}, got {mode!r}")
    if not isinstance(width, (int, np.integer)) or isinstance(width, bool) or width < 1:
        raise ConfigError(f"window width must be a positive integer, got {width!r}")
    return Window(mode, int(width))


def window_now(window: Window, p: Point) -> int:
    """Position of ``p`` on the window's axis (arrival index or timestamp)."""
    if window.mode == "sequence":
        return p.index
    if p.timestamp is None:
        raise UsageError("time-based windows need points with timestamps")
    return p.timestamp


class FixedRateInstance:
    """Candidate pairs for one sample rate ``R = 2**level``.

    Construct standalone instances with :func:`swf_new`.
    """

    __slots__ = ("probe", "level", "window", "_entries", "_index", "_n_acc", "_last")

    def __init__(self, probe: CellProbe, level: int, window: Window):
        self.probe = probe
        self.level = int(level)
        self.window = window
        # rep arrival index -> Entry, ordered by the arrival of the pair's latest point
        self._entries: OrderedDict[int, Entry] = OrderedDict()
        self._index = RepIndex()
        self._n_acc = 0
        self._last: Point | None = None

    # ------------------------------------------------------------------ views
    @property
    def R(self) -> int:
        return 1 << self.level

    @property
    def accept_set(self) -> list[Point]:
        return [e.point for e in self._entries.values() if e.accepted]

    @property
    def reject_set(self) -> list[Point]:
        return [e.point for e in self._entries.values() if not e.accepted]

    @property
    def pair_store(self) -> dict[Point, Point]:
        return {e.point: e.latest for e in self._entries.values()}

    @property
    def accept_count(self) -> int:
        return self._n_acc

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> list[Entry]:
        """Stored entries, oldest latest point first."""
        return list(self._entries.values())

    def accepted_latest(self) -> list[Point]:
        """Latest points of the pairs keyed by accepted representatives."""
        return [e.latest for e in self._entries.values() if e.accepted]

    # ---------------------------------------------------------------- updates
    def observe(self, p: Point) -> int:
        """Expire old pairs, then record ``p``. Returns one of the module's outcome codes."""
        if len(p.coords) != self.probe.grid.dim:
            raise UsageError(f"point has dimension {len(p.coords)}, instance has {self.probe.grid.dim}")
        check_order(self.window, self._last, p)
        self._last = p
        self.expire(window_now(self.window, p))
        return self._record(p, *self.probe.probe(p.coords))

    def expire(self, now: int) -> list[Entry]:
        """Drop pairs whose latest point is at or before ``now - width``; returns them."""
        ents = self._entries
        dropped = []
        cutoff = now - self.window.width
        seq = self.window.mode == "sequence"
        while ents:
            e = ents[next(iter(ents))]
            pos = e.latest.index if seq else e.latest.timestamp
            if pos > cutoff:
                break
            ents.popitem(last=False)
            self._index.remove(e)
            if e.accepted:
                self._n_acc -= 1
            dropped.append(e)
        return dropped

    def _record(self, p: Point, cells: list[int], own: int, adj: int) -> int:
        hit = self._index.find(p.coords, cells, self.probe.alpha2)
        if hit is not None:
            hit.latest = p
            self._entries.move_to_end(hit.point.index)
            return UPDATE_ACCEPT if hit.accepted else UPDATE_REJECT
        level = self.level
        if own >= level:
            e = Entry(p, cells[0], own, adj, True, level)
            self._n_acc += 1
            outcome = NEW_ACCEPT
        elif adj >= level:
            e = Entry(p, cells[0], own, adj, False, level)
            outcome = NEW_REJECT
        else:
            return IGNORED
        self._entries[p.index] = e
        self._index.add(e)
        return outcome

    def _append(self, e: Entry) -> None:
        # caller guarantees e.latest is newer than every stored latest point
        self._entries[e.point.index] = e
        self._index.add(e)
        if e.accepted:
            self._n_acc += 1

    def clear(self) -> None:
        self._entries.clear()
        self._index.clear()
        self._n_acc = 0

    def space_words(self) -> int:
        # rep: coords + index + tag; latest: coords + index
        d = self.probe.grid.dim
        return len(self._entries) * ((d + 2) + (d + 1))

    def __repr__(self) -> str:
        return f"FixedRateInstance(R={self.R}, acc={self._n_acc}, pairs={len(self._entries)})"


def check_order(window: Window, last: Point | None, p: Point) -> None:
    timed = window.mode == "time"
    if timed and p.timestamp is None:
        raise UsageError("time-based windows need points with timestamps")
    if last is None:
        return
    if p.index <= last.index:
        raise UsageError(f"arrival index {p.index} does not follow {last.index}")
    if timed and p.timestamp < last.timestamp:
        raise UsageError(f"timestamp {p.timestamp} precedes {last.timestamp}")


def swf_new(alpha: float, dim: int, R: int, window: Window, seed: int = 0,
            grid_mode: str | None = None, m_bound: int = 1024) -> FixedRateInstance:
    """A standalone, empty instance at rate ``1/R``."""
    try:
        level = log2_rate(R)
    except UsageError as exc:
        raise ConfigError(str(exc)) from exc
    if not isinstance(window, Window):
        raise ConfigError(f"expected a Window, got {window!r}")
    window = make_window(window.width, window.mode)
    probe, _ = build_probe(alpha, dim, m_bound, seed, grid_mode)
    return FixedRateInstance(probe, level, window)


def split(inst: FixedRateInstance) -> tuple[FixedRateInstance, FixedRateInstance]:
    """Split at the newest accepted pair that survives resampling at rate ``2R``.

    Pairs up to that point are refiltered into an instance at ``2R``;
    newer pairs stay at ``R``. Pairs are ordered by their latest point.
    The input is left unchanged.
    """
    nxt = inst.level + 1
    t = -1
    for e in inst._entries.values():
        if e.accepted and e.own_tz >= nxt:
            t = e.latest.index
    if t < 0:
        raise SwError(SwError.DEGENERATE_SPLIT,
                      f"no accepted point at rate {inst.R} survives resampling at {2 * inst.R}")
    promoted = FixedRateInstance(inst.probe, nxt, inst.window)
    remainder = FixedRateInstance(inst.probe, inst.level, inst.window)
    for e in inst._entries.values():
        if e.latest.index > t:
            remainder._append(e.copy())
        elif e.adj_tz >= nxt:
            # accepted at the new rate iff its own cell is still sampled
            c = e.copy()
            c.accepted = e.own_tz >= nxt
            c.level = nxt
            promoted._append(c)
    return promoted, remainder


def merge(a: FixedRateInstance, b: FixedRateInstance) -> FixedRateInstance:
    """Union of two instances at the same rate; inputs are left unchanged."""
    if a.level != b.level:
        raise UsageError(f"cannot merge instances at rates {a.R} and {b.R}")
    if a.probe is not b.probe:
        raise UsageError("cannot merge instances built on different grids or hashes")
    combined: dict[int, Entry] = {}
    for e in list(a._entries.values()) + list(b._entries.values()):
        prev = combined.get(e.point.index)
        if prev is None:
            combined[e.point.index] = e.copy()
            continue
        # the same representative at both: keep the newer latest point
        if e.latest.index > prev.latest.index:
            prev.latest = e.latest
        prev.accepted = prev.accepted or e.accepted
    out = FixedRateInstance(a.probe, a.level, a.window)
    for e in sorted(combined.values(), key=lambda e: e.latest.index):
        out._append(e)
    return out
