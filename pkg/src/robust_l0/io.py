"""CSV streams: one point per line, ``x1,...,xd[,group_id][,timestamp]``."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from robust_l0.datagen import LabeledStream
from robust_l0.errors import DataError
from robust_l0.grid import Point
from robust_l0.harness import greedy_partition


def read_stream(source, dim: int, groups: bool = False, timestamps: bool = False,
                header: bool = False, alpha: float | None = None) -> LabeledStream:
    """Parse a CSV stream.

    Without a group column every point is labeled with its greedy-partition
    group (at ``alpha``; required in that case).
    """
    if dim < 1:
        raise DataError(f"dim must be positive, got {dim}")
    text = Path(source).read_text(encoding="utf-8") if not isinstance(source, io.TextIOBase) else source.read()
    want = dim + int(groups) + int(timestamps)
    points: list[Point] = []
    labels: list[int] = []
    rows = csv.reader(io.StringIO(text))
    if header:
        next(rows, None)
    for lineno, row in enumerate(rows, start=2 if header else 1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != want:
            raise DataError(f"line {lineno}: expected {want} fields, got {len(row)}")
        try:
            coords = tuple(float(c) for c in row[:dim])
            gid = int(row[dim]) if groups else None
            ts = int(row[dim + int(groups)]) if timestamps else None
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
        if not all(math.isfinite(x) for x in coords):
            raise DataError(f"line {lineno}: non-finite coordinate")
        if ts is not None and points and ts < points[-1].timestamp:
            raise DataError(f"line {lineno}: timestamps must be nondecreasing")
        points.append(Point(coords, len(points), ts))
        if gid is not None:
            labels.append(gid)
    if not points:
        raise DataError("stream is empty")
    if not groups:
        if alpha is None:
            raise DataError("alpha is needed to label a stream without a group column")
        by_index = {}
        for gid, g in enumerate(greedy_partition(points, alpha)):
            for p in g:
                by_index[p.index] = gid
        labels = [by_index[i] for i in range(len(points))]
    truth = alpha if alpha is not None else 0.0
    return LabeledStream(tuple(points), tuple(labels), len(set(labels)), truth, dim)


def write_stream(out, stream: LabeledStream, groups: bool = True, timestamps: bool = False,
                 header: bool = False) -> None:
    """Write ``stream`` as CSV to a text file object."""
    w = csv.writer(out, lineterminator="\n")
    if header:
        cols = [f"x{i + 1}" for i in range(stream.dim)]
        if groups:
            cols.append("group_id")
        if timestamps:
            cols.append("timestamp")
        w.writerow(cols)
    for p, g in zip(stream.points, stream.labels):
        row = [repr(x) for x in p.coords]
        if groups:
            row.append(g)
        if timestamps:
            row.append(p.index if p.timestamp is None else p.timestamp)
        w.writerow(row)


def with_index_timestamps(stream: LabeledStream) -> LabeledStream:
    """Give points without a timestamp their arrival index as timestamp."""
    pts = tuple(p if p.timestamp is not None else Point(p.coords, p.index, p.index) for p in stream.points)
    return LabeledStream(pts, stream.labels, stream.n_groups, stream.alpha_truth, stream.dim)
