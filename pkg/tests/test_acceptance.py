"""Full-scale acceptance criteria, one test per criterion.

Each test records a one-line verdict that the pytest summary prints under
"acceptance criteria". Run just these with ``pytest -m acceptance -s`` or
``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from acceptance_log import LINES as ACCEPTANCE_LINES  # noqa: E402
from oracles import min_partition_size, window_last_points  # noqa: E402

from robust_l0 import (ExperimentConfig, Grid, IwSampler, Point, SwError, SwSampler, adjacent_cells,  # noqa: E402
                       adjacent_cells_bruteforce, deviation_metrics, greedy_partition, make_points,
                       measure_resources, noisy_dataset, random_dataset, rescale_min_distance, run_trials)
from robust_l0.datagen import group_alpha  # noqa: E402
from robust_l0.f0 import F0IwEstimator  # noqa: E402

pytestmark = pytest.mark.acceptance


def record(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line, flush=True)
    assert ok, line


def rand5_100():
    return noisy_dataset(100, 5, 1, "uniform", 20)


def test_criterion_01_iw_uniformity():
    stream = rand5_100()
    t0 = time.perf_counter()
    dist = run_trials(ExperimentConfig(stream, mode="iw", runs=50_000, seed=0))
    std, mx = deviation_metrics(dist, sorted(set(stream.labels)))
    ok = std <= 0.08 and mx <= 0.25 and dist.errors == 0
    record(1, ok, f"IW stdDevNm={std:.4f} (<= 0.08), maxDevNm={mx:.4f} (<= 0.25), "
                  f"{dist.trials} trials, {time.perf_counter() - t0:.0f}s")


def test_criterion_02_sw_uniformity():
    stream = rand5_100()
    w = 200
    t0 = time.perf_counter()
    cfg = ExperimentConfig(stream, mode="sw", window=w, runs=50_000, seed=0)
    dist = run_trials(cfg)
    groups = cfg.target_groups()
    std, mx = deviation_metrics(dist, groups)
    empty = dist.trials - dist.errors - sum(dist.hits.values())
    ok = mx <= 0.30 and empty == 0
    record(2, ok, f"SW w={w} maxDevNm={mx:.4f} (<= 0.30), stdDevNm={std:.4f}, {len(groups)} window groups, "
                  f"errors={dist.errors}, empty={empty}, {time.perf_counter() - t0:.0f}s")


def test_criterion_03_adjacency_oracle():
    rng = np.random.default_rng(2024)
    failures = 0
    total = 0
    for d in range(1, 9):
        max_ratio = 2.5 if d <= 3 else (1.5 if d <= 7 else 0.99)
        for _ in range(1000):
            side = float(rng.uniform(0.1, 5.0))
            offset = tuple(float(x) for x in rng.uniform(0, side, size=d))
            p = tuple(float(x) for x in rng.uniform(-50, 50, size=d))
            alpha = float(rng.uniform(0.01, max_ratio)) * side
            g = Grid(d, side, offset)
            total += 1
            failures += adjacent_cells(g, p, alpha) != adjacent_cells_bruteforce(g, p, alpha)
    record(3, failures == 0, f"adjacent cells == brute force on {total} instances (d = 1..8), {failures} failures")


def test_criterion_04_never_empty():
    replays = 1000
    bad = 0
    for s in range(replays):
        stream = noisy_dataset(60, 5, 10_000 + s, "uniform", 100)
        smp = IwSampler(stream.alpha_truth, 5, 4096, seed=s)
        smp.extend(stream.points)
        bad += smp.empty_inserts > 0
    # the counter against explicit per-insert queries on a few replays
    agree = True
    for s in range(5):
        stream = noisy_dataset(60, 5, 10_000 + s, "uniform", 100)
        smp = IwSampler(stream.alpha_truth, 5, 4096, seed=s)
        empties = 0
        for p in stream.points:
            smp.insert(p)
            empties += smp.query(rng_seed=p.index) == []
        agree &= empties == smp.empty_inserts
    frac = bad / replays
    record(4, frac <= 0.01 and agree, f"IW replays with an empty post-insert query: {bad}/{replays} = {frac:.4f} "
                                      f"(<= 0.01); counter matches explicit queries: {agree}")


def test_criterion_05_space_invariants():
    replays = 1000
    over_acc = 0
    reject_ok = 0
    for s in range(replays):
        stream = noisy_dataset(60, 5, 20_000 + s, "uniform", 100)
        smp = IwSampler(stream.alpha_truth, 5, 4096, seed=s)
        smp.extend(stream.points)
        over_acc += smp.peak_accept > smp.threshold
        reject_ok += smp.peak_reject <= 8 * smp.threshold
    stream = rand5_100()
    sw_over = 0
    sw_runs = 300
    for s in range(sw_runs):
        smp = SwSampler(stream.alpha_truth, 5, 200, len(stream), seed=s)
        try:
            smp.extend(stream.points)
        except SwError:
            pass
        sw_over += smp.peak_accept > smp.threshold
    frac = reject_ok / replays
    ok = over_acc == 0 and sw_over == 0 and frac >= 0.99
    record(5, ok, f"accept set above threshold: IW {over_acc}/{replays}, SW {sw_over}/{sw_runs}; "
                  f"peak reject <= 8*threshold in {frac:.3f} of IW replays (>= 0.99)")


def thirty_groups():
    d = 3
    rng = np.random.default_rng(5)
    centers = rescale_min_distance(random_dataset(30, d, 7))
    radius = group_alpha(d) / 2
    rows, labels = [], []
    for g, c in enumerate(centers):
        for k in range(10):
            z = rng.normal(size=d)
            z *= rng.uniform(0, radius) / np.linalg.norm(z)
            rows.append(np.asarray(c.coords) + (z if k else 0.0))
            labels.append(g)
    perm = rng.permutation(len(rows))
    pts = [Point(tuple(rows[j].tolist()), i) for i, j in enumerate(perm.tolist())]
    return pts, [labels[j] for j in perm.tolist()], group_alpha(d), d


def test_criterion_06_sw_total_variation():
    pts, labels, alpha, d = thirty_groups()
    w = 50
    truth = sorted(window_last_points(labels, w, len(pts) - 1))
    counts = {g: 0 for g in truth}
    trials = 100_000
    stray = errors = 0
    t0 = time.perf_counter()
    for s in range(trials):
        smp = SwSampler(alpha, d, w, len(pts), seed=s)
        try:
            smp.extend(pts)
        except SwError:
            errors += 1
            continue
        q = smp.query(rng_seed=s)
        g = labels[q.index] if q is not None else None
        if g in counts:
            counts[g] += 1
        else:
            stray += 1
    n_ok = trials - errors
    tv = 0.5 * sum(abs(c / n_ok - 1 / len(truth)) for c in counts.values()) + 0.5 * stray / n_ok
    record(6, tv <= 0.05, f"TV distance to uniform over {len(truth)} window groups = {tv:.4f} (<= 0.05), "
                          f"{trials} seeds, errors={errors}, {time.perf_counter() - t0:.0f}s")


def test_criterion_07_f0_iw_accuracy():
    parts = []
    ok = True
    for n in (50, 200, 500):
        good = 0
        for r in range(100):
            stream = noisy_dataset(n, 5, 30_000 + 1000 * n + r, "uniform", 10)
            est = F0IwEstimator(stream.alpha_truth, 5, len(stream), eps=0.25, copies=9, seed=r)
            est.extend(stream.points)
            good += abs(est.estimate() - n) <= 0.25 * n
        parts.append(f"n={n}: {good}/100")
        ok &= good >= 90
    record(7, ok, "F0 IW within 25%: " + ", ".join(parts) + " (each >= 90)")


def test_criterion_08_split_merge_invariants():
    seeds = 20
    cascades = errors = 0
    violations = 0
    for s in range(seeds):
        smp = SwSampler(1.0, 2, 10**6, 4096, seed=s)
        n = 10 * smp.threshold
        pts = make_points([[10.0 * i, 0.0] for i in range(n)])
        try:
            for p in pts:
                smp.insert(p)
                try:
                    smp.check_invariants()
                except AssertionError:
                    violations += 1
        except SwError:
            errors += 1
        cascades += smp.cascades
    ok = cascades >= 1 and violations == 0 and errors == 0
    record(8, ok, f"{seeds} adversarial replays of 10*threshold singletons: {cascades} cascades, "
                  f"{violations} invariant violations, {errors} errors")


def test_criterion_09_throughput():
    stream = noisy_dataset(500, 5, 1, "uniform")
    iw = measure_resources(ExperimentConfig(stream, mode="iw"), scans=100)
    sw = measure_resources(ExperimentConfig(stream, mode="sw", window=1000), scans=100)
    ok = iw.pTime <= 1.0 and sw.pTime <= 10.0
    record(9, ok, f"per-item time over 100 scans of {len(stream)} items: IW {iw.pTime:.5f} ms (<= 1), "
                  f"SW {sw.pTime:.5f} ms (<= 10)")


def test_criterion_10_greedy_vs_exhaustive():
    rng = np.random.default_rng(10)
    violations = 0
    for _ in range(500):
        m = int(rng.integers(1, 13))
        alpha = float(rng.uniform(0.1, 1.0))
        rows = rng.uniform(0, 2, size=(m, 2))
        pts = make_points(rows)
        violations += len(greedy_partition(pts, alpha)) > min_partition_size([p.coords for p in pts], alpha)
    record(10, violations == 0, f"greedy <= exhaustive minimum partition on 500 instances, {violations} violations")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
