"""Repeated-trial experiments, deviation metrics and resource measurement.

A trial replays the whole stream through a freshly seeded sampler and
queries once at the end; the sampled point's ground-truth group is
tallied. For sliding windows the query covers the final ``w`` items, which
on a shuffled stream is as good as a random window.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from robust_l0.datagen import LabeledStream
from robust_l0.errors import ConfigError, SwError, UsageError
from robust_l0.grid import Point
from robust_l0.iw import IwSampler
from robust_l0.probe import dist2
from robust_l0.sw import SwSampler

SAMPLER_MODES = ("iw", "sw")


@dataclass
class EmpiricalDistribution:
    """Per-group hit counts over ``trials`` runs; ``errors`` counts runs that failed."""

    hits: dict[int, int]
    trials: int
    n_groups: int
    errors: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError(f"trials must be positive, got {self.trials}")
        if self.n_groups < 1:
            raise UsageError(f"n_groups must be positive, got {self.n_groups}")
        if sum(self.hits.values()) > self.trials:
            raise UsageError("more hits than trials")

    def frequencies(self, groups=None) -> dict[int, float]:
        keys = self.hits.keys() if groups is None else groups
        return {g: self.hits.get(g, 0) / self.trials for g in keys}


@dataclass
class RunReport:
    """Timing, space, uniformity and error figures for one experiment."""

    pTime: float  # ms per item
    pSpace: int  # peak words
    stdDevNm: float
    maxDevNm: float
    error_count: int
    config: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    """What :func:`run_trials` replays.

    ``groups`` lists the ground-truth group ids the query may land in; it
    defaults to every label in the stream (IW) or the labels of the final
    window (SW).
    """

    stream: LabeledStream
    mode: str = "iw"
    alpha: float | None = None
    m_bound: int | None = None
    window: int = 1000
    window_mode: str = "sequence"
    kappa0: float = 3.2
    k: int = 1
    runs: int = 1000
    seed: int = 0
    grid_mode: str | None = None
    groups: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.mode not in SAMPLER_MODES:
            raise ConfigError(f"mode must be one of {SAMPLER_MODES}, got {self.mode!r}")
        if self.runs < 1:
            raise ConfigError(f"runs must be positive, got {self.runs}")
        if self.alpha is None:
            self.alpha = self.stream.alpha_truth
        if self.m_bound is None:
            self.m_bound = max(2, len(self.stream))

    def target_groups(self) -> tuple[int, ...]:
        if self.groups is not None:
            return tuple(self.groups)
        if self.mode == "sw":
            return tuple(sorted(self.stream.window_groups(self.window)))
        return tuple(sorted(set(self.stream.labels)))

    def echo(self) -> dict:
        return {"mode": self.mode, "alpha": self.alpha, "dim": self.stream.dim, "points": len(self.stream),
                "window": self.window if self.mode == "sw" else None, "windowMode": self.window_mode,
                "mBound": self.m_bound, "kappa0": self.kappa0, "k": self.k, "runs": self.runs,
                "seed": self.seed, "gridMode": self.grid_mode}


def make_sampler(cfg: ExperimentConfig, seed: int, track_space: bool = False):
    d = cfg.stream.dim
    if cfg.mode == "iw":
        return IwSampler(cfg.alpha, d, cfg.m_bound, k=cfg.k, kappa0=cfg.kappa0, seed=seed,
                         grid_mode=cfg.grid_mode)
    return SwSampler(cfg.alpha, d, cfg.window, cfg.m_bound, kappa0=cfg.kappa0, seed=seed,
                     grid_mode=cfg.grid_mode, window_mode=cfg.window_mode, track_space=track_space)


def _query(sampler, seed: int) -> Point | None:
    if isinstance(sampler, IwSampler):
        got = sampler.query(rng_seed=seed)
        return got[0] if got else None
    return sampler.query(rng_seed=seed)


@dataclass
class TrialStats:
    distribution: EmpiricalDistribution
    seconds: float  # total time spent inserting
    items: int  # total items inserted
    peak_words: int


def _replay(cfg: ExperimentConfig, runs: int, track_space: bool) -> TrialStats:
    points = list(cfg.stream.points)
    labels = cfg.stream.labels
    groups = cfg.target_groups()
    hits: dict[int, int] = {g: 0 for g in groups}
    errors = 0
    seconds = 0.0
    peak = 0
    for i in range(runs):
        seed = cfg.seed + i
        s = make_sampler(cfg, seed, track_space)
        t0 = time.perf_counter()
        try:
            s.extend(points)
        except SwError:
            errors += 1
            continue
        finally:
            seconds += time.perf_counter() - t0
            if track_space:
                peak = max(peak, s.peak_words)
        q = _query(s, seed)
        if q is None:
            continue
        g = labels[q.index]
        hits[g] = hits.get(g, 0) + 1
    dist = EmpiricalDistribution(hits, runs, max(1, len(groups)), errors)
    return TrialStats(dist, seconds, runs * len(points), peak)


def run_trials(cfg: ExperimentConfig) -> EmpiricalDistribution:
    """Run ``cfg.runs`` replays with seeds ``cfg.seed + i`` and tally the sampled groups."""
    return _replay(cfg, cfg.runs, track_space=False).distribution


def deviation_metrics(dist: EmpiricalDistribution, groups=None) -> tuple[float, float]:
    """``(stdDevNm, maxDevNm)``: population std and max deviation of ``hits/trials`` over ``1/n``.

    Frequencies are zero-filled over ``groups`` (default: the ``n_groups``
    keys of ``hits``; missing groups contribute a zero).
    """
    if groups is None:
        freqs = [h / dist.trials for h in dist.hits.values()]
        freqs += [0.0] * (dist.n_groups - len(freqs))
    else:
        freqs = [dist.hits.get(g, 0) / dist.trials for g in groups]
    n = len(freqs)
    if n == 0:
        raise UsageError("no groups to measure")
    f_star = 1.0 / n
    f = np.asarray(freqs)
    return float(f.std() / f_star), float(np.abs(f - f_star).max() / f_star)


def measure_resources(cfg: ExperimentConfig, scans: int = 100) -> RunReport:
    """Per-item time and peak words over ``scans`` full-stream replays, plus the metrics of those replays."""
    if len(cfg.stream) == 0:
        return RunReport(0.0, 0, 0.0, 0.0, 0, cfg.echo())
    stats = _replay(cfg, scans, track_space=True)
    std, mx = deviation_metrics(stats.distribution, cfg.target_groups())
    ms = 1000.0 * stats.seconds / stats.items
    return RunReport(ms, stats.peak_words, std, mx, stats.distribution.errors, cfg.echo())


def greedy_partition(points, alpha: float) -> list[list[Point]]:
    """Scan in order; each unassigned point opens a group and takes every unassigned point within ``alpha``."""
    pts = list(points)
    a2 = float(alpha) * float(alpha)
    taken = [False] * len(pts)
    groups = []
    for i, p in enumerate(pts):
        if taken[i]:
            continue
        taken[i] = True
        g = [p]
        for j in range(i + 1, len(pts)):
            if not taken[j] and dist2(p.coords, pts[j].coords) <= a2:
                taken[j] = True
                g.append(pts[j])
        groups.append(g)
    return groups


def report_dict(report: RunReport, dist: EmpiricalDistribution) -> dict:
    """The JSON result object, fields in their fixed order, reals at 6 significant digits."""
    return {
        "config": report.config,
        "hits": {str(g): int(h) for g, h in sorted(dist.hits.items())},
        "trials": int(dist.trials),
        "stdDevNm": sig6(report.stdDevNm),
        "maxDevNm": sig6(report.maxDevNm),
        "pTimeMs": sig6(report.pTime),
        "pSpaceWords": int(report.pSpace),
        "errors": int(report.error_count),
    }


def sig6(x: float) -> float:
    return float(f"{x:.6g}")


def run_experiment(cfg: ExperimentConfig) -> tuple[RunReport, EmpiricalDistribution]:
    """``cfg.runs`` replays measured for both uniformity and resources."""
    stats = _replay(cfg, cfg.runs, track_space=True)
    std, mx = deviation_metrics(stats.distribution, cfg.target_groups())
    ms = 1000.0 * stats.seconds / stats.items if stats.items else 0.0
    return RunReport(ms, stats.peak_words, std, mx, stats.distribution.errors, cfg.echo()), stats.distribution

