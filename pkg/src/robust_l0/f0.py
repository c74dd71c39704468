"""Robust distinct-count (F0) estimators built from the samplers.

* :class:`F0IwEstimator` runs independent :class:`IwSampler` copies whose
  accept-set bound is ``ceil(kappa_b / eps**2)``; each copy estimates
  ``|accept_set| * R`` and the estimate is the median over copies.
* :class:`F0SwEstimator` runs groups of :class:`SwSampler` copies. A copy
  reports the sparsest level at which some in-window group is still
  accepted; a group averages these levels to ``lbar`` and estimates
  ``phi * 2**lbar``; the result is the median over groups.
"""

from __future__ import annotations

import math
import statistics

import numpy as np

from robust_l0.errors import ConfigError
from robust_l0.iw import IwSampler, derive_seeds
from robust_l0.sw import SwSampler

#: Flajolet-Martin bias correction.
FM_PHI = 0.77351


def _check_eps(eps: float) -> float:
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps must lie in (0, 1), got {eps!r}")
    return float(eps)


def _check_count(name: str, v) -> int:
    if not isinstance(v, (int, np.integer)) or v < 1:
        raise ConfigError(f"{name} must be a positive integer, got {v!r}")
    return int(v)


class F0IwEstimator:
    """Median of ``copies`` infinite-window estimates ``|accept_set| * R``."""

    def __init__(self, alpha: float, dim: int, m_bound: int, eps: float = 0.25, kappa_b: float = 20.0,
                 copies: int = 9, seed: int = 0, grid_mode: str | None = None):
        self.eps = _check_eps(eps)
        if not kappa_b > 0:
            raise ConfigError(f"kappa_b must be positive, got {kappa_b!r}")
        self.kappa_b = float(kappa_b)
        self.copy_count = _check_count("copies", copies)
        self.threshold = math.ceil(self.kappa_b / (self.eps * self.eps) - 1e-9)
        self.copies = [IwSampler(alpha, dim, m_bound, seed=s, grid_mode=grid_mode, threshold=self.threshold)
                       for s in derive_seeds(seed, self.copy_count)]

    def insert(self, p) -> None:
        for c in self.copies:
            c.insert(p)

    def extend(self, points) -> None:
        points = list(points)
        for c in self.copies:
            c.extend(points)

    def copy_estimates(self) -> list[int]:
        return [c.accept_count * c.R for c in self.copies]

    def estimate(self) -> float:
        return float(statistics.median(self.copy_estimates()))


class F0SwEstimator:
    """Median over ``groups`` of ``phi * 2**lbar``, ``lbar`` averaged over the copies of a group.

    ``copies_per_group`` defaults to ``ceil(c_f / eps**2)``.
    """

    def __init__(self, alpha: float, dim: int, w: int, m_bound: int, eps: float = 0.25, c_f: float = 1.0,
                 copies_per_group: int | None = None, groups: int = 9, phi: float = FM_PHI,
                 kappa0: float = 3.2, seed: int = 0, grid_mode: str | None = None,
                 window_mode: str = "sequence"):
        self.eps = _check_eps(eps)
        if copies_per_group is None:
            if not c_f > 0:
                raise ConfigError(f"c_f must be positive, got {c_f!r}")
            copies_per_group = math.ceil(c_f / (self.eps * self.eps) - 1e-9)
        self.copies_per_group = _check_count("copies_per_group", copies_per_group)
        self.groups = _check_count("groups", groups)
        if not phi > 0:
            raise ConfigError(f"phi must be positive, got {phi!r}")
        self.phi = float(phi)
        seeds = derive_seeds(seed, self.groups * self.copies_per_group)
        self.copies = [SwSampler(alpha, dim, w, m_bound, kappa0=kappa0, seed=s, grid_mode=grid_mode,
                                 window_mode=window_mode) for s in seeds]

    def insert(self, p) -> None:
        for c in self.copies:
            c.insert(p)

    def extend(self, points) -> None:
        points = list(points)
        for c in self.copies:
            c.extend(points)

    def top_levels(self, now: int | None = None) -> list[int | None]:
        """Per copy, the sparsest level an in-window group is sampled at (``None`` for an empty window)."""
        return [c.top_level(now) for c in self.copies]

    def estimate(self, now: int | None = None) -> float | None:
        """The F0 estimate, or ``None`` when the window is empty."""
        tops = self.top_levels(now)
        if all(t is None for t in tops):
            return None
        k = self.copies_per_group
        vals = []
        for g in range(self.groups):
            levels = [t for t in tops[g * k:(g + 1) * k] if t is not None]
            if levels:
                vals.append(self.phi * 2.0 ** (sum(levels) / len(levels)))
        return float(statistics.median(vals))
