"""Robust l0-sampling and distinct counting on streams with near-duplicates.

Points within distance ``alpha`` of each other form one group; the
samplers return every group with (near) equal probability no matter how
many near-duplicates it has.
"""

from robust_l0.datagen import (LabeledStream, add_near_duplicates, group_alpha, noisy_dataset,
                               random_dataset, rescale_min_distance)
from robust_l0.errors import ConfigError, DataError, RobustL0Error, SwError, UsageError
from robust_l0.f0 import F0IwEstimator, F0SwEstimator
from robust_l0.grid import (CellId, Grid, Point, adjacent_cells, adjacent_cells_bruteforce, cell_of,
                            make_points, new_grid)
from robust_l0.harness import (EmpiricalDistribution, ExperimentConfig, RunReport, deviation_metrics,
                               greedy_partition, measure_resources, run_trials)
from robust_l0.hashing import HashSampler, is_sampled, new_hash
from robust_l0.iw import IwSampler
from robust_l0.sw import SwSampler
from robust_l0.sw_fixed import FixedRateInstance, Window, make_window, merge, split, swf_new

__all__ = [
    "CellId", "ConfigError", "DataError", "EmpiricalDistribution", "ExperimentConfig", "F0IwEstimator",
    "F0SwEstimator", "FixedRateInstance", "Grid", "HashSampler", "IwSampler", "LabeledStream", "Point",
    "RobustL0Error", "RunReport", "SwError", "SwSampler", "UsageError", "Window", "add_near_duplicates",
    "adjacent_cells", "adjacent_cells_bruteforce", "cell_of", "deviation_metrics", "greedy_partition",
    "group_alpha", "is_sampled", "make_points", "make_window", "measure_resources", "merge", "new_grid",
    "new_hash", "noisy_dataset", "random_dataset", "rescale_min_distance", "run_trials", "split", "swf_new",
]
