"""Exception hierarchy shared by the samplers, generators and the harness."""

from __future__ import annotations


class RobustL0Error(Exception):
    """Base class for every error raised by this package."""


class ConfigError(RobustL0Error, ValueError):
    """A constructor received parameters outside their valid range."""


class UsageError(RobustL0Error, ValueError):
    """An operation was called with arguments that violate its contract."""


class DataError(RobustL0Error, ValueError):
    """Input data cannot be processed (duplicates, empty input, bad CSV)."""


class SwError(RobustL0Error):
    """The hierarchical sliding-window sampler entered its failure state.

    ``kind`` is ``"overflow_at_top_level"`` when a split/merge cascade runs
    past the last level, or ``"degenerate_split"`` when a split finds no
    accepted point that survives resampling.
    """

    OVERFLOW = "overflow_at_top_level"
    DEGENERATE_SPLIT = "degenerate_split"

    def __init__(self, kind: str, message: str | None = None):
        self.kind = kind
        super().__init__(message or kind)
