"""
Exception hierarchy shared by the simulator, classifier and pipelines.
"""
from __future__ import annotations


class EDSimError(Exception):
    """Base class for every error raised on purpose by this package."""


class ParameterError(EDSimError, ValueError):
    """Invalid distribution or configuration parameter (raised at construction)."""


class SchedulingError(EDSimError):
    """An event was scheduled before the current simulation clock."""


class ResourceError(EDSimError):
    """A resource unit was released by an entity that does not hold it."""


class DataError(EDSimError):
    """Unusable input data: empty training set, length mismatch, malformed CSV."""


class ReportError(EDSimError):
    """A report could not be assembled (e.g. the Baseline scenario is missing)."""
