"""Histogram-based RTT monitoring on an emulated ternary match-action table."""

from .dataplane import DataPlane, PortPipeline, RttSample, RunReport
from .estimator import TcamHistogram
from .exceptions import (
    CapacityError,
    DataIntegrityError,
    EmptyDistributionError,
    NotFoundError,
    QuiescenceError,
    TableCorruptionError,
    TcamHistError,
    ValidationError,
)
from .histogram import (
    BinSpec,
    HistogramConfig,
    HistogramSnapshot,
    HistogramStats,
    aggregate,
    compile,
    percentile,
    plan_bins,
    stats,
)
from .prefix import (
    DecompositionReport,
    IntRange,
    TernaryPrefix,
    range_to_prefixes,
    verify_decomposition,
    worst_case_entries_per_bin,
    worst_case_entries_total,
)
from .service import HistogramService
from .tcam import DEFAULT_CAPACITY, TernaryEntry, TernaryTable

__version__ = "0.1.0"
