"""Bin planning, TCAM compilation and histogram statistics.

A configuration ``[min_ns, max_ns)`` with ``num_bins`` bins is split into
inclusive integer bins of width ``(max_ns - min_ns) // num_bins``; the last
bin absorbs any remainder. Each bin is compiled into ternary entries tagged
with its index, and counter readings are folded back into per-bin counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ._validation import check_positive_int
from .exceptions import (
    CapacityError,
    DataIntegrityError,
    EmptyDistributionError,
    ValidationError,
)
from .prefix import IntRange, range_to_prefixes
from .tcam import KEY_BITS, TernaryEntry

DEFAULT_PERCENTILES = (25, 50, 75, 90)
_KEY_MAX = (1 << KEY_BITS) - 1


@dataclass(frozen=True)
class HistogramConfig:
    min_ns: int
    max_ns: int  # exclusive
    num_bins: int

    def __post_init__(self):
        for name in ("min_ns", "max_ns"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValidationError(f"{name} must be an integer, got {v!r}")
        check_positive_int("num_bins", self.num_bins)
        if not 0 <= self.min_ns < self.max_ns <= _KEY_MAX:
            raise ValidationError(
                f"need 0 <= min_ns < max_ns <= {_KEY_MAX}, got [{self.min_ns}, {self.max_ns})"
            )
        if self.num_bins > self.max_ns - self.min_ns:
            raise ValidationError(
                f"{self.num_bins} bins do not fit into a span of {self.max_ns - self.min_ns} ns"
            )

    @property
    def bin_width_ns(self) -> int:
        """Width of every bin except possibly the last."""
        return (self.max_ns - self.min_ns) // self.num_bins

    def to_dict(self):
        return {"min_ns": self.min_ns, "max_ns": self.max_ns, "num_bins": self.num_bins}


@dataclass(frozen=True)
class BinSpec:
    index: int
    lo_ns: int
    hi_ns: int  # inclusive

    @property
    def width_ns(self):
        return self.hi_ns - self.lo_ns + 1

    @property
    def midpoint_ns(self) -> float:
        # half-integers below 2**32 are exact in binary floating point
        return (self.lo_ns + self.hi_ns) / 2


def plan_bins(config: HistogramConfig) -> List[BinSpec]:
    w = config.bin_width_ns
    bins = [
        BinSpec(i, config.min_ns + i * w, config.min_ns + (i + 1) * w - 1)
        for i in range(config.num_bins - 1)
    ]
    last = config.num_bins - 1
    bins.append(BinSpec(last, config.min_ns + last * w, config.max_ns - 1))
    return bins


def bin_widths(config: HistogramConfig) -> List[int]:
    return [b.width_ns for b in plan_bins(config)]


def compile_bins(bins: Sequence[BinSpec]) -> List[TernaryEntry]:
    entries = []
    for b in bins:
        for p in range_to_prefixes(IntRange(b.lo_ns, b.hi_ns, KEY_BITS)):
            entries.append(TernaryEntry(p, b.index))
    return entries


def compile(config: HistogramConfig, capacity: Optional[int] = None) -> List[TernaryEntry]:  # noqa: A001
    """Ternary entries for every bin, in bin order.

    Raises :class:`CapacityError` when more than ``capacity`` entries are
    needed, so callers can refuse a configuration before touching a table.
    """
    entries = compile_bins(plan_bins(config))
    if capacity is not None and len(entries) > capacity:
        raise CapacityError(capacity, len(entries))
    return entries


@dataclass(frozen=True)
class HistogramSnapshot:
    config: HistogramConfig
    bin_counts: Tuple[int, ...]
    miss_low: int = 0
    miss_high: int = 0
    captured_at: float = field(default_factory=time.monotonic)

    def __post_init__(self):
        if len(self.bin_counts) != self.config.num_bins:
            raise ValidationError(
                f"expected {self.config.num_bins} bin counts, got {len(self.bin_counts)}"
            )
        object.__setattr__(self, "bin_counts", tuple(int(c) for c in self.bin_counts))

    @property
    def total_in_range(self):
        return sum(self.bin_counts)

    @property
    def total_outliers(self):
        return self.miss_low + self.miss_high

    @property
    def total(self):
        return self.total_in_range + self.total_outliers


def aggregate(raw, miss_low: int, miss_high: int, config: HistogramConfig,
              captured_at: Optional[float] = None) -> HistogramSnapshot:
    """Sum entry counters by their ``bin_index``.

    ``raw`` holds ``(entry_ordinal, bin_index, counter)`` triples as returned
    by :meth:`TernaryTable.read_counters`.
    """
    counts = [0] * config.num_bins
    for ordinal, bin_index, counter in raw:
        if not 0 <= bin_index < config.num_bins:
            raise DataIntegrityError(
                f"entry {ordinal} refers to bin {bin_index}, configuration has {config.num_bins}"
            )
        counts[bin_index] += int(counter)
    if captured_at is None:
        captured_at = time.monotonic()
    return HistogramSnapshot(config, tuple(counts), int(miss_low), int(miss_high), captured_at)


@dataclass(frozen=True)
class HistogramStats:
    total_in_range: int
    total_outliers: int
    mean_ns: Optional[float]
    stddev_ns: Optional[float]
    percentiles: Optional[Dict[float, float]]

    @property
    def empty(self):
        return self.total_in_range == 0


def percentile(snapshot: HistogramSnapshot, p: float, bins: Optional[Sequence[BinSpec]] = None) -> float:
    """Percentile ``p`` of the in-range distribution, interpolating linearly
    inside the bin where the cumulative count crosses ``p/100 * total``."""
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not 0 < p < 100:
        raise ValidationError(f"percentile must be in (0, 100), got {p!r}")
    total = snapshot.total_in_range
    if total == 0:
        raise EmptyDistributionError("histogram holds no in-range packets")
    if bins is None:
        bins = plan_bins(snapshot.config)
    target = p / 100 * total
    cum = 0
    for b, c in zip(bins, snapshot.bin_counts):
        if c and cum + c >= target:
            return b.lo_ns + (target - cum) / c * b.width_ns
        cum += c
    # float rounding of target can leave it a hair above the total
    b = bins[-1]
    return float(b.hi_ns + 1)


def stats(snapshot: HistogramSnapshot, percentile_ranks: Sequence[float] = DEFAULT_PERCENTILES,
          bins: Optional[Sequence[BinSpec]] = None) -> HistogramStats:
    """Mean, population standard deviation and percentiles from bin midpoints.

    Sums run over integers (twice the midpoint is always integral), so the
    moments are exact until the final division.
    """
    total = snapshot.total_in_range
    if total == 0:
        return HistogramStats(0, snapshot.total_outliers, None, None, None)
    if bins is None:
        bins = plan_bins(snapshot.config)
    s1 = s2 = 0
    for b, c in zip(bins, snapshot.bin_counts):
        if c:
            m2 = b.lo_ns + b.hi_ns
            s1 += c * m2
            s2 += c * m2 * m2
    mean = s1 / (2 * total)
    # var = (T*s2 - s1^2) / (4 T^2), numerator exact
    var_num = total * s2 - s1 * s1
    stddev = math.sqrt(var_num / (4 * total * total))
    pct = {q: percentile(snapshot, q, bins) for q in percentile_ranks}
    return HistogramStats(total, snapshot.total_outliers, mean, stddev, pct)
