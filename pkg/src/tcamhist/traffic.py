"""Synthetic RTT traffic and the end-to-end evaluation run.

Samples are drawn in fixed-size chunks from ``numpy.random.default_rng``
seeded by the traffic spec, rounded to the nearest nanosecond and clamped to
the 32-bit key space, so a given spec always yields the same stream.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Union

import numpy as np
from scipy import stats as sps

from . import histogram as hc
from .dataplane import PortPipeline, RttSample
from .exceptions import ValidationError
from .prefix import worst_case_entries_total
from .service import stats_document
from .tcam import DEFAULT_CAPACITY, KEY_BITS, TernaryTable

KEY_MAX = (1 << KEY_BITS) - 1
GEN_CHUNK = 1 << 20
# preamble, start-of-frame delimiter and inter-frame gap
L1_OVERHEAD_BYTES = 20

CSV_COLUMNS = ("bin_index", "lo_ns", "hi_ns", "midpoint_ns", "count", "theoretical_mass")


def lognormal_underlying_params(mean_ns: float, stddev_ns: float):
    """``(mu, sigma)`` of the normal whose exponential has the given mean and
    standard deviation."""
    if not mean_ns > 0:
        raise ValidationError(f"mean must be positive, got {mean_ns!r}")
    if not stddev_ns >= 0:
        raise ValidationError(f"standard deviation must be non-negative, got {stddev_ns!r}")
    sigma2 = math.log1p((stddev_ns / mean_ns) ** 2)
    return math.log(mean_ns) - sigma2 / 2, math.sqrt(sigma2)


def expected_packet_count(rate_bps: float, frame_size_bytes: int, duration_s: float,
                          l1: bool = False) -> int:
    """Frames sent at ``rate_bps`` for ``duration_s``.

    The rate counts frame bits only unless ``l1`` adds the per-frame
    preamble and gap overhead.
    """
    for name, v in (("rate_bps", rate_bps), ("frame_size_bytes", frame_size_bytes),
                    ("duration_s", duration_s)):
        if not v > 0:
            raise ValidationError(f"{name} must be positive, got {v!r}")
    wire_bytes = frame_size_bytes + (L1_OVERHEAD_BYTES if l1 else 0)
    return round(rate_bps / (wire_bytes * 8) * duration_s)


# -- distributions ----------------------------------------------------------

@dataclass(frozen=True)
class LogNormal:
    mean_ns: float
    stddev_ns: float
    name = "lognormal"

    def __post_init__(self):
        lognormal_underlying_params(self.mean_ns, self.stddev_ns)

    @property
    def params(self):
        return lognormal_underlying_params(self.mean_ns, self.stddev_ns)

    def draw(self, rng, n):
        mu, sigma = self.params
        return rng.lognormal(mu, sigma, n)

    def bin_mass(self, bins: Sequence[hc.BinSpec]) -> List[float]:
        # a sample lands in [lo, hi] after rounding iff it lies in [lo - .5, hi + .5)
        mu, sigma = self.params
        if sigma == 0:
            v = round(self.mean_ns)
            return [1.0 if b.lo_ns <= v <= b.hi_ns else 0.0 for b in bins]
        dist = sps.lognorm(s=sigma, scale=math.exp(mu))
        median = math.exp(mu)
        lo = np.array([b.lo_ns - 0.5 for b in bins])
        hi = np.array([b.hi_ns + 0.5 for b in bins])
        lo = np.maximum(lo, 0.0)
        # differences of whichever tail is small keep full relative precision
        left = dist.cdf(hi) - dist.cdf(lo)
        right = dist.sf(lo) - dist.sf(hi)
        mid = 1.0 - dist.cdf(lo) - dist.sf(hi)
        mass = np.where(hi <= median, left, np.where(lo >= median, right, mid))
        return mass.tolist()


@dataclass(frozen=True)
class Constant:
    value_ns: int
    name = "constant"

    def __post_init__(self):
        if not 0 <= self.value_ns <= KEY_MAX:
            raise ValidationError("constant value must fit in 32 bits")

    def draw(self, rng, n):
        return np.full(n, self.value_ns, dtype=np.float64)

    def bin_mass(self, bins):
        return [1.0 if b.lo_ns <= self.value_ns <= b.hi_ns else 0.0 for b in bins]


@dataclass(frozen=True)
class Uniform:
    """Integer RTTs drawn uniformly from ``[lo_ns, hi_ns]``."""

    lo_ns: int
    hi_ns: int
    name = "uniform"

    def __post_init__(self):
        if not 0 <= self.lo_ns <= self.hi_ns <= KEY_MAX:
            raise ValidationError("uniform bounds must satisfy 0 <= lo <= hi < 2**32")

    def draw(self, rng, n):
        return rng.integers(self.lo_ns, self.hi_ns, size=n, endpoint=True).astype(np.float64)

    def bin_mass(self, bins):
        span = self.hi_ns - self.lo_ns + 1
        return [
            max(0, min(b.hi_ns, self.hi_ns) - max(b.lo_ns, self.lo_ns) + 1) / span
            for b in bins
        ]


Distribution = Union[LogNormal, Constant, Uniform]


@dataclass(frozen=True)
class TrafficSpec:
    """Traffic to synthesize: either ``count`` samples or a CBR stream given
    by ``(rate_bps, frame_size_bytes, duration_s)``."""

    distribution: Distribution
    count: Optional[int] = None
    rate_bps: Optional[float] = None
    frame_size_bytes: Optional[int] = None
    duration_s: Optional[float] = None
    seed: int = 0
    l1: bool = False

    def __post_init__(self):
        triple = (self.rate_bps, self.frame_size_bytes, self.duration_s)
        has_triple = any(v is not None for v in triple)
        if (self.count is None) == (not has_triple) or (has_triple and None in triple):
            raise ValidationError(
                "give either count or all of rate_bps, frame_size_bytes, duration_s"
            )
        if self.count is not None and (isinstance(self.count, bool) or self.count < 0):
            raise ValidationError(f"count must be >= 0, got {self.count!r}")

    @property
    def total(self) -> int:
        if self.count is not None:
            return int(self.count)
        return expected_packet_count(self.rate_bps, self.frame_size_bytes, self.duration_s, self.l1)


@dataclass
class SampleStream:
    """Iterable of int64 RTT chunks; ``clamped`` counts draws that fell
    outside ``[0, 2**32 - 1]`` and were clipped (known once exhausted)."""

    spec: TrafficSpec
    clamped: int = field(default=0, init=False)
    emitted: int = field(default=0, init=False)

    def __iter__(self) -> Iterator[np.ndarray]:
        self.clamped = self.emitted = 0
        rng = np.random.default_rng(self.spec.seed)
        remaining = self.spec.total
        while remaining > 0:
            n = min(GEN_CHUNK, remaining)
            x = np.rint(self.spec.distribution.draw(rng, n))
            out = (x < 0) | (x > KEY_MAX)
            if out.any():
                self.clamped += int(out.sum())
                x = np.clip(x, 0, KEY_MAX)
            remaining -= n
            self.emitted += n
            yield x.astype(np.int64)

    def samples(self):
        for chunk in self:
            for v in chunk.tolist():
                yield RttSample(v)


def generate(spec: TrafficSpec) -> SampleStream:
    return SampleStream(spec)


class _Moments:
    """Exact-sample mean and population standard deviation, merged chunk by
    chunk (Chan et al. pairwise update)."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, x):
        if not x.size:
            return
        xf = x.astype(np.float64)
        nb = xf.size
        mb = float(xf.mean())
        m2b = float(((xf - mb) ** 2).sum())
        n = self.n + nb
        delta = mb - self.mean
        self.mean += delta * nb / n
        self.m2 += m2b + delta * delta * self.n * nb / n
        self.n = n

    @property
    def std(self):
        return math.sqrt(self.m2 / self.n) if self.n else None


def _fmt_midpoint(b: hc.BinSpec) -> str:
    s = b.lo_ns + b.hi_ns
    return str(s // 2) if s % 2 == 0 else f"{s // 2}.5"


def write_csv(path, bins, counts, mass):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for b, c, m in zip(bins, counts, mass):
            w.writerow([b.index, b.lo_ns, b.hi_ns, _fmt_midpoint(b), c, repr(float(m))])


def run_eval(config: hc.HistogramConfig, spec: TrafficSpec, output=None, fmt: str = "csv",
             capacity: int = DEFAULT_CAPACITY) -> dict:
    """Configure a pipeline, stream the traffic through it and write the
    per-bin histogram next to the theoretical mass.

    Returns the summary (also embedded in JSON output).
    """
    if fmt not in ("csv", "json"):
        raise ValidationError(f"unknown output format {fmt!r}")
    entries = hc.compile(config, capacity=capacity)
    pipe = PortPipeline(0, TernaryTable(capacity))
    pipe.table.install_batch(entries, low_boundary=config.min_ns)

    stream = generate(spec)
    moments = _Moments()

    def tap():
        for chunk in stream:
            moments.update(chunk)
            yield chunk

    run = pipe.process_stream(tap())
    raw = pipe.table.read_counters()
    snap = hc.aggregate(raw.entries, raw.miss_low, raw.miss_high, config)
    bins = hc.plan_bins(config)
    st = hc.stats(snap, bins=bins)
    mass = spec.distribution.bin_mass(bins)

    summary = {
        "total_packets": snap.total,
        "total_in_range": snap.total_in_range,
        "outliers": {"low": snap.miss_low, "high": snap.miss_high, "total": snap.total_outliers},
        "mean_ns": st.mean_ns,
        "stddev_ns": st.stddev_ns,
        "percentiles": None if st.percentiles is None else {str(k): v for k, v in st.percentiles.items()},
        "num_entries": len(entries),
        "worst_case_entries": worst_case_entries_total(config.num_bins, KEY_BITS),
        "bin_width_ns": config.bin_width_ns,
        "sample_mean_ns": moments.mean if moments.n else None,
        "sample_stddev_ns": moments.std,
        "clamped_samples": stream.clamped,
        "samples_per_sec": run.samples_per_sec,
        "seed": spec.seed,
    }
    if output is not None:
        if fmt == "csv":
            write_csv(output, bins, snap.bin_counts, mass)
        else:
            doc = stats_document(snap, st, bins, len(entries))
            doc.pop("captured_at")
            for row, m in zip(doc["bins"], mass):
                row["theoretical_mass"] = m
            doc["summary"] = {k: v for k, v in summary.items() if k != "samples_per_sec"}
            with open(output, "w") as fh:
                json.dump(doc, fh, indent=1)
                fh.write("\n")
    summary["snapshot"] = snap
    return summary


# -- entry-count reproduction ----------------------------------------------

REFERENCE_ENTRY_COUNT = 7477
EVAL_MIN_NS = 46_000_000


def left_open_bins(config: hc.HistogramConfig) -> List[hc.BinSpec]:
    """Bins ``(lo, lo + w]`` instead of ``[lo, lo + w - 1]``; diagnostic only."""
    return [hc.BinSpec(b.index, b.lo_ns + 1, b.hi_ns + 1) for b in hc.plan_bins(config)]


def entry_count_report(capacity: int = DEFAULT_CAPACITY, target: int = REFERENCE_ENTRY_COUNT,
                       tolerance: float = 0.05) -> List[dict]:
    """Compiled entry counts of the 500-bin evaluation histogram under the
    candidate bin-edge conventions, compared with ``target``."""
    candidates = [
        ("closed [46ms,54ms) 16us bins", hc.HistogramConfig(EVAL_MIN_NS, 54_000_000, 500), hc.plan_bins),
        ("closed [46ms,56ms) 20us bins", hc.HistogramConfig(EVAL_MIN_NS, 56_000_000, 500), hc.plan_bins),
        ("left-open (46ms,54ms] 16us bins", hc.HistogramConfig(EVAL_MIN_NS, 54_000_000, 500), left_open_bins),
    ]
    rows = []
    for label, cfg, planner in candidates:
        n = len(hc.compile_bins(planner(cfg)))
        dev = (n - target) / target
        rows.append({
            "convention": label,
            "config": cfg.to_dict(),
            "bin_width_ns": cfg.bin_width_ns,
            "num_entries": n,
            "relative_deviation": dev,
            "matches": abs(dev) <= tolerance,
            "worst_case_bound": worst_case_entries_total(cfg.num_bins, KEY_BITS),
            "fits_capacity": n <= capacity,
        })
    return rows
