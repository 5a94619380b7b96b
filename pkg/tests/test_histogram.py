import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import direct_binning, expanded_percentile, trie_cover
from tcamhist import histogram as hc
from tcamhist.exceptions import (
    CapacityError,
    DataIntegrityError,
    EmptyDistributionError,
    ValidationError,
)
from tcamhist.prefix import worst_case_entries_total
from tcamhist.tcam import TernaryTable

EVAL = hc.HistogramConfig(46_000_000, 54_000_000, 500)


@st.composite
def configs(draw, domain=1 << 16, max_bins=64):
    lo = draw(st.integers(0, domain - 2))
    hi = draw(st.integers(lo + 1, domain - 1))
    n = draw(st.integers(1, min(max_bins, hi - lo)))
    return hc.HistogramConfig(lo, hi, n)


def test_plan_eval_config():
    bins = hc.plan_bins(EVAL)
    assert len(bins) == 500
    assert EVAL.bin_width_ns == 16_000
    assert {b.width_ns for b in bins} == {16_000}
    assert (bins[0].lo_ns, bins[0].hi_ns) == (46_000_000, 46_015_999)
    assert bins[-1].hi_ns == 53_999_999


def test_plan_single_full_bin():
    [b] = hc.plan_bins(hc.HistogramConfig(0, (1 << 32) - 1, 1))
    assert (b.lo_ns, b.hi_ns) == (0, (1 << 32) - 2)


def test_plan_remainder_goes_to_last_bin():
    bins = hc.plan_bins(hc.HistogramConfig(0, 10, 3))
    assert [(b.lo_ns, b.hi_ns) for b in bins] == [(0, 2), (3, 5), (6, 9)]
    assert hc.bin_widths(hc.HistogramConfig(0, 10, 3)) == [3, 3, 4]


@pytest.mark.parametrize("args", [(5, 5, 1), (6, 5, 1), (0, 10, 11), (0, 10, 0), (-1, 10, 1),
                                  (0, 1 << 32, 1), (0.5, 10, 1)])
def test_invalid_configs(args):
    with pytest.raises(ValidationError):
        hc.HistogramConfig(*args)


@given(configs())
def test_bins_are_consecutive(cfg):
    bins = hc.plan_bins(cfg)
    assert bins[0].lo_ns == cfg.min_ns and bins[-1].hi_ns == cfg.max_ns - 1
    for a, b in zip(bins, bins[1:]):
        assert b.lo_ns == a.hi_ns + 1
    assert all(b.width_ns == cfg.bin_width_ns for b in bins[:-1])


def test_compile_eval_config_count():
    entries = hc.compile(EVAL)
    expected = sum(len(trie_cover(b.lo_ns, b.hi_ns, 32)) for b in hc.plan_bins(EVAL))
    assert len(entries) == expected == 3484
    assert len(entries) <= worst_case_entries_total(500, 32)


def test_compile_aligned_bins_one_entry_each():
    cfg = hc.HistogramConfig(1 << 20, 1 << 21, 64)
    assert len(hc.compile(cfg)) == 64


def test_compile_capacity_error():
    with pytest.raises(CapacityError):
        hc.compile(EVAL, capacity=1000)


@given(configs())
@settings(max_examples=40, deadline=None)
def test_compiled_entries_partition_range(cfg):
    owner = {}
    for e in hc.compile(cfg):
        for k in e.prefix.expand():
            assert k not in owner
            owner[k] = e.bin_index
    assert sorted(owner) == list(range(cfg.min_ns, cfg.max_ns))
    counts, _, _ = direct_binning(range(cfg.min_ns, cfg.max_ns), cfg.min_ns, cfg.max_ns, cfg.num_bins)
    per_bin = np.bincount(list(owner.values()), minlength=cfg.num_bins)
    assert per_bin.tolist() == counts


def test_aggregate_sums_by_bin():
    cfg = hc.HistogramConfig(0, 100, 5)
    snap = hc.aggregate([(0, 0, 5), (1, 0, 7), (2, 1, 3)], 2, 1, cfg)
    assert snap.bin_counts == (12, 3, 0, 0, 0)
    assert (snap.miss_low, snap.miss_high, snap.total) == (2, 1, 18)


def test_aggregate_zero_and_bad_index():
    cfg = hc.HistogramConfig(0, 100, 5)
    assert hc.aggregate([(0, 0, 0), (1, 4, 0)], 0, 0, cfg).bin_counts == (0,) * 5
    with pytest.raises(DataIntegrityError):
        hc.aggregate([(0, 5, 1)], 0, 0, cfg)


def test_aggregate_after_run_conserves():
    t = TernaryTable()
    t.install_batch(hc.compile(EVAL))
    n = 50_000
    t.match_many(np.random.default_rng(0).integers(EVAL.min_ns, EVAL.max_ns, n))
    raw = t.read_counters()
    assert sum(hc.aggregate(raw.entries, raw.miss_low, raw.miss_high, EVAL).bin_counts) == n


def snap_of(cfg, counts, low=0, high=0):
    return hc.HistogramSnapshot(cfg, tuple(counts), low, high)


def test_stats_single_bin():
    cfg = hc.HistogramConfig(10, 20, 2)
    s = hc.stats(snap_of(cfg, [0, 9]))
    assert s.mean_ns == 17.0  # (15 + 19) / 2
    assert s.stddev_ns == 0.0


def test_stats_two_point():
    cfg = hc.HistogramConfig(0, 40, 4)
    s = hc.stats(snap_of(cfg, [3, 0, 0, 3]))
    m1, m2 = 4.5, 34.5
    assert s.mean_ns == (m1 + m2) / 2
    assert s.stddev_ns == abs(m2 - m1) / 2


def test_stats_empty_is_absent():
    s = hc.stats(snap_of(hc.HistogramConfig(0, 40, 4), [0] * 4, low=3))
    assert s.mean_ns is None and s.stddev_ns is None and s.percentiles is None
    assert (s.total_in_range, s.total_outliers) == (0, 3)
    with pytest.raises(EmptyDistributionError):
        hc.percentile(snap_of(hc.HistogramConfig(0, 40, 4), [0] * 4), 50)


def test_percentile_examples():
    cfg = hc.HistogramConfig(100, 200, 1)
    assert hc.percentile(snap_of(cfg, [7]), 50) == 150.0
    cfg = hc.HistogramConfig(0, 40, 4)
    assert hc.percentile(snap_of(cfg, [1, 1, 1, 1]), 25) == 10.0


@pytest.mark.parametrize("p", [0, 100, -1, 101, True])
def test_percentile_rank_validated(p):
    with pytest.raises(ValidationError):
        hc.percentile(snap_of(hc.HistogramConfig(0, 40, 4), [1] * 4), p)


@given(configs(max_bins=30), st.data())
@settings(max_examples=60, deadline=None)
def test_percentile_close_to_expansion_oracle(cfg, data):
    counts = data.draw(st.lists(st.integers(0, 50), min_size=cfg.num_bins, max_size=cfg.num_bins))
    assume(sum(counts))
    snap = snap_of(cfg, counts)
    bins = hc.plan_bins(cfg)
    width = max(b.width_ns for b in bins)
    prev = -math.inf
    for p in (1, 10, 25, 50, 75, 90, 99):
        v = hc.percentile(snap, p)
        oracle = expanded_percentile([(b.lo_ns, b.hi_ns) for b in bins], counts, p)
        assert abs(v - oracle) <= width
        assert cfg.min_ns <= v <= cfg.max_ns
        assert v >= prev
        prev = v


@given(configs(max_bins=40), st.lists(st.integers(0, (1 << 16) - 1), min_size=1, max_size=300))
@settings(max_examples=80, deadline=None)
def test_midpoint_error_bounds(cfg, samples):
    inside = [s for s in samples if cfg.min_ns <= s < cfg.max_ns]
    assume(inside)
    counts, _, _ = direct_binning(inside, cfg.min_ns, cfg.max_ns, cfg.num_bins)
    s = hc.stats(snap_of(cfg, counts))
    width = max(hc.bin_widths(cfg))
    x = np.array(inside, dtype=float)
    assert abs(s.mean_ns - x.mean()) <= width / 2 + 1e-9
    assert abs(s.stddev_ns - x.std()) <= width + 1e-9


def test_stats_exact_at_large_counts():
    # 64-bit scale counters: moments are computed from exact integer sums
    cfg = hc.HistogramConfig(0, 4, 2)
    big = 3_000_000_000_000
    s = hc.stats(snap_of(cfg, [big, big]))
    assert s.mean_ns == 1.5
    assert s.stddev_ns == 1.0
