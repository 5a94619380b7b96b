"""scikit-learn compatible front end.

:class:`TcamHistogram` bins RTT samples through a compiled ternary table.
``fit`` installs the table and counts the samples, ``partial_fit`` keeps
counting, and ``transform`` maps samples to bin indices without counting.

>>> import numpy as np
>>> h = TcamHistogram(min_ns=0, max_ns=16, n_bins=4).fit(np.arange(16))
>>> h.bin_counts_.tolist()
[4, 4, 4, 4]
>>> h.transform([[3], [15], [99]]).ravel().tolist()
[0, 3, 4]
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import histogram as hc
from ._validation import check_rtt_samples
from .tcam import DEFAULT_CAPACITY, TernaryTable


class TcamHistogram(TransformerMixin, BaseEstimator):
    """Histogram of 32-bit RTTs over ``[min_ns, max_ns)`` with ``n_bins`` bins.

    Parameters
    ----------
    min_ns, max_ns : int
        Inclusive lower and exclusive upper edge in nanoseconds.
    n_bins : int
        Number of bins; the last one absorbs any remainder of the span.
    capacity : int
        Ternary table size. ``fit`` raises ``CapacityError`` when the compiled
        bins need more entries.
    percentiles : tuple of float
        Ranks reported in ``percentiles_``.

    Attributes
    ----------
    bins_ : list of BinSpec
    n_entries_ : int
        Ternary entries used by the compiled table.
    bin_counts_ : ndarray of shape (n_bins,)
    miss_low_, miss_high_ : int
        Samples below ``min_ns`` / at or above ``max_ns``.
    mean_, std_ : float or None
        Midpoint-based moments, ``None`` while no in-range sample was seen.
    percentiles_ : dict or None
    n_samples_seen_ : int

    ``transform`` returns bin indices with ``-1`` for low outliers and
    ``n_bins`` for high outliers.
    """

    def __init__(self, min_ns=46_000_000, max_ns=54_000_000, n_bins=500,
                 capacity=DEFAULT_CAPACITY, percentiles=hc.DEFAULT_PERCENTILES):
        self.min_ns = min_ns
        self.max_ns = max_ns
        self.n_bins = n_bins
        self.capacity = capacity
        self.percentiles = percentiles

    def _config(self):
        return hc.HistogramConfig(int(self.min_ns), int(self.max_ns), int(self.n_bins))

    def _install(self):
        config = self._config()
        entries = hc.compile(config, capacity=self.capacity)
        self.table_ = TernaryTable(self.capacity)
        self.table_.install_batch(entries, low_boundary=config.min_ns)
        self.config_ = config
        self.bins_ = hc.plan_bins(config)
        self.n_entries_ = len(entries)

    def _refresh(self):
        raw = self.table_.read_counters()
        self.snapshot_ = hc.aggregate(raw.entries, raw.miss_low, raw.miss_high, self.config_)
        self.stats_ = hc.stats(self.snapshot_, self.percentiles, bins=self.bins_)
        self.bin_counts_ = np.array(self.snapshot_.bin_counts, dtype=np.uint64)
        self.miss_low_ = self.snapshot_.miss_low
        self.miss_high_ = self.snapshot_.miss_high
        self.mean_ = self.stats_.mean_ns
        self.std_ = self.stats_.stddev_ns
        self.percentiles_ = self.stats_.percentiles
        self.n_samples_seen_ = raw.processed

    def fit(self, X, y=None):
        keys = check_rtt_samples(X)
        self._install()
        self.table_.match_many(keys)
        self._refresh()
        return self

    def partial_fit(self, X, y=None):
        keys = check_rtt_samples(X)
        if not hasattr(self, "table_"):
            self._install()
        self.table_.match_many(keys)
        self._refresh()
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        keys = check_rtt_samples(X)
        idx = self.table_.lookup(keys)
        miss = idx < 0
        idx[miss & (keys >= self.config_.max_ns)] = self.config_.num_bins
        return idx.reshape(-1, 1)

    def percentile(self, p):
        check_is_fitted(self, "snapshot_")
        return hc.percentile(self.snapshot_, p, bins=self.bins_)

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.allow_nan = False
        tags.requires_fit = True
        return tags
