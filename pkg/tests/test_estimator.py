import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from oracles import direct_binning
from tcamhist import TcamHistogram
from tcamhist.exceptions import CapacityError, ValidationError


def test_get_set_params_and_clone():
    h = TcamHistogram(min_ns=0, max_ns=100, n_bins=10)
    assert h.get_params()["n_bins"] == 10
    h.set_params(n_bins=5)
    c = clone(h)
    assert c.get_params() == h.get_params()
    assert not hasattr(c, "table_")


def test_fit_matches_direct_binning():
    x = np.random.default_rng(2).integers(0, 1200, 5000)
    h = TcamHistogram(min_ns=100, max_ns=1100, n_bins=7).fit(x)
    counts, low, high = direct_binning(x.tolist(), 100, 1100, 7)
    assert h.bin_counts_.tolist() == counts
    assert (h.miss_low_, h.miss_high_) == (low, high)
    assert h.n_samples_seen_ == 5000
    assert h.n_entries_ >= 7


def test_partial_fit_accumulates_and_fit_restarts():
    h = TcamHistogram(min_ns=0, max_ns=100, n_bins=4)
    h.partial_fit(np.arange(50))
    h.partial_fit(np.arange(50, 100).reshape(-1, 1))
    assert h.bin_counts_.tolist() == [25, 25, 25, 25]
    assert h.mean_ == pytest.approx(49.5)
    h.fit([5])
    assert h.bin_counts_.sum() == 1


def test_transform_does_not_count():
    h = TcamHistogram(min_ns=10, max_ns=50, n_bins=4).fit([10, 20])
    out = h.transform([[0], [10], [49], [50], [1000]])
    assert out.ravel().tolist() == [-1, 0, 3, 4, 4]
    assert h.table_.processed == 2


def test_fit_transform_in_pipeline():
    pipe = make_pipeline(TcamHistogram(min_ns=0, max_ns=16, n_bins=4))
    assert pipe.fit_transform(np.arange(16).reshape(-1, 1)).ravel().tolist() == [
        0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3]


def test_not_fitted():
    with pytest.raises(NotFittedError):
        TcamHistogram().transform([[1]])


def test_input_validation():
    h = TcamHistogram(min_ns=0, max_ns=100, n_bins=4)
    with pytest.raises(ValueError):
        h.fit([[1, 2]])
    with pytest.raises(ValueError):
        h.fit([np.nan])
    with pytest.raises(ValidationError):
        h.fit([-5])
    with pytest.raises(ValidationError):
        TcamHistogram(min_ns=5, max_ns=5).fit([1])


def test_capacity_parameter():
    with pytest.raises(CapacityError):
        TcamHistogram(capacity=100).fit([50_000_000])


def test_empty_fit_has_absent_stats():
    h = TcamHistogram(min_ns=0, max_ns=100, n_bins=4).fit(np.zeros(0))
    assert h.mean_ is None and h.percentiles_ is None
    h.partial_fit([1000])
    assert h.mean_ is None and h.miss_high_ == 1
