"""Input checks shared by the table, the pipeline and the estimator."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ValidationError

KEY_LIMIT = 1 << 32


def check_keys(keys):
    """Return ``keys`` as a 1-D int64 array of unsigned 32-bit values."""
    if not (isinstance(keys, np.ndarray) and keys.dtype == np.int64):
        arr = np.asarray(keys)
        if arr.dtype == object:
            vals = arr.ravel().tolist()
            if not all(isinstance(k, numbers.Integral) and not isinstance(k, bool) for k in vals):
                raise ValidationError("keys must be integers")
            if vals and (min(vals) < 0 or max(vals) >= KEY_LIMIT):
                raise ValidationError("keys must be in [0, 2**32)")
        elif arr.dtype.kind == "f":
            if not (np.all(np.isfinite(arr)) and np.all(arr == np.floor(arr))):
                raise ValidationError("keys must be integers")
        elif arr.size and arr.dtype.kind not in "iu":
            raise ValidationError("keys must be integers")
        elif arr.dtype == np.uint64 and arr.size and int(arr.max()) >= KEY_LIMIT:
            raise ValidationError("keys must be in [0, 2**32)")
        if arr.dtype.kind == "f" and arr.size and (arr.min() < 0 or arr.max() >= KEY_LIMIT):
            raise ValidationError("keys must be in [0, 2**32)")
        keys = arr.astype(np.int64)
    if keys.ndim == 0:
        keys = keys.reshape(1)
    if keys.ndim != 1:
        raise ValidationError(f"keys must be one-dimensional, got shape {keys.shape}")
    if keys.size and (keys.min() < 0 or keys.max() >= KEY_LIMIT):
        raise ValidationError("keys must be in [0, 2**32)")
    return keys


def check_rtt_samples(X):
    """Accept ``(n,)`` or ``(n, 1)`` RTT arrays the way scikit-learn does,
    returning a flat int64 array."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    X = check_array(X, dtype=None, ensure_min_samples=0, ensure_all_finite=True)
    if X.shape[1] != 1:
        raise ValidationError(f"expected a single RTT column, got {X.shape[1]} features")
    return check_keys(X[:, 0])


def check_positive_int(name, value, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
