"""Input checks shared by the estimators and the command line."""

import numpy as np
from sklearn.utils import check_array

from .matrix import ConfigurationError


def check_samples(X, min_samples=1):
    """Validate a ``(n_samples, n_features)`` array of finite floats."""
    try:
        X = check_array(X, dtype=np.float64, ensure_all_finite=True, ensure_min_samples=min_samples)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    return X


def check_gram(K):
    """Validate a precomputed square kernel matrix."""
    K = check_samples(K)
    if K.shape[0] != K.shape[1]:
        raise ConfigurationError(f"precomputed kernel must be square, got shape {K.shape}")
    return K


def check_n_exemplars(k, n, allow_zero=False):
    lo = 0 if allow_zero else 1
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < lo:
        raise ConfigurationError(f"n_exemplars must be an integer >= {lo}, got {k!r}")
    if k > n:
        raise ConfigurationError(f"n_exemplars={k} exceeds the number of samples {n}")
    return int(k)


def check_labels(y, n):
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n:
        raise ConfigurationError(f"labels must be a vector of length {n}, got shape {y.shape}")
    if y.shape[0] == 0:
        raise ConfigurationError("labels define no classes")
    return y
