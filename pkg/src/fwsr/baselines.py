"""Reference exemplar selectors: uniform random, k-medoids and pivoted QR."""

import numpy as np
from scipy.spatial.distance import cdist

from .matrix import ConfigurationError, as_data_matrix

BASELINES = ("random", "kmedoids", "rrqr")


def _check_k(k, n):
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise ConfigurationError(f"k must be a non-negative integer, got {k!r}")
    if k > n:
        raise ConfigurationError(f"k={k} exceeds the number of data points n={n}")


def random_select(n, k, seed):
    """``k`` distinct indices from ``range(n)``, uniform without replacement."""
    _check_k(k, n)
    rng = np.random.default_rng(seed)
    return [int(i) for i in rng.choice(n, size=k, replace=False)]


def _medoid_cost(A, medoids):
    d2 = cdist(A.T, A[:, medoids].T, metric="sqeuclidean")
    return float(d2.min(axis=1).sum())


def k_medoids(A, k, seed, max_sweeps=100, return_history=False):
    """k-medoids by Voronoi iteration under squared Euclidean distance.

    Medoids start as ``k`` seeded random columns.  Each sweep assigns every
    point to its nearest medoid (ties to the earlier medoid; a medoid always
    keeps itself) and then moves each medoid to the cluster member with the
    smallest total distance to the rest of its cluster.  Stops when no medoid
    moves or after ``max_sweeps`` sweeps.

    Returns the medoid column indices, ordered by cluster slot.  With
    ``return_history`` also returns the total cost after each sweep, starting
    with the cost of the initial medoids.
    """
    A = as_data_matrix(A)
    n = A.shape[1]
    _check_k(k, n)
    if k == 0:
        return ([], []) if return_history else []
    pts = A.T
    medoids = np.array(random_select(n, k, seed))
    history = [_medoid_cost(A, medoids)]
    for _ in range(max_sweeps):
        d2 = cdist(pts, pts[medoids], metric="sqeuclidean")
        labels = np.argmin(d2, axis=1)
        labels[medoids] = np.arange(k)
        new = medoids.copy()
        for c in range(k):
            members = np.flatnonzero(labels == c)
            within = cdist(pts[members], pts[members], metric="sqeuclidean").sum(axis=1)
            best = members[np.argmin(within)]
            # keep the current medoid unless another member is strictly better
            if within[np.argmin(within)] < within[members == medoids[c]][0]:
                new[c] = best
        moved = not np.array_equal(new, medoids)
        medoids = new
        history.append(_medoid_cost(A, medoids))
        if not moved:
            break
    out = [int(m) for m in medoids]
    return (out, history) if return_history else out


def rrqr_select(A, k, recompute_tol=None, return_residuals=False):
    """First ``k`` pivots of Businger-Golub column-pivoted Householder QR.

    Trailing column norms are downdated after every reflection and
    recomputed from scratch once cancellation has eaten most of a norm.
    """
    A = np.array(as_data_matrix(A), order="F", copy=True)
    d, n = A.shape
    _check_k(k, n)
    if k > min(d, n):
        raise ConfigurationError(
            f"k={k} exceeds the QR rank bound min(d, n)={min(d, n)}"
        )
    tol = np.sqrt(np.finfo(float).eps) if recompute_tol is None else recompute_tol
    perm = np.arange(n)
    norms = np.linalg.norm(A, axis=0)
    ref = norms.copy()
    residuals = []
    for i in range(k):
        p = i + int(np.argmax(norms[i:]))
        if p != i:
            A[:, [i, p]] = A[:, [p, i]]
            perm[[i, p]] = perm[[p, i]]
            norms[[i, p]] = norms[[p, i]]
            ref[[i, p]] = ref[[p, i]]
        residuals.append(float(norms[i]))

        x = A[i:, i]
        alpha = np.linalg.norm(x)
        if alpha > 0.0:
            v = x.copy()
            v[0] += np.copysign(alpha, x[0])
            v /= np.linalg.norm(v)
            A[i:, i:] -= 2.0 * np.outer(v, v @ A[i:, i:])

        if i + 1 < n:
            trailing = slice(i + 1, n)
            top = A[i, trailing]
            ratio = np.where(norms[trailing] > 0.0, top / np.where(norms[trailing] > 0.0, norms[trailing], 1.0), 0.0)
            factor = np.maximum(0.0, 1.0 - ratio**2)
            new = norms[trailing] * np.sqrt(factor)
            stale = factor * (norms[trailing] / np.where(ref[trailing] > 0.0, ref[trailing], 1.0)) ** 2 <= tol
            if np.any(stale):
                idx = np.flatnonzero(stale) + i + 1
                new[stale] = np.linalg.norm(A[i + 1:, idx], axis=0)
                ref[idx] = new[stale]
            norms[trailing] = new

    out = [int(j) for j in perm[:k]]
    return (out, residuals) if return_residuals else out
