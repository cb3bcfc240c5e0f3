"""scikit-learn compatible exemplar selectors.

Estimators take data in the usual ``(n_samples, n_features)`` layout and
expose the chosen rows through ``exemplar_indices_``.  ``transform`` returns
those rows of the array it is given, so ``fit_transform(X)`` yields the
reduced data set.

>>> import numpy as np
>>> from fwsr import FWSR
>>> X = np.array([[2.0, 0.0], [0.0, 1.0]])
>>> FWSR(n_exemplars=1, alpha=0.5, centering="none").fit(X).exemplar_indices_
[0]
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin, clone
from sklearn.utils.validation import check_is_fitted

from ._validation import check_gram, check_labels, check_n_exemplars, check_samples
from .baselines import k_medoids, random_select, rrqr_select
from .matrix import ConfigurationError, KernelSpec, build_gram, center
from .solver import SolverConfig, solve_gram


class _ExemplarSelector(TransformerMixin, BaseEstimator):

    def _store(self, indices, n_samples):
        self.exemplar_indices_ = [int(i) for i in indices]
        self.n_samples_fit_ = n_samples

    def get_support(self, indices=False):
        """Mask (or index list) of the selected samples."""
        check_is_fitted(self, "exemplar_indices_")
        if indices:
            return np.asarray(self.exemplar_indices_, dtype=np.intp)
        mask = np.zeros(self.n_samples_fit_, dtype=bool)
        mask[self.exemplar_indices_] = True
        return mask

    def transform(self, X):
        check_is_fitted(self, "exemplar_indices_")
        X = np.asarray(X)
        if X.shape[0] != self.n_samples_fit_:
            raise ValueError(
                f"X has {X.shape[0]} samples; the selector was fitted on {self.n_samples_fit_}"
            )
        return X[self.exemplar_indices_]


class FWSR(_ExemplarSelector):
    """Frank-Wolfe sparse representation exemplar selector.

    Parameters
    ----------
    n_exemplars : int, default=10
        Number of exemplars ``k``; the solver stops once ``k`` rows of the
        coefficient matrix are nonzero.
    alpha : float, default=10.0
        Group-lasso radius is ``n_samples / alpha``.
    eta : float, default=0.0
        Weight of the translational-invariance penalty.
    q : {1, 2, 'inf'}, default=2
        Row norm of the group-lasso constraint.
    delta : float or None, default=None
        Frank-Wolfe gap threshold.  None uses ``1e-7`` times the first gap.
    max_iter : int or None, default=None
        Iteration cap, ``10 * n_exemplars + 100`` when None.
    kernel : {'linear', 'rbf', 'precomputed'}, default='linear'
        With 'precomputed', ``fit`` expects an ``(n_samples, n_samples)``
        kernel matrix; centering is skipped and ``eta**2`` is still added.
    rbf_width : float, default=1.0
        Width ``w`` in ``exp(-||a - b||^2 / (2 w^2))``.
    centering : {'per_datapoint', 'per_feature', 'none'}, default='per_datapoint'
        'per_datapoint' removes each sample's mean over its features.
    epsilon_row : float, default=1e-12
        Rows with l2 norm at or below this count as zero.

    Attributes
    ----------
    exemplar_indices_ : list of int
        Selected sample indices, strongest coefficient row first.
    status_ : str
        One of 'k_reached', 'gap_converged', 'max_iter', 'stalled'.
    n_iter_ : int
    objective_trace_, gap_trace_ : list of float
    insertion_order_ : list of int
        Row indices in the order they first became nonzero.
    representation_ : RowSparseMatrix
        Final coefficient matrix.
    """

    def __init__(self, n_exemplars=10, alpha=10.0, eta=0.0, q=2, delta=None,
                 max_iter=None, kernel="linear", rbf_width=1.0,
                 centering="per_datapoint", epsilon_row=1e-12):
        self.n_exemplars = n_exemplars
        self.alpha = alpha
        self.eta = eta
        self.q = q
        self.delta = delta
        self.max_iter = max_iter
        self.kernel = kernel
        self.rbf_width = rbf_width
        self.centering = centering
        self.epsilon_row = epsilon_row

    def _solver_config(self):
        kernel = KernelSpec() if self.kernel == "precomputed" else KernelSpec(self.kernel, self.rbf_width)
        return SolverConfig(
            k=self.n_exemplars, alpha=self.alpha, eta=self.eta, q=self.q,
            delta=self.delta, max_iter=self.max_iter, kernel=kernel,
            centering=self.centering, epsilon_row=self.epsilon_row,
        )

    def fit(self, X, y=None):
        if self.kernel == "precomputed":
            K = check_gram(X)
            n = K.shape[0]
            check_n_exemplars(self.n_exemplars, n)
            cfg = self._solver_config()
            gram = 0.5 * (K + K.T) + self.eta**2
        else:
            X = check_samples(X)
            n = X.shape[0]
            self.n_features_in_ = X.shape[1]
            check_n_exemplars(self.n_exemplars, n)
            cfg = self._solver_config()
            gram = build_gram(center(X.T, cfg.centering), cfg.kernel, cfg.eta)
        result, state = solve_gram(gram, cfg, return_state=True)
        self._store(result.exemplar_indices, n)
        self.result_ = result
        self.status_ = result.status
        self.n_iter_ = result.iterations
        self.objective_trace_ = result.objective_trace
        self.gap_trace_ = result.gap_trace
        self.insertion_order_ = result.insertion_order
        self.representation_ = state.X
        return self


class RandomSelector(_ExemplarSelector):
    """Uniform random subset of ``n_exemplars`` samples (seeded by ``random_state``)."""

    def __init__(self, n_exemplars=10, random_state=0):
        self.n_exemplars = n_exemplars
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_samples(X)
        check_n_exemplars(self.n_exemplars, X.shape[0], allow_zero=True)
        self._store(random_select(X.shape[0], self.n_exemplars, self.random_state), X.shape[0])
        return self


class KMedoidsSelector(_ExemplarSelector):
    """Medoids of a Voronoi-iteration k-medoids clustering."""

    def __init__(self, n_exemplars=10, random_state=0, max_sweeps=100):
        self.n_exemplars = n_exemplars
        self.random_state = random_state
        self.max_sweeps = max_sweeps

    def fit(self, X, y=None):
        X = check_samples(X)
        check_n_exemplars(self.n_exemplars, X.shape[0], allow_zero=True)
        idx = k_medoids(X.T, self.n_exemplars, self.random_state, self.max_sweeps)
        self._store(idx, X.shape[0])
        return self


class RRQRSelector(_ExemplarSelector):
    """Leading pivots of a column-pivoted QR of the data (samples as columns)."""

    def __init__(self, n_exemplars=10):
        self.n_exemplars = n_exemplars

    def fit(self, X, y=None):
        X = check_samples(X)
        check_n_exemplars(self.n_exemplars, X.shape[0], allow_zero=True)
        self._store(rrqr_select(X.T, self.n_exemplars), X.shape[0])
        return self


SELECTORS = {
    "fwsr": FWSR,
    "random": RandomSelector,
    "kmedoids": KMedoidsSelector,
    "rrqr": RRQRSelector,
}


def select_per_class(selector, X, y):
    """Fit a clone of ``selector`` on each class; returns ``{label: (indices, fitted)}``.

    Indices are positions in ``X``.  Every class must hold at least
    ``selector.n_exemplars`` samples.
    """
    X = check_samples(X)
    y = check_labels(y, X.shape[0])
    k = selector.get_params()["n_exemplars"]
    out = {}
    for label in np.unique(y):
        members = np.flatnonzero(y == label)
        if len(members) < k:
            raise ConfigurationError(
                f"class {label!r} has {len(members)} samples, fewer than n_exemplars={k}"
            )
        est = clone(selector).fit(X[members])
        out[label] = ([int(members[i]) for i in est.exemplar_indices_], est)
    return out
