"""Dense helpers, the row-sparse iterate, preprocessing and Gram construction.

Data matrices follow the column convention used throughout the package: ``A``
has shape ``(d, n)`` and each column is one data point.  They are stored in
Fortran order so a data point is contiguous in memory.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

EPSILON_ROW = 1e-12

CENTERING_MODES = ("none", "per_datapoint", "per_feature")
KERNELS = ("linear", "rbf")


class ConfigurationError(ValueError):
    """Invalid parameters or input data, raised before any work is done."""


class NumericalError(ArithmeticError):
    """Raised when an intermediate quantity violates a structural guarantee."""


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    rbf_width: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ConfigurationError(
                f"unknown kernel {self.kind!r}; expected one of {KERNELS}"
            )
        if self.kind == "rbf" and not (np.isfinite(self.rbf_width) and self.rbf_width > 0):
            raise ConfigurationError(f"rbf_width must be > 0, got {self.rbf_width}")


@dataclass(frozen=True)
class PreprocessConfig:
    centering: str = "per_datapoint"
    eta: float = 0.0

    def __post_init__(self):
        if self.centering not in CENTERING_MODES:
            raise ConfigurationError(
                f"unknown centering {self.centering!r}; expected one of {CENTERING_MODES}"
            )
        if not (np.isfinite(self.eta) and self.eta >= 0):
            raise ConfigurationError(f"eta must be a finite value >= 0, got {self.eta}")


def as_data_matrix(A):
    """Return ``A`` as a finite, non-empty float64 ``(d, n)`` Fortran array."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ConfigurationError(f"data matrix must be 2-D, got shape {A.shape}")
    if A.size == 0:
        raise ConfigurationError(f"data matrix is empty (shape {A.shape})")
    if not np.all(np.isfinite(A)):
        bad = np.argwhere(~np.isfinite(A))[0]
        raise ConfigurationError(
            f"data matrix has a non-finite entry at row {bad[0]}, column {bad[1]}"
        )
    return np.asfortranarray(A)


def center(A, mode="per_datapoint"):
    """Center a ``(d, n)`` data matrix.

    ``per_datapoint`` removes each column's mean over features, so every data
    point becomes zero-mean.  ``per_feature`` removes each row's mean across
    data points.  ``none`` returns the input object unchanged.
    """
    if mode not in CENTERING_MODES:
        raise ConfigurationError(
            f"unknown centering {mode!r}; expected one of {CENTERING_MODES}"
        )
    if mode == "none":
        return A
    A = as_data_matrix(A)
    if mode == "per_datapoint":
        return np.asfortranarray(A - A.mean(axis=0, keepdims=True))
    return np.asfortranarray(A - A.mean(axis=1, keepdims=True))


def build_gram(A, kernel=None, eta=0.0):
    """Gram matrix of the preprocessed data, with the ``eta`` augmentation.

    Appending the row ``eta * ones`` to ``A`` adds exactly ``eta**2`` to every
    entry of the Gram matrix, so the augmentation is applied as that rank-one
    shift and works the same for any kernel.

    Parameters
    ----------
    A : ndarray of shape (d, n)
        Data points as columns, already centered.
    kernel : KernelSpec, default=None
        Linear kernel when None.
    eta : float, default=0.0
        Translational-invariance weight.

    Returns
    -------
    G : ndarray of shape (n, n)
        Symmetric Gram matrix.
    """
    kernel = KernelSpec() if kernel is None else kernel
    A = as_data_matrix(A)
    if eta < 0 or not np.isfinite(eta):
        raise ConfigurationError(f"eta must be a finite value >= 0, got {eta}")

    # overflow is reported below with the offending pair
    with np.errstate(over="ignore", invalid="ignore"):
        if kernel.kind == "linear":
            G = A.T @ A
        else:
            # cdist returns exact zeros on the diagonal, so K_ii == 1 exactly.
            sq = cdist(A.T, A.T, metric="sqeuclidean")
            G = np.exp(-sq / (2.0 * kernel.rbf_width**2))
        if eta:
            G += eta**2
        G = 0.5 * (G + G.T)

    if not np.all(np.isfinite(G)):
        i, j = np.argwhere(~np.isfinite(G))[0]
        raise NumericalError(f"non-finite kernel entry for data points ({i}, {j})")
    return np.ascontiguousarray(G)


class RowSparseMatrix:
    """Square ``dim x dim`` matrix that stores only its nonzero rows.

    Rows are dense length-``dim`` vectors keyed by row index.  Any row whose
    l2 norm falls to ``epsilon_row`` or below is evicted.  ``insertion_order``
    records every row index the first time it became active; evicted rows stay
    listed there.
    """

    def __init__(self, dim, epsilon_row=EPSILON_ROW):
        self.dim = int(dim)
        self.epsilon_row = float(epsilon_row)
        self.rows = {}
        self.insertion_order = []
        self._seen = set()

    @classmethod
    def from_dense(cls, M, epsilon_row=EPSILON_ROW):
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {M.shape}")
        out = cls(M.shape[0], epsilon_row)
        for i in range(M.shape[0]):
            out.set_row(i, M[i])
        return out

    @classmethod
    def single_row(cls, dim, index, row, epsilon_row=EPSILON_ROW):
        out = cls(dim, epsilon_row)
        out.set_row(index, row)
        return out

    def copy(self):
        out = RowSparseMatrix(self.dim, self.epsilon_row)
        out.rows = {i: r.copy() for i, r in self.rows.items()}
        out.insertion_order = list(self.insertion_order)
        out._seen = set(self._seen)
        return out

    def __len__(self):
        return len(self.rows)

    def __contains__(self, index):
        return index in self.rows

    def __repr__(self):
        return f"RowSparseMatrix(dim={self.dim}, active_rows={sorted(self.rows)})"

    def indices(self):
        return sorted(self.rows)

    def row(self, index):
        """Row ``index`` as a dense vector (zeros when inactive)."""
        r = self.rows.get(index)
        return np.zeros(self.dim) if r is None else r

    def row_norm(self, index):
        r = self.rows.get(index)
        return 0.0 if r is None else float(np.linalg.norm(r))

    def set_row(self, index, values):
        """Store ``values`` as row ``index``, evicting it if it is too small."""
        if not 0 <= index < self.dim:
            raise IndexError(f"row {index} out of range for dim {self.dim}")
        values = np.array(values, dtype=np.float64)
        if values.shape != (self.dim,):
            raise ValueError(f"row must have length {self.dim}, got {values.shape}")
        if np.linalg.norm(values) > self.epsilon_row:
            self.rows[index] = values
            if index not in self._seen:
                self._seen.add(index)
                self.insertion_order.append(index)
        else:
            self.rows.pop(index, None)

    def scale_(self, c):
        """In-place multiplication by ``c`` followed by eviction."""
        if c == 0.0:
            self.rows.clear()
            return self
        for i in list(self.rows):
            r = self.rows[i]
            r *= c
            if np.linalg.norm(r) <= self.epsilon_row:
                del self.rows[i]
        return self

    def add_to_row_(self, index, values):
        self.set_row(index, self.row(index) + values)
        return self

    def to_dense(self):
        M = np.zeros((self.dim, self.dim))
        for i, r in self.rows.items():
            M[i] = r
        return M

    def inner(self, M):
        """Frobenius inner product with a dense ``dim x dim`` matrix."""
        return float(sum(r @ M[i] for i, r in self.rows.items()))


def rowsparse_axpy(X, gamma, D):
    """Return ``X + gamma * D`` as a new row-sparse matrix.

    Rows whose result has l2 norm at or below ``X.epsilon_row`` are dropped.
    Rows of ``D`` not active in ``X`` are appended to the insertion order in
    ascending index order.
    """
    if X.dim != D.dim:
        raise ValueError(f"dimension mismatch: {X.dim} vs {D.dim}")
    if not np.isfinite(gamma):
        raise ValueError(f"gamma must be finite, got {gamma}")
    out = X.copy()
    if gamma == 0.0:
        return out
    for i in sorted(D.rows):
        out.set_row(i, out.row(i) + gamma * D.rows[i])
    return out
