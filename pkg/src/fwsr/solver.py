"""Greedy Frank-Wolfe solver for self-expressive exemplar selection.

The solver minimizes

    f(X) = ||A X - A||_F^2 + eta^2 ||X^T 1 - 1||_2^2

over the group-lasso ball ``sum_i ||X^(i)||_q <= beta``, touching the data
only through the (augmented) Gram matrix ``K``.  Starting from ``X = 0``, each
iteration moves toward a rank-one atom with a single nonzero row, so at most
one new row (one new exemplar) becomes active per step.  The loop stops as
soon as ``k`` rows are active.

Per-iteration work is O(n^2): the product ``K X`` is kept up to date with a
scale-plus-outer-product update, and every other quantity (gap, step size,
objective) only needs the active rows of ``X``.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg.blas import dger

from .matrix import (
    EPSILON_ROW,
    ConfigurationError,
    KernelSpec,
    NumericalError,
    PreprocessConfig,
    RowSparseMatrix,
    as_data_matrix,
    build_gram,
    center,
)

STATUSES = ("k_reached", "gap_converged", "max_iter", "stalled")

# q -> dual exponent p used to rank gradient rows
_DUAL = {1.0: math.inf, 2.0: 2.0, math.inf: 1.0}

# relative threshold used when no explicit delta is given
DEFAULT_RELATIVE_DELTA = 1e-7

_BLOCK_ROWS = 256


def normalize_q(q):
    """Map ``1``, ``2``, ``"inf"``, ``np.inf`` (or their strings) to a float."""
    if isinstance(q, str):
        q = q.strip().lower()
        q = math.inf if q in ("inf", "infinity") else q
    try:
        q = float(q)
    except (TypeError, ValueError):
        raise ConfigurationError(f"q must be one of 1, 2, inf; got {q!r}") from None
    if q not in _DUAL:
        raise ConfigurationError(f"q must be one of 1, 2, inf; got {q!r}")
    return q


def dual_exponent(q):
    return _DUAL[normalize_q(q)]


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one FWSR run.

    ``beta = n / alpha`` is the group-lasso radius.  ``delta=None`` means a
    gap threshold relative to the first iteration's gap.  ``max_iter=None``
    means ``10 * k + 100``.
    """

    k: int
    alpha: float = 10.0
    eta: float = 0.0
    q: float = 2.0
    delta: float = None
    max_iter: int = None
    kernel: KernelSpec = field(default_factory=KernelSpec)
    centering: str = "per_datapoint"
    epsilon_row: float = EPSILON_ROW
    check_invariants: bool = False

    def __post_init__(self):
        object.__setattr__(self, "q", normalize_q(self.q))
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise ConfigurationError(f"k must be a positive integer, got {self.k!r}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigurationError(f"alpha must be > 0, got {self.alpha}")
        if self.delta is not None and not (np.isfinite(self.delta) and self.delta >= 0):
            raise ConfigurationError(f"delta must be >= 0, got {self.delta}")
        if self.max_iter is not None and (int(self.max_iter) != self.max_iter or self.max_iter < 1):
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (self.epsilon_row >= 0):
            raise ConfigurationError(f"epsilon_row must be >= 0, got {self.epsilon_row}")
        # validates eta and centering
        PreprocessConfig(self.centering, self.eta)

    def beta(self, n):
        return n / self.alpha

    def resolved_max_iter(self):
        return self.max_iter if self.max_iter is not None else 10 * self.k + 100


@dataclass
class SolverState:
    gram: np.ndarray
    X: RowSparseMatrix
    KX: np.ndarray
    t: int = 0
    last_gamma: float = 0.0
    last_atom_row: int = None
    last_atom: np.ndarray = None
    pending: bool = False
    objective_trace: list = field(default_factory=list)
    gap_trace: list = field(default_factory=list)
    ratio_trace: list = field(default_factory=list)

    @property
    def n(self):
        return self.gram.shape[0]


def init_state(gram, epsilon_row=EPSILON_ROW):
    """State at ``X = 0`` for a precomputed Gram matrix."""
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or gram.shape[0] == 0:
        raise ConfigurationError(f"Gram matrix must be square and non-empty, got {gram.shape}")
    if not np.all(np.isfinite(gram)):
        raise ConfigurationError("Gram matrix has non-finite entries")
    n = gram.shape[0]
    return SolverState(gram=gram, X=RowSparseMatrix(n, epsilon_row), KX=np.zeros((n, n)))


@dataclass
class SelectionResult:
    exemplar_indices: list
    status: str
    iterations: int
    objective_trace: list
    gap_trace: list
    elapsed: float
    insertion_order: list = field(default_factory=list)
    step_ratios: list = field(default_factory=list)
    iteration_times: list = field(default_factory=list)


class Gradient:
    """Implicit view of ``2 (KX - K)``; rows are formed on demand."""

    def __init__(self, KX, K):
        self.KX = KX
        self.K = K

    @property
    def shape(self):
        return self.KX.shape

    def row(self, i):
        return 2.0 * (self.KX[i] - self.K[i])

    def dense(self):
        return 2.0 * (self.KX - self.K)

    def row_norms(self, p):
        n = self.KX.shape[0]
        out = np.empty(n)
        for r0 in range(0, n, _BLOCK_ROWS):
            diff = self.KX[r0:r0 + _BLOCK_ROWS] - self.K[r0:r0 + _BLOCK_ROWS]
            out[r0:r0 + _BLOCK_ROWS] = _norms(diff, p)
        return 2.0 * out


class DenseGradient:
    def __init__(self, G):
        self.G = np.asarray(G, dtype=np.float64)

    @property
    def shape(self):
        return self.G.shape

    def row(self, i):
        return self.G[i]

    def dense(self):
        return self.G

    def row_norms(self, p):
        return _norms(self.G, p)


def _norms(M, p):
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", M, M))
    if p == 1.0:
        return np.abs(M).sum(axis=1)
    return np.abs(M).max(axis=1)


def _as_gradient(grad):
    return DenseGradient(grad) if isinstance(grad, np.ndarray) else grad


def objective(state):
    """``f(X)`` from the identity ``tr(X^T K X) - 2 tr(K X) + tr(K)``.

    Requires ``state.KX`` to match ``state.X`` (no pending update).
    """
    if state.pending:
        raise RuntimeError("KX is stale; call update_gradient first")
    quad = state.X.inner(state.KX)
    f = quad - 2.0 * np.trace(state.KX) + np.trace(state.gram)
    return max(float(f), 0.0)


def update_gradient(state):
    """Fold the last step into ``KX`` and return the gradient view.

    ``KX <- (1 - gamma) KX + gamma K[:, j] s^T`` where ``(gamma, j, s)`` is the
    previous step.  At ``t = 0`` this is a no-op and the gradient is ``-2K``.
    """
    if state.pending:
        gamma = state.last_gamma
        state.KX *= 1.0 - gamma
        # KX.T is Fortran-contiguous, so dger updates KX in place:
        # KX.T += gamma * s K_j^T  <=>  KX += gamma * K_j s^T
        dger(gamma, state.last_atom, state.gram[state.last_atom_row], a=state.KX.T, overwrite_a=True)
        state.pending = False
    return Gradient(state.KX, state.gram)


def lmo(grad, q, beta):
    """Linear minimization oracle over the q-norm group-lasso ball.

    Returns ``(j, s)`` such that the atom ``e_j s^T`` minimizes
    ``<S, grad>`` over ``sum_i ||S^(i)||_q <= beta``, or ``None`` when the
    gradient is identically zero.  Ties go to the lowest index.
    """
    grad = _as_gradient(grad)
    q = normalize_q(q)
    norms = grad.row_norms(_DUAL[q])
    j = int(np.argmax(norms))
    if norms[j] == 0.0:
        return None
    g = grad.row(j)
    if q == 2.0:
        s = -beta * g / np.linalg.norm(g)
    elif q == 1.0:
        s = np.zeros_like(g)
        l = int(np.argmax(np.abs(g)))
        s[l] = -beta * np.sign(g[l])
    else:
        s = np.where(g >= 0.0, -beta, beta)
    return j, s


def fw_gap(grad, S, X):
    """Frank-Wolfe gap ``-<grad, S - X>`` over the active rows only."""
    grad = _as_gradient(grad)
    gap = 0.0
    for i, r in S.rows.items():
        gap -= float(grad.row(i) @ r)
    for i, r in X.rows.items():
        gap += float(grad.row(i) @ r)
    return gap


def line_search(state, S):
    """Exact line search toward ``S``; returns ``(gamma, unclamped_ratio)``.

    ``gamma = 0`` signals a stall (zero or non-descent direction); the ratio
    is NaN when the curvature along the direction vanishes.
    """
    if state.pending:
        raise RuntimeError("KX is stale; call update_gradient first")
    if len(S.rows) != 1:
        raise ValueError("atom must have exactly one nonzero row")
    (j, s), = S.rows.items()
    K, KX, X = state.gram, state.KX, state.X

    # numerator tr(D^T (K - KX)) over rows of D = S - X
    num = 0.0
    for i in set(S.rows) | set(X.rows):
        num += float((S.row(i) - X.row(i)) @ (K[i] - KX[i]))

    # tr(D^T K D) = K_jj ||s||^2 - 2 s.(KX)_j + tr(X^T K X)
    ss = K[j, j] * float(s @ s)
    cross = float(s @ KX[j])
    quad = X.inner(KX)
    den = ss - 2.0 * cross + quad
    scale = abs(ss) + 2.0 * abs(cross) + abs(quad)
    if den < -1e-9 * scale:
        raise NumericalError(
            f"negative curvature {den:.3e} along atom row {j} "
            f"(scale {scale:.3e}); the Gram matrix is not PSD"
        )
    if den <= 1e-14 * scale:
        return 0.0, math.nan
    ratio = num / den
    return min(1.0, max(0.0, ratio)), ratio


def step_size(state, S):
    """Clamped exact step size toward atom ``S`` (``0.0`` means stalled)."""
    return line_search(state, S)[0]


def count_exemplars(X):
    return sum(1 for r in X.rows.values() if np.linalg.norm(r) > X.epsilon_row)


def pick_exemplars(X, k):
    """Active row indices sorted by descending l2 norm (ties: lower index)."""
    norms = [(-float(np.linalg.norm(r)), i) for i, r in X.rows.items()
             if np.linalg.norm(r) > X.epsilon_row]
    return [i for _, i in sorted(norms)[:k]]


def _check_kx(state):
    dense = state.gram @ state.X.to_dense()
    err = np.linalg.norm(state.KX - dense) / max(np.linalg.norm(dense), 1e-300)
    if err > 1e-8:
        raise NumericalError(f"KX drifted from K @ X: relative error {err:.3e} at t={state.t}")


def fw_step(state, beta, q, delta, check_invariants=False):
    """Run one iteration. Returns a terminal status or ``None`` to continue.

    ``delta`` may be None on the first call, in which case it is set from the
    initial gap; the effective value is returned alongside the status.
    """
    grad = update_gradient(state)
    if check_invariants:
        _check_kx(state)
    state.objective_trace.append(objective(state))

    atom = lmo(grad, q, beta)
    if atom is None:
        state.gap_trace.append(0.0)
        return "gap_converged", delta
    j, s = atom
    S = RowSparseMatrix.single_row(state.n, j, s, state.X.epsilon_row)
    gap = fw_gap(grad, S, state.X)
    state.gap_trace.append(gap)
    if delta is None:
        delta = DEFAULT_RELATIVE_DELTA * gap
    if gap < delta:
        return "gap_converged", delta

    gamma, ratio = line_search(state, S)
    state.ratio_trace.append(ratio)
    if gamma <= 0.0:
        return "stalled", delta

    state.X.scale_(1.0 - gamma)
    state.X.add_to_row_(j, gamma * s)
    state.last_gamma, state.last_atom_row, state.last_atom = gamma, j, s
    state.pending = True
    state.t += 1
    return None, delta


def finalize(state):
    """Apply any pending update so ``KX`` and the objective trace are current."""
    if state.pending:
        update_gradient(state)
        state.objective_trace.append(objective(state))


def solve_gram(gram, cfg, return_state=False):
    """Run FWSR on a precomputed (augmented) Gram matrix."""
    start = time.perf_counter()
    state = init_state(gram, cfg.epsilon_row)
    n = state.n
    if cfg.k > n:
        raise ConfigurationError(f"k={cfg.k} exceeds the number of data points n={n}")
    beta = cfg.beta(n)
    max_iter = cfg.resolved_max_iter()
    delta = cfg.delta
    status = None
    times = []
    count = 0
    while count < cfg.k and state.t < max_iter:
        t0 = time.perf_counter()
        status, delta = fw_step(state, beta, cfg.q, delta, cfg.check_invariants)
        times.append(time.perf_counter() - t0)
        if status is not None:
            break
        count = count_exemplars(state.X)
    if status is None:
        status = "k_reached" if count >= cfg.k else "max_iter"
    finalize(state)
    result = SelectionResult(
        exemplar_indices=pick_exemplars(state.X, cfg.k),
        status=status,
        iterations=state.t,
        objective_trace=list(state.objective_trace),
        gap_trace=list(state.gap_trace),
        elapsed=time.perf_counter() - start,
        insertion_order=list(state.X.insertion_order),
        step_ratios=list(state.ratio_trace),
        iteration_times=times,
    )
    return (result, state) if return_state else result


def prepare_gram(A, cfg):
    A = center(as_data_matrix(A), cfg.centering)
    return build_gram(A, cfg.kernel, cfg.eta)


def solve(A, cfg):
    """Select up to ``cfg.k`` exemplar columns of the ``(d, n)`` matrix ``A``."""
    A = as_data_matrix(A)
    if cfg.k > A.shape[1]:
        raise ConfigurationError(
            f"k={cfg.k} exceeds the number of data points n={A.shape[1]}"
        )
    start = time.perf_counter()
    gram = prepare_gram(A, cfg)
    result = solve_gram(gram, cfg)
    result.elapsed = time.perf_counter() - start
    return result
