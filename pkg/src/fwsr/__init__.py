"""Exemplar selection with a greedy Frank-Wolfe sparse representation solver."""

from .baselines import k_medoids, random_select, rrqr_select
from .estimators import FWSR, KMedoidsSelector, RandomSelector, RRQRSelector, select_per_class
from .matrix import (
    ConfigurationError,
    KernelSpec,
    NumericalError,
    PreprocessConfig,
    RowSparseMatrix,
    build_gram,
    center,
    rowsparse_axpy,
)
from .solver import SelectionResult, SolverConfig, solve, solve_gram

__all__ = [
    "FWSR",
    "ConfigurationError",
    "KMedoidsSelector",
    "KernelSpec",
    "NumericalError",
    "PreprocessConfig",
    "RRQRSelector",
    "RandomSelector",
    "RowSparseMatrix",
    "SelectionResult",
    "SolverConfig",
    "build_gram",
    "center",
    "k_medoids",
    "random_select",
    "rowsparse_axpy",
    "rrqr_select",
    "select_per_class",
    "solve",
    "solve_gram",
]

__version__ = "0.1.0"
