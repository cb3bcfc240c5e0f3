"""Synthetic recovery experiments: convex-combination exemplars and Gaussian blobs.

Every trial draws its data from ``numpy.random.default_rng(seed + trial)`` so
a report can be regenerated from its seed alone.
"""

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import k_medoids, random_select, rrqr_select
from .matrix import ConfigurationError, KernelSpec
from .solver import SolverConfig, solve

METHODS = ("fwsr", "kfwsr", "random", "kmedoids", "rrqr")

DEFAULT_NOISE_LEVELS = (0.0, 0.25, 0.5, 1.0, 2.0)
DEFAULT_ALPHA_GRID = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)

# Exemplar and cluster-center distributions are free choices; these labels
# travel with every report.
EXP1_EXEMPLAR_DISTRIBUTION = "standard normal"
EXP2_CENTER_DISTRIBUTION = "uniform box"


@dataclass(frozen=True)
class Exp1Config:
    n_exemplars: int = 30
    ambient_dim: int = 200
    n_mixtures: int = 120
    mixture_support: int = 3
    noise_sigma: float = 0.0
    trials: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.mixture_support > self.n_exemplars:
            raise ConfigurationError("mixture_support cannot exceed n_exemplars")
        if self.noise_sigma < 0:
            raise ConfigurationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if min(self.n_exemplars, self.ambient_dim, self.trials, self.mixture_support) < 1:
            raise ConfigurationError("counts must be positive")


@dataclass(frozen=True)
class Exp2Config:
    n_points: int = 1000
    ambient_dim: int = 1500
    n_clusters: int = 5
    cluster_sigma: float = 20.0
    trials: int = 10
    seed: int = 0
    center_box: tuple = (-100.0, 100.0)

    def __post_init__(self):
        if not 1 <= self.n_clusters <= self.n_points:
            raise ConfigurationError("n_clusters must be in [1, n_points]")
        if not self.cluster_sigma > 0:
            raise ConfigurationError(f"cluster_sigma must be > 0, got {self.cluster_sigma}")
        if min(self.ambient_dim, self.trials) < 1:
            raise ConfigurationError("counts must be positive")


@dataclass
class TrialReport:
    method: str
    recovery_fraction: float
    selected_indices: list
    wall_time: float
    solver_iterations: int
    seed: int
    trial: int = 0
    sweep_value: float = None
    status: str = "k_reached"
    params: dict = field(default_factory=dict)
    error: str = None

    def to_dict(self):
        return asdict(self)


def simplex_weights(rng, m, size=None):
    """Uniform weights on the probability simplex via sorted-uniform gaps."""
    shape = (m - 1,) if size is None else (size, m - 1)
    cuts = np.sort(rng.random(shape), axis=-1)
    zeros = np.zeros(cuts.shape[:-1] + (1,))
    ones = np.ones(cuts.shape[:-1] + (1,))
    return np.diff(np.concatenate([zeros, cuts, ones], axis=-1), axis=-1)


def gen_exp1(cfg, trial_seed):
    """Exemplars followed by noisy random convex combinations of them.

    Returns ``(A, truth)`` where ``A`` is ``(ambient_dim, n_exemplars +
    n_mixtures)`` with the exemplars in the leading columns, and ``truth`` is
    the set of those column indices.
    """
    rng = np.random.default_rng(trial_seed)
    E = rng.standard_normal((cfg.ambient_dim, cfg.n_exemplars))
    M = np.empty((cfg.ambient_dim, cfg.n_mixtures))
    for i in range(cfg.n_mixtures):
        support = rng.choice(cfg.n_exemplars, size=cfg.mixture_support, replace=False)
        w = simplex_weights(rng, cfg.mixture_support)
        M[:, i] = E[:, support] @ w
    if cfg.noise_sigma > 0:
        M += cfg.noise_sigma * rng.standard_normal(M.shape)
    A = np.asfortranarray(np.hstack([E, M]))
    return A, set(range(cfg.n_exemplars))


def cluster_sizes(n, k):
    base, extra = divmod(n, k)
    return [base + 1 if c < extra else base for c in range(k)]


def gen_exp2(cfg, trial_seed):
    """Isotropic Gaussian blobs; returns ``(A, labels)`` with points as columns."""
    rng = np.random.default_rng(trial_seed)
    lo, hi = cfg.center_box
    centers = rng.uniform(lo, hi, size=(cfg.n_clusters, cfg.ambient_dim))
    labels = np.repeat(np.arange(cfg.n_clusters), cluster_sizes(cfg.n_points, cfg.n_clusters))
    noise = rng.standard_normal((cfg.n_points, cfg.ambient_dim))
    points = centers[labels] + cfg.cluster_sigma * noise
    return np.asfortranarray(points.T), labels


def recovery_exp1(selected, truth):
    truth = set(truth)
    if not truth:
        return 0.0
    return len(set(selected) & truth) / len(truth)


def recovery_exp2(selected, labels, k):
    labels = np.asarray(labels)
    return len({int(labels[i]) for i in selected}) / k


def run_method(method, A, k, seed, **params):
    """Run one selector; returns ``(indices, iterations, status)``."""
    if method in ("fwsr", "kfwsr"):
        kernel = KernelSpec("rbf", params.get("rbf_width", 1.0)) if method == "kfwsr" else KernelSpec()
        cfg = SolverConfig(
            k=k,
            alpha=params.get("alpha", 10.0),
            eta=params.get("eta", 0.0),
            q=params.get("q", 2),
            delta=params.get("delta"),
            max_iter=params.get("max_iter"),
            kernel=kernel,
            centering=params.get("centering", "per_datapoint"),
        )
        res = solve(A, cfg)
        return res.exemplar_indices, res.iterations, res.status
    if method == "random":
        return random_select(A.shape[1], k, seed), 0, "k_reached"
    if method == "kmedoids":
        return k_medoids(A, k, seed, params.get("max_sweeps", 100)), 0, "k_reached"
    if method == "rrqr":
        return rrqr_select(A, k), 0, "k_reached"
    raise ConfigurationError(f"unknown method {method!r}; expected one of {METHODS}")


def _trial(method, A, k, seed, score, trial, sweep_value, params):
    t0 = time.perf_counter()
    try:
        idx, iters, status = run_method(method, A, k, seed, **params)
        error = None
    except (ConfigurationError, ArithmeticError, ValueError) as exc:
        idx, iters, status, error = [], 0, "error", f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - t0
    return TrialReport(
        method=method,
        recovery_fraction=score(idx) if error is None else 0.0,
        selected_indices=[int(i) for i in idx],
        wall_time=wall,
        solver_iterations=iters,
        seed=seed,
        trial=trial,
        sweep_value=sweep_value,
        status=status,
        params=dict(params),
        error=error,
    )


def _datasets(which, cfg, seed):
    for trial in range(cfg.trials):
        trial_seed = seed + trial
        if which == "exp1":
            A, truth = gen_exp1(cfg, trial_seed)
            yield trial, trial_seed, A, cfg.n_exemplars, (lambda s, t=truth: recovery_exp1(s, t))
        else:
            A, labels = gen_exp2(cfg, trial_seed)
            k = cfg.n_clusters
            yield trial, trial_seed, A, k, (lambda s, lab=labels, k=k: recovery_exp2(s, lab, k))


def run_experiment(which, methods, cfg, seed=None, method_params=None, alpha_grid=None):
    """Run every method on ``cfg.trials`` freshly generated datasets.

    ``method_params`` maps a method name to keyword arguments for it.  When
    ``alpha_grid`` is given, each FWSR-family method is run for every alpha in
    the grid and only the alpha with the best mean recovery is reported (its
    ``params`` record the grid and the choice).

    Returns the list of :class:`TrialReport`, ordered by method then trial.
    """
    if which not in ("exp1", "exp2"):
        raise ConfigurationError(f"unknown experiment {which!r}")
    seed = cfg.seed if seed is None else seed
    method_params = method_params or {}
    sweep_value = cfg.noise_sigma if which == "exp1" else cfg.n_clusters
    data = list(_datasets(which, cfg, seed))

    reports = []
    for method in methods:
        if method not in METHODS:
            raise ConfigurationError(f"unknown method {method!r}; expected one of {METHODS}")
        params = dict(method_params.get(method, {}))
        grid = alpha_grid if (alpha_grid and method in ("fwsr", "kfwsr")) else None
        if grid is None:
            reports.extend(
                _trial(method, A, k, s, score, trial, sweep_value, params)
                for trial, s, A, k, score in data
            )
            continue
        best = None
        for alpha in grid:
            p = {**params, "alpha": alpha}
            batch = [_trial(method, A, k, s, score, trial, sweep_value, p)
                     for trial, s, A, k, score in data]
            mean = np.mean([r.recovery_fraction for r in batch])
            if best is None or mean > best[0]:
                best = (mean, batch)
        for r in best[1]:
            r.params["alpha_grid"] = list(grid)
        reports.extend(best[1])
    return reports


def aggregate(reports):
    """Per ``(sweep_value, method)`` summary rows, in first-seen order."""
    groups = {}
    for r in reports:
        groups.setdefault((r.sweep_value, r.method), []).append(r)
    rows = []
    for (sweep_value, method), rs in groups.items():
        rec = np.array([r.recovery_fraction for r in rs])
        rows.append({
            "sweep_value": sweep_value,
            "method": method,
            "mean_recovery": float(rec.mean()),
            "std_recovery": float(rec.std()),
            "mean_time_ms": float(np.mean([r.wall_time for r in rs]) * 1e3),
            "mean_iterations": float(np.mean([r.solver_iterations for r in rs])),
        })
    return rows


def run_sweep(which, sweep_values, methods, base_cfg, seed=None, method_params=None, alpha_grid=None):
    """Run :func:`run_experiment` over noise levels (exp1) or cluster counts (exp2)."""
    reports = []
    for v in sweep_values:
        if which == "exp1":
            cfg = Exp1Config(**{**asdict(base_cfg), "noise_sigma": float(v)})
        else:
            cfg = Exp2Config(**{**asdict(base_cfg), "n_clusters": int(v)})
        reports.extend(run_experiment(which, methods, cfg, seed, method_params, alpha_grid))
    return reports
