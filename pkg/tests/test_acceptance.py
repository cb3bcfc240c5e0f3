"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a one-line verdict that is printed in the terminal summary
under "acceptance criteria".
"""

import itertools
import statistics
import time

import numpy as np
import pytest

from conftest import dense_objective, golden_section, record_acceptance, rel_fro
from fwsr import FWSR
from fwsr.cli import bench_rows
from fwsr.experiments import (
    DEFAULT_ALPHA_GRID,
    DEFAULT_NOISE_LEVELS,
    Exp1Config,
    Exp2Config,
    aggregate,
    gen_exp1,
    gen_exp2,
    run_experiment,
    run_sweep,
)
from fwsr.matrix import KernelSpec, RowSparseMatrix, build_gram, center
from fwsr.solver import (
    SolverConfig,
    finalize,
    fw_gap,
    fw_step,
    init_state,
    line_search,
    lmo,
    objective,
    solve,
    solve_gram,
    update_gradient,
)


def _verdict(number, name, passed, detail):
    record_acceptance(number, name, bool(passed), detail)
    assert passed, detail


def test_01_incremental_update_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        d, n = int(rng.integers(10, 51)), int(rng.integers(20, 101))
        K = build_gram(center(rng.standard_normal((d, n)), "per_datapoint"))
        state = init_state(K)
        for _ in range(100):
            status, _ = fw_step(state, n / 0.5, 2, 0.0)
            update_gradient(state)
            worst = max(worst, rel_fro(state.KX, K @ state.X.to_dense()))
            if status:
                break
    elapsed = time.perf_counter() - t0
    _verdict(1, "incremental KX oracle", worst <= 1e-10 and elapsed < 10,
             f"max rel error {worst:.2e} (<= 1e-10), {elapsed:.1f}s (< 10s)")


def test_02_gradient_finite_differences():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((6, 8))
        eta = [0.0, 0.5, 1.0, 2.0, 0.25][seed]
        state = init_state(build_gram(A, eta=eta))
        for _ in range(3):
            fw_step(state, 8.0, 2, 0.0)
        finalize(state)
        X = state.X.to_dense() + 0.1 * rng.standard_normal((8, 8))
        state.KX[:] = state.gram @ X
        G = update_gradient(state).dense()
        for i, j in itertools.product(range(8), range(8)):
            h = 1e-6 * (1 + abs(X[i, j]))
            E = np.zeros_like(X)
            E[i, j] = h
            fd = (dense_objective(A, X + E, eta) - dense_objective(A, X - E, eta)) / (2 * h)
            worst = max(worst, abs(G[i, j] - fd) / abs(fd))
    elapsed = time.perf_counter() - t0
    _verdict(2, "gradient vs finite differences", worst <= 1e-5 and elapsed < 5,
             f"max entrywise rel error {worst:.2e} (<= 1e-5), {elapsed:.1f}s (< 5s)")


def test_03_line_search_oracle():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    seed = 0
    while count < 200:
        rng = np.random.default_rng(seed)
        seed += 1
        d, n = int(rng.integers(3, 12)), int(rng.integers(4, 12))
        A = rng.standard_normal((d, n))
        eta = float(rng.choice([0.0, 0.7]))
        beta = n / float(rng.choice([0.5, 2.0, 10.0]))
        state = init_state(build_gram(A, eta=eta))
        for _ in range(20):
            grad = update_gradient(state)
            X = state.X.to_dense()
            j, s = lmo(grad, 2, beta)
            S = RowSparseMatrix.single_row(n, j, s)
            gamma, _ = line_search(state, S)
            D = S.to_dense() - X
            oracle = golden_section(lambda g: dense_objective(A, X + g * D, eta))
            worst = max(worst, abs(gamma - oracle))
            count += 1
            status, _ = fw_step(state, beta, 2, 0.0)
            if status or count >= 200:
                break
    elapsed = time.perf_counter() - t0
    _verdict(3, "line search vs golden section", worst <= 1e-6 and elapsed < 10,
             f"{count} iterations, max |gamma - oracle| {worst:.2e} (<= 1e-6), {elapsed:.1f}s (< 10s)")


def test_04_step_size_in_unit_interval():
    ratios = []
    for seed in range(15):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(15, 60))
        d = int(rng.integers(5, 40))
        K = build_gram(center(rng.standard_normal((d, n)), "per_datapoint"))
        state = init_state(K)
        for _ in range(100):
            status, _ = fw_step(state, 1.5 * n, 2, 0.0)
            if status:
                break
        ratios.extend(state.ratio_trace)
    lo, hi = min(ratios), max(ratios)
    ok = len(ratios) >= 1000 and lo >= -1e-9 and hi <= 1 + 1e-9
    _verdict(4, "unclamped step in [0, 1] at beta=1.5n", ok,
             f"{len(ratios)} iterations, range [{lo:.3g}, {hi:.3g}]")


def _exhaustive_q1(G, beta):
    return min(sign * beta * G[i, l]
               for i, l in itertools.product(range(G.shape[0]), repeat=2) for sign in (1.0, -1.0))


def _feasible(rng, n, q, beta):
    R = rng.standard_normal((n, n)) * (rng.random((n, 1)) < 0.5)
    total = np.sum(np.linalg.norm(R, ord=2 if q == 2 else np.inf, axis=1))
    return R if total == 0 else R * (beta * rng.uniform(0.05, 1.0) / total)


def test_05_lmo_exactness():
    q1_exact, beaten, instances = True, True, 0
    for seed in range(12):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 13))
        A = rng.standard_normal((int(rng.integers(2, 8)), n))
        state = init_state(build_gram(A))
        for _ in range(int(rng.integers(0, 4))):
            fw_step(state, n / 2.0, 2, 0.0)
        G = update_gradient(state).dense()
        if not np.any(G):
            continue
        instances += 1
        beta = float(rng.uniform(0.5, 5.0))
        j, s = lmo(G, 1, beta)
        q1_exact &= float(s @ G[j]) == _exhaustive_q1(G, beta)
        for q in (2, "inf"):
            j, s = lmo(G, q, beta)
            value = float(s @ G[j])
            for _ in range(1000):
                R = _feasible(rng, n, 2 if q == 2 else np.inf, beta)
                beaten &= value <= float(np.sum(R * G)) + 1e-9
    _verdict(5, "LMO exactness", q1_exact and beaten and instances >= 10,
             f"{instances} instances; q=1 exhaustive exact: {q1_exact}; q in {{2, inf}} beats 1000 random feasible: {beaten}")


def test_06_monotone_descent_and_gap_sign():
    worst_rise, worst_gap, runs = -np.inf, np.inf, 0
    for seed, q, eta, kernel in itertools.product(range(4), (1, 2, "inf"), (0.0, 1.0), ("linear", "rbf")):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((10, 40))
        cfg = SolverConfig(k=12, alpha=2.0, q=q, eta=eta, kernel=KernelSpec(kernel, 3.0))
        res = solve(A, cfg)
        f = np.array(res.objective_trace)
        worst_rise = max(worst_rise, float(np.max(np.diff(f) / f[0], initial=-np.inf)))
        worst_gap = min(worst_gap, min(res.gap_trace))
        runs += 1
    ok = worst_rise <= 1e-12 and worst_gap >= -1e-9
    _verdict(6, "monotone descent and nonnegative gap", ok,
             f"{runs} runs; max (f_t+1 - f_t)/f_0 {worst_rise:.2e} (<= 1e-12); min gap {worst_gap:.2e} (>= -1e-9)")


def test_07_linear_rate():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 60))
    n = A.shape[1]
    gram = build_gram(center(A, "per_datapoint"))
    cfg = SolverConfig(k=n, alpha=1 / 1.5, delta=0.0, max_iter=500)
    res = solve_gram(gram, cfg)
    f = np.array(res.objective_trace)
    T = len(f) - 1
    tail = np.arange(T // 2, T + 1)
    logf = np.log(f[tail])
    slope, intercept = np.polyfit(tail, logf, 1)
    fit = slope * tail + intercept
    r2 = 1 - np.sum((logf - fit) ** 2) / np.sum((logf - logf.mean()) ** 2)
    ratio = f[-1] / f[0]
    elapsed = time.perf_counter() - t0
    ok = r2 >= 0.95 and ratio <= 1e-6 and T == 500 and elapsed < 30
    _verdict(7, "linear convergence rate", ok,
             f"T={T}, tail R^2 {r2:.4f} (>= 0.95), f_T/f_0 {ratio:.2e} (<= 1e-6), "
             f"rate exp({slope:.4f} t), {elapsed:.1f}s")


def test_08_iterations_to_k_rows():
    exp1 = []
    for seed in range(10):
        A, _ = gen_exp1(Exp1Config(noise_sigma=0.5), seed)
        res = solve(A, SolverConfig(k=30, alpha=10.0))
        exp1.append(res.iterations if res.status == "k_reached" else np.inf)
    exp2 = []
    for seed in range(10):
        A, _ = gen_exp2(Exp2Config(n_clusters=10, cluster_sigma=20.0), seed)
        res = solve(A, SolverConfig(k=10, alpha=10.0))
        exp2.append(res.iterations if res.status == "k_reached" else np.inf)
    m1, m2 = statistics.median(exp1), statistics.median(exp2)
    _verdict(8, "iterations to k rows <= 2k", m1 <= 60 and m2 <= 20,
             f"exp1 k=30 median {m1} (<= 60); exp2 k=10 median {m2} (<= 20)")


def test_09_per_iteration_scaling():
    rows = bench_rows([1000, 2000], d=50, k=10, trials=3, seed=0)
    ratio = rows[1]["median_iter_time_ms"] / rows[0]["median_iter_time_ms"]
    _verdict(9, "per-iteration time n=2000 vs n=1000", ratio <= 5.5,
             f"{rows[0]['median_iter_time_ms']:.2f} ms -> {rows[1]['median_iter_time_ms']:.2f} ms, "
             f"ratio {ratio:.2f} (<= 5.5)")


@pytest.mark.slow
def test_10_experiment1_noise_sweep():
    t0 = time.perf_counter()
    reports = run_sweep("exp1", DEFAULT_NOISE_LEVELS, ["fwsr", "rrqr"], Exp1Config(trials=10),
                        seed=0, alpha_grid=DEFAULT_ALPHA_GRID)
    elapsed = time.perf_counter() - t0
    rows = aggregate(reports)
    fw = {r["sweep_value"]: r["mean_recovery"] for r in rows if r["method"] == "fwsr"}
    qr = {r["sweep_value"]: r["mean_recovery"] for r in rows if r["method"] == "rrqr"}
    spread = max(fw.values()) - min(fw.values())
    vs_rrqr = all(fw[s] >= qr[s] - 0.05 for s in fw)
    curve = ", ".join(f"{s}: {fw[s]:.3f}/{qr[s]:.3f}" for s in sorted(fw))
    _verdict(10, "experiment 1 noise sweep", spread <= 0.1 and vs_rrqr and elapsed < 120,
             f"FWSR range {spread:.3f} (<= 0.1); FWSR >= RRQR - 0.05 at every level: {vs_rrqr}; "
             f"sigma: fwsr/rrqr {{{curve}}}; {elapsed:.0f}s (< 120s)")


@pytest.mark.slow
def test_11_experiment2_clusters():
    t0 = time.perf_counter()
    low = {}
    for k in (5, 10):
        cfg = Exp2Config(ambient_dim=300, n_clusters=k, cluster_sigma=2.0, trials=10)
        for row in aggregate(run_experiment("exp2", ["fwsr", "rrqr"], cfg, seed=0)):
            low[(k, row["method"])] = row["mean_recovery"]
    cfg = Exp2Config(ambient_dim=300, n_clusters=5, cluster_sigma=20.0, trials=10)
    high = {row["method"]: row["mean_recovery"]
            for row in aggregate(run_experiment("exp2", ["fwsr", "kmedoids"], cfg, seed=0,
                                                method_params={"fwsr": {"alpha": 10.0, "eta": 0.0}}))}
    elapsed = time.perf_counter() - t0
    ok = all(v >= 0.95 for v in low.values()) and high["fwsr"] >= high["kmedoids"] and elapsed < 300
    lows = ", ".join(f"{m} k={k}: {v:.2f}" for (k, m), v in sorted(low.items()))
    _verdict(11, "experiment 2 cluster recovery (d=300)", ok,
             f"sigma=2 {{{lows}}} (>= 0.95); sigma=20 k=5 fwsr {high['fwsr']:.2f} vs kmedoids "
             f"{high['kmedoids']:.2f}; {elapsed:.0f}s (< 300s)")


def test_12_linear_kernel_equivalence():
    same = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(15, 60))
        X = rng.standard_normal((n, int(rng.integers(5, 30))))
        k = int(rng.integers(2, 10))
        a = FWSR(n_exemplars=k, alpha=5.0, kernel="linear").fit(X)
        Xc = X - X.mean(axis=1, keepdims=True)
        K = np.einsum("if,jf->ij", Xc, Xc)
        b = FWSR(n_exemplars=k, alpha=5.0, kernel="precomputed").fit(K)
        same += a.insertion_order_ == b.insertion_order_ and a.exemplar_indices_ == b.exemplar_indices_
    _verdict(12, "linear kernel equivalence", same == 20, f"{same}/20 identical index sequences")
