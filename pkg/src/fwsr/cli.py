"""Command line interface: ``fwsr select``, ``fwsr experiment`` and ``fwsr bench``.

Exit codes: 0 when every run reached ``k`` exemplars or converged, 2 when a
run stalled or hit its iteration cap (the result is still written), 1 on bad
input or flags.
"""

import argparse
import json
import logging
import os
import statistics
import sys
import time
from dataclasses import asdict

import numpy as np

from .baselines import BASELINES, k_medoids, random_select, rrqr_select
from .experiments import (
    DEFAULT_ALPHA_GRID,
    DEFAULT_NOISE_LEVELS,
    EXP1_EXEMPLAR_DISTRIBUTION,
    EXP2_CENTER_DISTRIBUTION,
    METHODS,
    Exp1Config,
    Exp2Config,
    aggregate,
    gen_exp2,
    run_sweep,
)
from .io import InputSpec, ResultDocument, load_matrix, write_rows_csv
from .matrix import ConfigurationError, KernelSpec, NumericalError
from .solver import SolverConfig, solve

log = logging.getLogger("fwsr")

CENTER_FLAGS = {"none": "none", "datapoint": "per_datapoint", "feature": "per_feature"}
SWEEP_COLUMNS = ["sweep_value", "method", "mean_recovery", "std_recovery", "mean_time_ms", "mean_iterations"]
BENCH_COLUMNS = ["n", "d", "k", "trials", "median_iter_time_ms", "time_ratio", "k_dagger", "statuses"]

EXIT_OK, EXIT_INPUT, EXIT_INCOMPLETE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}") from None


def _method_list(text):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise argparse.ArgumentTypeError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    return methods


def _alpha_grid(text):
    return None if text.strip().lower() == "none" else _float_list(text)


def build_parser():
    parser = _Parser(prog="fwsr", description="Exemplar selection by Frank-Wolfe sparse representation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sel = sub.add_parser("select", help="select exemplars from a data file")
    sel.add_argument("--input", required=True)
    sel.add_argument("--format", choices=["csv", "f64le"], default="csv")
    sel.add_argument("--orientation", choices=["points_as_rows", "points_as_cols"], default="points_as_rows")
    sel.add_argument("--has-header", action="store_true", help="CSV has a single header row")
    sel.add_argument("--k", type=int, required=True)
    sel.add_argument("--alpha", type=float, default=10.0)
    sel.add_argument("--eta", type=float, default=0.0)
    sel.add_argument("--q", choices=["1", "2", "inf"], default="2")
    sel.add_argument("--delta", type=float, default=None,
                     help="absolute gap threshold (default: 1e-7 times the initial gap)")
    sel.add_argument("--kernel", choices=["linear", "rbf"], default="linear")
    sel.add_argument("--rbf-width", type=float, default=1.0)
    sel.add_argument("--center", choices=list(CENTER_FLAGS), default="datapoint")
    sel.add_argument("--max-iter", type=int, default=None)
    sel.add_argument("--seed", type=int, default=0)
    sel.add_argument("--labels", default=None, help="label column (name or index); enables per-class selection")
    sel.add_argument("--method", choices=["fwsr", *BASELINES], default="fwsr")
    sel.add_argument("--output", default=None, help="result JSON path (default: stdout)")

    exp = sub.add_parser("experiment", help="run a synthetic recovery experiment")
    which = exp.add_subparsers(dest="which", required=True, parser_class=_Parser)
    for name in ("exp1", "exp2"):
        p = which.add_parser(name)
        p.add_argument("--methods", type=_method_list, default=["fwsr", "rrqr", "kmedoids", "random"])
        p.add_argument("--trials", type=int, default=10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output-dir", required=True)
        p.add_argument("--eta", type=float, default=0.0)
        p.add_argument("--ambient-dim", type=int, default=200 if name == "exp1" else 1500)
        if name == "exp1":
            p.add_argument("--noise-levels", type=_float_list, default=list(DEFAULT_NOISE_LEVELS))
            p.add_argument("--alpha-grid", type=_alpha_grid, default=list(DEFAULT_ALPHA_GRID),
                           help="alphas tried per noise level, or 'none' to use --alpha")
            p.add_argument("--alpha", type=float, default=10.0)
            p.add_argument("--n-exemplars", type=int, default=30)
            p.add_argument("--n-mixtures", type=int, default=120)
        else:
            p.add_argument("--clusters", type=_int_list, default=[2, 4, 6, 8, 10])
            p.add_argument("--sigma", type=float, default=20.0)
            p.add_argument("--n-points", type=int, default=1000)
            p.add_argument("--alpha-grid", type=_alpha_grid, default=None)
            p.add_argument("--alpha", type=float, default=10.0)

    bench = sub.add_parser("bench", help="time per-iteration cost and iterations to k rows")
    bench.add_argument("--n-list", type=_int_list, required=True)
    bench.add_argument("--d", type=int, default=50)
    bench.add_argument("--k", type=int, default=10)
    bench.add_argument("--trials", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--alpha", type=float, default=10.0)
    bench.add_argument("--sigma", type=float, default=20.0)
    bench.add_argument("--output", default=None, help="CSV path (default: stdout)")
    return parser


def _select_one(args, A, seed):
    """Run the chosen method on ``A``; returns a dict of result fields."""
    if args.method == "fwsr":
        kernel = KernelSpec(args.kernel, args.rbf_width)
        cfg = SolverConfig(
            k=args.k, alpha=args.alpha, eta=args.eta, q=args.q, delta=args.delta,
            max_iter=args.max_iter, kernel=kernel, centering=CENTER_FLAGS[args.center],
        )
        res = solve(A, cfg)
        return {
            "exemplar_indices": res.exemplar_indices,
            "status": res.status,
            "iterations": res.iterations,
            "objective_trace": [float(v) for v in res.objective_trace],
            "gap_trace": [float(v) for v in res.gap_trace],
        }
    if args.method == "random":
        idx = random_select(A.shape[1], args.k, seed)
    elif args.method == "kmedoids":
        idx = k_medoids(A, args.k, seed)
    else:
        idx = rrqr_select(A, args.k)
    return {"exemplar_indices": idx, "status": "k_reached", "iterations": 0,
            "objective_trace": [], "gap_trace": []}


def _resolved_config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("command", "verbose")}
    if args.method == "fwsr":
        cfg["centering"] = CENTER_FLAGS[args.center]
        cfg["delta_mode"] = "absolute" if args.delta is not None else "relative:1e-07"
        cfg["max_iter_resolved"] = args.max_iter if args.max_iter is not None else 10 * args.k + 100
    return cfg


_SEVERITY = {"k_reached": 0, "gap_converged": 1, "max_iter": 2, "stalled": 3}


def cmd_select(args, argv):
    label_column = args.labels
    spec = InputSpec(args.input, args.format, args.orientation, args.has_header, label_column)
    A, labels = load_matrix(spec)
    start = time.perf_counter()
    if labels is None:
        out = _select_one(args, A, args.seed)
    else:
        out = {"exemplar_indices": {}, "status": "k_reached", "iterations": 0,
               "objective_trace": {}, "gap_trace": {}}
        classes = sorted(set(labels.tolist()))
        for label in classes:
            members = np.flatnonzero(labels == label)
            if len(members) < args.k:
                raise ConfigurationError(
                    f"class {label!r} has {len(members)} points, fewer than --k {args.k}"
                )
        for label in classes:
            members = np.flatnonzero(labels == label)
            part = _select_one(args, np.asfortranarray(A[:, members]), args.seed)
            out["exemplar_indices"][label] = [int(members[i]) for i in part["exemplar_indices"]]
            out["objective_trace"][label] = part["objective_trace"]
            out["gap_trace"][label] = part["gap_trace"]
            out["iterations"] += part["iterations"]
            if _SEVERITY[part["status"]] > _SEVERITY[out["status"]]:
                out["status"] = part["status"]
    doc = ResultDocument(
        command=["fwsr", *argv],
        config=_resolved_config(args),
        elapsed_ms=(time.perf_counter() - start) * 1e3,
        seed=args.seed,
        **out,
    )
    if args.output:
        doc.write(args.output)
    else:
        sys.stdout.write(doc.to_json())
    return EXIT_INCOMPLETE if doc.status in ("stalled", "max_iter") else EXIT_OK


def cmd_experiment(args, argv):
    os.makedirs(os.path.join(args.output_dir, "trials"), exist_ok=True)
    if args.which == "exp1":
        base = Exp1Config(n_exemplars=args.n_exemplars, ambient_dim=args.ambient_dim,
                          n_mixtures=args.n_mixtures, trials=args.trials, seed=args.seed)
        sweep = args.noise_levels
        defaults = {"exemplar_distribution": EXP1_EXEMPLAR_DISTRIBUTION,
                    "noise_levels_are_default": sweep == list(DEFAULT_NOISE_LEVELS)}
    else:
        base = Exp2Config(n_points=args.n_points, ambient_dim=args.ambient_dim,
                          cluster_sigma=args.sigma, trials=args.trials, seed=args.seed)
        sweep = args.clusters
        defaults = {"center_distribution": EXP2_CENTER_DISTRIBUTION, "center_box": list(base.center_box)}
    fw_params = {"alpha": args.alpha, "eta": args.eta}
    params = {"fwsr": fw_params, "kfwsr": dict(fw_params)}
    reports = run_sweep(args.which, sweep, args.methods, base, args.seed, params, args.alpha_grid)

    meta = {
        "schema_version": "1",
        "command": ["fwsr", *argv],
        "experiment": args.which,
        "config": {**asdict(base), "sweep": sweep, "methods": args.methods,
                   "alpha_grid": args.alpha_grid, **fw_params},
        "unspecified_choices": defaults,
    }
    for r in reports:
        name = f"{args.which}_{r.method}_{r.sweep_value}_{r.trial:03d}.json"
        with open(os.path.join(args.output_dir, "trials", name), "w", encoding="utf-8") as fh:
            json.dump({"meta": meta, "trial": r.to_dict()}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    with open(os.path.join(args.output_dir, f"{args.which}_meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_rows_csv(os.path.join(args.output_dir, f"{args.which}.csv"), aggregate(reports), SWEEP_COLUMNS)
    failed = [r for r in reports if r.error]
    for r in failed:
        log.warning("trial %d of %s failed: %s", r.trial, r.method, r.error)
    return EXIT_OK


def bench_rows(n_list, d, k, trials, seed, alpha=10.0, sigma=20.0):
    """Median per-iteration time and iterations-to-k on blob data per ``n``."""
    rows = []
    for n in n_list:
        times, kd, statuses = [], [], set()
        for trial in range(trials):
            A, _ = gen_exp2(Exp2Config(n_points=n, ambient_dim=d, n_clusters=k,
                                       cluster_sigma=sigma, trials=1), seed + trial)
            res = solve(A, SolverConfig(k=k, alpha=alpha))
            times.extend(res.iteration_times)
            kd.append(res.iterations)
            statuses.add(res.status)
        rows.append({
            "n": n, "d": d, "k": k, "trials": trials,
            "median_iter_time_ms": statistics.median(times) * 1e3,
            "k_dagger": statistics.median(kd),
            "statuses": "|".join(sorted(statuses)),
        })
    for row in rows:
        row["time_ratio"] = row["median_iter_time_ms"] / rows[0]["median_iter_time_ms"]
    return rows


def cmd_bench(args, argv):
    rows = bench_rows(args.n_list, args.d, args.k, args.trials, args.seed, args.alpha, args.sigma)
    if args.output:
        write_rows_csv(args.output, rows, BENCH_COLUMNS)
    else:
        write_rows_csv(sys.stdout, rows, BENCH_COLUMNS)
    return EXIT_OK


COMMANDS = {"select": cmd_select, "experiment": cmd_experiment, "bench": cmd_bench}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except (ConfigurationError, NumericalError, OSError) as exc:
        print(f"fwsr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
