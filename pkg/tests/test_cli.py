import csv
import json

import numpy as np
import pytest

from fwsr.cli import bench_rows, main
from fwsr.io import ResultDocument


def _csv(tmp_path, rows, name="data.csv"):
    path = tmp_path / name
    path.write_text("\n".join(",".join(str(v) for v in r) for r in rows) + "\n")
    return str(path)


def _select(tmp_path, *flags, name="out.json"):
    out = str(tmp_path / name)
    code = main(["select", *flags, "--output", out])
    return code, (ResultDocument.read(out) if code != 1 else None)


def test_select_hand_example(tmp_path):
    # two points as rows: (2, 0) and (0, 1)
    data = _csv(tmp_path, [[2, 0], [0, 1]])
    code, doc = _select(tmp_path, "--input", data, "--k", "1", "--alpha", "0.5", "--center", "none")
    assert code == 0
    assert doc.exemplar_indices == [0] and doc.status == "k_reached"
    assert doc.config["alpha"] == 0.5 and doc.config["max_iter_resolved"] == 110


def test_select_random_is_deterministic(tmp_path):
    data = _csv(tmp_path, np.random.default_rng(0).standard_normal((12, 3)).round(6))
    flags = ["--input", data, "--method", "random", "--k", "3", "--seed", "7"]
    _, a = _select(tmp_path, *flags, name="a.json")
    _, b = _select(tmp_path, *flags, name="b.json")
    for doc in (a, b):
        doc.elapsed_ms = 0.0
        doc.command = doc.command[:-2]
        doc.config.pop("output")
    assert a == b
    assert len(set(a.exemplar_indices)) == 3


def test_select_stdout(tmp_path, capsys):
    data = _csv(tmp_path, [[2, 0], [0, 1]])
    assert main(["select", "--input", data, "--k", "1", "--center", "none", "--alpha", "0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["exemplar_indices"] == [0]


def _labeled(tmp_path, sizes):
    rng = np.random.default_rng(1)
    rows = []
    for c, size in enumerate(sizes):
        for _ in range(size):
            rows.append([*rng.standard_normal(4).round(6), f"c{c}"])
    order = rng.permutation(len(rows))
    return _csv(tmp_path, [rows[i] for i in order], "labeled.csv")


def test_per_class_size_error(tmp_path, capsys):
    data = _labeled(tmp_path, [10, 4])
    code = main(["select", "--input", data, "--labels", "4", "--k", "5", "--output", str(tmp_path / "o.json")])
    assert code == 1
    err = capsys.readouterr().err
    assert "'c1'" in err and "4 points" in err


@pytest.mark.parametrize("method", ["fwsr", "kmedoids", "rrqr"])
def test_per_class_matches_standalone(tmp_path, method):
    data = _labeled(tmp_path, [10, 8])
    _, doc = _select(tmp_path, "--input", data, "--labels", "4", "--k", "3", "--method", method)
    rows = list(csv.reader(open(data)))
    for label, idx in doc.exemplar_indices.items():
        members = [i for i, r in enumerate(rows) if r[4] == label]
        sub = _csv(tmp_path, [rows[i][:4] for i in members], f"{label}.csv")
        _, solo = _select(tmp_path, "--input", sub, "--k", "3", "--method", method, name=f"{label}.json")
        assert idx == [members[i] for i in solo.exemplar_indices]


def test_exit_code_two_on_max_iter(tmp_path):
    data = _csv(tmp_path, np.random.default_rng(2).standard_normal((20, 5)).round(6))
    code, doc = _select(tmp_path, "--input", data, "--k", "20", "--alpha", "0.1", "--max-iter", "2")
    assert code == 2 and doc.status == "max_iter"


@pytest.mark.parametrize("argv", [
    ["select", "--k", "1"],
    ["select", "--input", "x.csv", "--k", "1", "--bogus"],
    ["select", "--input", "/nonexistent.csv", "--k", "1"],
    ["frobnicate"],
])
def test_usage_errors_exit_one(argv, capsys):
    assert main(argv) == 1


def test_k_exceeds_n_exit_one(tmp_path):
    data = _csv(tmp_path, [[1, 2], [3, 4]])
    assert main(["select", "--input", data, "--k", "3"]) == 1


def test_degenerate_columns_complete(tmp_path):
    data = _csv(tmp_path, [[1.0, 2.0, 3.0]] * 8)
    code, doc = _select(tmp_path, "--input", data, "--k", "3")
    assert doc.status in ("stalled", "gap_converged")
    assert code in (0, 2)


def _strip_time(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r.pop("mean_time_ms")
    return rows


def test_experiment_exp2_outputs(tmp_path):
    out = tmp_path / "run"
    argv = ["experiment", "exp2", "--clusters", "5", "--methods", "fwsr", "--trials", "10",
            "--seed", "1", "--output-dir", str(out), "--ambient-dim", "30", "--n-points", "100"]
    assert main(argv) == 0
    with open(out / "exp2.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["sweep_value", "method", "mean_recovery", "std_recovery", "mean_time_ms", "mean_iterations"]
    rows = _strip_time(out / "exp2.csv")
    assert len(rows) == 1 and 0.0 <= float(rows[0]["mean_recovery"]) <= 1.0
    trials = sorted((out / "trials").iterdir())
    assert len(trials) == 10
    payload = json.loads(trials[0].read_text())
    assert payload["meta"]["unspecified_choices"]["center_distribution"] == "uniform box"

    again = tmp_path / "again"
    assert main([*argv[:-5], str(again), *argv[-4:]]) == 0
    assert _strip_time(again / "exp2.csv") == rows


def test_experiment_exp1_noiseless_fwsr_matches_rrqr(tmp_path):
    out = tmp_path / "e1"
    assert main(["experiment", "exp1", "--noise-levels", "0", "--methods", "fwsr,rrqr",
                 "--trials", "3", "--output-dir", str(out)]) == 0
    rows = {r["method"]: float(r["mean_recovery"]) for r in _strip_time(out / "exp1.csv")}
    assert set(rows) == {"fwsr", "rrqr"}
    assert abs(rows["fwsr"] - rows["rrqr"]) <= 0.05


def test_bench_schema(tmp_path, capsys):
    assert main(["bench", "--n-list", "60,120", "--d", "10", "--k", "4", "--trials", "1"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert [int(r["n"]) for r in rows] == [60, 120]
    assert float(rows[0]["time_ratio"]) == 1.0
    assert all(float(r["k_dagger"]) <= 8 for r in rows)


def test_bench_rows_k_dagger_within_2k():
    rows = bench_rows([500, 1000], d=50, k=10, trials=2, seed=0)
    assert len(rows) == 2
    assert all(r["k_dagger"] <= 20 for r in rows)
