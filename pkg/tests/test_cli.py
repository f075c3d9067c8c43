import json
from pathlib import Path

import numpy as np
import pytest

from cptest.cli import main

GOLDEN = Path(__file__).parent / "golden"


def write_csv(path, x, header=None):
    lines = [",".join(header)] if header else []
    lines += [",".join(repr(float(v)) for v in row) for row in np.atleast_2d(x)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def golden_sample():
    return np.random.default_rng(2024).standard_normal((30, 3))


def test_same_file_twice_matches_golden(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    write_csv(tmp_path / "a.csv", golden_sample())
    rc = main(["test", "--sample1", "a.csv", "--sample2", "a.csv", "--stat", "cpt1",
               "-B", "99", "--trees", "100", "--seed", "7", "--out", "out"])
    assert rc == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    golden = json.loads((GOLDEN / "same_file_cpt1.json").read_text())
    assert report == golden
    assert report["tests"][0]["p_value"] > 0.05


def test_same_file_retained_for_most_seeds(tmp_path):
    write_csv(tmp_path / "a.csv", np.random.default_rng(5).standard_normal((12, 2)))
    retained = 0
    for seed in range(20):
        out = tmp_path / f"o{seed}"
        main(["test", "--sample1", str(tmp_path / "a.csv"), "--sample2", str(tmp_path / "a.csv"),
              "--classifier", "knn", "--knn-k", "5", "-B", "99", "--seed", str(seed), "--out", str(out)])
        retained += json.loads((out / "report.json").read_text())["tests"][0]["p_value"] > 0.05
    # frozen: 20 of 20 retained; the exact binomial lower 99% limit for 20 runs at 0.95 is 16
    assert retained >= 16


def test_mismatched_columns(tmp_path, capsys):
    write_csv(tmp_path / "a.csv", np.zeros((5, 3)))
    write_csv(tmp_path / "b.csv", np.ones((5, 4)))
    rc = main(["test", "--sample1", str(tmp_path / "a.csv"), "--sample2", str(tmp_path / "b.csv"),
               "--out", str(tmp_path / "o")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "3" in err and "4" in err


def test_mmd_on_marginal_scenario(tmp_path):
    rc = main(["test", "--scenario", "marginal_diff", "--d", "20", "--n", "100", "--stat", "mmd",
               "-B", "49", "--out", str(tmp_path)])
    assert rc == 0
    t = json.loads((tmp_path / "report.json").read_text())["tests"][0]
    assert 1 / 50 <= t["p_value"] <= 1
    assert t["statistic"] == "mmd" and t["decision"] in ("reject", "retain")


def test_labeled_file_input(tmp_path):
    gen = np.random.default_rng(1)
    x = gen.standard_normal((20, 2))
    y = np.r_[np.ones(10), np.zeros(10)]
    write_csv(tmp_path / "d.csv", np.column_stack([x, y]), header=["a", "b", "label"])
    rc = main(["test", "--data", str(tmp_path / "d.csv"), "--label-col", "label",
               "--stat", "cpt2,acc", "--classifier", "logistic", "-B", "19", "--out", str(tmp_path / "o")])
    assert rc == 0
    tests = json.loads((tmp_path / "o" / "report.json").read_text())["tests"]
    assert [t["statistic"] for t in tests] == ["cpt2-logistic", "acc-logistic"]
    assert all(t["d"] == 2 and t["n"] == 10 for t in tests)


def test_single_class_is_contract_violation(tmp_path):
    write_csv(tmp_path / "d.csv", np.column_stack([np.arange(6.0), np.ones(6)]), header=["x", "y"])
    rc = main(["test", "--data", str(tmp_path / "d.csv"), "--label-col", "y", "--out", str(tmp_path / "o")])
    assert rc == 3


def test_unknown_statistic(capsys, tmp_path):
    rc = main(["test", "--scenario", "mean_shift", "--stat", "svm", "--out", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "cpt1, cpt2, acc, mmd" in err


def test_corpus_file_mode(tmp_path):
    rows = ["label,text"]
    for i in range(12):
        rows.append(f"1,great fun film {i % 3}")
        rows.append(f"0,dull slow film {i % 4}")
    (tmp_path / "c.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    rc = main(["test", "--corpus-file", str(tmp_path / "c.csv"), "--classifier", "knn", "--knn-k", "3",
               "--min-df", "0.1", "--remove-terms", "fun", "-B", "19", "--out", str(tmp_path / "o")])
    assert rc == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["source"]["corpus_documents"] == 24
    assert report["tests"][0]["p_value"] == 1 / 20


def test_corpus_directory_mode(tmp_path):
    for label, words in ((1, "bright happy"), (0, "grim sad")):
        folder = tmp_path / f"c{label}"
        folder.mkdir()
        for i in range(6):
            (folder / f"{i}.txt").write_text(f"{words} common {i}", encoding="utf-8")
    rc = main(["test", "--corpus-dir1", str(tmp_path / "c1"), "--corpus-dir0", str(tmp_path / "c0"),
               "--stat", "mmd", "-B", "19", "--sample-size", "5", "--out", str(tmp_path / "o")])
    assert rc == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["source"]["corpus_documents"] == 10


# --- simulate ---------------------------------------------------------------------

def test_simulate_mean_shift_sizes_and_determinism(tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", "--scenario", "mean_shift", "--seed", "3", "--out", str(tmp_path / name)]) == 0
    for f in ("sample1.csv", "sample2.csv", "manifest.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    x = np.loadtxt(tmp_path / "a" / "sample1.csv", delimiter=",")
    assert x.shape == (100, 100)
    assert np.loadtxt(tmp_path / "a" / "sample2.csv", delimiter=",").shape == (100, 100)


def test_simulate_ggm_manifest(tmp_path):
    assert main(["simulate", "--scenario", "ggm", "--d", "200", "--n", "10", "--tau", "0.65",
                 "--seed", "4", "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 4
    assert manifest["scenario"]["tau"] == 0.65
    assert manifest["scenario"]["delta1"] == 0.1 and manifest["scenario"]["delta2"] == 0.1


def test_simulate_roundtrips_into_test(tmp_path):
    main(["simulate", "--scenario", "cov_diff", "--d", "5", "--n", "20", "--out", str(tmp_path / "s")])
    rc = main(["test", "--sample1", str(tmp_path / "s" / "sample1.csv"), "--sample2", str(tmp_path / "s" / "sample2.csv"),
               "--stat", "mmd", "-B", "9", "--out", str(tmp_path / "o")])
    assert rc == 0


def test_simulate_invalid_parameters(tmp_path):
    assert main(["simulate", "--scenario", "mean_shift", "--sigma", "-1", "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--out", str(tmp_path)]) == 2


# --- benches ----------------------------------------------------------------------

def read_csv_rows(path):
    lines = path.read_text(encoding="utf-8").strip().split("\n")
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def test_bench_roc_null_diagonal(tmp_path):
    R = 100
    rc = main(["bench-roc", "--scenario", "mean_shift", "--d", "2", "--n", "15", "--shift", "0",
               "--stat", "mmd", "-R", str(R), "-B", "99", "--alpha-grid", "0.1,0.5,0.9",
               "--svg", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = read_csv_rows(tmp_path / "roc.csv")
    assert header == ["alpha", "power", "statistic", "scenario", "R", "B", "seed"]
    for row in rows:
        a, p = float(row[0]), float(row[1])
        assert abs(p - a) <= 3 * np.sqrt(a * (1 - a) / R)
    assert (tmp_path / "roc.svg").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["R"] == R and manifest["runtime_seconds"] >= 0


def test_bench_power_three_rows_per_statistic(tmp_path):
    rc = main(["bench-power", "--scenario", "cov_diff", "--d", "20", "--sizes", "50,100,150",
               "--stat", "cpt1,mmd", "--classifier", "knn", "--reps", "4", "-B", "9", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = read_csv_rows(tmp_path / "power.csv")
    assert header == ["n", "power", "statistic", "scenario", "reps", "B", "seed"]
    for stat in ("cpt1-knn", "mmd"):
        mine = [r for r in rows if r[2] == stat]
        assert [r[0] for r in mine] == ["50", "100", "150"]
        assert all(0 <= float(r[1]) <= 1 for r in mine)


@pytest.mark.parametrize("command", ["bench-roc", "bench-power"])
def test_bench_bytes_independent_of_threads(tmp_path, command):
    extra = ["-R", "6"] if command == "bench-roc" else ["--sizes", "10,14", "--reps", "3"]
    for threads in ("1", "3"):
        main([command, "--scenario", "mean_shift", "--d", "3", "--n", "12", "--stat", "cpt1,cpt2",
              "--trees", "10", "-B", "9", "--seed", "5", "--threads", threads, "--out", str(tmp_path / threads)] + extra)
    name = "roc.csv" if command == "bench-roc" else "power.csv"
    for f in (name, "pvalues.csv"):
        assert (tmp_path / "1" / f).read_bytes() == (tmp_path / "3" / f).read_bytes()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test run\nscenario = mean_shift\nd = 3\nn = 8\nstat = mmd\npermutations = 9\nseed = 11\n")
    assert main(["test", "--config", str(cfg), "--seed", "12", "--out", str(tmp_path / "o")]) == 0
    t = json.loads((tmp_path / "o" / "report.json").read_text())["tests"][0]
    assert t["B"] == 9 and t["seed"] == 12 and t["d"] == 3 and t["statistic"] == "mmd"


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    assert main(["test", "--config", str(cfg), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("argv", [["test", "--scenario", "mean_shift", "--alpha", "1.5"],
                                  ["test", "--scenario", "mean_shift", "-B", "0"],
                                  ["bench-roc", "--scenario", "mean_shift", "-R", "0"],
                                  ["frobnicate"]])
def test_invalid_arguments(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)] if argv[0] != "frobnicate" else argv) == 2


def test_missing_input_file(tmp_path):
    assert main(["test", "--sample1", str(tmp_path / "nope.csv"), "--sample2", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path)]) == 2
