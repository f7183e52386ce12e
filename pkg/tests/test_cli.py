import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from cchm import simulate as sim
from cchm.cli import INSTANCE_FILES, LEARN_FILES, RunSpec, CliError, main, read_report
from cchm.graphs import ARROW, TAIL, MixedGraph, format_graph, read_graph, write_graph


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_generate_writes_instances(tmp_path):
    out = tmp_path / "gen"
    assert main(["generate", "--v", "10", "--d", "3", "--n", "1000", "--latent-rate", "0.1", "--reps", "2", "--out", str(out)]) == 0
    dirs = sorted(p for p in out.iterdir())
    assert len(dirs) == 2
    for d in dirs:
        assert sorted(p.name for p in d.iterdir()) == sorted(INSTANCE_FILES)
        meta = sim.read_meta(d / "data.meta")
        assert meta["v"] == "10" and meta["n"] == "1000" and len(meta["latent"].split(",")) == 1
        assert "PCG64" in meta["rng"]
        data = sim.read_csv(d / "data.csv")
        assert data.n == 1000 and len(data.columns) == 9
        for name in ("truth_dag.graph", "truth_mag.graph", "truth_pag.graph"):
            g = read_graph(d / name)
            assert format_graph(g) == (d / name).read_text()


def test_generate_without_latents_has_no_bidirected(tmp_path):
    main(["generate", "--v", "8", "--latent-rate", "0", "--reps", "3", "--n", "50", "--out", str(tmp_path)])
    for d in tmp_path.iterdir():
        assert not read_graph(d / "truth_mag.graph").bidirected_edges()


def test_generate_is_byte_identical(tmp_path):
    args = ["generate", "--v", "7", "--n", "200", "--reps", "2", "--seed", "5"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    for d in (tmp_path / "a").iterdir():
        for f in d.iterdir():
            assert f.read_bytes() == (tmp_path / "b" / d.name / f.name).read_bytes()


def test_generate_from_external_truth(tmp_path):
    dag = MixedGraph(["P", "Q", "R"], [("P", "Q", TAIL, ARROW), ("Q", "R", TAIL, ARROW)], "DAG")
    write_graph(dag, tmp_path / "net.graph")
    (tmp_path / "coef.csv").write_text("parent,child,beta\nP,Q,0.9\nQ,R,-0.4\n")
    out = tmp_path / "gen"
    code = main(["generate", "--truth-graph", str(tmp_path / "net.graph"), "--coefficients", str(tmp_path / "coef.csv"),
                 "--n", "20000", "--latent-rate", "0", "--out", str(out)])
    assert code == 0
    (d,) = out.iterdir()
    data = sim.read_csv(d / "data.csv")
    assert data.columns == ("P", "Q", "R")
    assert np.polyfit(data.column("P"), data.column("Q"), 1)[0] == pytest.approx(0.9, abs=0.03)


def test_learn_writes_three_files(tmp_path):
    dag = MixedGraph(["A", "B", "C"], [("A", "B", TAIL, ARROW), ("B", "C", TAIL, ARROW)], "DAG")
    data = sim.sample_sem(dag, sim.SemParams({("A", "B"): 0.8, ("B", "C"): 0.8}, dict.fromkeys("ABC", 1.0)), 2000, 0)
    sim.write_csv(data, tmp_path / "chain.csv")
    assert main(["learn", str(tmp_path / "chain.csv"), "--out", str(tmp_path / "L")]) == 0
    assert sorted(p.name for p in (tmp_path / "L").iterdir()) == sorted(LEARN_FILES)
    report = read_report(tmp_path / "L" / "report.jsonl")
    assert [r["phase"] for r in report] == ["constraints", "hill_climb", "effects", "output"]
    config = report[-1]["config"]
    assert config["alpha"] == 0.01 and config["max_sepset"] == 4
    for name in ("learned_mag.graph", "learned_pag.graph"):
        text = (tmp_path / "L" / name).read_text()
        assert format_graph(read_graph(tmp_path / "L" / name)) == text
    mag = read_graph(tmp_path / "L" / "learned_mag.graph")
    assert mag.has_edge("A", "B") and mag.has_edge("B", "C") and not mag.has_edge("A", "C")


def test_learn_flags_reach_config(tmp_path):
    data = sim.Dataset(("A", "B"), np.random.default_rng(0).standard_normal((100, 2)))
    sim.write_csv(data, tmp_path / "d.csv")
    main(["learn", str(tmp_path / "d.csv"), "--out", str(tmp_path / "L"), "--alpha", "0.05", "--max-sepset", "2", "--standardize"])
    config = read_report(tmp_path / "L" / "report.jsonl")[-1]["config"]
    assert config["alpha"] == 0.05 and config["max_sepset"] == 2 and config["standardize"]


def test_learn_bad_input(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("A,B\n1,zz\n")
    assert main(["learn", str(tmp_path / "bad.csv"), "--out", str(tmp_path / "L")]) == 1
    assert "error" in capsys.readouterr().err
    assert main(["learn", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "L")]) == 1


def test_learn_timeout_exit_code(tmp_path):
    dag = sim.random_dag(12, 3, 0)
    sim.write_csv(sim.sample_sem(dag, sim.random_params(dag, 0), 500, 0), tmp_path / "d.csv")
    assert main(["learn", str(tmp_path / "d.csv"), "--out", str(tmp_path / "L"), "--timeout-min", "0"]) == 3


def test_evaluate_rows(tmp_path):
    truth = MixedGraph(["A", "B", "C"], [("A", "B", TAIL, ARROW), ("B", "C", ARROW, ARROW)], "MAG")
    write_graph(truth, tmp_path / "truth.graph")
    write_graph(MixedGraph(["A", "B", "C"], []), tmp_path / "empty.graph")
    write_graph(truth.without_edge("B", "C").with_edge("B", "C", TAIL, ARROW), tmp_path / "flip.graph")
    res = tmp_path / "res.csv"
    for name in ("truth", "empty", "flip"):
        assert main(["evaluate", str(tmp_path / f"{name}.graph"), str(tmp_path / "truth.graph"), "--out", str(res), "--run-id", name]) == 0
    got = {r["run_id"]: r for r in rows(res)}
    assert list(rows(res)[0]) == ["run_id", "v", "d", "n", "latent_rate", "alpha", "seed", "precision", "recall", "shd", "bsf",
                                  "edges_learned", "edges_true", "wall_seconds"]
    assert got["truth"]["shd"] == "0" and float(got["truth"]["bsf"]) == 1.0
    assert float(got["empty"]["bsf"]) == 0.0
    assert got["flip"]["shd"] == "1"


def test_evaluate_node_mismatch(tmp_path):
    write_graph(MixedGraph(["A", "B"], []), tmp_path / "a.graph")
    write_graph(MixedGraph(["A", "C"], []), tmp_path / "b.graph")
    assert main(["evaluate", str(tmp_path / "a.graph"), str(tmp_path / "b.graph"), "--out", str(tmp_path / "r.csv")]) == 1
    assert not (tmp_path / "r.csv").exists()


def test_evaluate_reads_sidecars_and_marks(tmp_path):
    main(["generate", "--v", "6", "--n", "3000", "--out", str(tmp_path / "gen")])
    (inst,) = (tmp_path / "gen").iterdir()
    main(["learn", str(inst / "data.csv"), "--out", str(tmp_path / "L")])
    main(["evaluate", str(tmp_path / "L" / "learned_pag.graph"), str(inst / "truth_pag.graph"), "--out", str(tmp_path / "r.csv"), "--marks"])
    (row,) = rows(tmp_path / "r.csv")
    assert row["v"] == "6" and row["n"] == "3000" and row["alpha"] == "0.01" and row["seed"] == "0"
    assert float(row["wall_seconds"]) >= 0 and 0 <= float(row["arrow_precision"]) <= 1


def test_bench_rows_and_determinism(tmp_path):
    args = ["bench", "--v", "5", "6", "--n", "1000", "--reps", "3", "--timeout-min", "5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    a, b = (tmp_path / "a" / "results.csv").read_bytes(), (tmp_path / "b" / "results.csv").read_bytes()
    assert a == b
    table = rows(tmp_path / "a" / "results.csv")
    assert [r["status"] for r in table] == ["ok"] * 3 + ["summary"] + ["ok"] * 3 + ["summary"]
    summary = table[3]
    assert float(summary["precision"]) == pytest.approx(np.mean([float(r["precision"]) for r in table[:3]]))
    assert summary["precision_se"] != ""
    assert len(rows(tmp_path / "a" / "timings.csv")) == 6


def test_bench_timeout_rows(tmp_path):
    main(["bench", "--v", "8", "--n", "500", "--reps", "2", "--timeout-min", "0", "--out", str(tmp_path)])
    table = rows(tmp_path / "results.csv")
    assert [r["status"] for r in table[:2]] == ["timeout", "timeout"]
    assert all(r["precision"] == r["shd"] == r["bsf"] == "" for r in table[:2])
    assert table[2]["status"] == "summary" and table[2]["seed"] == "0/2"


def test_bench_alpha_grid_and_record_times(tmp_path):
    main(["bench", "--v", "5", "--n", "500", "--alpha", "0.01", "0.05", "--out", str(tmp_path), "--record-times", "--marks"])
    table = rows(tmp_path / "results.csv")
    assert [r["alpha"] for r in table] == ["0.01", "0.01", "0.05", "0.05"]
    assert table[0]["wall_seconds"] != "" and "arrow_recall" in table[0]


def test_run_spec_validation(tmp_path):
    with pytest.raises(CliError):
        RunSpec(v=(), out=tmp_path)
    with pytest.raises(CliError):
        RunSpec(reps=0, out=tmp_path)
    assert main(["bench", "--v", "5", "--reps", "0", "--out", str(tmp_path)]) == 1


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cchm", "generate", "--v", "4", "--n", "30", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
    proc = subprocess.run([sys.executable, "-m", "cchm", "--version"], capture_output=True, text=True)
    assert proc.stdout.startswith("cchm ")


def test_report_is_json_lines(tmp_path):
    data = sim.Dataset(("A", "B"), np.random.default_rng(1).standard_normal((200, 2)))
    sim.write_csv(data, tmp_path / "d.csv")
    main(["learn", str(tmp_path / "d.csv"), "--out", str(tmp_path / "L")])
    for line in (tmp_path / "L" / "report.jsonl").read_text().splitlines():
        json.loads(line)
