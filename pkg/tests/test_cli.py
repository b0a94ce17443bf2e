import json

import pytest

from gnnlocal.catalog import cycle
from gnnlocal.cli import main
from gnnlocal.graph import load_dataset, write_graph
from gnnlocal.local import BandwidthViolation


def run(capsys, *argv):
    assert main(list(argv)) == 0
    return capsys.readouterr().out


@pytest.fixture
def hexagon(tmp_path):
    path = tmp_path / "c6.graph"
    write_graph(cycle(6, node_attr=[(i,) for i in range(6)]), path)
    return str(path)


def test_verify_problems(capsys, hexagon, tmp_path):
    out = json.loads(run(capsys, "verify", "--problem", "mis", "--graph", hexagon))
    assert out["objective"] == 3
    out = json.loads(run(capsys, "verify", "--problem", "k_cycle", "--k", "6", "--graph", hexagon))
    assert out["value"] is True
    sub = tmp_path / "h.txt"
    sub.write_text("edge 0 1\nedge 1 2\n")
    out = json.loads(run(capsys, "verify", "--problem", "simple_path", "--graph", hexagon,
                         "--subgraph", str(sub)))
    assert out["value"] is True


def test_simulate_with_cut(capsys, hexagon, tmp_path):
    cut = tmp_path / "cut.txt"
    cut.write_text("alice 0 1 2\n")
    out = tmp_path / "t.json"
    run(capsys, "simulate", "--graph", hexagon, "--alg", "union", "--rounds", "3",
        "--cut", str(cut), "--out", str(out))
    t = json.loads(out.read_text())
    assert t["rounds"] == 3 and len(t["cut"]["per_round"]) == 4
    with pytest.raises(BandwidthViolation):
        main(["simulate", "--graph", hexagon, "--alg", "union", "--rounds", "2",
              "--bandwidth", "4"])


def test_gnn_run_sum_and_local(capsys, hexagon, tmp_path):
    spec = tmp_path / "net.txt"
    spec.write_text("layers = sum\ndepth = 1\nprecision = 8\nreadout = sum\n")
    out = tmp_path / "trace.json"
    run(capsys, "gnn-run", "--graph", hexagon, "--network", str(spec), "--out", str(out))
    trace = json.loads(out.read_text())
    assert trace["layers"][1][0] == [5 + 0 + 1] and trace["readout"] == [45]
    spec.write_text("layers = degree\ndepth = 2\n")
    run(capsys, "gnn-run", "--graph", hexagon, "--network", str(spec), "--out", str(out))
    assert len(json.loads(out.read_text())["decoded"]) == 2


def test_verify_family(capsys, tmp_path):
    out = tmp_path / "fam.json"
    run(capsys, "verify-family", "--family", "diameter", "--q", "4", "--out", str(out))
    report = json.loads(out.read_text())
    assert report["exhaustive"] and report["counterexample_count"] == 0


def test_generate_train_and_gnn_run(capsys, tmp_path):
    data = tmp_path / "data"
    run(capsys, "generate", "--family", "cycle", "--p", "3", "--count", "24",
        "--test-count", "12", "--out", str(data))
    _, graphs, labels = load_dataset(data / "train")
    assert len(graphs) == 24 and sum(labels) == 12
    run_file = tmp_path / "run.json"
    run(capsys, "train", "--dataset", str(data), "--depth", "2", "--width", "4",
        "--set", "epochs=5", "--set", "batch_size=8", "--out", str(run_file))
    result = json.loads(run_file.read_text())
    assert result["parameters"]["depth"] == 2 and len(result["restarts"]) == 1
    spec = tmp_path / "trained.txt"
    spec.write_text("trained = run.json\n")
    graph = tmp_path / "g.graph"
    write_graph(graphs[0], graph)
    run(capsys, "gnn-run", "--graph", str(graph), "--network", str(spec),
        "--out-dir", str(tmp_path / "o"))
    out = json.loads((tmp_path / "o" / "trace.json").read_text())
    assert out["label"] == int(out["logit"] > 0)


def test_grid_and_analyze(capsys, tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("ps = 3\ntrain_size = 24\ntest_size = 12\nwidths = 4\ndepths = 2\n"
                   "restarts = 1\nepochs = 4\nbatch_size = 8\nthreshold = 0.6\n")
    out_dir = str(tmp_path / "res")
    run(capsys, "grid", "--config", str(cfg), "--out-dir", out_dir)
    assert (tmp_path / "res" / "results.csv").read_text().startswith(
        "n,p,d,w,scheme,seed,restart,train_acc,test_acc,epochs")
    summary = json.loads(run(capsys, "analyze", "--config", str(cfg), "--out-dir", out_dir))
    assert "12" in summary["critical_capacity"]
    assert (tmp_path / "res" / "critical.csv").exists()
