import pytest

from gnnlocal.experiments import (RESULT_COLUMNS, ExperimentConfig, RecordStore, RunRecord,
                                  ablation, best_accuracy_by_n, critical_capacity,
                                  emit_results, normalize_phase_plot, parse_config_text,
                                  read_results_csv, run_grid)

TINY = dict(ps=(3,), train_size=24, test_size=12, widths=(4,), depths=(2,), restarts=1,
            epochs=6, batch_size=8, eval_every=2)


def rec(n, d, w, test, failed=False, scheme="unique_id_onehot", restart=0):
    return RunRecord(run_id=f"{n}-{d}-{w}-{restart}", n=n, p=n // 4, d=d, w=w, scheme=scheme,
                     seed=0, restart=restart, train_acc=test, test_acc=test,
                     final_train_acc=test, final_test_acc=test, best_epoch=0, epochs=1,
                     failed=failed)


def test_config_parsing():
    values = parse_config_text("ps = 6, 8  # two sizes\nbatch_size = none\n\nresidual = no\n")
    cfg = ExperimentConfig.from_mapping(values)
    assert cfg.ps == (6, 8) and cfg.batch_size is None and cfg.residual is False
    with pytest.raises(ValueError):
        ExperimentConfig.from_mapping({"colour": "red"})
    with pytest.raises(ValueError):
        parse_config_text("just words")
    with pytest.raises(ValueError):
        ExperimentConfig(threshold=0.2)


def test_critical_capacity_is_strict_and_skips_failures():
    records = [rec(24, 5, 2, 0.95), rec(24, 5, 10, 0.96), rec(24, 2, 5, 1.0, failed=True),
               rec(32, 10, 20, 0.99)]
    assert critical_capacity(records, 24) == 50
    assert critical_capacity(records, 32) == 200
    assert critical_capacity(records, 40) is None


def test_phase_plot_normalisation():
    rows = normalize_phase_plot([rec(24, 5, 20, 1.0), rec(24, 5, 2, 0.6)], {24: 100})
    assert rows[0]["x"] == pytest.approx(0.5) and rows[0]["y"] == pytest.approx(2.0)
    assert [r["subcritical"] for r in rows] == [False, True]
    with pytest.raises(KeyError):
        normalize_phase_plot([rec(32, 5, 2, 0.5)], {24: 100})


def test_best_accuracy_by_n():
    records = [rec(24, 5, 2, 0.8), rec(24, 5, 2, 0.9, restart=1), rec(32, 5, 2, 0.7),
               rec(32, 10, 2, 0.99)]
    assert best_accuracy_by_n(records, capacity=10) == {24: 0.9, 32: 0.7}
    assert best_accuracy_by_n(records) == {24: 0.9, 32: 0.99}


def test_grid_is_resumable(tmp_path):
    cfg = ExperimentConfig(**TINY)
    store = RecordStore(tmp_path)
    first = run_grid(cfg, store)
    assert len(first) == 1 and first[0].n == 12
    assert set(store.curves(first[0])) == {"epoch", "loss", "train_accuracy", "test_accuracy"}
    again = run_grid(cfg, store)
    assert again == first
    assert len(open(store.path).readlines()) == 1
    wider = ExperimentConfig.from_mapping({"widths": (4, 6)}, base=cfg)
    assert len(run_grid(wider, store)) == 2
    assert len(store.load()) == 2


def test_ablation_report(tmp_path):
    cfg = ExperimentConfig(**TINY)
    report = ablation(cfg, RecordStore(tmp_path), 3, 2, 4)
    assert set(report["schemes"]) == {"anonymous", "degree_onehot", "unique_id_onehot",
                                      "random_unique_id"}
    assert isinstance(report["ordering_holds"], bool)
    rnd = report["schemes"]["random_unique_id"]
    assert report["random_gap"] == pytest.approx(
        100 * (rnd["final_train_acc"] - rnd["final_test_acc"]))


def test_results_files(tmp_path):
    records = [rec(32, 5, 2, 0.5), rec(24, 5, 2, 0.75)]
    paths = emit_results(records, tmp_path)
    assert len(paths) == 2
    header = open(paths[0]).readline().strip().split(",")
    assert tuple(header) == RESULT_COLUMNS
    rows = read_results_csv(paths[0])
    assert [r["n"] for r in rows] == [24, 32] and rows[0]["test_acc"] == 0.75


def test_run_record_rejects_bad_accuracy():
    with pytest.raises(ValueError):
        rec(24, 1, 1, 1.5)
