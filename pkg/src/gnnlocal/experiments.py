"""Grid search over depth and width, capacity analysis and attribute ablation.

Runs are content addressed: the id of a run hashes everything that
determines its outcome, and finished runs live in an append-only JSONL
store, so re-running a grid only trains what is missing.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, fields

from .lowerbound import sample_balanced_cycle_dataset
from .train.attributes import AttributeScheme
from .train.trainer import TrainConfig, train

__all__ = [
    "RESULT_COLUMNS",
    "ExperimentConfig",
    "RecordStore",
    "RunRecord",
    "ablation",
    "best_accuracy_by_n",
    "critical_capacity",
    "emit_results",
    "load_datasets",
    "normalize_phase_plot",
    "parse_config_text",
    "run_grid",
]

RESULT_COLUMNS = ("n", "p", "d", "w", "scheme", "seed", "restart", "train_acc",
                  "test_acc", "epochs")


def _tuple_of(kind):
    def conv(value):
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split() if v]
        return tuple(kind(v) for v in value)
    return conv


def _bool(value):
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def _optional_int(value):
    if value is None or str(value).strip().lower() in ("", "none", "full"):
        return None
    return int(value)


@dataclass(frozen=True)
class ExperimentConfig:
    ps: tuple = (6, 8, 10, 12, 14)
    k: int = 4
    train_size: int = 1000
    test_size: int = 200
    density: float = 0.45
    widths: tuple = (2, 10, 20)
    depths: tuple = (5, 10, 15, 20)
    restarts: int = 4
    schemes: tuple = ("unique_id_onehot",)
    seed: int = 0
    threshold: float = 0.95
    epochs: int = 4000
    lr: float = 1e-3
    decay: float = 0.5
    decay_every: int = 1000
    batch_size: int | None = None
    activation: str = "relu"
    residual: bool = True
    eval_every: int = 10

    _CONVERTERS = {
        "ps": _tuple_of(int), "widths": _tuple_of(int), "depths": _tuple_of(int),
        "schemes": _tuple_of(str), "k": int, "train_size": int, "test_size": int,
        "density": float, "restarts": int, "seed": int, "threshold": float,
        "epochs": int, "lr": float, "decay": float, "decay_every": int,
        "batch_size": _optional_int, "activation": str, "residual": _bool,
        "eval_every": int,
    }

    def __post_init__(self):
        for f in fields(self):
            conv = self._CONVERTERS.get(f.name)
            if conv is not None:
                object.__setattr__(self, f.name, conv(getattr(self, f.name)))
        if not (self.ps and self.widths and self.depths and self.schemes):
            raise ValueError("the grid must be non-empty")
        if not 0.5 < self.threshold <= 1:
            raise ValueError("threshold must lie in (0.5, 1]")
        if self.restarts < 1:
            raise ValueError("at least one restart is required")

    @classmethod
    def from_mapping(cls, values: dict, base: "ExperimentConfig | None" = None):
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged = asdict(base) if base is not None else {}
        merged.update(values)
        return cls(**merged)

    def train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, lr=self.lr, decay=self.decay,
                           decay_every=self.decay_every, batch_size=self.batch_size,
                           seed=self.seed, restarts=self.restarts, residual=self.residual,
                           activation=self.activation, eval_every=self.eval_every)

    def dataset_key(self, p: int) -> dict:
        return {"p": p, "k": self.k, "train": self.train_size, "test": self.test_size,
                "density": self.density, "seed": self.seed}


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    n: int
    p: int
    d: int
    w: int
    scheme: str
    seed: int
    restart: int
    train_acc: float
    test_acc: float
    final_train_acc: float
    final_test_acc: float
    best_epoch: int
    epochs: int
    failed: bool = False
    error: str | None = None
    curves: str | None = None

    def __post_init__(self):
        for name in ("train_acc", "test_acc", "final_train_acc", "final_test_acc"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def capacity(self) -> int:
        return self.d * self.w

    def to_json(self) -> dict:
        return asdict(self)


def _hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


class RecordStore:
    """Append-only JSONL file of :class:`RunRecord` plus per-run curve files."""

    def __init__(self, directory):
        self.directory = str(directory)
        os.makedirs(os.path.join(self.directory, "curves"), exist_ok=True)
        self.path = os.path.join(self.directory, "records.jsonl")

    def load(self) -> dict[str, RunRecord]:
        records = {}
        if os.path.exists(self.path):
            with open(self.path) as fh:
                for line in fh:
                    if line.strip():
                        rec = RunRecord(**json.loads(line))
                        records.setdefault(rec.run_id, rec)
        return records

    def append(self, record: RunRecord, curves: dict | None = None) -> None:
        if curves is not None:
            with open(os.path.join(self.directory, record.curves), "w") as fh:
                json.dump(curves, fh)
        with open(self.path, "a") as fh:
            fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")

    def curves(self, record: RunRecord) -> dict:
        with open(os.path.join(self.directory, record.curves)) as fh:
            return json.load(fh)


_DATASETS: dict = {}


def load_datasets(config: ExperimentConfig, p: int):
    """Deterministic train and test sets for one distribution (memoised)."""
    key = json.dumps(config.dataset_key(p), sort_keys=True)
    if key not in _DATASETS:
        tr = sample_balanced_cycle_dataset(p, config.train_size, seed=config.seed * 1000 + 2 * p,
                                           k=config.k, density=config.density)
        te = sample_balanced_cycle_dataset(p, config.test_size,
                                           seed=config.seed * 1000 + 2 * p + 1,
                                           k=config.k, density=config.density)
        _DATASETS[key] = (tr, te)
    return _DATASETS[key]


def _cells(config: ExperimentConfig):
    for p in config.ps:
        for scheme in config.schemes:
            for d in config.depths:
                for w in config.widths:
                    for r in range(config.restarts):
                        yield p, scheme, d, w, r


def _run_id(config: ExperimentConfig, p, scheme, d, w, restart) -> str:
    return _hash({"data": config.dataset_key(p), "scheme": scheme, "d": d, "w": w,
                  "restart": restart, "train": config.train_config().to_json()})


def _run_cell(config: ExperimentConfig, p, scheme, d, w, restart):
    run_id = _run_id(config, p, scheme, d, w, restart)
    (trg, trl, trm), (teg, tel, _) = load_datasets(config, p)
    n = int(trm["n_max"])
    base = dict(run_id=run_id, n=n, p=p, d=d, w=w, scheme=scheme, seed=config.seed,
                restart=restart, epochs=config.epochs, curves=f"curves/{run_id}.json")
    try:
        sch = AttributeScheme.for_graphs(scheme, trg + teg)
        res = train(trg, trl, teg, tel, d, w, sch, config.train_config(), restart=restart)
    except Exception as exc:  # recorded, not fatal
        return RunRecord(train_acc=0.0, test_acc=0.0, final_train_acc=0.0,
                         final_test_acc=0.0, best_epoch=-1, failed=True,
                         error=f"{type(exc).__name__}: {exc}", **base), {}
    rec = RunRecord(train_acc=res.train_accuracy_at_best,
                    test_acc=max(res.best_test_accuracy, 0.0),
                    final_train_acc=res.final_train_accuracy,
                    final_test_acc=res.final_test_accuracy,
                    best_epoch=res.best_epoch, failed=res.failed, error=res.error, **base)
    return rec, res.curves


def run_grid(config: ExperimentConfig, store: RecordStore, n_jobs: int = 1,
             progress=None) -> list[RunRecord]:
    """Train every (distribution, scheme, depth, width, restart) cell.

    Cells whose run id is already in ``store`` are skipped.  Returns the
    records of every cell in grid order.
    """
    done = store.load()
    todo = [c for c in _cells(config) if _run_id(config, *c) not in done]
    if n_jobs == 1:
        for cell in todo:
            rec, curves = _run_cell(config, *cell)
            store.append(rec, curves)
            done[rec.run_id] = rec
            if progress:
                progress(rec)
    elif todo:
        from joblib import Parallel, delayed
        results = Parallel(n_jobs=n_jobs, return_as="generator")(
            delayed(_run_cell)(config, *cell) for cell in todo)
        for rec, curves in results:
            store.append(rec, curves)
            done[rec.run_id] = rec
            if progress:
                progress(rec)
    return [done[_run_id(config, *c)] for c in _cells(config)]


# -- analysis --------------------------------------------------------------------

def critical_capacity(records, n: int, threshold: float = 0.95) -> int | None:
    """Smallest ``d*w`` among runs on ``n`` nodes with test accuracy above
    ``threshold`` (strictly), or ``None``."""
    caps = [r.d * r.w for r in records if r.n == n and not r.failed and r.test_acc > threshold]
    return min(caps) if caps else None


def normalize_phase_plot(records, critical: dict) -> list[dict]:
    """Depth and width scaled by the square root of each size's critical
    capacity; ``subcritical`` marks ``d*w`` below it."""
    rows = []
    for r in records:
        if critical.get(r.n) is None:
            raise KeyError(f"no critical capacity for n={r.n}")
        c = critical[r.n]
        rows.append({"n": r.n, "d": r.d, "w": r.w, "x": r.d / math.sqrt(c),
                     "y": r.w / math.sqrt(c), "accuracy": r.test_acc,
                     "subcritical": r.d * r.w < c})
    return rows


def best_accuracy_by_n(records, capacity: int | None = None) -> dict[int, float]:
    """Best test accuracy per node count, optionally at one capacity ``d*w``."""
    best: dict[int, float] = {}
    for r in records:
        if r.failed or (capacity is not None and r.d * r.w != capacity):
            continue
        best[r.n] = max(best.get(r.n, 0.0), r.test_acc)
    return dict(sorted(best.items()))


SCHEME_ORDER = ("anonymous", "degree_onehot", "unique_id_onehot")


def ablation(config: ExperimentConfig, store: RecordStore, p: int, d: int, w: int,
             schemes=("anonymous", "degree_onehot", "unique_id_onehot", "random_unique_id"),
             n_jobs: int = 1) -> dict:
    """Train every scheme at one cell and compare final accuracies.

    For each scheme the restart with the highest final train accuracy is
    reported.  ``ordering_holds`` checks anonymous <= degree <= unique id on
    final train accuracy; ``random_gap`` is the train-test gap of the random
    id scheme in accuracy points.
    """
    cfg = ExperimentConfig.from_mapping({"ps": (p,), "depths": (d,), "widths": (w,),
                                         "schemes": tuple(schemes)}, base=config)
    records = run_grid(cfg, store, n_jobs)
    table = {}
    for scheme in schemes:
        runs = [r for r in records if r.scheme == scheme and not r.failed]
        if not runs:
            table[scheme] = None
            continue
        top = max(runs, key=lambda r: (r.final_train_acc, r.final_test_acc))
        table[scheme] = {"final_train_acc": top.final_train_acc,
                         "final_test_acc": top.final_test_acc,
                         "best_test_acc": max(r.test_acc for r in runs),
                         "run_id": top.run_id}
    present = [s for s in SCHEME_ORDER if table.get(s)]
    trains = [table[s]["final_train_acc"] for s in present]
    ordering = len(present) == len(SCHEME_ORDER) and all(a <= b for a, b in zip(trains, trains[1:]))
    rnd = table.get("random_unique_id")
    gap = 100 * (rnd["final_train_acc"] - rnd["final_test_acc"]) if rnd else None
    return {"p": p, "d": d, "w": w, "schemes": table, "ordering_holds": ordering,
            "random_gap": gap, "records": [r.run_id for r in records]}


def _row(r: RunRecord) -> dict:
    return {"n": r.n, "p": r.p, "d": r.d, "w": r.w, "scheme": r.scheme, "seed": r.seed,
            "restart": r.restart, "train_acc": r.train_acc, "test_acc": r.test_acc,
            "epochs": r.epochs}


def emit_results(records, out_dir, formats=("csv", "json")) -> list[str]:
    """Write ``results.csv`` / ``results.json`` with the columns of
    :data:`RESULT_COLUMNS`, sorted by those columns."""
    os.makedirs(out_dir, exist_ok=True)
    rows = sorted((_row(r) for r in records), key=lambda row: tuple(row[c] for c in RESULT_COLUMNS))
    written = []
    if "csv" in formats:
        path = os.path.join(out_dir, "results.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        written.append(path)
    if "json" in formats:
        path = os.path.join(out_dir, "results.json")
        with open(path, "w") as fh:
            json.dump({"columns": list(RESULT_COLUMNS), "rows": rows}, fh, indent=1)
        written.append(path)
    return written


def read_results_csv(path) -> list[dict]:
    conv = {"n": int, "p": int, "d": int, "w": int, "scheme": str, "seed": int,
            "restart": int, "train_acc": float, "test_acc": float, "epochs": int}
    with open(path, newline="") as fh:
        return [{k: conv[k](v) for k, v in row.items()} for row in csv.DictReader(fh)]
