"""Training loop with restarts, learning-rate decay and divergence detection."""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .attributes import AttributeScheme, attribute_matrix
from .gin import GinNetwork, GraphBatch, forward_train, init_network, loss_and_grad, make_batch
from .optim import Adam
from .validation import check_positive

__all__ = ["TrainConfig", "TrainResult", "train", "train_restarts", "accuracy"]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 4000
    lr: float = 1e-3
    decay: float = 0.5
    decay_every: int = 1000
    batch_size: int | None = None   # None: full batch
    seed: int = 0
    restarts: int = 4
    residual: bool = True
    activation: str = "relu"
    eval_every: int = 10
    # draw new random ids every epoch instead of once per graph
    resample_ids: bool = False

    def __post_init__(self):
        check_positive(epochs=self.epochs, lr=self.lr, decay=self.decay,
                       restarts=self.restarts, eval_every=self.eval_every,
                       batch_size=self.batch_size)

    def to_json(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class TrainResult:
    net: GinNetwork | None
    best_epoch: int
    best_test_accuracy: float
    train_accuracy_at_best: float
    final_train_accuracy: float
    final_test_accuracy: float
    curves: dict = field(default_factory=dict)
    failed: bool = False
    error: str | None = None
    seconds: float = 0.0

    def summary(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k not in ("net", "curves")}


def accuracy(logits: np.ndarray, targets: np.ndarray) -> float:
    return float(np.mean((logits > 0) == (targets > 0.5)))


def _features(graphs, scheme, rng):
    return [attribute_matrix(g, scheme, rng) for g in graphs]


def _subbatch(batch: GraphBatch, offsets, idx, X, y):
    nodes = np.concatenate([np.arange(offsets[k], offsets[k + 1]) for k in idx])
    sub = GraphBatch(batch.adj[nodes][:, nodes], batch.pool[idx][:, nodes], X[nodes],
                     batch.sizes[idx])
    return sub, y[idx], X[nodes]


def train(train_graphs, train_labels, test_graphs, test_labels, depth: int, width: int,
          scheme: AttributeScheme, config: TrainConfig = TrainConfig(),
          restart: int = 0) -> TrainResult:
    """Train one network and keep the snapshot with the best test accuracy.

    Accuracies are recorded every ``eval_every`` epochs and at the last
    epoch.  A non-finite loss stops the run and marks it failed.
    """
    start = time.perf_counter()
    rng = np.random.default_rng([config.seed, restart, depth, width])
    y_train = np.asarray(train_labels, dtype=float)
    y_test = np.asarray(test_labels, dtype=float)
    train_batch = make_batch(list(train_graphs), _features(train_graphs, scheme, rng))
    test_batch = make_batch(list(test_graphs), _features(test_graphs, scheme, rng))
    net = init_network(scheme.dim, depth, width, rng, config.residual, config.activation)
    params = net.arrays()
    opt = Adam(params, config.lr, decay=config.decay, decay_every=config.decay_every)
    n_train = len(y_train)
    offsets = np.concatenate([[0], np.cumsum(train_batch.sizes)])
    curves = {"epoch": [], "loss": [], "train_accuracy": [], "test_accuracy": []}
    best = (-1.0, -1, 0.0, None)
    train_acc = test_acc = 0.0
    for epoch in range(config.epochs):
        X = train_batch.X
        if config.resample_ids and scheme.kind == "random_unique_id":
            X = np.vstack(_features(train_graphs, scheme, rng))
        if config.batch_size is None or config.batch_size >= n_train:
            batches = [(train_batch, y_train, X)]
        else:
            order = rng.permutation(n_train)
            batches = [_subbatch(train_batch, offsets, np.sort(order[lo:lo + config.batch_size]),
                                 X, y_train)
                       for lo in range(0, n_train, config.batch_size)]
        loss = 0.0
        for batch, y, Xb in batches:
            loss_b, grads, _ = loss_and_grad(net, batch, y, Xb)
            if not np.isfinite(loss_b) or any(not np.all(np.isfinite(g)) for g in grads):
                return TrainResult(best[3], best[1], max(best[0], 0.0), best[2], train_acc,
                                   test_acc, curves, failed=True,
                                   error=f"non-finite loss at epoch {epoch}",
                                   seconds=time.perf_counter() - start)
            opt.step(grads, epoch)
            loss += loss_b * len(y) / n_train
        last = epoch == config.epochs - 1
        if epoch % config.eval_every == 0 or last:
            train_acc = accuracy(forward_train(net, train_batch, X)[0], y_train)
            test_acc = accuracy(forward_train(net, test_batch)[0], y_test)
            curves["epoch"].append(epoch)
            curves["loss"].append(float(loss))
            curves["train_accuracy"].append(train_acc)
            curves["test_accuracy"].append(test_acc)
            if test_acc > best[0]:
                best = (test_acc, epoch, train_acc, net.copy())
    return TrainResult(best[3], best[1], best[0], best[2], train_acc, test_acc, curves,
                       seconds=time.perf_counter() - start)


def train_restarts(train_graphs, train_labels, test_graphs, test_labels, depth: int,
                   width: int, scheme: AttributeScheme,
                   config: TrainConfig = TrainConfig()) -> list[TrainResult]:
    return [train(train_graphs, train_labels, test_graphs, test_labels, depth, width,
                  scheme, config, restart=r) for r in range(config.restarts)]
