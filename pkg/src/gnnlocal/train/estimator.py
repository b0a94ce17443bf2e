"""scikit-learn style classifier over lists of graphs."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .attributes import AttributeScheme, attribute_matrix
from .gin import forward_train, make_batch
from .trainer import TrainConfig, train
from .validation import check_binary_labels, check_graphs, check_positive


class GinClassifier(ClassifierMixin, BaseEstimator):
    """Binary graph classifier backed by :func:`gnnlocal.train.trainer.train`.

    ``fit`` trains ``restarts`` networks and keeps the one with the best
    accuracy on the validation graphs (``validation`` argument to ``fit``,
    defaulting to the training graphs themselves).
    """

    def __init__(self, depth: int = 5, width: int = 10, scheme: str = "unique_id_onehot",
                 epochs: int = 4000, lr: float = 1e-3, decay: float = 0.5,
                 decay_every: int = 1000, batch_size: int | None = None,
                 restarts: int = 1, residual: bool = True, activation: str = "relu",
                 scheme_dim: int | None = None, random_state: int = 0):
        self.depth = depth
        self.width = width
        self.scheme = scheme
        self.epochs = epochs
        self.lr = lr
        self.decay = decay
        self.decay_every = decay_every
        self.batch_size = batch_size
        self.restarts = restarts
        self.residual = residual
        self.activation = activation
        self.scheme_dim = scheme_dim
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, lr=self.lr, decay=self.decay,
                           decay_every=self.decay_every, batch_size=self.batch_size,
                           seed=self.random_state, restarts=self.restarts,
                           residual=self.residual, activation=self.activation)

    def fit(self, graphs, y, validation=None):
        graphs = check_graphs(graphs)
        y = check_binary_labels(y, len(graphs))
        check_positive(depth=self.depth, width=self.width)
        if validation is None:
            val_graphs, val_y = graphs, y
        else:
            val_graphs = check_graphs(validation[0])
            val_y = check_binary_labels(validation[1], len(val_graphs))
        if self.scheme_dim is None:
            self.scheme_ = AttributeScheme.for_graphs(self.scheme, graphs + val_graphs)
        else:
            self.scheme_ = AttributeScheme(self.scheme, self.scheme_dim)
        config = self._config()
        results = [train(graphs, y, val_graphs, val_y, self.depth, self.width,
                         self.scheme_, config, restart=r) for r in range(self.restarts)]
        ok = [r for r in results if r.net is not None]
        if not ok:
            raise RuntimeError("every restart diverged: " + "; ".join(r.error or "" for r in results))
        best = max(ok, key=lambda r: r.best_test_accuracy)
        self.network_ = best.net
        self.results_ = results
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, graphs) -> np.ndarray:
        check_is_fitted(self, "network_")
        graphs = check_graphs(graphs)
        rng = np.random.default_rng(self.random_state)
        batch = make_batch(graphs, [attribute_matrix(g, self.scheme_, rng) for g in graphs])
        return forward_train(self.network_, batch)[0]

    def predict_proba(self, graphs) -> np.ndarray:
        p = 1.0 / (1.0 + np.exp(-self.decision_function(graphs)))
        return np.column_stack([1.0 - p, p])

    def predict(self, graphs) -> np.ndarray:
        return (self.decision_function(graphs) > 0).astype(int)
