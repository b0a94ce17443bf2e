"""Input checks shared by the estimators."""
from __future__ import annotations

import numpy as np

from ..graph import AttributedGraph


def check_graphs(graphs) -> list[AttributedGraph]:
    graphs = list(graphs)
    if not graphs:
        raise ValueError("expected at least one graph")
    for k, g in enumerate(graphs):
        if not isinstance(g, AttributedGraph):
            raise TypeError(f"item {k} is {type(g).__name__}, expected AttributedGraph")
    return graphs


def check_binary_labels(y, n_graphs: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n_graphs:
        raise ValueError(f"expected {n_graphs} labels, got shape {y.shape}")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return y.astype(float)


def check_positive(**values) -> None:
    for name, v in values.items():
        if v is not None and not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
