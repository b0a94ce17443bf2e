"""Node attribute schemes for the learned networks."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..graph import AttributedGraph
from .validation import check_graphs

SCHEMES = ("anonymous", "degree_onehot", "unique_id_onehot", "random_unique_id")

__all__ = ["SCHEMES", "AttributeEncoder", "AttributeScheme", "assign_attributes",
           "attribute_matrix"]


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class AttributeScheme:
    kind: str
    dim: int = 1

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise SchemeError(f"unknown scheme {self.kind!r}; choose from {SCHEMES}")
        if self.dim < 1:
            raise SchemeError("scheme dimension must be positive")

    @classmethod
    def for_graphs(cls, kind: str, graphs) -> "AttributeScheme":
        """Smallest dimension covering every graph in ``graphs``."""
        if kind == "anonymous":
            return cls(kind, 1)
        if kind == "degree_onehot":
            return cls(kind, max(max(g.degrees, default=0) for g in graphs) + 1)
        return cls(kind, max(g.n for g in graphs))


def attribute_matrix(g: AttributedGraph, scheme: AttributeScheme,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """``(n, dim)`` float matrix of node attributes under ``scheme``.

    ``random_unique_id`` draws a fresh injective id assignment from ``rng``.
    """
    X = np.zeros((g.n, scheme.dim))
    if scheme.kind == "anonymous":
        X[:, 0] = 1.0
        return X
    if scheme.kind == "degree_onehot":
        slots = np.asarray(g.degrees, dtype=int)
        what = "degree"
    elif scheme.kind == "unique_id_onehot":
        slots = np.asarray(g.ids, dtype=int)
        what = "id"
    else:
        if rng is None:
            raise SchemeError("random_unique_id needs a random generator")
        slots = rng.permutation(scheme.dim)[:g.n]
        what = "node count"
    if g.n and slots.max() >= scheme.dim:
        raise SchemeError(f"{what} {int(slots.max())} exceeds scheme dimension {scheme.dim}")
    X[np.arange(g.n), slots] = 1.0
    return X


def assign_attributes(g: AttributedGraph, scheme: AttributeScheme,
                      seed: int | None = None) -> AttributedGraph:
    """Copy of ``g`` whose node attributes follow ``scheme``."""
    rng = np.random.default_rng(seed) if scheme.kind == "random_unique_id" else None
    X = attribute_matrix(g, scheme, rng)
    attrs = tuple(tuple(Fraction(int(v)) for v in row) for row in X)
    return replace(g, node_attr=attrs)


class AttributeEncoder(TransformerMixin, BaseEstimator):
    """Transformer from graphs to per-graph attribute matrices.

    ``fit`` sizes the one-hot dimension from the training graphs;
    ``transform`` returns a list of ``(n_i, dim)`` arrays.  Random ids are
    drawn from ``random_state`` and differ across graphs.
    """

    def __init__(self, scheme: str = "unique_id_onehot", dim: int | None = None,
                 random_state: int | None = 0):
        self.scheme = scheme
        self.dim = dim
        self.random_state = random_state

    def fit(self, graphs, y=None):
        graphs = check_graphs(graphs)
        if self.dim is None:
            self.scheme_ = AttributeScheme.for_graphs(self.scheme, graphs)
        else:
            self.scheme_ = AttributeScheme(self.scheme, self.dim)
        self.n_features_out_ = self.scheme_.dim
        return self

    def transform(self, graphs, rng: np.random.Generator | None = None):
        check_is_fitted(self, "scheme_")
        graphs = check_graphs(graphs)
        if rng is None:
            rng = np.random.default_rng(self.random_state)
        return [attribute_matrix(g, self.scheme_, rng) for g in graphs]
