"""GIN-style network with residual connections and hand-written gradients.

Layer ``l`` maps node states ``H`` to::

    Z = (A + I) H                       # sum over closed neighbourhoods
    H' = act(act(Z W1 + b1) W2 + b2) [+ H when residual and shapes agree]

The graph readout sums the final node states and a two-layer head produces
one logit per graph.  Several graphs are processed at once through a
block-diagonal adjacency matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..graph import AttributedGraph

__all__ = [
    "GinNetwork",
    "GraphBatch",
    "backward",
    "bce_loss",
    "finite_difference_gradient",
    "forward_train",
    "init_network",
    "loss_and_grad",
    "make_batch",
]

def _rowwise(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``X @ W`` with every row computed by the same instruction sequence.

    BLAS kernels round differently depending on where a row falls in the
    blocking, so identical nodes could end up with states that differ in the
    last bit.  The plain einsum loop avoids that.
    """
    return np.einsum("ij,jk->ik", X, W, optimize=False)


ACTIVATIONS = {
    "relu": (lambda x: np.maximum(x, 0.0), lambda x, y: (x > 0).astype(x.dtype)),
    "tanh": (np.tanh, lambda x, y: 1.0 - y * y),
}


@dataclass
class GinNetwork:
    """Parameters plus the shape contract.

    ``layers[l]`` is ``(W1, b1, W2, b2)``; ``head`` is ``(V1, c1, V2, c2)``.
    """

    in_dim: int
    depth: int
    width: int
    layers: list
    head: list
    residual: bool = True
    activation: str = "relu"

    @property
    def capacity(self) -> int:
        return self.depth * self.width

    def arrays(self) -> list[np.ndarray]:
        return [a for layer in self.layers for a in layer] + list(self.head)

    def set_arrays(self, arrays) -> None:
        arrays = list(arrays)
        k = 0
        for layer in self.layers:
            for t in range(4):
                layer[t] = arrays[k]
                k += 1
        for t in range(4):
            self.head[t] = arrays[k]
            k += 1

    def copy(self) -> "GinNetwork":
        return GinNetwork(self.in_dim, self.depth, self.width,
                          [[a.copy() for a in layer] for layer in self.layers],
                          [a.copy() for a in self.head], self.residual, self.activation)

    def to_json(self) -> dict:
        return {
            "in_dim": self.in_dim, "depth": self.depth, "width": self.width,
            "residual": self.residual, "activation": self.activation,
            "layers": [[a.tolist() for a in layer] for layer in self.layers],
            "head": [a.tolist() for a in self.head],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GinNetwork":
        return cls(data["in_dim"], data["depth"], data["width"],
                   [[np.asarray(a, dtype=float) for a in layer] for layer in data["layers"]],
                   [np.asarray(a, dtype=float) for a in data["head"]],
                   data["residual"], data["activation"])


def _uniform(rng, fan_in, shape):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_network(in_dim: int, depth: int, width: int, rng: np.random.Generator | None = None,
                 residual: bool = True, activation: str = "relu",
                 zero: bool = False) -> GinNetwork:
    """Uniform fan-in scaled weights, or all zeros when ``zero`` is set."""
    if min(in_dim, depth, width) < 1:
        raise ValueError("in_dim, depth and width must be positive")
    if activation not in ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    if rng is None:
        rng = np.random.default_rng(0)

    def mat(fan_in, shape):
        return np.zeros(shape) if zero else _uniform(rng, fan_in, shape)

    layers = []
    dim = in_dim
    for _ in range(depth):
        layers.append([mat(dim, (dim, width)), mat(dim, width),
                       mat(width, (width, width)), mat(width, width)])
        dim = width
    head = [mat(width, (width, width)), mat(width, width),
            mat(width, (width, 1)), mat(width, 1)]
    return GinNetwork(in_dim, depth, width, layers, head, residual, activation)


@dataclass
class GraphBatch:
    adj: sp.csr_matrix       # block-diagonal A + I
    pool: sp.csr_matrix      # graph-by-node membership
    X: np.ndarray
    sizes: np.ndarray

    @property
    def n_graphs(self) -> int:
        return self.pool.shape[0]


def make_batch(graphs: list[AttributedGraph], features: list[np.ndarray]) -> GraphBatch:
    if len(graphs) != len(features):
        raise ValueError("one feature matrix per graph is required")
    rows, cols, offset, owner = [], [], 0, []
    for k, (g, X) in enumerate(zip(graphs, features)):
        if X.shape[0] != g.n:
            raise ValueError(f"graph {k} has {g.n} nodes but {X.shape[0]} feature rows")
        for i, j in g.edges:
            rows += [offset + i, offset + j]
            cols += [offset + j, offset + i]
        rows += range(offset, offset + g.n)
        cols += range(offset, offset + g.n)
        owner += [k] * g.n
        offset += g.n
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(offset, offset))
    pool = sp.csr_matrix((np.ones(offset), (owner, np.arange(offset))),
                         shape=(len(graphs), offset))
    return GraphBatch(adj, pool, np.vstack(features).astype(float),
                      np.array([g.n for g in graphs]))


def forward_train(net: GinNetwork, batch: GraphBatch, X: np.ndarray | None = None):
    """Logits ``(n_graphs,)`` and the activations needed by :func:`backward`."""
    act, _ = ACTIVATIONS[net.activation]
    H = batch.X if X is None else X
    if H.shape[1] != net.in_dim:
        raise ValueError(f"features have {H.shape[1]} columns, network expects {net.in_dim}")
    cache = {"layers": []}
    for W1, b1, W2, b2 in net.layers:
        Z = batch.adj @ H
        Up = _rowwise(Z, W1) + b1
        U = act(Up)
        Op = _rowwise(U, W2) + b2
        O = act(Op)
        skip = net.residual and H.shape[1] == O.shape[1]
        cache["layers"].append((H, Z, Up, U, Op, O, skip))
        H = O + H if skip else O
    V1, c1, V2, c2 = net.head
    S = batch.pool @ H
    Tp = _rowwise(S, V1) + c1
    T = act(Tp)
    y = (_rowwise(T, V2) + c2)[:, 0]
    cache.update(S=S, Tp=Tp, T=T, H=H)
    return y, cache


def bce_loss(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy on logits and its gradient."""
    loss = np.mean(np.logaddexp(0.0, logits) - targets * logits)
    prob = 0.5 * (1.0 + np.tanh(0.5 * logits))
    return float(loss), (prob - targets) / len(logits)


def backward(net: GinNetwork, batch: GraphBatch, cache: dict, dlogits: np.ndarray):
    """Gradients in the order of :meth:`GinNetwork.arrays`."""
    _, dact = ACTIVATIONS[net.activation]
    V1, c1, V2, c2 = net.head
    dy = dlogits[:, None]
    T, Tp, S = cache["T"], cache["Tp"], cache["S"]
    gV2 = T.T @ dy
    gc2 = dy.sum(axis=0)
    dTp = (dy @ V2.T) * dact(Tp, T)
    gV1 = S.T @ dTp
    gc1 = dTp.sum(axis=0)
    dS = dTp @ V1.T
    dH = batch.pool.T @ dS
    layer_grads = []
    for (W1, b1, W2, b2), (H, Z, Up, U, Op, O, skip) in zip(reversed(net.layers),
                                                            reversed(cache["layers"])):
        dOp = dH * dact(Op, O)
        gW2 = U.T @ dOp
        gb2 = dOp.sum(axis=0)
        dUp = (dOp @ W2.T) * dact(Up, U)
        gW1 = Z.T @ dUp
        gb1 = dUp.sum(axis=0)
        dZ = dUp @ W1.T
        dH_prev = batch.adj.T @ dZ
        if skip:
            dH_prev = dH_prev + dH
        layer_grads.append([gW1, gb1, gW2, gb2])
        dH = dH_prev
    layer_grads.reverse()
    return [g for layer in layer_grads for g in layer] + [gV1, gc1, gV2, gc2]


def loss_and_grad(net: GinNetwork, batch: GraphBatch, targets: np.ndarray,
                  X: np.ndarray | None = None):
    logits, cache = forward_train(net, batch, X)
    loss, dlogits = bce_loss(logits, targets)
    return loss, backward(net, batch, cache, dlogits), logits


def finite_difference_gradient(net: GinNetwork, batch: GraphBatch, targets: np.ndarray,
                               eps: float = 1e-6) -> list[np.ndarray]:
    """Central differences of the loss with respect to every parameter."""
    grads = []
    for a in net.arrays():
        g = np.zeros_like(a)
        flat, gflat = a.reshape(-1), g.reshape(-1)
        for k in range(flat.size):
            old = flat[k]
            flat[k] = old + eps
            up = bce_loss(forward_train(net, batch)[0], targets)[0]
            flat[k] = old - eps
            down = bce_loss(forward_train(net, batch)[0], targets)[0]
            flat[k] = old
            gflat[k] = (up - down) / (2 * eps)
        grads.append(g)
    return grads
