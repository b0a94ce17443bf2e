"""Exact message-passing GNN engine with fixed-precision state accounting.

A :class:`GnnNetwork` is a stack of :class:`GnnLayer` objects.  Layer ``l``
computes ``m_{i<-j} = msg(x_i, x_j, v_i, v_j, a_{i<-j})`` on every edge of
the self-loop closure, sums the messages of each node (vectors of different
lengths are zero padded) and applies ``up``.  Every scalar is rounded to the
nearest point of a ``p``-bit :class:`~gnnlocal.bits.FixedPoint` grid and an
out-of-range value raises :class:`~gnnlocal.bits.FixedPointOverflow`.

The module also holds the two directions of the GNN/LOCAL equivalence:
:func:`gnn_from_local` turns a node algorithm into a network whose states
carry the algorithm's bit strings, and :func:`local_from_gnn` turns a network
into a node algorithm whose states are the network's fixed-point bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import bits as B
from .bits import FixedPoint, FixedPointOverflow, ceil_log2
from .graph import AttributedGraph
from .local import Node, NodeAlgorithm

__all__ = [
    "GnnLayer",
    "GnnNetwork",
    "StateTrace",
    "congest_budget",
    "default_precision",
    "forward",
    "gnn_from_local",
    "local_from_gnn",
    "random_network",
    "readout",
    "reconstruction_network",
    "sum_layer",
    "trace_bits",
    "width",
    "width_budget",
    "zero_layer",
]

Vec = tuple


def default_precision(n: int) -> int:
    """``2 * ceil(log2 n)`` bits, never fewer than 4."""
    return max(4, 2 * ceil_log2(n))


def _zero_padded_sum(vectors: Sequence[Vec]) -> list:
    size = max((len(v) for v in vectors), default=0)
    total = [0] * size
    for v in vectors:
        for k, x in enumerate(v):
            if x:
                total[k] += x
    return total


@dataclass(frozen=True)
class GnnLayer:
    """One round of message passing.

    ``aggregate`` defaults to the zero-padded elementwise sum; a custom one
    must be invariant to the order of the messages it receives.
    """

    msg: Callable
    up: Callable
    aggregate: Callable | None = None
    name: str = "layer"


@dataclass(frozen=True)
class GnnNetwork:
    layers: tuple
    precision: int | None = None
    frac_bits: int = 0
    readout: Callable | None = None
    n: int | None = None
    # maps a state vector to its binary representation
    state_bits: Callable | None = field(default=None, compare=False)
    name: str = "network"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("a network needs at least one layer")

    @property
    def depth(self) -> int:
        return len(self.layers)

    def fixed_point(self, n: int) -> FixedPoint:
        p = self.precision if self.precision is not None else default_precision(n)
        if p < ceil_log2(n):
            raise ValueError(f"precision {p} cannot hold ids of a {n}-node graph")
        return FixedPoint(p, self.frac_bits)


@dataclass(frozen=True)
class StateTrace:
    """``states[l][i]`` is ``x_i^(l)``; layer 0 holds the input attributes."""

    states: tuple
    precision: int
    frac_bits: int
    ids: tuple

    @property
    def depth(self) -> int:
        return len(self.states) - 1

    @property
    def width(self) -> int:
        return max((len(x) for layer in self.states for x in layer), default=0)

    def terminal(self) -> tuple:
        return self.states[-1]

    def to_json(self) -> dict:
        def plain(x):
            x = Fraction(x)
            return int(x) if x.denominator == 1 else str(x)
        return {
            "precision": self.precision,
            "frac_bits": self.frac_bits,
            "ids": list(self.ids),
            "width": self.width,
            "layers": [[[plain(x) for x in v] for v in layer] for layer in self.states],
        }


def _quantize(fmt: FixedPoint, vec) -> Vec:
    if fmt.frac_bits == 0:
        lo, hi = fmt.min_code, fmt.max_code
        out = []
        for x in vec:
            if type(x) is not int:
                x = fmt.code(x)
            elif x < lo or x > hi:
                raise FixedPointOverflow(f"{x} outside the {fmt.p}-bit fixed-point range")
            out.append(x)
        return tuple(out)
    return tuple(fmt.quantize(x) for x in vec)


def forward(net: GnnNetwork, g: AttributedGraph) -> StateTrace:
    """Run every layer on ``g`` and return the per-layer states."""
    if net.n is not None and net.n != g.n:
        raise ValueError(f"network built for n={net.n}, graph has n={g.n}")
    fmt = net.fixed_point(g.n)
    closed = [g.closed_neighbors(i) for i in range(g.n)]
    x = [_quantize(fmt, g.node_attr[i]) for i in range(g.n)]
    states = [tuple(x)]
    for layer in net.layers:
        agg = layer.aggregate or _zero_padded_sum
        new = []
        for i in range(g.n):
            msgs = [_quantize(fmt, layer.msg(x[i], x[j], g.ids[i], g.ids[j], g.attr(i, j)))
                    for j in closed[i]]
            new.append(_quantize(fmt, layer.up(_quantize(fmt, agg(msgs)))))
        x = new
        states.append(tuple(x))
    return StateTrace(tuple(states), fmt.p, fmt.frac_bits, g.ids)


def width(trace: StateTrace) -> int:
    """Largest state dimension over all layers and nodes."""
    return trace.width


def readout(trace: StateTrace, read: Callable):
    """Graph-level output ``read`` applied to the terminal states."""
    return read(list(trace.terminal()))


def trace_bits(net: GnnNetwork, trace: StateTrace) -> list[list[str]]:
    """Binary representation of every state (layers 1..d)."""
    fmt = FixedPoint(trace.precision, trace.frac_bits)
    to_bits = net.state_bits or fmt.to_bits
    return [[to_bits(x) for x in layer] for layer in trace.states[1:]]


# -- simple layers --------------------------------------------------------------

def sum_layer() -> GnnLayer:
    """``msg = x_j``, ``up = identity``: sums closed-neighbourhood states."""
    return GnnLayer(lambda xi, xj, vi, vj, a: xj, lambda z: z, name="sum")


def zero_layer(dim: int = 1) -> GnnLayer:
    return GnnLayer(lambda xi, xj, vi, vj, a: (0,) * dim, lambda z: (0,) * dim,
                    name="zero")


def random_network(rng: np.random.Generator, depth: int, n: int,
                   precision: int | None = None, max_dim: int = 3) -> GnnNetwork:
    """Random integer network that never overflows on graphs with ``n`` nodes.

    Messages are small-integer linear maps of ``(x_i, x_j, v_i, v_j, a)``
    reduced modulo ``m`` so that a closed-neighbourhood sum stays in range;
    updates are linear maps reduced modulo ``2**(p-2)``.
    """
    p = precision if precision is not None else default_precision(n)
    msg_mod = max(2, (2 ** (p - 1) - 1) // n + 1)
    up_mod = 2 ** (p - 2)
    layers = []
    for _ in range(depth):
        out_msg = int(rng.integers(1, max_dim + 1))
        out_up = int(rng.integers(1, max_dim + 1))
        seed = int(rng.integers(2 ** 31))

        def msg(xi, xj, vi, vj, a, _seed=seed, _out=out_msg):
            feats = list(xi) + list(xj) + [vi, vj] + list(a)
            r = np.random.default_rng([_seed, len(feats)])
            W = r.integers(-1, 2, size=(_out, len(feats)))
            return tuple(int(sum(int(w) * int(f) for w, f in zip(row, feats))) % msg_mod
                         for row in W)

        def up(z, _seed=seed, _out=out_up):
            r = np.random.default_rng([_seed + 1, len(z)])
            U = r.integers(-1, 2, size=(_out, len(z)))
            return tuple(int(sum(int(u) * int(v) for u, v in zip(row, z))) % up_mod
                         for row in U)

        layers.append(GnnLayer(msg, up, name="random"))
    return GnnNetwork(tuple(layers), precision=p, name="random")


# -- GNN <-> LOCAL ----------------------------------------------------------------

def gnn_from_local(alg: NodeAlgorithm, depth: int, n: int,
                   precision: int | None = None) -> GnnNetwork:
    """Network whose layer-``l`` states encode the algorithm's round-``l`` states.

    A state bit string is stored as ``(p-1)``-bit chunks
    (:func:`~gnnlocal.bits.pack_chunks`).  The message from ``v_j`` to ``v_i``
    recomputes what ``v_j`` would send, appends ``a_{i<-j}``, and places the
    chunks at positions ``1 + k*n + v_j``; position 0 carries ``v_i + 1`` on
    the self-loop only.  Supports are disjoint, so the sum is an injective
    encoding of the received multiset, and ``up`` decodes it and runs
    ``alg1``.  Layer-0 states are the raw attributes.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    p = precision if precision is not None else default_precision(n)
    if n + 1 > 2 ** (p - 1):
        raise ValueError(f"precision {p} too small to mark ids of a {n}-node graph")
    chunk = p - 1

    def make_layer(ell: int) -> GnnLayer:
        def msg(xi, xj, vi, vj, a):
            if ell == 1:
                sent = alg.init(tuple(Fraction(x) for x in xj), Node(vj, n))
            else:
                sent = alg.alg2(ell - 1, B.unpack_chunks(xj, chunk), Node(vj, n))
            payload = B.gamma(len(sent) + 1) + sent + B.encode(tuple(a))
            chunks = B.pack_chunks(payload, chunk)
            out = [0] * (1 + len(chunks) * n)
            if vi == vj:
                out[0] = vi + 1
            for k, c in enumerate(chunks):
                out[1 + k * n + vj] = c
            return tuple(out)

        def up(z):
            vi = z[0] - 1
            received = []
            for j in range(n):
                column = list(z[1 + j::n])
                while column and column[-1] == 0:
                    column.pop()
                if not column:
                    continue
                payload = B.unpack_chunks(column, chunk)
                size, pos = B.read_gamma(payload, 0)
                sent = payload[pos:pos + size - 1]
                attr = B.decode(payload[pos + size - 1:])
                received.append((sent, tuple(Fraction(x) for x in attr)))
            state = alg.alg1(ell, tuple(sorted(received)), Node(vi, n))
            return tuple(B.pack_chunks(state, chunk))

        return GnnLayer(msg, up, name=f"{alg.name}-{ell}")

    return GnnNetwork(tuple(make_layer(ell) for ell in range(1, depth + 1)),
                      precision=p, n=n,
                      state_bits=lambda x: B.unpack_chunks(x, chunk),
                      name=f"gnn[{alg.name}]")


def local_from_gnn(net: GnnNetwork, n: int) -> NodeAlgorithm:
    """Node algorithm whose round-``l`` state is the fixed-point encoding of
    ``x_i^(l)``.

    Messages are ``id || state``: a ``ceil(log2 n)``-bit id followed by ``p``
    bits per state entry, so a width-``w`` network fits in
    ``congest_budget(w, p, n)`` bits.
    """
    fmt = net.fixed_point(n)
    idw = ceil_log2(n)

    def split(msg: str):
        vid, pos = B.read_uint(msg, 0, idw)
        return vid, fmt.from_bits(msg[pos:])

    def init(attr, node):
        return B.uint_bits(node.id, idw) + fmt.to_bits(attr)

    def alg1(ell, received, node):
        if not 1 <= ell <= net.depth:
            raise ValueError(f"round {ell} outside network depth {net.depth}")
        layer = net.layers[ell - 1]
        parts = [(split(m), a) for m, a in received]
        xi = next(x for (vid, x), _ in parts if vid == node.id)
        xi = _quantize(fmt, xi)
        msgs = [_quantize(fmt, layer.msg(xi, _quantize(fmt, xj), node.id, vj, a))
                for (vj, xj), a in parts]
        agg = layer.aggregate or _zero_padded_sum
        return fmt.to_bits(_quantize(fmt, layer.up(_quantize(fmt, agg(msgs)))))

    def alg2(ell, state, node):
        return B.uint_bits(node.id, idw) + state

    return NodeAlgorithm(f"local[{net.name}]", init, alg1, alg2)


def congest_budget(w: int, p: int, n: int) -> int:
    """Message size ``w*p + ceil(log2 n)`` that carries a width-``w`` state."""
    if w < 1 or p < 1 or n < 1:
        raise ValueError("width, precision and n must be positive")
    return w * p + ceil_log2(n)


def width_budget(b: int, p: int, n: int) -> int:
    """Largest width whose states fit in ``b``-bit messages."""
    return (b - ceil_log2(n)) // p


def reconstruction_network(n: int, compute: Callable[[AttributedGraph], object],
                           precision: int | None = None) -> GnnNetwork:
    """One-layer network plus a readout that rebuilds the whole graph.

    Each node gathers its one-hop records; the readout unions them and
    applies ``compute`` to the reconstructed graph.
    """
    from .local import _record_set, graph_from_records, union_reconstruction

    base = gnn_from_local(union_reconstruction(), 1, n, precision)
    chunk = base.fixed_point(n).p - 1

    def read(states):
        records = set()
        for x in states:
            records |= _record_set(B.unpack_chunks(x, chunk))
        return compute(graph_from_records(records))

    return GnnNetwork(base.layers, base.precision, readout=read, n=n,
                      state_bits=base.state_bits, name="reconstruction")
