"""Named graph families, random graphs and exhaustive enumeration."""
from __future__ import annotations

import os
from functools import lru_cache

import networkx as nx
import numpy as np

from .graph import AttributedGraph, build_graph

__all__ = [
    "complete",
    "connected_graphs",
    "cycle",
    "from_networkx",
    "path",
    "random_connected_graph",
    "star",
    "to_networkx",
    "two_triangles",
]


def cycle(n: int, **kw) -> AttributedGraph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)], **kw)


def path(n: int, **kw) -> AttributedGraph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)], **kw)


def complete(n: int, **kw) -> AttributedGraph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)], **kw)


def star(leaves: int, **kw) -> AttributedGraph:
    return build_graph(leaves + 1, [(0, j) for j in range(1, leaves + 1)], **kw)


def two_triangles(**kw) -> AttributedGraph:
    """Two disjoint triangles (disconnected; the classic 1-WL blind spot vs C_6)."""
    return build_graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
                       allow_disconnected=True, **kw)


def to_networkx(g: AttributedGraph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges)
    return G


def from_networkx(G: nx.Graph, **kw) -> AttributedGraph:
    nodes = sorted(G.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    return build_graph(len(nodes), [(index[u], index[v]) for u, v in G.edges()], **kw)


def random_connected_graph(rng: np.random.Generator, n: int,
                           extra_edge_prob: float = 0.2) -> AttributedGraph:
    """Random spanning tree plus independent extra edges."""
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        parent = order[rng.integers(k)]
        u, v = int(order[k]), int(parent)
        edges.add((min(u, v), max(u, v)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    return build_graph(n, sorted(edges))


def _invariant(G: nx.Graph):
    deg = dict(G.degree())
    tri = nx.triangles(G)
    return tuple(sorted((deg[v], tri[v], tuple(sorted(deg[u] for u in G[v])))
                        for v in G))


def _extend_by_one(graphs: list[nx.Graph]) -> list[nx.Graph]:
    """All connected graphs on k+1 nodes, up to isomorphism, from those on k.

    Every connected graph has a non-cut vertex, so deleting it leaves a
    connected graph on one fewer node; re-adding it with every non-empty
    neighbourhood therefore reaches every isomorphism class.
    """
    buckets: dict = {}
    out = []
    for G in graphs:
        k = G.number_of_nodes()
        for mask in range(1, 1 << k):
            H = G.copy()
            H.add_edges_from((k, u) for u in range(k) if mask >> u & 1)
            key = _invariant(H)
            bucket = buckets.setdefault(key, [])
            if any(nx.is_isomorphic(H, other) for other in bucket):
                continue
            bucket.append(H)
            out.append(H)
    return out


def _cache_path(n: int) -> str:
    root = os.environ.get("GNNLOCAL_CACHE",
                          os.path.join(os.path.expanduser("~"), ".cache", "gnnlocal"))
    return os.path.join(root, f"connected{n}.g6")


@lru_cache(maxsize=None)
def _connected_nx(n: int) -> tuple:
    if n <= 7:
        return tuple(G for G in nx.graph_atlas_g()
                     if G.number_of_nodes() == n and (n == 1 or nx.is_connected(G)))
    cache = _cache_path(n)
    if os.path.exists(cache):
        with open(cache, "rb") as fh:
            return tuple(nx.from_graph6_bytes(line.strip())
                         for line in fh if line.strip())
    graphs = tuple(_extend_by_one(list(_connected_nx(n - 1))))
    os.makedirs(os.path.dirname(cache), exist_ok=True)
    with open(cache, "wb") as fh:
        for G in graphs:
            fh.write(nx.to_graph6_bytes(G, header=False))
    return graphs


def connected_graphs(n: int) -> list[AttributedGraph]:
    """Every connected graph on ``n`` nodes, one per isomorphism class.

    Counts: 1, 1, 2, 6, 21, 112, 853, 11117 for ``n = 1..8``.
    """
    return [from_networkx(G) for G in _connected_nx(n)]
