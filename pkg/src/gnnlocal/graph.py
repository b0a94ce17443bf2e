"""Attributed graphs: data model, structural metrics and the text file format.

A graph has dense node indices ``0..n-1``.  Each node also carries a unique
integer id (a bijection onto ``0..n-1``; the identity by default) which is
what distributed algorithms and message functions get to see.  Attributes
are vectors of exact rationals so that files round-trip bit-exactly.

File format::

    # comment
    graph n=3
    node 0 1 0.5
    node 1 2
    node 2 3
    edge 0 1 1 | 2
    edge 1 2 |

``node <id> <attr...>`` lines appear in index order.  ``edge <i> <j>`` lines
name node ids and carry the attribute of ``e_{i<-j}``, a ``|``, then the
attribute of ``e_{j<-i}``.  Scalars are decimal strings, or ``num/den`` for
rationals without a finite decimal expansion.
"""
from __future__ import annotations

import csv
import math
import os
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "AttributedGraph",
    "GraphError",
    "GraphParseError",
    "SubgraphIndicator",
    "build_graph",
    "bfs_distances",
    "components",
    "diameter",
    "eccentricities",
    "encode_subgraph",
    "format_scalar",
    "girth",
    "load_dataset",
    "parse",
    "parse_scalar",
    "permute_nodes",
    "read_graph",
    "relabel",
    "save_dataset",
    "serialize",
    "write_graph",
]

Vector = tuple[Fraction, ...]


class GraphError(ValueError):
    """Invalid graph construction."""

    def __init__(self, message, components=None):
        super().__init__(message)
        self.components = components


class GraphParseError(ValueError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


def _vec(values) -> Vector:
    return tuple(Fraction(v) for v in values)


@dataclass(frozen=True)
class AttributedGraph:
    """Undirected connected graph with node and directed-edge attributes.

    ``edges`` holds sorted pairs ``(i, j)`` with ``i < j``.  ``edge_attr[k]``
    is the pair ``(a_{i<-j}, a_{j<-i})`` for ``edges[k]``.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    node_attr: tuple[Vector, ...]
    edge_attr: tuple[tuple[Vector, Vector], ...]
    ids: tuple[int, ...]
    neighbors: tuple[tuple[int, ...], ...] = field(
        init=False, repr=False, compare=False)
    _edge_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj = [[] for _ in range(self.n)]
        index = {}
        for k, (i, j) in enumerate(self.edges):
            adj[i].append(j)
            adj[j].append(i)
            index[(i, j)] = k
        object.__setattr__(self, "neighbors", tuple(tuple(sorted(a)) for a in adj))
        object.__setattr__(self, "_edge_index", index)

    def __hash__(self):
        return hash((self.n, self.edges, self.node_attr, self.edge_attr, self.ids))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.neighbors)

    def closed_neighbors(self, i: int) -> tuple[int, ...]:
        """``N_i* = N_i + {i}``, sorted."""
        return tuple(sorted(self.neighbors[i] + (i,)))

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._edge_index

    def edge_index(self, i: int, j: int) -> int:
        return self._edge_index[(min(i, j), max(i, j))]

    def attr(self, i: int, j: int) -> Vector:
        """Attribute of the directed edge ``e_{i<-j}``; empty for ``i == j``."""
        if i == j:
            return ()
        pair = self.edge_attr[self.edge_index(i, j)]
        return pair[0] if i < j else pair[1]

    def index_of_id(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.ids)}


@dataclass(frozen=True)
class SubgraphIndicator:
    """Membership bits for a subgraph ``H`` of a given graph."""

    node_member: tuple[bool, ...]
    edge_member: tuple[bool, ...]

    @classmethod
    def from_edges(cls, g: AttributedGraph, edges: Iterable[tuple[int, int]],
                   nodes: Iterable[int] | None = None) -> "SubgraphIndicator":
        """Mark ``edges``; nodes default to the endpoints of the marked edges."""
        marked = set()
        for i, j in edges:
            if not g.has_edge(i, j):
                raise GraphError(f"({i}, {j}) is not an edge")
            marked.add(g.edge_index(i, j))
        if nodes is None:
            nodes = {v for k in marked for v in g.edges[k]}
        node_set = set(nodes)
        return cls(tuple(i in node_set for i in range(g.n)),
                   tuple(k in marked for k in range(g.m)))

    @classmethod
    def full(cls, g: AttributedGraph) -> "SubgraphIndicator":
        return cls((True,) * g.n, (True,) * g.m)

    def validate(self, g: AttributedGraph) -> None:
        if len(self.node_member) != g.n or len(self.edge_member) != g.m:
            raise GraphError(
                f"indicator sizes ({len(self.node_member)}, {len(self.edge_member)}) "
                f"do not match graph ({g.n}, {g.m})")

    def marked_edges(self, g: AttributedGraph) -> list[tuple[int, int]]:
        return [e for e, b in zip(g.edges, self.edge_member) if b]

    def marked_nodes(self) -> list[int]:
        return [i for i, b in enumerate(self.node_member) if b]


def build_graph(n: int, edges: Iterable[Sequence[int]],
                node_attr: Sequence[Sequence] | None = None,
                edge_attr: Mapping[tuple[int, int], Sequence] | None = None,
                ids: Sequence[int] | None = None,
                allow_disconnected: bool = False) -> AttributedGraph:
    """Validate and construct an :class:`AttributedGraph`.

    ``edge_attr`` maps directed pairs ``(i, j)`` to the attribute of
    ``e_{i<-j}``; missing directions default to the empty vector.
    ``allow_disconnected`` exists for anonymity demonstrations on graphs such
    as two disjoint triangles; everything else requires connectivity.
    """
    if n < 1:
        raise GraphError("a graph needs at least one node")
    seen = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) references a node outside 0..{n - 1}")
        if i == j:
            raise GraphError(f"self-loop at node {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
    edge_list = tuple(sorted(seen))
    if node_attr is None:
        nattr = ((),) * n
    else:
        if len(node_attr) != n:
            raise GraphError(f"expected {n} node attributes, got {len(node_attr)}")
        nattr = tuple(_vec(a) for a in node_attr)
    edge_attr = dict(edge_attr or {})
    for (i, j) in edge_attr:
        if (min(i, j), max(i, j)) not in seen:
            raise GraphError(f"attribute given for non-edge ({i}, {j})")
    eattr = tuple((_vec(edge_attr.get((i, j), ())), _vec(edge_attr.get((j, i), ())))
                  for i, j in edge_list)
    if ids is None:
        ids = tuple(range(n))
    else:
        ids = tuple(int(v) for v in ids)
        if sorted(ids) != list(range(n)):
            raise GraphError("ids must be a permutation of 0..n-1")
    g = AttributedGraph(n, edge_list, nattr, eattr, ids)
    if not allow_disconnected:
        comps = components(g)
        if len(comps) > 1:
            raise GraphError(f"graph is disconnected: components {comps}",
                             components=comps)
    return g


def components(g: AttributedGraph) -> list[list[int]]:
    seen = [False] * g.n
    out = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [], [s]
        while queue:
            u = queue.pop()
            comp.append(u)
            for v in g.neighbors[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        out.append(sorted(comp))
    return out


def bfs_distances(g: AttributedGraph, source: int) -> list[float]:
    dist = [math.inf] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors[u]:
            if dist[v] == math.inf:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def eccentricities(g: AttributedGraph) -> list[int]:
    return [max(bfs_distances(g, s)) for s in range(g.n)]


def diameter(g: AttributedGraph) -> int:
    """Length of the longest shortest path."""
    return int(max(eccentricities(g)))


def girth(g: AttributedGraph) -> float:
    """Length of the shortest cycle, ``math.inf`` for forests."""
    best = math.inf
    for s in range(g.n):
        dist = [-1] * g.n
        parent = [-1] * g.n
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for v in g.neighbors[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif parent[u] != v:
                    best = min(best, dist[u] + dist[v] + 1)
    return best


def encode_subgraph(g: AttributedGraph, h: SubgraphIndicator) -> AttributedGraph:
    """Append one membership bit to every node and directed-edge attribute."""
    h.validate(g)
    nattr = tuple(a + (Fraction(int(b)),) for a, b in zip(g.node_attr, h.node_member))
    eattr = tuple((ij + (Fraction(int(b)),), ji + (Fraction(int(b)),))
                  for (ij, ji), b in zip(g.edge_attr, h.edge_member))
    return AttributedGraph(g.n, g.edges, nattr, eattr, g.ids)


def relabel(g: AttributedGraph, perm: Sequence[int]) -> AttributedGraph:
    """Rename ids: the node holding id ``v`` gets id ``perm[v]``."""
    ids = tuple(perm[v] for v in g.ids)
    if sorted(ids) != list(range(g.n)):
        raise GraphError("perm must be a permutation of 0..n-1")
    return AttributedGraph(g.n, g.edges, g.node_attr, g.edge_attr, ids)


def permute_nodes(g: AttributedGraph, perm: Sequence[int]) -> AttributedGraph:
    """Move node ``i`` to index ``perm[i]``, carrying its id and attributes."""
    if sorted(perm) != list(range(g.n)):
        raise GraphError("perm must be a permutation of 0..n-1")
    nattr = [None] * g.n
    ids = [None] * g.n
    for i in range(g.n):
        nattr[perm[i]] = g.node_attr[i]
        ids[perm[i]] = g.ids[i]
    edge_attr = {}
    for (i, j), (ij, ji) in zip(g.edges, g.edge_attr):
        edge_attr[(perm[i], perm[j])] = ij
        edge_attr[(perm[j], perm[i])] = ji
    edges = [(perm[i], perm[j]) for i, j in g.edges]
    return build_graph(g.n, edges, nattr, edge_attr, ids, allow_disconnected=True)


# -- text format ------------------------------------------------------------

def format_scalar(x: Fraction) -> str:
    x = Fraction(x)
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    k = max(twos, fives)
    if k == 0:
        return str(x.numerator)
    scaled = abs(x.numerator) * 10 ** k // x.denominator
    digits = str(scaled).rjust(k + 1, "0")
    sign = "-" if x < 0 else ""
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def parse_scalar(token: str) -> Fraction:
    return Fraction(token)


def serialize(g: AttributedGraph) -> str:
    lines = [f"graph n={g.n}"]
    for i in range(g.n):
        parts = ["node", str(g.ids[i])] + [format_scalar(x) for x in g.node_attr[i]]
        lines.append(" ".join(parts))
    for (i, j), (ij, ji) in zip(g.edges, g.edge_attr):
        parts = ["edge", str(g.ids[i]), str(g.ids[j])]
        parts += [format_scalar(x) for x in ij] + ["|"] + [format_scalar(x) for x in ji]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _scalars(tokens, lineno):
    try:
        return tuple(parse_scalar(t) for t in tokens)
    except (ValueError, ZeroDivisionError):
        raise GraphParseError(f"bad scalar in {tokens!r}", lineno) from None


def parse(text: str, allow_disconnected: bool = False) -> AttributedGraph:
    n = None
    node_lines = []
    edge_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "graph":
            if n is not None:
                raise GraphParseError("duplicate graph header", lineno)
            if len(tokens) != 2 or not tokens[1].startswith("n="):
                raise GraphParseError("header must read 'graph n=<n>'", lineno)
            try:
                n = int(tokens[1][2:])
            except ValueError:
                raise GraphParseError(f"bad node count {tokens[1]!r}", lineno) from None
            if n < 1:
                raise GraphParseError("node count must be positive", lineno)
        elif n is None:
            raise GraphParseError("missing 'graph n=<n>' header", lineno)
        elif head == "node":
            if len(tokens) < 2:
                raise GraphParseError("node line needs an id", lineno)
            try:
                vid = int(tokens[1])
            except ValueError:
                raise GraphParseError(f"bad node id {tokens[1]!r}", lineno) from None
            node_lines.append((lineno, vid, _scalars(tokens[2:], lineno)))
        elif head == "edge":
            if len(tokens) < 3:
                raise GraphParseError("edge line needs two endpoints", lineno)
            try:
                i, j = int(tokens[1]), int(tokens[2])
            except ValueError:
                raise GraphParseError("bad edge endpoints", lineno) from None
            rest = tokens[3:]
            if rest.count("|") > 1:
                raise GraphParseError("at most one '|' per edge line", lineno)
            if "|" in rest:
                cut = rest.index("|")
                ij, ji = rest[:cut], rest[cut + 1:]
            elif rest:
                raise GraphParseError("edge attributes need a '|' separator", lineno)
            else:
                ij, ji = [], []
            edge_lines.append((lineno, i, j, _scalars(ij, lineno), _scalars(ji, lineno)))
        else:
            raise GraphParseError(f"unknown record {head!r}", lineno)
    if n is None:
        raise GraphParseError("empty graph file")
    if node_lines:
        if len(node_lines) != n:
            raise GraphParseError(f"expected {n} node lines, got {len(node_lines)}")
        ids = [vid for _, vid, _ in node_lines]
        for lineno, vid, _ in node_lines:
            if not 0 <= vid < n:
                raise GraphParseError(f"node id {vid} outside 0..{n - 1}", lineno)
        if len(set(ids)) != n:
            raise GraphParseError("node ids are not unique")
        nattr = [a for _, _, a in node_lines]
    else:
        ids = list(range(n))
        nattr = None
    index = {v: k for k, v in enumerate(ids)}
    edges = []
    eattr = {}
    for lineno, i, j, ij, ji in edge_lines:
        if i not in index or j not in index:
            raise GraphParseError(f"edge ({i}, {j}) references an unknown node", lineno)
        a, b = index[i], index[j]
        if a == b:
            raise GraphParseError(f"self-loop at node {i}", lineno)
        if (a, b) in eattr:
            raise GraphParseError(f"duplicate edge ({i}, {j})", lineno)
        edges.append((a, b))
        eattr[(a, b)] = ij
        eattr[(b, a)] = ji
    try:
        return build_graph(n, edges, nattr, eattr, ids, allow_disconnected)
    except GraphError as exc:
        raise GraphParseError(str(exc)) from exc


def read_graph(path, allow_disconnected: bool = False) -> AttributedGraph:
    with open(path) as fh:
        return parse(fh.read(), allow_disconnected)


def write_graph(g: AttributedGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize(g))


def save_dataset(directory, graphs: Sequence[AttributedGraph], labels: Sequence,
                 names: Sequence[str] | None = None) -> list[str]:
    """Write graphs as ``<name>.graph`` files plus ``labels.csv``."""
    os.makedirs(directory, exist_ok=True)
    if names is None:
        width = len(str(max(len(graphs) - 1, 0)))
        names = [f"g{k:0{width}d}.graph" for k in range(len(graphs))]
    with open(os.path.join(directory, "labels.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["filename", "label"])
        for name, g, label in zip(names, graphs, labels):
            write_graph(g, os.path.join(directory, name))
            writer.writerow([name, int(label)])
    return list(names)


def load_dataset(directory, allow_disconnected: bool = False):
    """Return ``(names, graphs, labels)`` from a dataset directory."""
    names, graphs, labels = [], [], []
    with open(os.path.join(directory, "labels.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            names.append(row["filename"])
            labels.append(int(row["label"]))
            graphs.append(read_graph(os.path.join(directory, row["filename"]),
                                     allow_disconnected))
    return names, graphs, labels
