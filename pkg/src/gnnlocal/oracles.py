"""Brute-force reference solvers.

Everything here is exact and deliberately simple.  Exponential searches carry
explicit size guards and raise :class:`ResourceError` instead of running for
hours.  Ties are broken lexicographically so results are deterministic.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from .graph import AttributedGraph, SubgraphIndicator, diameter, girth

__all__ = [
    "PREDICATES",
    "ProblemInstance",
    "ResourceError",
    "Solution",
    "approximation_ratio",
    "contains_k_cycle",
    "contains_k_cycle_by_subsets",
    "matching_vertex_cover",
    "max_independent_set",
    "min_cut",
    "min_spanning_tree",
    "min_vertex_cover",
    "perfect_coloring",
    "shortest_path",
    "solve",
    "unit_weights",
    "verify_subgraph",
    "within_factor",
]

EXACT_SEARCH_LIMIT = 24

Weights = Mapping[tuple[int, int], Fraction]


class ResourceError(RuntimeError):
    """Instance exceeds the size budget of an exponential-time oracle."""


@dataclass(frozen=True)
class ProblemInstance:
    graph: AttributedGraph
    weights: Weights | None = None
    terminals: tuple[int, int] | None = None
    subgraph: SubgraphIndicator | None = None
    parameter: int | None = None


@dataclass(frozen=True)
class Solution:
    """``kind`` is one of decision, node_set, edge_set, value, coloring."""

    kind: str
    value: Any
    objective: Fraction | None = None

    def to_json(self) -> dict:
        def plain(v):
            if isinstance(v, Fraction):
                return int(v) if v.denominator == 1 else str(v)
            if isinstance(v, (list, tuple)):
                return [plain(x) for x in v]
            return v
        out = {"kind": self.kind, "value": plain(self.value)}
        if self.objective is not None:
            out["objective"] = plain(self.objective)
        return out


def unit_weights(g: AttributedGraph) -> dict[tuple[int, int], Fraction]:
    return {e: Fraction(1) for e in g.edges}


def _weight(weights: Weights, i: int, j: int) -> Fraction:
    return Fraction(weights[(min(i, j), max(i, j))])


def _check_weights(g: AttributedGraph, weights: Weights) -> None:
    for e in g.edges:
        if e not in weights:
            raise ValueError(f"missing weight for edge {e}")
        if weights[e] < 0:
            raise ValueError(f"negative weight on edge {e}")


def _guard(n: int, limit: int = EXACT_SEARCH_LIMIT) -> None:
    if n > limit:
        raise ResourceError(f"exact search limited to n <= {limit}, got n = {n}")


# -- cycles -------------------------------------------------------------------

def contains_k_cycle(g: AttributedGraph, k: int) -> bool:
    """Whether ``g`` has a simple cycle on exactly ``k`` nodes.

    Depth-first search from each start node ``s`` over nodes larger than
    ``s``, pruned by the BFS distance back to ``s``.
    """
    if not 3 <= k <= g.n:
        raise ValueError(f"cycle length must lie in [3, n={g.n}], got {k}")
    nbrs = g.neighbors
    for s in range(g.n):
        if g.n - s < k:
            break
        # distances to s inside the subgraph induced by nodes >= s
        dist = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v in nbrs[u]:
                    if v > s and v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        closers = {v for v in nbrs[s] if v > s}
        if len(closers) < 2:
            continue
        on_path = {s}

        def extend(u: int, depth: int) -> bool:
            # ``depth`` edges used so far, path ends at u
            if depth == k - 1:
                return u in closers
            for v in nbrs[u]:
                if v <= s or v in on_path:
                    continue
                if dist.get(v, math.inf) > k - depth - 1:
                    continue
                on_path.add(v)
                if extend(v, depth + 1):
                    return True
                on_path.discard(v)
            return False

        for first in sorted(closers):
            on_path.add(first)
            if extend(first, 1):
                return True
            on_path.discard(first)
    return False


def contains_k_cycle_by_subsets(g: AttributedGraph, k: int, limit: int = 10) -> bool:
    """Independent detector: Held-Karp Hamiltonicity on every k-node subset."""
    if not 3 <= k <= g.n:
        raise ValueError(f"cycle length must lie in [3, n={g.n}], got {k}")
    _guard(g.n, limit)
    for subset in itertools.combinations(range(g.n), k):
        pos = {v: t for t, v in enumerate(subset)}
        adj = [0] * k
        for t, v in enumerate(subset):
            for u in g.neighbors[v]:
                if u in pos:
                    adj[t] |= 1 << pos[u]
        if any(bin(a).count("1") < 2 for a in adj):
            continue
        # reach[mask] = set of end nodes of paths from node 0 covering mask
        reach = [0] * (1 << k)
        reach[1] = 1
        for mask in range(1, 1 << k):
            ends = reach[mask]
            if not ends or not mask & 1:
                continue
            for t in range(k):
                if ends >> t & 1:
                    step = adj[t] & ~mask
                    while step:
                        low = step & -step
                        reach[mask | low] |= low
                        step ^= low
        if reach[(1 << k) - 1] & adj[0]:
            return True
    return False


# -- subgraph predicates ------------------------------------------------------

def _edge_components(n_nodes, nodes, edges):
    parent = {v: v for v in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    cyclic = False
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            cyclic = True
        else:
            parent[ru] = rv
    roots = {find(v) for v in nodes}
    return len(roots), cyclic


def _connected_without(g: AttributedGraph, removed: set, s=None, t=None) -> bool:
    seen = {s if s is not None else 0}
    stack = list(seen)
    while stack:
        u = stack.pop()
        for v in g.neighbors[u]:
            if (min(u, v), max(u, v)) in removed or v in seen:
                continue
            seen.add(v)
            stack.append(v)
    if t is not None:
        return t in seen
    return len(seen) == g.n


def _is_bipartite(nodes, edges) -> bool:
    adj = {v: [] for v in nodes}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    color = {}
    for s in nodes:
        if s in color:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in color:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    return False
    return True


PREDICATES = ("connected", "contains_cycle", "spanning_tree", "bipartite",
              "cut", "st_cut", "hamiltonian_cycle", "simple_path")


def verify_subgraph(g: AttributedGraph, h: SubgraphIndicator, predicate: str,
                    s: int | None = None, t: int | None = None) -> bool:
    """Decide a graph-theoretic property of the marked subgraph ``H``.

    ``H``'s node set is the marked nodes plus the endpoints of marked edges.
    ``cut``/``st_cut`` ask whether deleting the marked edges from ``g``
    disconnects it (or separates ``s`` from ``t``).
    """
    h.validate(g)
    if predicate not in PREDICATES:
        raise ValueError(f"unknown predicate {predicate!r}")
    edges = h.marked_edges(g)
    nodes = set(h.marked_nodes()) | {v for e in edges for v in e}
    degree = {v: 0 for v in nodes}
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    if predicate == "connected":
        return bool(nodes) and _edge_components(g.n, nodes, edges)[0] == 1
    if predicate == "contains_cycle":
        return _edge_components(g.n, nodes, edges)[1]
    if predicate == "spanning_tree":
        if len(nodes) != g.n or len(edges) != g.n - 1:
            return False
        count, cyclic = _edge_components(g.n, nodes, edges)
        return count == 1 and not cyclic
    if predicate == "bipartite":
        return _is_bipartite(sorted(nodes), edges)
    if predicate == "cut":
        return not _connected_without(g, set(edges))
    if predicate == "st_cut":
        if s is None or t is None:
            raise ValueError("st_cut needs terminals s and t")
        return not _connected_without(g, set(edges), s, t)
    if predicate == "hamiltonian_cycle":
        if g.n < 3 or len(nodes) != g.n or len(edges) != g.n:
            return False
        return (all(d == 2 for d in degree.values())
                and _edge_components(g.n, nodes, edges)[0] == 1)
    # simple_path
    if not edges:
        return False
    ends = [v for v, d in degree.items() if d == 1]
    return (len(ends) == 2 and all(d in (1, 2) for d in degree.values())
            and len(edges) == len(nodes) - 1
            and _edge_components(g.n, nodes, edges)[0] == 1)


# -- optimisation -------------------------------------------------------------

def _path_edges(seq):
    return tuple((min(a, b), max(a, b)) for a, b in zip(seq, seq[1:]))


def shortest_path(g: AttributedGraph, weights: Weights, s: int, t: int) -> Solution:
    """Minimum-weight simple s-t path; the lexicographically smallest node
    sequence wins ties.  ``value`` is the node sequence."""
    if s == t:
        raise ValueError("terminals must differ")
    _check_weights(g, weights)
    if all(weights[e] > 0 for e in g.edges):
        dist = [math.inf] * g.n
        dist[t] = Fraction(0)
        heap = [(Fraction(0), t)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v in g.neighbors[u]:
                nd = d + _weight(weights, u, v)
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        # with positive weights every tight walk is simple, so greedy works
        seq = [s]
        while seq[-1] != t:
            u = seq[-1]
            seq.append(min(v for v in g.neighbors[u]
                           if _weight(weights, u, v) + dist[v] == dist[u]))
        return Solution("edge_set", tuple(seq), dist[s])
    _guard(g.n, 16)
    best = None
    for seq in _simple_paths(g, s, t):
        w = sum((_weight(weights, a, b) for a, b in zip(seq, seq[1:])), Fraction(0))
        if best is None or (w, seq) < best:
            best = (w, seq)
    return Solution("edge_set", best[1], best[0])


def _simple_paths(g, s, t):
    stack = [(s, (s,))]
    while stack:
        u, seq = stack.pop()
        if u == t:
            yield seq
            continue
        for v in g.neighbors[u]:
            if v not in seq:
                stack.append((v, seq + (v,)))


def min_spanning_tree(g: AttributedGraph, weights: Weights) -> Solution:
    """Kruskal with ties broken by edge order; ``value`` is the edge tuple."""
    _check_weights(g, weights)
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for e in sorted(g.edges, key=lambda e: (Fraction(weights[e]), e)):
        ra, rb = find(e[0]), find(e[1])
        if ra != rb:
            parent[ra] = rb
            chosen.append(e)
    total = sum((Fraction(weights[e]) for e in chosen), Fraction(0))
    return Solution("edge_set", tuple(sorted(chosen)), total)


def min_cut(g: AttributedGraph, weights: Weights) -> Solution:
    """Global minimum cut by enumerating bipartitions (node 0 on one side).

    Each undirected edge contributes its weight once.
    """
    _check_weights(g, weights)
    if g.n < 2:
        raise ValueError("a cut needs at least two nodes")
    _guard(g.n)
    best = None
    for mask in range(1 << (g.n - 1)):
        side = (mask << 1) | 1
        if side == (1 << g.n) - 1:
            continue
        crossing = tuple(e for e in g.edges
                         if (side >> e[0] & 1) != (side >> e[1] & 1))
        w = sum((Fraction(weights[e]) for e in crossing), Fraction(0))
        if best is None or (w, crossing) < best:
            best = (w, crossing)
    return Solution("edge_set", best[1], best[0])


def _masks(g):
    return [sum(1 << u for u in g.neighbors[v]) for v in range(g.n)]


def max_independent_set(g: AttributedGraph) -> Solution:
    """Branching on the lowest undecided node; taking it is preferred on ties,
    which yields the lexicographically smallest maximum set."""
    _guard(g.n)
    adj = _masks(g)
    cache = {}

    def best(mask):
        if mask == 0:
            return ()
        if mask in cache:
            return cache[mask]
        v = (mask & -mask).bit_length() - 1
        take = (v,) + best(mask & ~adj[v] & ~(1 << v))
        if adj[v] & mask:
            skip = best(mask & ~(1 << v))
            result = take if len(take) >= len(skip) else skip
        else:
            result = take
        cache[mask] = result
        return result

    chosen = best((1 << g.n) - 1)
    return Solution("node_set", chosen, Fraction(len(chosen)))


def min_vertex_cover(g: AttributedGraph) -> Solution:
    """Smallest cover found by scanning subsets in size-then-lex order."""
    _guard(g.n)
    edge_masks = [(1 << i) | (1 << j) for i, j in g.edges]
    for size in range(g.n + 1):
        for subset in itertools.combinations(range(g.n), size):
            mask = sum(1 << v for v in subset)
            if all(em & mask for em in edge_masks):
                return Solution("node_set", subset, Fraction(size))
    raise AssertionError("unreachable: the full node set is a cover")


def perfect_coloring(g: AttributedGraph) -> Solution:
    """Chromatic colouring; the lexicographically smallest colour vector among
    colourings with the fewest colours.  ``objective`` is the colour count."""
    _guard(g.n)
    for k in range(1, g.n + 1):
        colors = [-1] * g.n

        def assign(v):
            if v == g.n:
                return True
            used = {colors[u] for u in g.neighbors[v] if u < v}
            # canonical: a node may open at most one new colour
            top = max(colors[:v], default=-1) + 1
            for c in range(min(k, top + 1)):
                if c not in used:
                    colors[v] = c
                    if assign(v + 1):
                        return True
            colors[v] = -1
            return False

        if assign(0):
            return Solution("coloring", tuple(colors), Fraction(k))
    raise AssertionError("unreachable: n colours always suffice")


def matching_vertex_cover(g: AttributedGraph) -> Solution:
    """Both endpoints of a greedy maximal matching: a 2-approximate cover."""
    covered = set()
    for i, j in g.edges:
        if i not in covered and j not in covered:
            covered.update((i, j))
    chosen = tuple(sorted(covered))
    return Solution("node_set", chosen, Fraction(len(chosen)))


def approximation_ratio(alg_value, opt_value, sense: str = "min") -> Fraction:
    """``ALG / OPT`` as an exact rational."""
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    opt = Fraction(opt_value)
    if opt == 0:
        raise ZeroDivisionError("optimum is zero; ratio undefined")
    return Fraction(alg_value) / opt


def within_factor(ratio, alpha, sense: str = "min") -> bool:
    """Minimisation needs ``ratio <= alpha``; maximisation ``ratio >= 1/alpha``."""
    ratio, alpha = Fraction(ratio), Fraction(alpha)
    return ratio <= alpha if sense == "min" else ratio >= 1 / alpha


def solve(problem: str, inst: ProblemInstance) -> Solution:
    """Dispatch by problem name (used by the command line)."""
    g = inst.graph
    weights = inst.weights if inst.weights is not None else unit_weights(g)
    if problem == "k_cycle":
        if inst.parameter is None:
            raise ValueError("k_cycle needs --k")
        return Solution("decision", contains_k_cycle(g, inst.parameter))
    if problem in PREDICATES:
        if inst.subgraph is None:
            raise ValueError(f"{problem} needs a subgraph")
        s, t = inst.terminals if inst.terminals else (None, None)
        return Solution("decision", verify_subgraph(g, inst.subgraph, problem, s, t))
    if problem == "shortest_path":
        if inst.terminals is None:
            raise ValueError("shortest_path needs --s and --t")
        return shortest_path(g, weights, *inst.terminals)
    if problem == "min_cut":
        return min_cut(g, weights)
    if problem == "mst":
        return min_spanning_tree(g, weights)
    if problem == "mis":
        return max_independent_set(g)
    if problem == "mvc":
        return min_vertex_cover(g)
    if problem == "coloring":
        return perfect_coloring(g)
    if problem == "diameter":
        return Solution("value", diameter(g), Fraction(diameter(g)))
    if problem == "girth":
        value = girth(g)
        return Solution("value", None if value == math.inf else int(value))
    raise ValueError(f"unknown problem {problem!r}")
