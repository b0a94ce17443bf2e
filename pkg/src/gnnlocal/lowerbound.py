"""Two-party graph families built from secret bit strings, and datasets
sampled from them.

Alice and Bob each control half of a graph through a ``q``-bit secret.  The
cycle family contains a ``k``-cycle exactly when the two secrets share a one
bit (for a suitable base graph); the diameter family has diameter 5 exactly
when they do and 4 otherwise.  :func:`verify_family` sweeps secret pairs and
reports which disjointness class carries the property, measured with the
brute-force oracles rather than assumed.
"""
from __future__ import annotations

import json
import os
import statistics
from dataclasses import dataclass

import numpy as np

from .bits import ceil_log2
from .graph import AttributedGraph, build_graph, components, diameter, save_dataset
from .oracles import contains_k_cycle

__all__ = [
    "FamilyError",
    "PartitionedGraph",
    "SecretPair",
    "bipartite_base",
    "build_cycle_family",
    "build_diameter_family",
    "disjoint",
    "family_predicate",
    "sample_balanced_cycle_dataset",
    "secret_bits",
    "verify_family",
]


class FamilyError(ValueError):
    pass


@dataclass(frozen=True)
class SecretPair:
    s_a: str
    s_b: str

    def __post_init__(self):
        if len(self.s_a) != len(self.s_b) or not self.s_a:
            raise ValueError("secrets must be non-empty and of equal length")
        if set(self.s_a + self.s_b) - {"0", "1"}:
            raise ValueError("secrets are bit strings")

    @property
    def q(self) -> int:
        return len(self.s_a)

    @classmethod
    def from_ints(cls, a: int, b: int, q: int) -> "SecretPair":
        return cls(format(a, f"0{q}b"), format(b, f"0{q}b"))


def disjoint(sp: SecretPair) -> bool:
    """No index carries a one in both secrets."""
    return not any(x == y == "1" for x, y in zip(sp.s_a, sp.s_b))


@dataclass(frozen=True)
class PartitionedGraph:
    graph: AttributedGraph
    alice: frozenset
    bob: frozenset
    secrets: SecretPair
    family: str
    params: dict

    def __post_init__(self):
        if self.alice & self.bob or len(self.alice | self.bob) != self.graph.n:
            raise FamilyError("alice and bob must partition the node set")

    @property
    def cut_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in self.graph.edges if (i in self.alice) != (j in self.alice)]

    @property
    def cut(self) -> int:
        return len(self.cut_edges)


# -- cycle family ----------------------------------------------------------------

def bipartite_base(p: int, k: int) -> tuple[tuple[int, int], ...]:
    """Edges ``(left, right)`` of the bipartite graph each player starts from.

    For ``k >= 6`` this is the complete graph ``K_{p,p}``.  For ``k = 4`` the
    base itself must be free of 4-cycles (otherwise a player could create one
    alone), so edges of ``K_{p,p}`` are added greedily, diagonal by diagonal
    (``j = i + offset mod p``), whenever they close no 4-cycle.
    """
    if p < 1:
        raise FamilyError("p must be positive")
    if k % 2 or k < 4:
        raise FamilyError(f"cycle length must be even and at least 4, got {k}")
    if k >= 6:
        return tuple((i, j) for i in range(p) for j in range(p))
    rows: list[set] = [set() for _ in range(p)]
    edges = []
    for offset in range(p):
        for i in range(p):
            j = (i + offset) % p
            if any(len(rows[r] & (rows[i] | {j})) >= 2 for r in range(p) if r != i):
                continue
            rows[i].add(j)
            edges.append((i, j))
    return tuple(edges)


def build_cycle_family(p: int, k: int, sp: SecretPair,
                       base: tuple | None = None) -> PartitionedGraph:
    """Two copies of a bipartite base, joined node-to-node.

    Player nodes are numbered ``0..2p-1`` (left ``t``, right ``p+t``); Alice
    owns ``0..2p-1`` and Bob ``2p..4p-1``, and equal numbers are joined, so
    the cut has ``2p`` edges.  Bit ``t`` of a secret keeps base edge ``t``,
    which is then subdivided into a path of ``k/2 - 1`` edges.  A ``k``-cycle
    crossing the cut uses one kept path on each side with the same endpoints.
    """
    base = bipartite_base(p, k) if base is None else tuple(base)
    if sp.q != len(base):
        raise FamilyError(f"secrets need {len(base)} bits for p={p}, k={k}, got {sp.q}")
    inner = k // 2 - 2
    edges = [(x, 2 * p + x) for x in range(2 * p)]
    alice, bob = set(range(2 * p)), set(range(2 * p, 4 * p))
    n = 4 * p
    for offset, secret, owner in ((0, sp.s_a, alice), (2 * p, sp.s_b, bob)):
        for t, (left, right) in enumerate(base):
            if secret[t] != "1":
                continue
            chain = [offset + left] + list(range(n, n + inner)) + [offset + p + right]
            owner.update(range(n, n + inner))
            n += inner
            edges.extend(zip(chain, chain[1:]))
    g = build_graph(n, edges, allow_disconnected=True)
    return PartitionedGraph(g, frozenset(alice), frozenset(bob), sp, "cycle",
                            {"p": p, "k": k, "q": len(base)})


# -- diameter family -------------------------------------------------------------

def build_diameter_family(sp: SecretPair, check: bool | None = None) -> PartitionedGraph:
    """Bit-gadget graph whose diameter is 5 iff the secrets intersect, else 4.

    Alice holds index nodes ``a_t``, a hub ``c_A`` and bit nodes ``f_h^0,
    f_h^1`` for ``h < L = ceil(log2 q)``; ``a_t`` is adjacent to
    ``f_h^c`` for ``c`` different from bit ``h`` of ``t``, the hub is adjacent
    to every bit node, and ``a_t`` is adjacent to the hub iff bit ``t`` of
    ``s_a`` is zero.  Bob mirrors this with ``b_t`` adjacent to ``g_h^c`` for
    ``c`` equal to bit ``h`` of ``t``.  The only cut edges are
    ``f_h^c - g_h^c``, so the cut has ``2L`` edges.  ``a_t`` and ``b_s`` are
    at distance 3 when ``t != s``; ``a_t`` and ``b_t`` are at distance 4 when
    either hub edge is present and 5 otherwise.

    ``check`` (default: on for ``q <= 8``) recomputes the diameter and raises
    :class:`FamilyError` if it disagrees with the secrets.
    """
    q = sp.q
    if q < 2:
        raise FamilyError("the diameter family needs q >= 2")
    L = ceil_log2(q)
    index = {}

    def node(key):
        return index.setdefault(key, len(index))

    edges = []
    for side, secret in (("A", sp.s_a), ("B", sp.s_b)):
        hub = node((side, "hub"))
        for h in range(L):
            for c in (0, 1):
                edges.append((hub, node((side, "bit", h, c))))
        for t in range(q):
            v = node((side, "index", t))
            for h in range(L):
                c = (t >> h) & 1
                edges.append((v, node((side, "bit", h, 1 - c if side == "A" else c))))
            if secret[t] == "0":
                edges.append((v, hub))
    for h in range(L):
        for c in (0, 1):
            edges.append((index[("A", "bit", h, c)], index[("B", "bit", h, c)]))
    g = build_graph(len(index), edges)
    alice = frozenset(v for key, v in index.items() if key[0] == "A")
    bob = frozenset(v for key, v in index.items() if key[0] == "B")
    pg = PartitionedGraph(g, alice, bob, sp, "diameter", {"q": q})
    if check if check is not None else q <= 8:
        expected = 4 if disjoint(sp) else 5
        if diameter(g) != expected:
            raise FamilyError(f"diameter {diameter(g)} != {expected} for {sp}")
    return pg


# -- verification ----------------------------------------------------------------

def secret_bits(family: str, params: dict) -> int:
    if family == "cycle":
        return len(bipartite_base(params["p"], params["k"]))
    if family == "diameter":
        return int(params["q"])
    raise FamilyError(f"unknown family {family!r}")


def _build(family: str, params: dict, sp: SecretPair) -> PartitionedGraph:
    if family == "cycle":
        return build_cycle_family(params["p"], params["k"], sp)
    return build_diameter_family(sp, check=False)


def family_predicate(family: str, params: dict, g: AttributedGraph) -> bool:
    """The graph property the family is designed around, via the oracles."""
    if family == "cycle":
        k = params["k"]
        return g.n >= k and contains_k_cycle(g, k)
    if len(components(g)) > 1:
        return True
    return diameter(g) >= 5


def _evaluate(family: str, params: dict, pairs):
    out = []
    for a, b, q in pairs:
        sp = SecretPair.from_ints(a, b, q)
        pg = _build(family, params, sp)
        out.append((sp.s_a, sp.s_b, disjoint(sp),
                    family_predicate(family, params, pg.graph), pg.cut, pg.graph.n))
    return out


def verify_family(family: str, params: dict, exhaustive_limit: int = 1 << 18,
                  random_pairs: int = 1000, seed: int = 0, n_jobs: int = 1,
                  max_counterexamples: int = 20) -> dict:
    """Sweep secret pairs and report how the predicate splits by disjointness.

    All ``4**q`` pairs are enumerated when that count is within
    ``exhaustive_limit``; otherwise ``random_pairs`` uniform pairs are drawn.
    The polarity is the majority predicate value of each class, and a
    counterexample is a pair whose value differs from its class polarity.
    """
    q = secret_bits(family, params)
    total = 1 << (2 * q)
    exhaustive = total <= exhaustive_limit
    if exhaustive:
        pairs = [(a, b, q) for a in range(1 << q) for b in range(1 << q)]
    else:
        rng = np.random.default_rng(seed)
        pairs = [(int.from_bytes(rng.bytes(8), "big") % (1 << q),
                  int.from_bytes(rng.bytes(8), "big") % (1 << q), q)
                 for _ in range(random_pairs)]
    if n_jobs == 1:
        rows = _evaluate(family, params, pairs)
    else:
        from joblib import Parallel, delayed
        chunks = [pairs[i::n_jobs * 4] for i in range(n_jobs * 4)]
        parts = Parallel(n_jobs=n_jobs)(delayed(_evaluate)(family, params, c) for c in chunks)
        rows = [r for part in parts for r in part]
    table = {"disjoint": {"true": 0, "false": 0}, "intersecting": {"true": 0, "false": 0}}
    for _, _, dis, value, _, _ in rows:
        table["disjoint" if dis else "intersecting"][str(value).lower()] += 1
    polarity = {}
    for cls, counts in table.items():
        if counts["true"] + counts["false"]:
            polarity[cls] = counts["true"] >= counts["false"]
    counterexamples = [
        {"s_a": sa, "s_b": sb, "disjoint": dis, "value": value}
        for sa, sb, dis, value, _, _ in rows
        if value != polarity["disjoint" if dis else "intersecting"]
    ]
    return {
        "family": family,
        "params": dict(params),
        "q": q,
        "exhaustive": exhaustive,
        "pairs": len(rows),
        "table": table,
        "polarity": polarity,
        "separates": len(set(polarity.values())) == 2,
        "counterexample_count": len(counterexamples),
        "counterexamples": counterexamples[:max_counterexamples],
        "cut_sizes": sorted({r[4] for r in rows}),
        "node_counts": sorted({r[5] for r in rows}),
    }


# -- datasets --------------------------------------------------------------------

def _sample_pair(rng: np.random.Generator, q: int, intersecting: bool,
                 density: float) -> SecretPair:
    """Disjoint pair with per-index probabilities ``(density, density)`` for
    ``(1,0), (0,1)``; an intersecting pair moves one of Bob's ones onto an
    index where only Alice has a one, so edge counts match across classes."""
    while True:
        u = rng.random(q)
        a = (u < density).astype(int)
        b = ((u >= density) & (u < 2 * density)).astype(int)
        if intersecting:
            only_a = np.flatnonzero(a & (1 - b))
            only_b = np.flatnonzero(b & (1 - a))
            if len(only_a) == 0 or len(only_b) == 0:
                continue
            b[rng.choice(only_a)] = 1
            b[rng.choice(only_b)] = 0
        return SecretPair("".join(map(str, a)), "".join(map(str, b)))


def sample_balanced_cycle_dataset(p: int, count: int, seed: int, k: int = 4,
                                  density: float = 0.45, max_attempts: int = 200):
    """Exactly balanced connected graphs from the cycle family.

    Returns ``(graphs, labels, metadata)``.  Classes alternate so each label
    appears ``count / 2`` times; the label is recomputed by the cycle oracle
    and a draw whose oracle label disagrees with the intended class, or
    whose graph is disconnected, is redrawn.
    """
    if count % 2:
        raise ValueError("count must be even for an exactly balanced dataset")
    if not 0 < density <= 0.5:
        raise ValueError("density must lie in (0, 0.5]")
    rng = np.random.default_rng(seed)
    base = bipartite_base(p, k)
    graphs, labels, secrets = [], [], []
    for idx in range(count):
        want = idx % 2 == 0
        for _ in range(max_attempts):
            sp = _sample_pair(rng, len(base), want, density)
            g = build_cycle_family(p, k, sp, base).graph
            if len(components(g)) > 1:
                continue
            if contains_k_cycle(g, k) == want:
                break
        else:
            raise RuntimeError(f"no connected graph with label {want} after {max_attempts} draws")
        graphs.append(g)
        labels.append(int(want))
        secrets.append([sp.s_a, sp.s_b])
    order = rng.permutation(count)
    graphs = [graphs[i] for i in order]
    labels = [labels[i] for i in order]
    secrets = [secrets[i] for i in order]
    diams = [diameter(g) for g in graphs]
    sizes = [g.n for g in graphs]
    meta = {
        "family": "cycle", "p": p, "k": k, "q": len(base), "count": count,
        "seed": seed, "density": density,
        "n_min": min(sizes), "n_max": max(sizes), "n_mean": statistics.fmean(sizes),
        "diameter_mean": statistics.fmean(diams),
        "diameter_min": min(diams), "diameter_max": max(diams),
        "positives": sum(labels), "secrets": secrets,
    }
    return graphs, labels, meta


def write_cycle_dataset(directory, graphs, labels, meta) -> None:
    save_dataset(directory, graphs, labels)
    with open(os.path.join(directory, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=1)
