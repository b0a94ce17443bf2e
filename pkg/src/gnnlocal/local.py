"""Synchronous LOCAL / CONGEST simulator.

Every node runs the same deterministic :class:`NodeAlgorithm`.  States and
messages are bit strings (``str`` over ``'0'``/``'1'``) so their sizes are
exact.  Round 0 is the initialisation: each node's state and the message it
sends to every ``v_j`` in its closed neighbourhood are both
``init(a_i, v_i)``.  In round ``l >= 1`` node ``v_i`` receives the multiset
``{(s_{i<-j}, a_{i<-j})}`` over its closed neighbourhood (self-message
included, with the empty self-loop attribute), computes its new state with
``alg1`` and broadcasts ``alg2(state)``.

The received multiset is handed over sorted, so algorithms cannot depend on
delivery order.  The round index is passed to ``alg1``/``alg2`` explicitly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from . import bits as B
from .graph import AttributedGraph, build_graph

__all__ = [
    "BandwidthBudget",
    "BandwidthViolation",
    "Node",
    "NodeAlgorithm",
    "Transcript",
    "cut_traffic",
    "decide",
    "decision_algorithm",
    "degree_algorithm",
    "echo",
    "full_graph_records",
    "graph_from_records",
    "knowledge_round",
    "run_congest",
    "run_local",
    "transcript_from_json",
    "union_reconstruction",
]

Received = tuple[tuple[str, tuple[Fraction, ...]], ...]


@dataclass(frozen=True)
class Node:
    """What a node knows about itself: its id and the network size."""

    id: int
    n: int


def _send_state(ell: int, state: str, node: Node) -> str:
    return state


@dataclass(frozen=True)
class NodeAlgorithm:
    name: str
    init: Callable[[tuple, Node], str]
    alg1: Callable[[int, Received, Node], str]
    alg2: Callable[[int, str, Node], str] = _send_state


@dataclass(frozen=True)
class BandwidthBudget:
    """Per-message bit cap ``b``; ``None`` means unbounded (plain LOCAL)."""

    b: int | None

    def __post_init__(self):
        if self.b is not None and self.b < 1:
            raise ValueError(f"bandwidth must be at least 1 bit, got {self.b}")

    @property
    def bounded(self) -> bool:
        return self.b is not None


class BandwidthViolation(RuntimeError):
    def __init__(self, round_, edge, size, budget):
        super().__init__(
            f"round {round_}: message on edge {edge[1]}->{edge[0]} has {size} bits, "
            f"budget is {budget}")
        self.round = round_
        self.edge = edge
        self.size = size
        self.budget = budget


@dataclass(frozen=True)
class Transcript:
    """Full record of an execution.

    ``states[l][i]`` is ``s_i^(l)``; ``messages[l]`` maps a directed pair
    ``(i, j)`` of node indices to ``s_{i<-j}^(l)``, self-pairs included.
    """

    rounds: int
    ids: tuple[int, ...]
    states: tuple[tuple[str, ...], ...]
    messages: tuple[dict, ...] = field(compare=True)

    def message_bits(self, ell: int) -> dict:
        return {e: len(m) for e, m in self.messages[ell].items()}

    def max_message_bits(self) -> int:
        return max((len(m) for msgs in self.messages for m in msgs.values()), default=0)

    def to_json(self) -> dict:
        rounds = []
        for ell in range(self.rounds + 1):
            rounds.append({
                "round": ell,
                "states": list(self.states[ell]),
                "messages": [
                    {"to": i, "from": j, "bits": m, "size": len(m)}
                    for (i, j), m in sorted(self.messages[ell].items())
                ],
            })
        return {"rounds": self.rounds, "ids": list(self.ids), "per_round": rounds}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def transcript_from_json(obj: dict) -> Transcript:
    states, messages = [], []
    for entry in obj["per_round"]:
        states.append(tuple(entry["states"]))
        messages.append({(m["to"], m["from"]): m["bits"] for m in entry["messages"]})
    return Transcript(obj["rounds"], tuple(obj["ids"]), tuple(states), tuple(messages))


def _execute(g: AttributedGraph, alg: NodeAlgorithm, d: int,
             budget: int | None, schedule: Sequence[int] | None) -> Transcript:
    if d < 0:
        raise ValueError("round count must be non-negative")
    nodes = [Node(g.ids[i], g.n) for i in range(g.n)]
    order = list(schedule) if schedule is not None else list(range(g.n))
    if sorted(order) != list(range(g.n)):
        raise ValueError("schedule must be a permutation of the nodes")
    closed = [g.closed_neighbors(i) for i in range(g.n)]

    def broadcast(ell, outgoing):
        msgs = {}
        for j in range(g.n):
            m = outgoing[j]
            if budget is not None and len(m) > budget:
                raise BandwidthViolation(ell, (closed[j][0], j), len(m), budget)
            for i in closed[j]:
                msgs[(i, j)] = m
        return msgs

    current = [None] * g.n
    for i in order:
        current[i] = alg.init(g.node_attr[i], nodes[i])
    states = [tuple(current)]
    messages = [broadcast(0, current)]
    for ell in range(1, d + 1):
        prev = messages[-1]
        new_states = [None] * g.n
        outgoing = [None] * g.n
        for i in order:
            received = tuple(sorted((prev[(i, j)], g.attr(i, j)) for j in closed[i]))
            new_states[i] = alg.alg1(ell, received, nodes[i])
            outgoing[i] = alg.alg2(ell, new_states[i], nodes[i])
        states.append(tuple(new_states))
        messages.append(broadcast(ell, outgoing))
    return Transcript(d, g.ids, tuple(states), tuple(messages))


def run_local(g: AttributedGraph, alg: NodeAlgorithm, d: int,
              schedule: Sequence[int] | None = None) -> Transcript:
    """Run ``d`` synchronous rounds with unbounded messages."""
    return _execute(g, alg, d, None, schedule)


def run_congest(g: AttributedGraph, alg: NodeAlgorithm, d: int,
                budget: BandwidthBudget | int,
                schedule: Sequence[int] | None = None) -> Transcript:
    """Like :func:`run_local` but every message must fit in ``budget.b`` bits.

    Raises :class:`BandwidthViolation` in the first round with an oversized
    message.
    """
    if isinstance(budget, int):
        budget = BandwidthBudget(budget)
    if not budget.bounded:
        raise ValueError("CONGEST needs a bounded bandwidth")
    return _execute(g, alg, d, budget.b, schedule)


# -- reference algorithms -----------------------------------------------------

def _init_pair(attr, node: Node) -> str:
    return B.encode_seq(tuple(attr), node.id)


@lru_cache(maxsize=1 << 16)
def _pair(bits: str) -> tuple:
    return B.decode_seq(bits, 2)


def _own(received: Received, node: Node) -> str:
    for msg, _ in received:
        if _pair(msg)[1] == node.id:
            return msg
    raise ValueError(f"node {node.id} did not receive its own message")


def echo() -> NodeAlgorithm:
    """Keeps ``(a_i, v_i)`` as the state forever."""
    return NodeAlgorithm("echo", _init_pair, lambda ell, rec, node: _own(rec, node))


def degree_algorithm() -> NodeAlgorithm:
    """State after round 1 is the encoded degree ``deg_i``.

    Messages after round 1 carry ``(deg, id)`` so a node can find its own
    value among the received ones in later rounds.
    """
    def alg1(ell, received, node):
        if ell == 1:
            return B.encode(len(received) - 1)
        for msg, _ in received:
            deg, vid = _pair(msg)
            if vid == node.id:
                return B.encode(deg)
        raise ValueError("own message missing")

    def alg2(ell, state, node):
        return state + B.encode(node.id)

    return NodeAlgorithm("degree", _init_pair, alg1, alg2)


# union reconstruction records: (0, id, attr) node, (1, u, v) undirected edge
# with u < v, (2, i, j, attr) non-empty attribute of e_{i<-j}
NODE, EDGE, EDGE_ATTR = 0, 1, 2


@lru_cache(maxsize=1 << 16)
def _record_set(bits: str) -> frozenset:
    return B.decode(bits)


@lru_cache(maxsize=1 << 18)
def _record_bits(record: tuple) -> str:
    return B.encode(record)


def _encode_records(records: Iterable[tuple]) -> str:
    items = sorted(_record_bits(r) for r in records)
    return "10" + B.gamma(len(items) + 1) + "".join(items)


def _union_round(ell, received, node):
    if ell == 1:
        records = set()
        for msg, attr in received:
            a_j, v_j = _pair(msg)
            records.add((NODE, v_j, a_j))
            if v_j != node.id:
                records.add((EDGE, min(node.id, v_j), max(node.id, v_j)))
                if attr:
                    records.add((EDGE_ATTR, node.id, v_j, attr))
        return _encode_records(records)
    if len(received) == 1:
        return received[0][0]
    merged = set()
    for msg, _ in received:
        merged |= _record_set(msg)
    return _encode_records(merged)


def union_reconstruction(d: int | None = None) -> NodeAlgorithm:
    """Each node's state is the set of graph records it has heard of.

    Round 1 turns the initial ``(a_j, v_j)`` messages into node records,
    incident-edge records and the node's own incoming edge attributes; every
    later round takes the union of all received states.  Empty edge
    attributes are left implicit.  ``d`` is accepted for symmetry with other
    constructors; the procedure is the same in every round after the first.
    """
    return NodeAlgorithm("union", _init_pair, _union_round)


def full_graph_records(g: AttributedGraph) -> frozenset:
    records = {(NODE, g.ids[i], g.node_attr[i]) for i in range(g.n)}
    for (i, j) in g.edges:
        u, v = g.ids[i], g.ids[j]
        records.add((EDGE, min(u, v), max(u, v)))
        for a, b in ((i, j), (j, i)):
            attr = g.attr(a, b)
            if attr:
                records.add((EDGE_ATTR, g.ids[a], g.ids[b], attr))
    return frozenset(records)


def graph_from_records(records: Iterable[tuple],
                       allow_disconnected: bool = False) -> AttributedGraph:
    """Rebuild a graph whose node indices are the recorded ids."""
    records = list(records)
    node_attr = {r[1]: r[2] for r in records if r[0] == NODE}
    n = len(node_attr)
    if sorted(node_attr) != list(range(n)):
        raise ValueError("records do not name ids 0..n-1")
    edges = [(r[1], r[2]) for r in records if r[0] == EDGE]
    edge_attr = {(r[1], r[2]): r[3] for r in records if r[0] == EDGE_ATTR}
    return build_graph(n, edges, [node_attr[i] for i in range(n)], edge_attr,
                       allow_disconnected=allow_disconnected)


def knowledge_round(g: AttributedGraph, max_rounds: int | None = None) -> int | None:
    """First round after which every node's union state is the full graph."""
    target = _encode_records(full_graph_records(g))
    if max_rounds is None:
        max_rounds = g.n + 1
    t = run_local(g, union_reconstruction(), max_rounds)
    for ell in range(max_rounds + 1):
        if all(s == target for s in t.states[ell]):
            return ell
    return None


def decision_algorithm(rounds: int, predicate: Callable[[AttributedGraph], bool],
                       name: str = "decision") -> NodeAlgorithm:
    """Union reconstruction for ``rounds - 1`` rounds, then each node evaluates
    ``predicate`` on the graph it knows and outputs one encoded boolean."""
    if rounds < 1:
        raise ValueError("a decision needs at least one round")

    def alg1(ell, received, node):
        state = _union_round(ell, received, node)
        if ell < rounds:
            return state
        known = graph_from_records(_record_set(state), allow_disconnected=True)
        return B.encode(bool(predicate(known)))

    return NodeAlgorithm(name, _init_pair, alg1)


def decide(terminal_states: Sequence) -> str:
    """``accept`` iff every node outputs true."""
    verdicts = []
    for s in terminal_states:
        value = B.decode(s) if isinstance(s, str) else s
        if not isinstance(value, bool):
            raise ValueError(f"terminal state {s!r} is not a boolean")
        verdicts.append(value)
    return "accept" if all(verdicts) else "reject"


def cut_traffic(t: Transcript, alice: Iterable[int], bob: Iterable[int] | None = None):
    """Bits crossing a node bipartition, per round and in total.

    Self-messages never cross.  Returns ``(per_round, total)``.
    """
    alice = set(alice)
    n = len(t.ids)
    bob = set(range(n)) - alice if bob is None else set(bob)
    if alice & bob or alice | bob != set(range(n)) or not alice or not bob:
        raise ValueError("partition must split all nodes into two non-empty sides")
    per_round = []
    for msgs in t.messages:
        per_round.append(sum(len(m) for (i, j), m in msgs.items()
                             if (i in alice) != (j in alice)))
    return per_round, sum(per_round)

