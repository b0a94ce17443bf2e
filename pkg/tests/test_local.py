import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnnlocal import bits as B
from gnnlocal.catalog import complete, cycle, path, random_connected_graph, star
from gnnlocal.graph import diameter, relabel
from gnnlocal.local import (BandwidthViolation, cut_traffic, decide, decision_algorithm,
                            degree_algorithm, echo, full_graph_records, graph_from_records,
                            knowledge_round, run_congest, run_local, transcript_from_json,
                            union_reconstruction)

seeds = st.integers(0, 2**32 - 1)


def test_echo_keeps_initial_pair():
    g = path(3, node_attr=[(1,), (2,), (3,)])
    t = run_local(g, echo(), 3)
    assert t.states[3] == t.states[0]
    assert B.decode_seq(t.states[0][1], 2) == ((2,), 1)


def test_degree_algorithm_outputs_degrees():
    g = star(3)
    t = run_local(g, degree_algorithm(), 2)
    assert [B.decode(s) for s in t.states[1]] == [3, 1, 1, 1]
    assert t.states[2] == t.states[1]


def test_messages_cover_closed_neighbourhoods():
    g = cycle(4)
    t = run_local(g, echo(), 1)
    assert set(t.messages[0]) == {(i, j) for i in range(4) for j in g.closed_neighbors(i)}


@given(seeds, st.randoms())
@settings(max_examples=25)
def test_schedule_does_not_change_transcript(seed, rnd):
    g = random_connected_graph(np.random.default_rng(seed), 7, 0.3)
    order = list(range(g.n))
    rnd.shuffle(order)
    assert run_local(g, union_reconstruction(), 3) == \
        run_local(g, union_reconstruction(), 3, schedule=order)


def test_transcript_json_roundtrip():
    t = run_local(cycle(5), degree_algorithm(), 2)
    assert transcript_from_json(t.to_json()) == t


def test_congest_raises_on_oversized_message():
    g = complete(4)
    size = run_local(g, union_reconstruction(), 2).max_message_bits()
    run_congest(g, union_reconstruction(), 2, size)
    with pytest.raises(BandwidthViolation) as err:
        run_congest(g, union_reconstruction(), 2, size - 1)
    assert err.value.budget == size - 1 and err.value.size > size - 1


@pytest.mark.parametrize("g", [path(6), cycle(6), star(5)], ids=["path", "cycle", "star"])
def test_union_reaches_full_graph_in_diameter_rounds_on_bipartite(g):
    assert knowledge_round(g) == diameter(g)


@pytest.mark.parametrize("g", [cycle(5), complete(4)], ids=["odd-cycle", "complete"])
def test_union_needs_one_extra_round_on_odd_cycles(g):
    # an edge between two nodes at distance diameter is learned one round late
    assert knowledge_round(g) == diameter(g) + 1


@given(seeds)
@settings(max_examples=30)
def test_knowledge_round_is_diameter_or_one_more(seed):
    g = random_connected_graph(np.random.default_rng(seed), 8, 0.3)
    assert knowledge_round(g) - diameter(g) in (0, 1)


def test_records_rebuild_the_graph():
    g = relabel(cycle(5, node_attr=[(i,) for i in range(5)]), [4, 2, 0, 1, 3])
    h = graph_from_records(full_graph_records(g))
    assert h.m == g.m and diameter(h) == 2
    assert h.node_attr[4] == g.node_attr[0]


def test_decision_algorithm_accepts_iff_predicate_holds():
    alg = decision_algorithm(4, lambda h: diameter(h) == 3)
    assert decide(run_local(cycle(6), alg, 4).states[-1]) == "accept"
    assert decide(run_local(cycle(5), alg, 4).states[-1]) == "reject"
    with pytest.raises(ValueError):
        decide(["0"])


def test_cut_traffic_counts_crossing_bits_only():
    g = path(4)
    t = run_local(g, echo(), 1)
    per_round, total = cut_traffic(t, {0, 1})
    assert len(per_round) == 2
    assert per_round[0] == len(t.messages[0][(1, 2)]) + len(t.messages[0][(2, 1)])
    assert total == sum(per_round)
    with pytest.raises(ValueError):
        cut_traffic(t, {0, 1}, {1, 2, 3})
