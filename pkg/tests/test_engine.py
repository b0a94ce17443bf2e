from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnnlocal.bits import FixedPointOverflow
from gnnlocal.catalog import connected_graphs, cycle, path, random_connected_graph, star
from gnnlocal.engine import (GnnLayer, GnnNetwork, congest_budget, default_precision, forward,
                             gnn_from_local, local_from_gnn, random_network, readout,
                             reconstruction_network, sum_layer, trace_bits, width,
                             width_budget)
from gnnlocal.graph import build_graph, diameter, girth
from gnnlocal.local import degree_algorithm, echo, run_congest, run_local, union_reconstruction

seeds = st.integers(0, 2**32 - 1)
ALGS = {"echo": echo, "degree": degree_algorithm, "union": union_reconstruction}


def test_sum_layer_on_triangle():
    g = cycle(3, node_attr=[(1,), (2,), (3,)])
    trace = forward(GnnNetwork([sum_layer()], precision=6), g)
    assert trace.terminal() == ((6,), (6,), (6,))
    assert width(trace) == 1


def test_zero_padding_of_ragged_messages():
    layer = GnnLayer(lambda xi, xj, vi, vj, a: (1,) * (vj + 1), lambda z: tuple(z))
    trace = forward(GnnNetwork([layer], precision=6), path(3))
    assert trace.terminal()[0] == (2, 1)
    assert trace.terminal()[1] == (3, 2, 1)


def test_overflow_is_reported():
    doubling = GnnLayer(lambda xi, xj, vi, vj, a: xj, lambda z: tuple(2 * x for x in z))
    net = GnnNetwork([doubling] * 4, precision=4)
    with pytest.raises(FixedPointOverflow):
        forward(net, cycle(3, node_attr=[(1,)] * 3))


def test_fractional_states_round_to_grid():
    third = GnnLayer(lambda xi, xj, vi, vj, a: xj, lambda z: tuple(x / 3 for x in z))
    trace = forward(GnnNetwork([third], precision=6, frac_bits=2), path(2, node_attr=[(1,), (1,)]))
    assert trace.terminal()[0] == (Fraction(3, 4),)    # 2/3 rounds to 3/4


def test_network_rejects_mismatched_size():
    net = gnn_from_local(echo(), 1, 4)
    with pytest.raises(ValueError):
        forward(net, cycle(5))
    with pytest.raises(ValueError):
        GnnNetwork([])


def _assert_equivalent(g, name, depth):
    alg = ALGS[name]()
    net = gnn_from_local(alg, depth, g.n)
    bits = trace_bits(net, forward(net, g))
    t = run_local(g, alg, depth)
    assert bits == [list(t.states[ell]) for ell in range(1, depth + 1)]


@pytest.mark.parametrize("name", sorted(ALGS))
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_local_to_gnn_matches_bit_for_bit(name, n):
    for g in connected_graphs(n):
        _assert_equivalent(g, name, 3)


@given(seeds, st.sampled_from(sorted(ALGS)))
@settings(max_examples=10, deadline=None)
def test_local_to_gnn_with_edge_attributes(seed, name):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, 7, 0.3)
    eattr = {}
    for i, j in g.edges:
        eattr[(i, j)] = (int(rng.integers(5)),)
        eattr[(j, i)] = ()
    g = build_graph(g.n, g.edges, [(int(rng.integers(3)),) for _ in range(g.n)], eattr,
                    list(rng.permutation(g.n)))
    _assert_equivalent(g, name, 3)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_gnn_to_congest_fits_budget_and_matches(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    g = random_connected_graph(rng, n, 0.4)
    g = build_graph(n, g.edges, [(int(rng.integers(3)),) for _ in range(n)])
    net = random_network(rng, int(rng.integers(1, 4)), n)
    trace = forward(net, g)
    p = net.fixed_point(n).p
    b = congest_budget(max(width(trace), 1), p, n)
    alg = local_from_gnn(net, n)
    t = run_congest(g, alg, net.depth, b)
    fmt = net.fixed_point(n)
    for ell in range(net.depth + 1):
        decoded = [fmt.from_bits(s[-p * len(x):] if ell == 0 else s) if x else ()
                   for s, x in zip(t.states[ell], trace.states[ell])]
        assert decoded == list(trace.states[ell])
    assert t.max_message_bits() <= b


def test_budget_arithmetic():
    assert default_precision(2) == 4 and default_precision(100) == 14
    assert congest_budget(3, 8, 16) == 28
    assert width_budget(28, 8, 16) == 3
    assert width_budget(congest_budget(5, 7, 33), 7, 33) == 5


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_reconstruction_readout_computes_graph_functions(seed):
    g = random_connected_graph(np.random.default_rng(seed), 9, 0.25)
    net = reconstruction_network(g.n, lambda h: (diameter(h), girth(h)))
    assert readout(forward(net, g), net.readout) == (diameter(g), girth(g))


def test_readout_sees_every_terminal_state():
    net = GnnNetwork([sum_layer()], precision=6)
    trace = forward(net, star(3, node_attr=[(1,)] * 4))
    assert readout(trace, lambda states: sorted(x[0] for x in states)) == [2, 2, 2, 4]
