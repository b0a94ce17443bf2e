from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnnlocal.catalog import (complete, connected_graphs, cycle, path, random_connected_graph,
                              star, to_networkx, two_triangles)
from gnnlocal.graph import (GraphError, GraphParseError, SubgraphIndicator, build_graph,
                            diameter, eccentricities, encode_subgraph, girth, load_dataset,
                            parse, permute_nodes, relabel, save_dataset, serialize)


@st.composite
def attributed_graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    g = random_connected_graph(rng, n, draw(st.floats(0, 0.6)))
    frac = st.fractions(min_value=-20, max_value=20, max_denominator=12)
    dim = draw(st.integers(0, 2))
    nattr = [draw(st.lists(frac, min_size=dim, max_size=dim)) for _ in range(n)]
    eattr = {}
    for i, j in g.edges:
        eattr[(i, j)] = draw(st.lists(frac, max_size=2))
        eattr[(j, i)] = draw(st.lists(frac, max_size=2))
    ids = list(rng.permutation(n))
    return build_graph(n, g.edges, nattr, eattr, ids)


@given(attributed_graphs())
@settings(max_examples=60)
def test_serialize_roundtrip(g):
    assert parse(serialize(g)) == g


def test_example_file_parses():
    text = """# comment
    graph n=3
    node 0 1 0.5
    node 1 2 0
    node 2 3 1/3
    edge 0 1 1 | 2
    edge 1 2 |
    """
    g = parse(text)
    assert g.n == 3 and g.m == 2
    assert g.node_attr[2] == (Fraction(3), Fraction(1, 3))
    assert g.attr(0, 1) == (Fraction(1),) and g.attr(1, 0) == (Fraction(2),)
    assert g.attr(1, 2) == ()


@pytest.mark.parametrize("text,line", [
    ("graph n=2\nedge 0 5\n", 2),
    ("graph n=2\nnode 0\nnode 0\n", None),
    ("node 0\n", 1),
    ("graph n=2\nedge 0 1 x | 1\n", 2),
    ("graph n=3\nedge 0 1\n", None),
])
def test_parse_errors_carry_lines(text, line):
    with pytest.raises(GraphParseError) as err:
        parse(text)
    assert err.value.line == line


def test_build_rejects_bad_input():
    with pytest.raises(GraphError):
        build_graph(3, [(0, 3)])
    with pytest.raises(GraphError):
        build_graph(3, [(0, 0), (1, 2)])
    with pytest.raises(GraphError):
        build_graph(3, [(0, 1), (1, 0), (1, 2)])
    with pytest.raises(GraphError) as err:
        build_graph(4, [(0, 1), (2, 3)])
    assert err.value.components == [[0, 1], [2, 3]]


def test_metrics_of_named_graphs():
    assert diameter(cycle(6)) == 3
    assert diameter(path(5)) == 4
    assert diameter(complete(5)) == 1
    assert eccentricities(star(4)) == [1, 2, 2, 2, 2]
    assert girth(cycle(7)) == 7
    assert girth(path(4)) == float("inf")
    assert girth(two_triangles()) == 3


@pytest.mark.parametrize("n,count", [(1, 1), (2, 1), (3, 2), (4, 6), (5, 21), (6, 112), (7, 853)])
def test_connected_graph_counts(n, count):
    graphs = connected_graphs(n)
    assert len(graphs) == count
    assert all(nx.is_connected(to_networkx(g)) for g in graphs)


@given(attributed_graphs(), st.randoms())
@settings(max_examples=40)
def test_permute_nodes_preserves_structure(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = permute_nodes(g, perm)
    assert diameter(h) == diameter(g)
    for i, j in g.edges:
        assert h.attr(perm[i], perm[j]) == g.attr(i, j)
    assert [h.ids[perm[i]] for i in range(g.n)] == list(g.ids)


def test_relabel_changes_only_ids():
    g = cycle(4)
    h = relabel(g, [3, 2, 1, 0])
    assert h.edges == g.edges and h.ids == (3, 2, 1, 0)


def test_subgraph_encoding_appends_bits():
    g = path(3, node_attr=[(1,), (2,), (3,)])
    h = SubgraphIndicator.from_edges(g, [(0, 1)])
    assert h.node_member == (True, True, False)
    e = encode_subgraph(g, h)
    assert e.node_attr[2] == (Fraction(3), Fraction(0))
    assert e.attr(0, 1) == (Fraction(1),) and e.attr(2, 1) == (Fraction(0),)


def test_dataset_roundtrip(tmp_path):
    graphs = [cycle(4), path(3)]
    save_dataset(tmp_path, graphs, [1, 0])
    names, loaded, labels = load_dataset(tmp_path)
    assert loaded == graphs and labels == [1, 0] and len(names) == 2
