import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import all_graphs, brute_independent_triple, brute_is_unipolar, random_graph
from perfolab.errors import CapExceededError, InvalidVertexError, PerfolabError
from perfolab.graph import (
    Graph, PartitionedGraph, VertexSet, common_neighborhood, complement, derived_graph,
    has_independent_triple_in_neighborhood, is_unipolar, smallest_unipolar_not_counipolar, unipolar_partition,
)


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(0, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [p for p, b in zip(pairs, bits) if b])


def test_complement_examples():
    assert complement(Graph.complete(3)) == Graph.empty(3)
    assert complement(Graph.empty(0)) == Graph.empty(0)
    assert complement(Graph.from_edges(3, [(0, 1), (1, 2)])).edges() == [(0, 2)]


@given(graphs(max_n=20))
def test_complement_involution(g):
    assert complement(complement(g)) == g
    c = complement(g)
    for a, b in itertools.combinations(range(g.n), 2):
        assert c.adjacent(a, b) != g.adjacent(a, b)
    assert all(not c.adjacent(v, v) for v in range(g.n))


def test_graph_basics():
    g = Graph.from_edges(4, [(0, 1), (2, 1)])
    assert g.edges() == [(0, 1), (1, 2)]
    assert g.edge_count() == 2
    assert list(g.degrees()) == [1, 2, 1, 0]
    assert g.neighbors(1).members() == (0, 2)
    with pytest.raises(InvalidVertexError):
        Graph.from_edges(3, [(0, 3)])
    with pytest.raises(PerfolabError):
        Graph.from_edges(3, [(1, 1)])
    assert Graph.from_json(g.to_json()) == g
    assert g.induced_subgraph([1, 2]).edges() == [(0, 1)]
    assert Graph.from_dense(g.dense()) == g


def test_common_neighborhood_examples():
    star = Graph.from_edges(3, [(2, 0), (2, 1)])
    assert common_neighborhood(star, [0, 1]).members() == (2,)
    assert common_neighborhood(Graph.complete(3), [0, 1]).members() == (2,)
    g = random_graph(10, random.Random(1))
    for v in range(10):
        assert common_neighborhood(g, [v]) == g.neighbors(v)
    assert common_neighborhood(g, []) == VertexSet.full(10)


@given(graphs(max_n=14), st.data())
def test_common_neighborhood_intersection(g, data):
    s = data.draw(st.sets(st.integers(0, max(g.n - 1, 0)), max_size=g.n)) if g.n else set()
    t = data.draw(st.sets(st.integers(0, max(g.n - 1, 0)), max_size=g.n)) if g.n else set()
    assert common_neighborhood(g, s | t) == common_neighborhood(g, s) & common_neighborhood(g, t)


def test_derived_graph_examples():
    g = Graph.from_edges(3, [(0, 2), (1, 2)])
    assert derived_graph(g, [0, 1], []).graph == Graph.empty(2)
    d = derived_graph(g, [0, 1], [2])
    assert d.graph.edges() == [(0, 1)] and d.vertex_map == (0, 1)


def test_derived_graph_triple_loop_oracle():
    rng = random.Random(7)
    for _ in range(200):
        g = random_graph(8, rng)
        s = sorted(rng.sample(range(8), 4))
        t = rng.sample(range(8), 3)
        d = derived_graph(g, s, t)
        for ia, ib in itertools.combinations(range(4), 2):
            a, b = s[ia], s[ib]
            expected = any(g.adjacent(a, v) and g.adjacent(b, v) for v in t)
            assert d.graph.adjacent(ia, ib) == expected


@given(graphs(max_n=10), st.data())
def test_derived_graph_monotone_in_witnesses(g, data):
    if g.n == 0:
        return
    s = data.draw(st.sets(st.integers(0, g.n - 1)))
    t = data.draw(st.sets(st.integers(0, g.n - 1)))
    extra = data.draw(st.sets(st.integers(0, g.n - 1)))
    small = set(derived_graph(g, s, t).graph.edges())
    big = set(derived_graph(g, s, t | extra).graph.edges())
    assert small <= big


def test_independent_triple_examples():
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    assert has_independent_triple_in_neighborhood(star, 0)
    assert not has_independent_triple_in_neighborhood(Graph.complete(5), 0)


def test_independent_triple_random_30():
    rng = random.Random(3)
    for _ in range(20):
        g = random_graph(30, rng, p=rng.choice([0.2, 0.5, 0.8]))
        for v in range(30):
            assert has_independent_triple_in_neighborhood(g, v) == brute_independent_triple(g, v)


@settings(max_examples=300)
@given(graphs(max_n=12))
def test_independent_triple_small(g):
    for v in range(g.n):
        assert has_independent_triple_in_neighborhood(g, v) == brute_independent_triple(g, v)


def test_unipolar_examples():
    assert is_unipolar(Graph.complete(6))
    c5 = Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    assert not is_unipolar(c5)
    # split graph: clique {0,1,2}, independent {3,4,5}
    split = Graph.from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 0), (4, 1), (5, 1), (5, 2)])
    assert is_unipolar(split)
    with pytest.raises(CapExceededError):
        is_unipolar(Graph.empty(17))


def test_unipolar_matches_subset_search_all_small():
    for n in range(6):
        for g in all_graphs(n):
            assert is_unipolar(g) == brute_is_unipolar(g)


def test_unipolar_partition_is_valid():
    rng = random.Random(5)
    for _ in range(200):
        g = random_graph(rng.randint(1, 10), rng)
        pg = unipolar_partition(g)
        if pg is not None:
            pg.validate()


def test_smallest_unipolar_not_counipolar():
    h = smallest_unipolar_not_counipolar()
    assert is_unipolar(h) and not is_unipolar(complement(h))
    # no smaller graph has the property, by exhaustive search
    for n in range(h.n):
        for g in all_graphs(n):
            assert not (brute_is_unipolar(g) and not brute_is_unipolar(complement(g)))


def test_partitioned_graph_validation():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (2, 3)])
    PartitionedGraph(g, ((0,), (1,), (2, 3))).validate()
    with pytest.raises(PerfolabError):
        PartitionedGraph(g, ((0,), (1, 2, 3))).validate()
    with pytest.raises(PerfolabError):
        PartitionedGraph(g, ((0,), (1,), (2,))).validate()
    pg = PartitionedGraph(g, ((0,), (1,), (2, 3)))
    assert PartitionedGraph.from_json(pg.to_json()) == pg
    assert list(pg.part_index()) == [0, 1, 2, 2]


def test_side_vertices_never_have_independent_triples():
    from perfolab.sampler import SampleSeed, sample_unipolar

    for s in range(20):
        pg = sample_unipolar(40, SampleSeed(s, 0))
        central = set(pg.central)
        for v in range(40):
            if v not in central:
                assert not has_independent_triple_in_neighborhood(pg.graph, v)


def test_vertex_set_algebra():
    a = VertexSet.of(6, [0, 2, 4])
    b = VertexSet.of(6, [2, 3])
    assert (a & b).members() == (2,)
    assert (a | b).members() == (0, 2, 3, 4)
    assert (a - b).members() == (0, 4)
    assert VertexSet.of(6, [2]) <= a
    assert np.array_equal(VertexSet.from_bools(a.to_bools()).to_bools(), a.to_bools())
