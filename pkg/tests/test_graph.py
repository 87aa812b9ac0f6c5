import itertools
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from k4frac.generators import complete, complete_minus_edges, complete_minus_matching, cycle, gnp, random_min_degree, star
from k4frac.graph import (
    EdgeListError,
    Graph,
    GraphError,
    NotACliqueError,
    check_clique,
    cliques_containing,
    common_neighbors,
    degree_deficiency,
    density_hat,
    enumerate_cliques,
    exceeds_four_fifths,
    format_edge_list,
    min_degree,
    ordered_cliques,
    parse_edge_list,
)

from . import oracle


@st.composite
def graphs(draw, max_n=10, min_n=1):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [p for p, k in zip(pairs, keep) if k])


@st.composite
def dense_graphs(draw):
    """Graphs with minimum degree above 4n/5."""
    n = draw(st.integers(6, 12))
    delta = draw(st.integers(4 * n // 5 + 1, n - 1))
    return random_min_degree(n, delta, draw(st.integers(0, 10_000)))


# ------------------------------------------------------------ neighborhoods

def test_common_neighbors_complete():
    assert common_neighbors(complete(5), {0}).sorted() == (1, 2, 3, 4)


def test_common_neighbors_empty_set_is_everything():
    g = cycle(7)
    assert common_neighbors(g, set()).sorted() == tuple(range(7))
    assert density_hat(g, set()) == 1


def test_common_neighbors_cycle_matches_oracle():
    g = cycle(5)
    adj = oracle.adjacency_sets(5, g.edges())
    assert set(common_neighbors(g, {0, 2})) == oracle.common(adj, (0, 2)) == {1}


@pytest.mark.parametrize("g, s, expected", [
    (complete(10), {3}, Fraction(9, 10)),
    (complete_minus_matching(12), {0, 2}, Fraction(8, 12)),
])
def test_density_hat_examples(g, s, expected):
    assert density_hat(g, s) == expected


@pytest.mark.parametrize("g, expected", [
    (complete(10), 9),
    (complete_minus_matching(12), 10),
    (star(5), 1),
])
def test_min_degree(g, expected):
    assert min_degree(g) == expected


def test_degree_deficiency_and_four_fifths():
    g = complete_minus_matching(12)
    assert degree_deficiency(g) == Fraction(2, 12)
    assert exceeds_four_fifths(g)
    assert not exceeds_four_fifths(complete_minus_matching(10))  # 8 == 4*10/5


@settings(max_examples=60, deadline=None)
@given(graphs(), st.data())
def test_density_monotone_and_submodular(g, data):
    vs = st.sets(st.integers(0, g.n - 1), max_size=min(g.n, 5))
    a, b = data.draw(vs), data.draw(vs)
    assert density_hat(g, a) >= density_hat(g, a | b)
    assert density_hat(g, a | b) >= density_hat(g, a) + density_hat(g, b) - density_hat(g, a & b)
    adj = oracle.adjacency_sets(g.n, g.edges())
    assert set(common_neighbors(g, a)) == oracle.common(adj, a)


@settings(max_examples=40, deadline=None)
@given(dense_graphs(), st.data())
def test_density_lower_bound_on_dense_graphs(g, data):
    s = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=5))
    assert density_hat(g, s) > 1 - Fraction(len(s), 5)
    a = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=5))
    b = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=5))
    if len(a | b) <= 5:
        assert density_hat(g, a) + density_hat(g, b) - density_hat(g, a & b) > 0


# ------------------------------------------------------------------ cliques

def test_enumerate_small_examples():
    assert len(list(enumerate_cliques(complete(5), 4))) == 5
    assert list(enumerate_cliques(complete_minus_edges(6, [(0, 1)]), 6)) == []


def test_enumerate_gnp_matches_quadruple_scan():
    g = gnp(12, 0.9, seed=5)
    adj = oracle.adjacency_sets(12, g.edges())
    assert sorted(enumerate_cliques(g, 4)) == oracle.cliques(adj, 4)


@settings(max_examples=50, deadline=None)
@given(graphs(max_n=11), st.integers(2, 6))
def test_enumerate_matches_nested_loops(g, r):
    adj = oracle.adjacency_sets(g.n, g.edges())
    got = list(enumerate_cliques(g, r))
    assert got == sorted(got)
    assert got == oracle.cliques(adj, r)


@settings(max_examples=30, deadline=None)
@given(graphs(max_n=9), st.integers(2, 5))
def test_enumerate_matches_networkx(g, r):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    ref = sorted(tuple(sorted(c)) for c in nx.enumerate_all_cliques(h) if len(c) == r)
    assert list(enumerate_cliques(g, r)) == ref


def test_cliques_containing():
    assert len(list(cliques_containing(complete(6), 4, {0, 1}))) == 6
    g = complete_minus_matching(12)
    want = [c for c in enumerate_cliques(g, 6) if {0, 2} <= set(c)]
    assert list(cliques_containing(g, 6, {0, 2})) == want
    with pytest.raises(NotACliqueError):
        list(cliques_containing(g, 4, {0, 1}))


def test_ordered_cliques_count():
    assert len(list(ordered_cliques(complete(6), 3))) == 6 * 5 * 4


def test_check_clique_errors():
    g = cycle(5)
    assert check_clique(g, (0, 1), sizes=(2,)) == (0, 1)
    with pytest.raises(NotACliqueError):
        check_clique(g, (0, 2), sizes=(2,))
    with pytest.raises(GraphError):
        check_clique(complete(5), (0, 0, 1), sizes=(3,))
    with pytest.raises(GraphError):
        check_clique(complete(5), (0, 1, 2), sizes=(4,))


# ----------------------------------------------------------------- edge lists

def test_edge_list_round_trip_with_isolated_vertices():
    g = Graph.from_edges(6, [(0, 1), (2, 3)])
    h = parse_edge_list(format_edge_list(g, "two edges"))
    assert h == g and h.n == 6


def test_edge_list_comments_and_blank_lines():
    g = parse_edge_list("# hello\n\n0 1\n# mid\n1 2\n")
    assert g.n == 3 and sorted(g.edges()) == [(0, 1), (1, 2)]


@pytest.mark.parametrize("text", [
    "0 1 2\n",          # three fields
    "0 x\n",            # not an integer
    "-1 2\n",           # negative id
    "3 3\n",            # self loop
    "n 2\n0 5\n",       # id beyond declared n
])
def test_edge_list_rejects(text):
    with pytest.raises(EdgeListError):
        parse_edge_list(text)


@settings(max_examples=40, deadline=None)
@given(graphs())
def test_edge_list_round_trip(g):
    assert parse_edge_list(format_edge_list(g)) == g


# ------------------------------------------------------------------ generators

def test_generator_shapes():
    assert complete(10).num_edges == 45
    g = complete_minus_matching(12)
    assert g.num_edges == 60 and min_degree(g) == 10
    h = complete_minus_matching(33)
    assert min_degree(h) == 31 and max(h.degree(v) for v in range(33)) == 32


@pytest.mark.parametrize("n, delta, seed", [(12, 10, 1), (33, 31, 7), (20, 5, 3)])
def test_random_min_degree_contract(n, delta, seed):
    g = random_min_degree(n, delta, seed)
    assert min_degree(g) >= delta
    assert random_min_degree(n, delta, seed) == g


def test_random_min_degree_infeasible():
    with pytest.raises(GraphError):
        random_min_degree(5, 5, 0)
