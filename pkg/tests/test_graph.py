"""Graph ingestion, geodesics, and neighborhood extraction."""

import json
import math
import random
from fractions import Fraction

import pytest

from helpers import bellman_ford_row, random_connected_graph
from orcurv.errors import (
    DuplicateEdge,
    EmptyNeighborhood,
    InvalidWeight,
    NotAnEdge,
    ParseError,
    SelfLoop,
)
from orcurv.graph import (
    Graph,
    LocalNeighborhood,
    all_pairs_geodesic,
    load_graph,
    neighborhood,
    verify_tree,
)

INF = math.inf


# --- parsing -----------------------------------------------------------------

def test_edge_list_unit_weight_default():
    g = load_graph("0 1\n1 2")
    assert g.vertex_count == 3
    assert g.edges == ((0, 1, 1), (1, 2, 1))


def test_edge_list_explicit_weight():
    g = load_graph("0 1 2.5")
    assert g.vertex_count == 2
    assert g.edges == ((0, 1, Fraction(5, 2)),)
    assert g.edges[0][2] == 2.5


def test_edge_list_negative_weight_rejected():
    with pytest.raises(InvalidWeight):
        load_graph("0 1 -1")
    with pytest.raises(InvalidWeight):
        load_graph("0 1 0")


def test_edge_list_comments_and_blanks():
    g = load_graph("# header\n\n0 1  # trailing\n 1 2 3 \n")
    assert g.edges == ((0, 1, 1), (1, 2, 3))


def test_edge_list_malformed():
    with pytest.raises(ParseError):
        load_graph("0\n")
    with pytest.raises(ParseError):
        load_graph("0 1 2 3\n")
    with pytest.raises(ParseError):
        load_graph("a b\n")
    with pytest.raises(ParseError):
        load_graph("")


def test_self_loop_and_duplicate():
    with pytest.raises(SelfLoop):
        load_graph("2 2")
    with pytest.raises(DuplicateEdge):
        load_graph("0 1\n1 0")


def test_json_format():
    g = load_graph(json.dumps({"n": 4, "edges": [[0, 1], [1, 2, 2.5]]}), format="json")
    assert g.vertex_count == 4
    assert g.edges == ((0, 1, 1), (1, 2, Fraction(5, 2)))


def test_json_malformed():
    with pytest.raises(ParseError):
        load_graph("{", format="json")
    with pytest.raises(ParseError):
        load_graph(json.dumps({"edges": []}), format="json")
    with pytest.raises(ParseError):
        load_graph(json.dumps({"n": 2, "edges": [[0]]}), format="json")


def test_float_numeric_mode():
    g = load_graph("0 1 2.5\n1 2", numeric="float")
    assert all(isinstance(w, float) for _, _, w in g.edges)
    assert not g.rational


def test_bytes_input():
    g = load_graph(b"0 1\n")
    assert g.edge_count == 1


# --- all-pairs geodesics ------------------------------------------------------

def test_triangle_shortcut():
    g = load_graph("0 1 1\n1 2 1\n0 2 3")
    dg = all_pairs_geodesic(g)
    assert dg.d[0][2] == 2
    # the direct edge is undercut by the two-hop path
    assert dg.d[0][2] < 3


def test_path_distance():
    g = load_graph("0 1\n1 2")
    dg = all_pairs_geodesic(g)
    assert dg.d[0][2] == 2


def test_disconnected_is_inf():
    g = load_graph(json.dumps({"n": 2, "edges": []}), format="json")
    dg = all_pairs_geodesic(g)
    assert dg.d[0][1] == INF
    assert not dg.all_finite()


def test_matches_bellman_ford_oracle():
    rng = random.Random(11)
    for trial in range(8):
        n = rng.randint(4, 40)
        g = random_connected_graph(n, extra=rng.randint(0, n), rng=rng)
        dg = all_pairs_geodesic(g)
        for s in range(n):
            assert list(dg.d[s]) == bellman_ford_row(g, s)


def test_metric_invariants_exhaustive():
    rng = random.Random(7)
    for trial in range(4):
        n = rng.randint(5, 24)
        g = random_connected_graph(n, extra=rng.randint(0, 2 * n), rng=rng)
        dg = all_pairs_geodesic(g)
        d = dg.d
        for i in range(n):
            assert d[i][i] == 0
            for j in range(n):
                assert d[i][j] == d[j][i]
                for k in range(n):
                    assert d[i][j] <= d[i][k] + d[k][j]
        for u, v, w in g.edges:
            assert d[u][v] <= w


def test_metric_invariants_sampled_large():
    rng = random.Random(101)
    g = random_connected_graph(150, extra=120, rng=rng)
    dg = all_pairs_geodesic(g)
    d = dg.d
    n = g.vertex_count
    for _ in range(3000):
        i, j, k = rng.randrange(n), rng.randrange(n), rng.randrange(n)
        assert d[i][j] == d[j][i]
        assert d[i][j] <= d[i][k] + d[k][j]
    assert all(d[i][i] == 0 for i in range(n))


def test_dijkstra_equals_floyd_warshall():
    rng = random.Random(3)
    for trial in range(5):
        g = random_connected_graph(rng.randint(4, 20), extra=10, rng=rng)
        a = all_pairs_geodesic(g, algorithm="dijkstra")
        b = all_pairs_geodesic(g, algorithm="floyd_warshall")
        assert a.d == b.d


def test_parallel_identical():
    rng = random.Random(5)
    for rational in (True, False):
        g = random_connected_graph(30, extra=25, rng=rng, rational=rational)
        serial = all_pairs_geodesic(g, algorithm="dijkstra", workers=1)
        parallel = all_pairs_geodesic(g, algorithm="dijkstra", workers=4)
        assert serial.d == parallel.d  # bit-identical, float mode included


# --- neighborhoods ------------------------------------------------------------

def test_appendix_fixture_shape():
    nb = LocalNeighborhood.from_cost([[1, 3, 3, 2], [2, 3, 3, 3], [3, 2, 2, 3]], 1)
    assert (nb.p, nb.q) == (3, 4)
    assert nb.cost[0] == (1, 3, 3, 2)
    assert nb.dxy == 1


def test_path_neighborhood():
    g = load_graph("0 1\n1 2\n2 3")
    dg = all_pairs_geodesic(g)
    nb = neighborhood(g, dg, 1, 2)
    assert nb.X == (0,)
    assert nb.Y == (3,)
    assert nb.cost == ((3,),)
    assert nb.dxy == 1
    assert nb.x_dists == (1,)
    assert nb.y_dists == (1,)


def test_star_leaf_empty_neighborhood():
    g = load_graph("0 1\n0 2\n0 3")
    dg = all_pairs_geodesic(g)
    with pytest.raises(EmptyNeighborhood):
        neighborhood(g, dg, 0, 1)


def test_not_an_edge():
    g = load_graph("0 1\n1 2")
    dg = all_pairs_geodesic(g)
    with pytest.raises(NotAnEdge):
        neighborhood(g, dg, 0, 2)


def test_neighbor_lists_sorted():
    g = load_graph("3 1\n0 1\n1 5\n5 2\n5 4\n5 6")
    dg = all_pairs_geodesic(g)
    nb = neighborhood(g, dg, 1, 5)
    assert nb.X == (0, 3)
    assert nb.Y == (2, 4, 6)
    assert nb.cost == tuple(tuple(dg.d[a][b] for b in nb.Y) for a in nb.X)


def test_include_endpoints_extends_lists():
    g = load_graph("0 1\n1 2\n2 3")
    dg = all_pairs_geodesic(g)
    nb = neighborhood(g, dg, 1, 2, include_endpoints=True)
    assert nb.X == (0, 1)
    assert nb.Y == (2, 3)
    # a leaf endpoint still carries its own mass in this mode
    nb_leaf = neighborhood(g, dg, 0, 1, include_endpoints=True)
    assert nb_leaf.X == (0,)
    assert nb_leaf.Y == (1, 2)


def test_dxy_is_geodesic_not_edge_weight():
    g = load_graph("0 1 5\n0 2 1\n2 1 1\n0 3\n1 4")
    dg = all_pairs_geodesic(g)
    nb = neighborhood(g, dg, 0, 1)
    assert nb.dxy == 2  # shortcut through vertex 2 undercuts the direct edge


def test_verify_tree():
    assert verify_tree(load_graph("0 1\n1 2"))
    assert not verify_tree(load_graph("0 1\n1 2\n0 2"))
    forest = load_graph(json.dumps({"n": 4, "edges": [[0, 1], [2, 3]]}), format="json")
    assert not verify_tree(forest)


def test_scaled_graph():
    g = load_graph("0 1 2\n1 2 3")
    h = g.scaled(Fraction(1, 2))
    assert h.edges == ((0, 1, 1), (1, 2, Fraction(3, 2)))
