import itertools

import numpy as np
import pytest

from netheat import (build_network, enumerate_paths, geodesic_data, make_path,
                     path_distance, path_weight, transfer_coefficient)
from netheat.errors import (BrokenChain, DisconnectedGraph, NonPositiveWeight,
                            PointNotOnPath, SelfLoop)

from conftest import random_network


def test_single_edge_counts(interval):
    assert interval.n_edges == 1
    assert interval.n_vertices == 2
    assert tuple(interval.degrees) == (1, 1)
    assert interval.total_measure == 1.0


def test_star_counts(star):
    assert star.degrees[0] == 3
    assert star.total_measure == 3.0
    assert star.kappa0 == star.kappa1 == 1.0


def test_self_loop_rejected():
    with pytest.raises(SelfLoop):
        build_network([("a", "a", 1.0)])


def test_disconnected_rejected():
    with pytest.raises(DisconnectedGraph):
        build_network([("a", "b", 1.0), ("c", "d", 1.0)])


def test_nonpositive_weight_rejected():
    with pytest.raises(NonPositiveWeight):
        build_network([("a", "b", 0.0)])
    with pytest.raises(NonPositiveWeight):
        build_network([("a", "b", -2.0)])


def test_transfer_coefficients_star(star):
    # arc 1 runs a -> c into the degree-3 center
    assert transfer_coefficient(star, 1, 2) == pytest.approx(2 / 3)
    assert transfer_coefficient(star, 1, 0) == pytest.approx(-1 / 3)
    # leaf vertex: pure Neumann bounce
    assert transfer_coefficient(star, 0, 1) == pytest.approx(1.0)
    # arcs that do not meet
    assert transfer_coefficient(star, 0, 2) == 0.0


def test_transfer_coefficients_weighted_degree2():
    net = build_network([("a", "b", 1.0), ("b", "c", 3.0)])
    assert transfer_coefficient(net, 0, 2) == pytest.approx(0.5)
    assert transfer_coefficient(net, 0, 1) == pytest.approx(-0.5)


def test_path_weight_examples(star):
    # two-arc transit through the equal-weight center
    assert path_weight(star, (1, 2)) == pytest.approx(2 / 3)
    # bounce at a leaf
    assert path_weight(star, (0, 1)) == pytest.approx(1.0)
    # two transits
    assert path_weight(star, (1, 2, 3, 0)) == pytest.approx(4 / 9)
    with pytest.raises(BrokenChain):
        path_weight(star, (0, 2))
    with pytest.raises(BrokenChain):
        path_weight(star, (0,))


def test_enumerate_single_edge(interval):
    x = interval.point(0, 0.3)
    y = interval.point(0, 0.6)
    paths = sorted(p.arcs for p in enumerate_paths(interval, x, y, 2))
    assert paths == [(0, 1), (1, 0)]


def test_enumerate_star_adjacent(star):
    x = star.point(0, 0.5)
    y = star.point(1, 0.5)
    arcs = {p.arcs for p in enumerate_paths(star, x, y, 2)}
    # arc 1 is edge 0 oriented into the center, arc 2 leaves the center on edge 1
    assert (1, 2) in arcs


def test_enumerate_nonadjacent_empty():
    chain = build_network([("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0)])
    x = chain.point(0, 0.5)
    y = chain.point(2, 0.5)
    assert enumerate_paths(chain, x, y, 2) == []


def _brute_force_paths(net, x, y, k):
    arcs = range(2 * net.n_edges)
    found = []
    for chain in itertools.product(arcs, repeat=k):
        if chain[0] // 2 != x.edge or chain[-1] // 2 != y.edge:
            continue
        if all(net.arc_T(a) == net.arc_I(b) for a, b in zip(chain, chain[1:])):
            found.append(chain)
    return sorted(found)


def test_enumeration_matches_brute_force(rng):
    for _ in range(8):
        net = random_network(rng, max_vertices=4, max_edges=5)
        x = net.point(0, 0.4)
        y = net.point(net.n_edges - 1, 0.6)
        for k in (2, 3, 4):
            got = sorted(p.arcs for p in enumerate_paths(net, x, y, k))
            assert got == _brute_force_paths(net, x, y, k)


def test_cardinality_bound(rng):
    for _ in range(10):
        net = random_network(rng)
        x = net.point(0, 0.4)
        y = net.point(net.n_edges - 1, 0.6)
        for k in (2, 3, 4, 5):
            count = len(enumerate_paths(net, x, y, k))
            assert count <= 2 * net.max_degree ** (k - 1)


def test_path_distance_examples(star, interval):
    # adjacent edges through the center: x at 0.7 from c, y at 0.4 from c
    x = star.point(0, 0.7)   # distance to center (xi=0 end) is 0.7
    y = star.point(1, 0.4)
    p = make_path(star, (1, 2))   # a -> c -> b
    assert path_distance(x, y, p) == pytest.approx(0.7 + 0.4)

    # bounce distance on the interval equals the image-charge distance
    x = interval.point(0, 0.3)
    y = interval.point(0, 0.5)
    p = make_path(interval, (0, 1))
    assert path_distance(x, y, p) == pytest.approx(2 - 0.3 - 0.5)

    # |C| = 3 with d(x, T(a1)) = 1 and d(y, I(a3)) = 0; vertex endpoints are
    # expressed on the path's own edges (plain PointOnGraph, no snapping)
    from netheat import PointOnGraph

    chain = build_network([("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0)])
    p = make_path(chain, (0, 2, 4))
    assert path_distance(PointOnGraph(0, 0.0), PointOnGraph(2, 0.0),
                         p) == pytest.approx(2.0)

    with pytest.raises(PointNotOnPath):
        path_distance(star.point(2, 0.5), star.point(1, 0.4),
                      make_path(star, (1, 2)))


def test_path_distance_symmetry(rng):
    for _ in range(6):
        net = random_network(rng)
        x = net.point(0, float(rng.uniform(0.1, 0.9)))
        y = net.point(net.n_edges - 1, float(rng.uniform(0.1, 0.9)))
        for k in (2, 3):
            for p in enumerate_paths(net, x, y, k)[:20]:
                assert path_distance(x, y, p) == pytest.approx(
                    path_distance(y, x, p.reverse(net)))


def test_geodesic_data(star, interval):
    assert geodesic_data(interval, interval.point(0, 0.2),
                         interval.point(0, 0.8)) == (2, 0)
    assert geodesic_data(star, star.point(0, 0.5), star.point(1, 0.5)) == (2, 0)
    chain = build_network([("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0)])
    assert geodesic_data(chain, chain.point(0, 0.5),
                         chain.point(2, 0.5)) == (3, 1)


def test_weighted_outflow_identity(rng):
    for _ in range(100):
        net = random_network(rng)
        eps = net.transfer_matrix
        for a in range(2 * net.n_edges):
            v = net.arc_T(a)
            total = sum(net.weights[b // 2] * eps[a, b]
                        for b in net.out_arcs[v])
            assert total == pytest.approx(net.weights[a // 2], abs=1e-13)


def test_reversal_identity(rng):
    for _ in range(40):
        net = random_network(rng)
        x = net.point(0, 0.35)
        y = net.point(net.n_edges - 1, 0.65)
        for k in (2, 3):
            for p in enumerate_paths(net, x, y, k)[:30]:
                pr = p.reverse(net)
                lhs = p.weight / net.weights[p.arcs[0] // 2]
                rhs = pr.weight / net.weights[pr.arcs[0] // 2]
                assert lhs == pytest.approx(rhs, abs=1e-13)


def test_coefficient_bound(rng):
    for _ in range(50):
        net = random_network(rng)
        assert np.abs(net.transfer_matrix).max() <= net.epsilon_bar + 1e-14


def test_vertex_point_canonicalization(star):
    # the center vertex is reachable from any incident edge, all snap to edge 0
    p1 = star.point(0, 0.0)
    p2 = star.point(1, 0.0)
    p3 = star.point(2, 1e-15)
    assert p1 == p2 == p3
    # leaf vertex of edge 1
    q = star.point(1, 1.0)
    assert q.edge == 1 and q.xi == 1.0


def test_point_on_edge(star):
    center = star.point(1, 0.0)
    assert star.point_on_edge(center, 2) == 0.0
    assert star.point_on_edge(star.point(0, 0.4), 1) is None


def test_arc_tables(multigraph):
    # every edge yields exactly two mutually reversed arcs
    for j in range(multigraph.n_edges):
        a, b = 2 * j, 2 * j + 1
        assert multigraph.arc_reverse(a) == b
        assert multigraph.arc_I(a) == multigraph.arc_T(b)
        assert multigraph.arc_T(a) == multigraph.arc_I(b)
        assert multigraph.arc_edge(a) == multigraph.arc_edge(b) == j
