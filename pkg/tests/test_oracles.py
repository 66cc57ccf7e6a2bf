import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualplanar.errors import Acyclic
from dualplanar.oracles import (
    NegativeCycle,
    apsp_reference,
    bellman_ford,
    brute_directed_global_cut,
    brute_girth,
    exhaustive_min_cut,
    gen_planar,
    max_flow_reference,
    min_cut_reference,
    stoer_wagner,
)
from dualplanar.planar_core import build_dual, check_euler, trace_faces
from helpers import cycle_graph, path_graph, single_edge, two_paths


def test_bellman_ford_on_directed_triangle_dual():
    g = cycle_graph(3, [4, 2, 7], directed=True)
    fs = trace_faces(g)
    arcs = [(fs.dart_face[2 * e + 1], fs.dart_face[2 * e], g.weight[e]) for e in range(g.m)]
    source = arcs[0][0]
    dist = bellman_ford(2, arcs, source)
    assert dist[1 - source] == 2
    assert math.isinf(bellman_ford(2, arcs, 1 - source)[source])


def test_bellman_ford_detects_negative_cycles():
    with pytest.raises(NegativeCycle):
        bellman_ford(2, [(0, 1, 1), (1, 0, -2)], 0)
    with pytest.raises(NegativeCycle):
        apsp_reference(3, [(1, 2, -1), (2, 1, 0)])


def test_apsp_matches_floyd_warshall_by_hand():
    arcs = [(0, 1, 3), (1, 2, -1), (0, 2, 5), (2, 0, 2)]
    expected = np.array([[0, 3, 2], [1, 0, -1], [2, 5, 0]], dtype=float)
    assert np.array_equal(apsp_reference(3, arcs), expected)


def test_max_flow_reference_single_edge():
    value, flow = max_flow_reference(single_edge(7), 0, 1)
    assert value == 7 and flow == [7]


def test_max_flow_reference_two_paths():
    value, _ = max_flow_reference(two_paths(3, 5), 0, 3)
    assert value == 8


def test_gen_planar_canonical_grid():
    g = gen_planar("grid", 9, (1, 1), seed=5)
    assert (g.n, g.m) == (9, 12)
    check_euler(g, trace_faces(g))
    assert gen_planar("grid", 9, (1, 1), seed=6).to_document() == g.to_document()


@settings(max_examples=30, deadline=None)
@given(
    kind=st.sampled_from(["grid", "triangulation", "tree", "cycle"]),
    n=st.integers(3, 60),
    seed=st.integers(0, 2**32),
    directed=st.booleans(),
)
def test_gen_planar_is_deterministic_and_valid(kind, n, seed, directed):
    a = gen_planar(kind, n, (1, 100), seed, directed=directed, drop=0.2)
    b = gen_planar(kind, n, (1, 100), seed, directed=directed, drop=0.2)
    assert a.to_document() == b.to_document()
    assert a.is_connected()
    check_euler(a, trace_faces(a))
    if kind == "triangulation" and n >= 3:
        c = gen_planar(kind, n, (1, 100), seed, directed=directed)
        assert c.m == 3 * c.n - 6


def test_unknown_generator_kind():
    with pytest.raises(ValueError):
        gen_planar("hexagon", 5)


def test_brute_girth_triangle_and_tree():
    assert brute_girth(cycle_graph(3, [1, 2, 3]))[0] == 6
    with pytest.raises(Acyclic):
        brute_girth(path_graph(4))


def _simple_dual_edges(g):
    dual = build_dual(g)
    merged = {}
    for e in dual.edges:
        if e.tail != e.head:
            key = (min(e.tail, e.head), max(e.tail, e.head))
            merged[key] = merged.get(key, 0) + e.weight
    return len(dual.nodes), [(a, b, w) for (a, b), w in sorted(merged.items())]


@settings(max_examples=30, deadline=None)
@given(n=st.integers(4, 12), seed=st.integers(0, 10**6))
def test_min_cut_reference_equals_exhaustive(n, seed):
    g = gen_planar("triangulation", n, (1, 30), seed)
    nodes, edges = _simple_dual_edges(g)
    value, side, tree, crossing = min_cut_reference(nodes, edges)
    assert value == exhaustive_min_cut(nodes, edges)
    assert value == stoer_wagner(nodes, edges)[0]
    crossing_edges = [i for i, (a, b, _) in enumerate(edges) if (a in side) != (b in side)]
    assert sum(edges[i][2] for i in crossing_edges) == value
    # the cut 1-respects the returned tree through the returned edge
    assert [i for i in tree if i in crossing_edges] == [crossing]


def test_brute_directed_cut_small_cases():
    assert brute_directed_global_cut(cycle_graph(3, [2, 5, 9], directed=True))[0] == 2
    g = gen_planar("triangulation", 9, (0, 20), 4, directed=True)
    value, side = brute_directed_global_cut(g)
    best = min(
        sum(g.weight[e] for e in range(g.m) if g.tail[e] in s and g.head[e] not in s)
        for k in range(1, g.n)
        for s in map(set, itertools.combinations(range(g.n), k))
    )
    assert value == best
    assert sum(g.weight[e] for e in range(g.m) if g.tail[e] in side and g.head[e] not in side) == value


def test_brute_directed_cut_sweep_agrees_with_exhaustive():
    for seed in range(5):
        g = gen_planar("grid", 12, (1, 20), seed, directed=True, drop=0.2)
        assert brute_directed_global_cut(g, exhaustive_limit=0)[0] == brute_directed_global_cut(g)[0]
