import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualplanar.congest_sim import RoundLedger
from dualplanar.errors import Acyclic, NotSameFace, OracleContractViolation, STIdentical
from dualplanar.flow_cut import (
    NoisySsspOracle,
    _split_dual,
    common_face,
    dijkstra,
    max_st_flow_exact,
    max_st_flow_stplanar_approx,
    min_st_cut_exact,
    min_st_cut_stplanar_approx,
    smooth_sssp,
    weighted_girth,
)
from dualplanar.oracles import brute_girth, gen_planar, max_flow_reference
from dualplanar.planar_core import EmbeddedPlanarGraph, trace_faces
from helpers import bowtie, cycle_graph, nested_cycles, path_graph, single_edge, two_paths


def _cut_capacity(g, side, cut_ids):
    crossing = []
    for e in range(g.m):
        a, b = g.tail[e] in side, g.head[e] in side
        if (a and not b) or (not g.directed and b and not a):
            crossing.append(e)
    assert sorted(crossing) == sorted(cut_ids)
    return sum(g.capacity[e] for e in crossing)


def _is_cycle(g, edges):
    degree = {}
    for e in edges:
        for v in (g.tail[e], g.head[e]):
            degree[v] = degree.get(v, 0) + 1
    if not edges or any(d != 2 for d in degree.values()):
        return False
    adj = {v: [] for v in degree}
    for e in edges:
        adj[g.tail[e]].append(g.head[e])
        adj[g.head[e]].append(g.tail[e])
    start = next(iter(adj))
    seen, stack = {start}, [start]
    while stack:
        for u in adj[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(adj)


# ---------------------------------------------------------------- exact flow
def test_single_edge_flow():
    value, flow = max_st_flow_exact(single_edge(7), 0, 1)
    assert value == 7 and flow.edge_flow == [7]
    flow.check()


def test_two_disjoint_paths_add_up():
    value, flow = max_st_flow_exact(two_paths(3, 5), 0, 3)
    assert value == 8
    flow.check()


def test_unreachable_sink_gets_zero():
    g = two_paths(3, 5)
    value, flow = max_st_flow_exact(g, 3, 0)
    assert value == 0
    cut_value, side, cut = min_st_cut_exact(g, 3, 0)
    assert cut_value == 0 and side == {3} and cut == []


def test_bowtie_bridge_is_the_cut():
    g = bowtie(3)
    value, side, cut = min_st_cut_exact(g, 0, 5)
    assert value == 3
    assert cut == [3]
    assert side == {0, 1, 2}


def test_zero_flow_cut_is_the_reachable_set():
    g = EmbeddedPlanarGraph(3, [0, 2], [1, 1], [[0], [0, 1], [1]], directed=True, capacity=[4, 4])
    value, side, cut = min_st_cut_exact(g, 0, 2)
    assert value == 0
    assert side == {0, 1}
    assert cut == []


def test_source_and_sink_must_differ():
    with pytest.raises(STIdentical):
        max_st_flow_exact(single_edge(), 0, 0)


@settings(max_examples=40, deadline=None)
@given(
    kind=st.sampled_from(["grid", "triangulation", "tree", "cycle"]),
    n=st.integers(3, 60),
    seed=st.integers(0, 10**6),
    directed=st.booleans(),
)
def test_exact_flow_and_cut_match_the_reference(kind, n, seed, directed):
    g = gen_planar(kind, n, (1, 1), seed, directed=directed, capacity_range=(0, 40), drop=0.2)
    rng = random.Random(seed)
    s, t = rng.sample(range(g.n), 2)
    expected, _ = max_flow_reference(g, s, t)
    value, flow = max_st_flow_exact(g, s, t)
    assert value == expected
    assert flow.violations() == []
    cut_value, side, cut = min_st_cut_exact(g, s, t)
    assert cut_value == expected
    assert s in side and t not in side
    assert _cut_capacity(g, side, cut) == expected


# ---------------------------------------------------------- smooth distances
def test_smooth_distances_with_an_exact_oracle_are_exact():
    edges = [(0, 1, 2), (1, 2, 3), (0, 2, 7), (2, 3, 1)]
    sm = smooth_sssp(4, edges, 0, 0.1)
    assert sm.dist == [0, 2, 5, 6]
    assert sm.violations(edges) == []


def test_smooth_distances_with_a_noisy_oracle():
    rng = random.Random(4)
    g = gen_planar("triangulation", 40, (1, 50), seed=4)
    edges = [(g.tail[e], g.head[e], g.weight[e]) for e in range(g.m)]
    exact = dijkstra(g.n, edges + [(b, a, w) for a, b, w in edges], 0)
    for eps in (0.05, 0.1, 0.3):
        sm = smooth_sssp(g.n, edges, 0, eps, NoisySsspOracle(rng.randrange(1000)))
        assert sm.violations(edges) == []
        for v in range(g.n):
            assert exact[v] * (1 - 1e-12) <= sm.dist[v] <= (1 + eps) * exact[v] * (1 + 1e-12)


def test_smoothing_needs_positive_weights():
    with pytest.raises(ValueError):
        smooth_sssp(2, [(0, 1, 0)], 0, 0.1)


def test_lying_oracle_is_caught():
    def liar(num_nodes, arcs, source, eps_prime):
        return [0.0] * num_nodes

    with pytest.raises(OracleContractViolation):
        smooth_sssp(3, [(0, 1, 2), (1, 2, 2)], 0, 0.1, liar)


# ------------------------------------------------------- co-facial s and t
def _with_chord(g, s, t):
    """Add the edge ``s - t`` inside the common face, next to its boundary darts."""
    fs = trace_faces(g)
    f = common_face(g, s, t)
    cyc = fs.faces[f]
    a = next(i for i, d in enumerate(cyc) if g.dart_tail(d) == s)
    b = next(i for i, d in enumerate(cyc) if g.dart_tail(d) == t)
    new = g.m
    rotation = [list(r) for r in g.rotation]
    for v, i in ((s, a), (t, b)):
        slot = g.slot_of(cyc[i])[1]
        rotation[v].insert(slot + 1, new)
    extended = EmbeddedPlanarGraph(
        g.n, list(g.tail) + [s], list(g.head) + [t], rotation, capacity=list(g.capacity) + [1], allow_multi=True
    )
    return f, cyc, a, b, extended


@pytest.mark.parametrize("seed", range(6))
def test_face_split_matches_an_explicit_chord(seed):
    g = gen_planar("triangulation", 25, (1, 1), seed, capacity_range=(1, 9), drop=0.5)
    fs = trace_faces(g)
    rng = random.Random(seed)
    f = rng.randrange(fs.num_faces)
    tails = sorted({g.dart_tail(d) for d in fs.faces[f]})
    s, t = rng.sample(tails, 2)
    _, cyc, _, _, extended = _with_chord(g, s, t)
    split = _split_dual(g, s, t, RoundLedger())
    efs = trace_faces(extended)
    new_darts = {2 * g.m, 2 * g.m + 1}
    # the chord's two faces partition the split face's darts exactly like the halves
    by_face = {}
    for d in cyc:
        by_face.setdefault(efs.dart_face[d], set()).add(d)
    by_half = {}
    for d in cyc:
        by_half.setdefault(split.node_of_dart[d], set()).add(d)
    assert sorted(map(sorted, by_face.values())) == sorted(map(sorted, by_half.values()))
    assert {efs.dart_face[d] for d in new_darts} == set(by_face)
    # every other dart keeps its face
    for d in range(g.num_darts):
        if d not in set(cyc):
            assert split.node_of_dart[d] == fs.dart_face[d]


def test_faces_without_both_terminals_are_rejected():
    g = gen_planar("grid", 25)
    with pytest.raises(NotSameFace):
        common_face(g, 0, 12)
    with pytest.raises(NotSameFace):
        max_st_flow_stplanar_approx(g, 0, 12)


@settings(max_examples=40, deadline=None)
@given(
    kind=st.sampled_from(["grid", "triangulation", "tree", "cycle"]),
    n=st.integers(3, 60),
    seed=st.integers(0, 10**6),
)
def test_approximate_flow_with_an_exact_oracle_is_exact(kind, n, seed):
    g = gen_planar(kind, n, (1, 1), seed, capacity_range=(0, 30), drop=0.3)
    fs = trace_faces(g)
    rng = random.Random(seed)
    face = fs.faces[rng.randrange(fs.num_faces)]
    tails = sorted({g.dart_tail(d) for d in face})
    if len(tails) < 2:
        return
    s, t = rng.sample(tails, 2)
    expected, _ = max_flow_reference(g, s, t)
    value, flow = max_st_flow_stplanar_approx(g, s, t, 0.0)
    assert value == pytest.approx(expected)
    assert flow.violations(rel_tol=1e-9) == []
    cut_value, side, cut = min_st_cut_stplanar_approx(g, s, t, 0.0)
    assert cut_value == expected
    assert s in side and t not in side
    assert _cut_capacity(g, side, cut) == expected


def test_corner_to_corner_cut_on_a_small_grid():
    g = gen_planar("grid", 16, (1, 1), 2, capacity_range=(1, 9))
    s, t = 0, 15
    expected, _ = max_flow_reference(g, s, t)
    value, side, cut = min_st_cut_stplanar_approx(g, s, t, 0.0)
    assert value == expected
    assert 0 in side and 15 not in side
    assert _cut_capacity(g, side, cut) == expected


@pytest.mark.parametrize("seed", range(8))
def test_noisy_oracle_flow_is_feasible_and_close(seed):
    eps = 0.1
    g = gen_planar("grid", 49, (1, 1), seed, capacity_range=(1, 20))
    s, t = 0, g.n - 1
    expected, _ = max_flow_reference(g, s, t)
    value, flow = max_st_flow_stplanar_approx(g, s, t, eps, NoisySsspOracle(seed))
    assert (1 - 2.5 * eps) * expected <= value <= expected * (1 + 1e-9)
    assert flow.violations(rel_tol=1e-9) == []
    cut_value, side, cut = min_st_cut_stplanar_approx(g, s, t, eps, NoisySsspOracle(seed))
    assert expected <= cut_value <= (1 + 2.5 * eps) * expected
    assert _cut_capacity(g, side, cut) == cut_value


# -------------------------------------------------------------------- girth
def test_triangle_girth_is_its_weight():
    g = cycle_graph(3, [1, 2, 3])
    assert weighted_girth(g) == (6, [0, 1, 2])


def test_chord_makes_the_lighter_triangle():
    value, edges = weighted_girth(nested_cycles())
    assert value == 4
    assert edges == [0, 1, 4]


def test_forest_has_no_girth():
    with pytest.raises(Acyclic):
        weighted_girth(path_graph(4))


def test_direct_interpreter_agrees_with_the_simulator():
    g = gen_planar("triangulation", 30, (1, 100), seed=8)
    assert weighted_girth(g, simulate=False) == weighted_girth(g)


@settings(max_examples=40, deadline=None)
@given(
    kind=st.sampled_from(["grid", "triangulation", "cycle"]),
    n=st.integers(3, 70),
    seed=st.integers(0, 10**6),
    high=st.sampled_from([1, 10, 10**6]),
)
def test_girth_matches_the_brute_force(kind, n, seed, high):
    g = gen_planar(kind, n, (1, high), seed, drop=0.3)
    try:
        expected, _ = brute_girth(g)
    except Acyclic:
        with pytest.raises(Acyclic):
            weighted_girth(g)
        return
    value, edge_ids = weighted_girth(g)
    assert value == expected
    assert _is_cycle(g, edge_ids)
    assert sum(g.weight[e] for e in edge_ids) == value
    assert math.isfinite(value)
