import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualplanar.errors import DuplicateId, MalformedDocument, NonPlanarRotation
from dualplanar.oracles import gen_planar
from dualplanar.planar_core import (
    EmbeddedPlanarGraph,
    augment_with_reversal_darts,
    build_dual,
    build_embedded_graph,
    check_euler,
    dual_arcs,
    induced_component,
    standard_dart_weights,
    trace_faces,
)
from helpers import complete_five, cycle_graph, path_graph, single_edge

graph_kinds = st.sampled_from(["grid", "triangulation", "tree", "cycle"])


def test_triangle_has_two_faces_of_three_darts():
    fs = trace_faces(cycle_graph(3))
    assert fs.num_faces == 2
    assert sorted(len(f) for f in fs.faces) == [3, 3]


def test_single_edge_has_one_face():
    fs = trace_faces(single_edge())
    assert fs.num_faces == 1
    assert len(fs.faces[0]) == 2


def test_complete_five_rotation_is_rejected():
    n, tail, head, rotation = complete_five()
    with pytest.raises(NonPlanarRotation):
        EmbeddedPlanarGraph(n, tail, head, rotation)


def test_grid_faces():
    fs = trace_faces(gen_planar("grid", 9))
    assert fs.num_faces == 5
    assert sorted(len(f) for f in fs.faces) == [4, 4, 4, 4, 8]


def test_path_of_two_edges_has_one_face_of_four_darts():
    fs = trace_faces(path_graph(3))
    assert fs.num_faces == 1
    assert len(fs.faces[0]) == 4


def test_directed_triangle_dual_has_parallel_same_direction_edges():
    g = cycle_graph(3, directed=True)
    dual = build_dual(g)
    assert len(dual.nodes) == 2
    assert len(dual.edges) == 3
    assert len({(e.tail, e.head) for e in dual.edges}) == 1
    assert dual.is_multigraph


def test_single_edge_dual_is_a_self_loop():
    dual = build_dual(single_edge())
    assert len(dual.nodes) == 1
    assert dual.self_loops == (0,)


def test_grid_dual_is_loopless():
    dual = build_dual(gen_planar("grid", 9))
    assert (len(dual.nodes), len(dual.edges), dual.self_loops) == (5, 12, ())


def test_augmenting_a_directed_triangle_pairs_every_dart():
    g = cycle_graph(3, directed=True, weights=[4, 5, 6])
    aug, companion = augment_with_reversal_darts(g)
    assert aug.m == 6
    for e, c in enumerate(companion):
        assert (aug.tail[c], aug.head[c]) == (g.head[e], g.tail[e])
        assert aug.weight[c] == 0 and aug.capacity[c] == 0
    trace_faces(aug)


def test_augmenting_antiparallel_edges_adds_two_companions():
    g = EmbeddedPlanarGraph(2, [0, 1], [1, 0], [[0, 1], [1, 0]], directed=True, allow_multi=True)
    aug, _ = augment_with_reversal_darts(g)
    assert aug.m == 4


def test_augmenting_an_empty_graph_is_empty():
    g = EmbeddedPlanarGraph(0, [], [], [], directed=True)
    aug, companion = augment_with_reversal_darts(g)
    assert (aug.n, aug.m, companion) == (0, 0, [])


def test_primal_multi_edges_are_rejected():
    with pytest.raises(MalformedDocument):
        EmbeddedPlanarGraph(2, [0, 1], [1, 0], [[0, 1], [1, 0]], directed=True)


def test_document_round_trip_keeps_ids_and_attributes():
    g = gen_planar("triangulation", 12, (1, 50), seed=3, directed=True, capacity_range=(1, 9))
    doc = json.loads(json.dumps(g.to_document()))
    h = build_embedded_graph(doc)
    assert h.to_document() == g.to_document()


def test_document_with_arbitrary_ids():
    doc = {
        "directed": True,
        "vertices": [{"id": 10, "rotation": [7]}, {"id": 4, "rotation": [7]}],
        "edges": [{"id": 7, "tail": 10, "head": 4, "weight": 3, "capacity": 2}],
    }
    g = build_embedded_graph(doc)
    assert g.vertex_ids == (4, 10)
    assert g.tail == (1,) and g.head == (0,)
    assert g.vertex_index(10) == 1 and g.edge_index(7) == 0


@pytest.mark.parametrize(
    "doc, error",
    [
        ("not json", MalformedDocument),
        ({"vertices": []}, MalformedDocument),
        ({"vertices": [{"id": 0}, {"id": 0}], "edges": []}, DuplicateId),
        ({"vertices": [{"id": 0, "rotation": [5]}], "edges": []}, MalformedDocument),
        ({"vertices": [{"id": 0}], "edges": [{"id": 1, "tail": 0, "head": 9}]}, MalformedDocument),
        ({"vertices": [{"id": -1}], "edges": []}, MalformedDocument),
    ],
)
def test_malformed_documents(doc, error):
    with pytest.raises(error):
        build_embedded_graph(doc)


def _faces_by_hand(g: EmbeddedPlanarGraph) -> list[int]:
    """Face labels from the successor rule, recomputed from the rotations.

    The successor of dart ``d`` is the dart leaving ``head(d)`` that
    immediately precedes ``rev(d)`` in the clockwise rotation at ``head(d)``.
    """

    def leaving(v, e):
        return 2 * e if g.tail[e] == v and not (g.tail[e] == g.head[e]) else 2 * e + 1

    def successor(d):
        e = d >> 1
        head = g.head[e] if d % 2 == 0 else g.tail[e]
        rot = g.rotation[head]
        slots = [leaving(head, x) for x in rot]
        pos = slots.index(d ^ 1)
        return slots[pos - 1]

    label = [-1] * (2 * g.m)
    count = 0
    for start in range(2 * g.m):
        if label[start] != -1:
            continue
        d = start
        while label[d] == -1:
            label[d] = count
            d = successor(d)
        count += 1
    return label


@settings(max_examples=40, deadline=None)
@given(kind=graph_kinds, n=st.integers(3, 40), seed=st.integers(0, 10**6), drop=st.sampled_from([0.0, 0.3]))
def test_face_and_dual_invariants(kind, n, seed, drop):
    g = gen_planar(kind, n, (1, 9), seed, drop=drop)
    fs = trace_faces(g)
    assert sum(len(f) for f in fs.faces) == 2 * g.m
    assert g.n - g.m + fs.num_faces == 1 + len(g.components())
    dual = build_dual(g, fs)
    assert dual.degree_multiset() == sorted(len(f) for f in fs.faces)
    # the direction rule, against an independent face trace
    by_hand = _faces_by_hand(g)
    rename = {}
    for d in range(2 * g.m):
        rename.setdefault(by_hand[d], fs.dart_face[d])
        assert rename[by_hand[d]] == fs.dart_face[d]
    for edge in dual.edges:
        assert (edge.tail, edge.head) == (fs.dart_face[2 * edge.index + 1], fs.dart_face[2 * edge.index])


def test_euler_counts_components():
    # two disjoint triangles in one graph
    tail = [0, 1, 2, 3, 4, 5]
    head = [1, 2, 0, 4, 5, 3]
    rotation = [[0, 2], [1, 0], [2, 1], [3, 5], [4, 3], [5, 4]]
    g = EmbeddedPlanarGraph(6, tail, head, rotation)
    fs = trace_faces(g)
    # every component traces its own outer orbit; in the plane they are one face
    assert fs.num_faces == 4
    components = len(g.components())
    plane_faces = fs.num_faces - (components - 1)
    assert g.n - g.m + plane_faces == 1 + components
    check_euler(g, fs)


def test_dart_weights_and_arcs_follow_the_graph_kind():
    directed = cycle_graph(3, [1, 2, 3], directed=True)
    assert standard_dart_weights(directed) == [1, None, 2, None, 3, None]
    assert standard_dart_weights(directed, reverse="zero") == [1, 0, 2, 0, 3, 0]
    undirected = cycle_graph(3, [1, 2, 3])
    assert standard_dart_weights(undirected) == [1, 1, 2, 2, 3, 3]
    fs = trace_faces(directed)
    arcs = dual_arcs(fs, standard_dart_weights(directed))
    assert [a.dart for a in arcs] == [0, 2, 4]
    assert all((a.tail, a.head) == (fs.dart_face[a.dart ^ 1], fs.dart_face[a.dart]) for a in arcs)


def test_induced_component_maps_back():
    tail = [0, 1, 2, 3]
    head = [1, 2, 0, 4]
    rotation = [[0, 2], [1, 0], [2, 1], [3], [3]]
    g = EmbeddedPlanarGraph(5, tail, head, rotation)
    sub, vmap, emap = induced_component(g, 4)
    assert (sub.n, sub.m, vmap, emap) == (2, 1, [3, 4], [3])
