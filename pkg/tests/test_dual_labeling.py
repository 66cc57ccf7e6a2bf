import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualplanar.bdd import build_bdd
from dualplanar.congest_sim import RoundLedger
from dualplanar.dual_labeling import (
    build_ddg,
    compute_labels,
    decode_distance,
    floyd_warshall,
    min_plus,
    sssp_tree_dual,
)
from dualplanar.errors import BagMismatch, NegativeCycleReport, UnknownFace
from dualplanar.oracles import NegativeCycle, apsp_reference, bellman_ford, gen_planar
from dualplanar.planar_core import standard_dart_weights
from helpers import cycle_graph, path_graph


def _dual_arcs(fs, weights, darts=None):
    darts = range(len(weights)) if darts is None else darts
    return [(fs.dart_face[d ^ 1], fs.dart_face[d], weights[d]) for d in darts if weights[d] is not None]


def _bag_reference(tree, bag_id, weights):
    db = tree.dual_bags[bag_id]
    index = {f: i for i, f in enumerate(db.nodes)}
    fs = tree.faces
    arcs = [(index[a], index[b], w) for a, b, w in _dual_arcs(fs, weights, db.arcs)]
    return apsp_reference(len(db.nodes), arcs)


def test_min_plus_and_floyd_warshall_by_hand():
    inf = math.inf
    w = np.array([[0, 4, inf], [inf, 0, -1], [2, inf, 0]], dtype=float)
    assert np.array_equal(floyd_warshall(w), np.array([[0, 4, 3], [1, 0, -1], [2, 6, 0]], dtype=float))
    a = np.array([[1.0, 5.0]])
    b = np.array([[2.0], [0.0]])
    assert min_plus(a, b)[0, 0] == 3.0


def test_single_leaf_stores_the_whole_table():
    g = cycle_graph(4, [3, 1, 4, 1])
    tree = build_bdd(g)
    labels = compute_labels(tree, standard_dart_weights(g))
    assert labels.bags[0].leaf
    assert labels.label(0).depth() == 1
    expected = apsp_reference(tree.faces.num_faces, _dual_arcs(tree.faces, standard_dart_weights(g)))
    assert np.array_equal(labels.all_pairs(), expected)


def test_grid_with_mixed_weights_decodes_exactly():
    g = gen_planar("grid", 64, (1, 100), seed=3, directed=True)
    tree = build_bdd(g)
    weights = standard_dart_weights(g)
    labels = compute_labels(tree, weights)
    expected = apsp_reference(tree.faces.num_faces, _dual_arcs(tree.faces, weights))
    assert np.array_equal(labels.all_pairs(), expected)
    for f in range(0, tree.faces.num_faces, 5):
        for h in range(0, tree.faces.num_faces, 3):
            assert decode_distance(labels.label(f), labels.label(h)) == expected[f, h]


def test_planted_negative_cycle_is_reported():
    g = cycle_graph(4, [3, -1, 2, 5])
    with pytest.raises(NegativeCycleReport):
        compute_labels(build_bdd(g), standard_dart_weights(g))


def test_negative_cycle_deep_in_a_grid_is_reported():
    g = gen_planar("grid", 64, (5, 9), seed=1)
    weights = standard_dart_weights(g)
    weights[10] = -10
    tree = build_bdd(g)
    with pytest.raises(NegativeCycleReport):
        compute_labels(tree, weights)
    with pytest.raises(NegativeCycle):
        apsp_reference(tree.faces.num_faces, _dual_arcs(tree.faces, weights))


def test_decode_of_a_face_with_itself_is_zero():
    g = gen_planar("grid", 36, (1, 9), seed=2)
    labels = compute_labels(build_bdd(g), standard_dart_weights(g))
    label = labels.label(3)
    assert decode_distance(label, label) == 0.0


def test_labels_from_different_bags_do_not_decode():
    g = gen_planar("grid", 64, (1, 9), seed=2)
    tree = build_bdd(g)
    labels = compute_labels(tree, standard_dart_weights(g))
    child = tree.root.children[0]
    face = tree.dual_bags[child].nodes[0]
    with pytest.raises(BagMismatch):
        decode_distance(labels.label(face, 0), labels.label(face, child))


def test_unknown_face_is_rejected():
    g = cycle_graph(3)
    labels = compute_labels(build_bdd(g), standard_dart_weights(g))
    with pytest.raises(UnknownFace):
        labels.label(7)


def test_dense_distance_graph_reproduces_bag_distances():
    g = gen_planar("triangulation", 60, (1, 40), seed=5, directed=True)
    tree = build_bdd(g)
    weights = standard_dart_weights(g, reverse="zero")
    labels = compute_labels(tree, weights)
    checked = 0
    for bag in tree.bags:
        if bag.is_leaf:
            continue
        reference = _bag_reference(tree, bag.id, weights)
        db = tree.dual_bags[bag.id]
        index = {f: i for i, f in enumerate(db.nodes)}
        for g_face in db.nodes[:4]:
            ddg = build_ddg(labels, bag.id, g_face)
            dist = ddg.distances()
            for i, (f, _) in enumerate(ddg.nodes[:-1]):
                assert dist[-1, i] == reference[index[g_face], index[f]]
                assert dist[i, -1] == reference[index[f], index[g_face]]
            checked += 1
    assert checked > 0


def test_leaves_have_no_dense_distance_graph():
    g = cycle_graph(3)
    labels = compute_labels(build_bdd(g), standard_dart_weights(g))
    with pytest.raises(ValueError):
        build_ddg(labels, 0, 0)


@pytest.mark.parametrize("size", [9, 49])
def test_unit_weight_tree_matches_breadth_first_search(size):
    g = gen_planar("grid", size, (1, 1), seed=0)
    tree = build_bdd(g)
    weights = standard_dart_weights(g)
    labels = compute_labels(tree, weights, hop_tiebreak=True)
    sp = sssp_tree_dual(labels, 0)
    expected = bellman_ford(tree.faces.num_faces, _dual_arcs(tree.faces, weights), 0)
    assert [sp.dist[f] for f in range(tree.faces.num_faces)] == expected
    for f in range(tree.faces.num_faces):
        assert len(sp.path_darts(f)) == expected[f]


def test_tree_prefers_the_lighter_parallel_arc():
    g = cycle_graph(3, [5, 2, 7])
    tree = build_bdd(g)
    labels = compute_labels(tree, standard_dart_weights(g), hop_tiebreak=True)
    source = tree.faces.dart_face[0]
    other = 1 - source
    sp = sssp_tree_dual(labels, source)
    assert sp.dist[other] == 2
    assert sp.parent_dart[other] >> 1 == 1


def test_tree_of_a_tree_primal_is_empty():
    g = path_graph(5, [1, 2, 3, 4])
    tree = build_bdd(g)
    labels = compute_labels(tree, standard_dart_weights(g), hop_tiebreak=True)
    sp = sssp_tree_dual(labels, 0)
    assert sp.parent_dart == {0: None}
    assert sp.path_darts(0) == []


def test_label_bits_follow_the_nesting():
    g = gen_planar("grid", 100, (1, 9), seed=4)
    tree = build_bdd(g)
    ledger = RoundLedger()
    labels = compute_labels(tree, standard_dart_weights(g), ledger=ledger)
    bits = [labels.label(f).bits() for f in range(tree.faces.num_faces)]
    assert max(bits) == labels.max_label_bits()
    assert len(labels.per_level_rounds) == tree.depth + 1
    assert ledger.by_phase()["labels_level"] == sum(labels.per_level_rounds)
    assert max(labels.label(f).depth() for f in range(tree.faces.num_faces)) > 1


@settings(max_examples=30, deadline=None)
@given(
    kind=st.sampled_from(["grid", "triangulation", "cycle"]),
    n=st.integers(4, 90),
    seed=st.integers(0, 10**6),
    reverse=st.sampled_from(["auto", "zero", "none"]),
    low=st.sampled_from([-3, 0, 1]),
)
def test_every_bag_decodes_its_own_distances(kind, n, seed, reverse, low):
    g = gen_planar(kind, n, (low, 30), seed, directed=True, drop=0.2)
    tree = build_bdd(g)
    weights = standard_dart_weights(g, reverse=reverse)
    try:
        reference = apsp_reference(tree.faces.num_faces, _dual_arcs(tree.faces, weights))
    except NegativeCycle:
        with pytest.raises(NegativeCycleReport):
            compute_labels(tree, weights)
        return
    labels = compute_labels(tree, weights)
    assert np.array_equal(labels.all_pairs(), reference)
    for bag in tree.bags:
        assert np.array_equal(labels.all_pairs(bag.id), _bag_reference(tree, bag.id, weights))
