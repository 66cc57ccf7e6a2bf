"""End-to-end acceptance criteria, one test per criterion.

Each test records a ``criterion N: PASS|FAIL ...`` line that is printed in
the terminal summary (and to stdout with ``-s``) before asserting.
"""

import math
import os
import random
import subprocess
import sys
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from dualplanar.bdd import build_bdd
from dualplanar.congest_sim import RoundLedger
from dualplanar.dual_agg import (
    CROSSING,
    DualNetwork,
    DualSimulator,
    ReferenceInterpreter,
    build_face_disjoint,
    hop_diameter,
)
from dualplanar.dual_labeling import compute_labels
from dualplanar.errors import NegativeCycleReport
from dualplanar.flow_cut import (
    NoisySsspOracle,
    max_st_flow_exact,
    max_st_flow_stplanar_approx,
    min_st_cut_exact,
    weighted_girth,
)
from dualplanar.global_mincut import directed_global_min_cut
from dualplanar.oracles import (
    NegativeCycle,
    apsp_reference,
    bellman_ford,
    brute_directed_global_cut,
    brute_girth,
    gen_planar,
    max_flow_reference,
)
from dualplanar.planar_core import check_euler, standard_dart_weights, trace_faces
from helpers import random_program

KINDS = ("grid", "triangulation", "tree", "cycle")
LABEL_CONSTANT = 32
BDD_PROPERTIES = {
    "depth",
    "separator_is_simple_cycle",
    "leaf_size",
    "separator_length",
    "children_partition_bag",
    "dart_once_per_level",
    "edge_at_most_two_bags",
    "lone_dart_on_ancestor_separator",
    "face_parts_per_bag",
    "leaf_dual_size",
    "fx_matches",
    "fx_size",
    "fx_is_node_cut",
    "reassembly",
    "reassembly_ids_nest",
    "face_knowledge",
    "face_ids_unique",
    "edge_knowledge",
}


def _record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _corpus(count, max_n, seed, kinds=KINDS, min_n=4):
    rng = random.Random(seed)
    for i in range(count):
        yield i, kinds[i % len(kinds)], rng.randint(min_n, max_n), rng.randrange(2**31)


def _dual_arcs(fs, weights):
    return [(fs.dart_face[d ^ 1], fs.dart_face[d], w) for d, w in enumerate(weights) if w is not None]


def _reaches(g, s, t, removed):
    adj = {v: [] for v in range(g.n)}
    for e in range(g.m):
        if e in removed:
            continue
        adj[g.tail[e]].append(g.head[e])
        if not g.directed:
            adj[g.head[e]].append(g.tail[e])
    seen, stack = {s}, [s]
    while stack:
        for u in adj[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return t in seen


def test_criterion_1_girth_exactness():
    failures = []
    elapsed = 0.0
    for i, kind, n, seed in _corpus(200, 150, 1, ("grid", "triangulation")):
        g = gen_planar(kind, n, (1, 10**6), seed)
        start = time.perf_counter()
        value, edges = weighted_girth(g)
        elapsed += time.perf_counter() - start
        expected, _ = brute_girth(g)
        if value != expected or sum(g.weight[e] for e in edges) != expected:
            failures.append((kind, n, seed))
    ok = not failures and elapsed < 60
    _record(1, ok, f"200 graphs, {len(failures)} mismatches, {elapsed:.1f}s in weighted_girth (limit 60s)")
    assert not failures
    assert elapsed < 60


def test_criterion_2_exact_flow_and_cut():
    failures = []
    start = time.perf_counter()
    for i, kind, n, seed in _corpus(200, 150, 2):
        g = gen_planar(kind, n, (1, 1), seed, directed=True, capacity_range=(0, 1000), drop=0.2)
        rng = random.Random(seed)
        s, t = rng.sample(range(g.n), 2)
        expected, _ = max_flow_reference(g, s, t)
        value, flow = max_st_flow_exact(g, s, t)
        cut_value, side, cut = min_st_cut_exact(g, s, t)
        good = (
            value == expected
            and not flow.violations()
            and cut_value == value
            and not _reaches(g, s, t, set(cut))
        )
        if not good:
            failures.append((kind, n, seed))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    _record(2, ok, f"200 digraphs, {len(failures)} mismatches, {elapsed:.1f}s (limit 300s)")
    assert not failures
    assert elapsed < 300


def _negative_weights(g, rng, undirected_mirror):
    weights = standard_dart_weights(g, reverse="auto" if undirected_mirror else "none")
    for e in range(g.m):
        if rng.random() < 0.05:
            w = -rng.randint(1, 20)
            weights[2 * e] = w
            if undirected_mirror:
                weights[2 * e + 1] = w
    return weights


def test_criterion_3_dual_labels():
    failures = []
    outcomes = {"negative_cycle": 0, "distances": 0}
    for i, kind, n, seed in _corpus(50, 120, 3, ("grid", "triangulation", "cycle")):
        rng = random.Random(seed)
        mirror = i % 4 == 1
        g = gen_planar(kind, n, (1, 100), seed, directed=not mirror, drop=0.2)
        tree = build_bdd(g)
        fs = tree.faces
        weights = _negative_weights(g, rng, mirror)
        arcs = _dual_arcs(fs, weights)
        virtual = fs.num_faces
        try:
            bellman_ford(virtual + 1, arcs + [(virtual, f, 0) for f in range(virtual)], virtual)
            reference_cycle = False
        except NegativeCycle:
            reference_cycle = True
        try:
            labels = compute_labels(tree, weights)
        except NegativeCycleReport:
            outcomes["negative_cycle"] += 1
            if not reference_cycle:
                failures.append((kind, n, seed, "spurious negative cycle"))
            continue
        outcomes["distances"] += 1
        if reference_cycle:
            failures.append((kind, n, seed, "missed negative cycle"))
            continue
        if not np.array_equal(labels.all_pairs(), apsp_reference(fs.num_faces, arcs)):
            failures.append((kind, n, seed, "distance mismatch"))
    both = all(outcomes.values())
    _record(3, not failures and both, f"50 graphs, outcomes {outcomes}, {len(failures)} mismatches")
    assert not failures
    assert both


def test_criterion_4_label_size_and_rounds():
    worst_bits = 0.0
    worst_rounds = 0.0
    for i, kind, n, seed in _corpus(50, 120, 4, ("grid", "triangulation", "cycle")):
        g = gen_planar(kind, n, (1, 100), seed, directed=True, drop=0.2)
        ledger = RoundLedger()
        tree = build_bdd(g, ledger=ledger)
        labels = compute_labels(tree, standard_dart_weights(g), ledger=ledger)
        diameter = max(1, hop_diameter(g.adjacency))
        logn = math.log2(max(g.n, 2))
        worst_bits = max(worst_bits, labels.max_label_bits() / (diameter * logn**2 * 64))
        worst_rounds = max(worst_rounds, ledger.rounds / (diameter**2 * logn**3))
    needed = max(worst_bits, worst_rounds)
    ok = needed <= LABEL_CONSTANT
    _record(
        4,
        ok,
        f"C = {LABEL_CONSTANT}; measured bits ratio {worst_bits:.3f}, rounds ratio {worst_rounds:.3f}",
    )
    assert ok


def test_criterion_5_minor_aggregation_fidelity():
    failures = []
    for i, kind, n, seed in _corpus(100, 60, 5, min_n=3):
        g = gen_planar(kind, n, seed=seed, drop=0.2)
        fdg = build_face_disjoint(g)
        net = DualNetwork.from_face_disjoint(fdg)
        program = random_program(net, random.Random(seed))
        if DualSimulator(fdg, net).run_program(program) != ReferenceInterpreter(net).run_program(program):
            failures.append((kind, n, seed))
    _record(5, not failures, f"100 programs, {len(failures)} mismatches")
    assert not failures


def test_criterion_6_face_disjoint_structure():
    failures = []
    for i, kind, n, seed in _corpus(80, 100, 6, min_n=3):
        g = gen_planar(kind, n, seed=seed, drop=0.3)
        fs = trace_faces(g)
        check_euler(g, fs)
        fdg = build_face_disjoint(g)
        h = fdg.graph
        crossing = [c for c, kind_of in enumerate(fdg.edge_kind) if kind_of == CROSSING]
        bijection = sorted(fdg.edge_primal[c] for c in crossing) == list(range(g.m)) and all(
            {fdg.copy_face[h.tail[fdg.crossing_edge[e]]], fdg.copy_face[h.head[fdg.crossing_edge[e]]]}
            == {fs.dart_face[2 * e], fs.dart_face[2 * e + 1]}
            for e in range(g.m)
        )
        good = (
            h.n == g.n + 2 * g.m
            and hop_diameter(h.adjacency) <= 3 * max(1, hop_diameter(g.adjacency))
            and bijection
        )
        if not good:
            failures.append((kind, n, seed))
    _record(6, not failures, f"80 graphs, {len(failures)} structural failures")
    assert not failures


def test_criterion_7_bdd_properties():
    failures = []
    decomposed = 0
    for i, kind, n, seed in _corpus(80, 150, 7, min_n=3):
        g = gen_planar(kind, n, seed=seed, drop=0.2)
        tree = build_bdd(g, check_diameters=n <= 60)
        logn = math.log2(max(g.n, 2))
        good = all(tree.properties.values())
        good = good and all(c <= 3 * logn for c in tree.face_part_counts().values())
        if len(tree.bags) > 1:
            decomposed += 1
            good = good and BDD_PROPERTIES <= set(tree.properties)
        if not good:
            failures.append((kind, n, seed))
    ok = not failures and decomposed > 0
    _record(7, ok, f"80 builds ({decomposed} decomposed), {len(failures)} failures")
    assert ok


def test_criterion_8_directed_global_min_cut():
    failures = []
    small = 0
    for i, kind, n, seed in _corpus(150, 12, 8, min_n=3):
        g = gen_planar(kind, n, (0, 30), seed, directed=True, drop=0.3)
        res = directed_global_min_cut(g)
        small += 1
        crossing = sum(g.weight[e] for e in range(g.m) if g.tail[e] in res.side and g.head[e] not in res.side)
        if res.value != brute_directed_global_cut(g)[0] or crossing != res.value:
            failures.append((kind, n, seed))
    for i, kind, n, seed in _corpus(50, 60, 80, ("grid", "triangulation"), min_n=13):
        g = gen_planar(kind, n, (1, 100), seed, directed=True, drop=0.2)
        res = directed_global_min_cut(g)
        crossing = sum(g.weight[e] for e in range(g.m) if g.tail[e] in res.side and g.head[e] not in res.side)
        if res.value != brute_directed_global_cut(g, exhaustive_limit=0)[0] or crossing != res.value:
            failures.append((kind, n, seed))
    _record(8, not failures, f"{small} exhaustive + 50 sweep instances, {len(failures)} mismatches")
    assert not failures


def _cofacial_instance(seed):
    rng = random.Random(seed)
    kind = ("grid", "triangulation", "cycle", "tree")[seed % 4]
    g = gen_planar(kind, rng.randint(4, 80), (1, 1), seed, capacity_range=(1, 50), drop=0.3)
    fs = trace_faces(g)
    while True:
        face = fs.faces[rng.randrange(fs.num_faces)]
        tails = sorted({g.dart_tail(d) for d in face})
        if len(tails) >= 2:
            s, t = rng.sample(tails, 2)
            return g, s, t


def test_criterion_9_approximate_flow():
    eps = 0.1
    failures = []
    for seed in range(100):
        g, s, t = _cofacial_instance(seed)
        exact, _ = max_st_flow_exact(g, s, t)
        value, flow = max_st_flow_stplanar_approx(g, s, t, 0.0)
        if abs(value - exact) > 1e-9 * max(1, exact) or flow.violations():
            failures.append(("exact oracle", seed))
        value, flow = max_st_flow_stplanar_approx(g, s, t, eps, NoisySsspOracle(seed))
        dist = flow.meta["split_node_dist"]
        smooth = all(
            dist[b] - dist[a] <= (1 + eps) * w * (1 + 1e-12) + 1e-9
            for x, y, w in flow.meta["split_edges"]
            for a, b in ((x, y), (y, x))
        )
        in_range = (1 - 0.25) * exact - 1e-9 <= value <= exact + 1e-9
        if not (smooth and in_range and not flow.violations()):
            failures.append(("noisy oracle", seed))
    _record(9, not failures, f"100 instances with each oracle, eps = {eps}, {len(failures)} failures")
    assert not failures


COMMANDS = [
    ["gen", "--gen", "triangulation:30", "--seed", "5"],
    ["girth", "--gen", "grid:36", "--seed", "5", "--verify", "--ledger"],
    ["maxflow", "--gen", "triangulation:40", "--seed", "5", "--verify", "--ledger"],
    ["mincut", "--gen", "grid:30", "--seed", "5", "--eps", "0.1", "--oracle", "noisy", "--verify"],
    ["dirmincut", "--gen", "grid:49", "--seed", "5", "--verify", "--ledger"],
    ["labels", "--gen", "grid:49", "--seed", "5", "--verify", "--dump-bdd", "--ledger"],
    ["verify", "--corpus", "6", "--seed", "5"],
]


def _run_all(hash_seed):
    env = dict(os.environ, PYTHONHASHSEED=str(hash_seed))
    outputs = []
    for argv in COMMANDS:
        done = subprocess.run(
            [sys.executable, "-m", "dualplanar", *argv, "--format", "structured"],
            capture_output=True,
            env=env,
            check=False,
        )
        outputs.append((done.returncode, done.stdout))
    return outputs


def test_criterion_10_determinism():
    first = _run_all(1)
    second = _run_all(2)
    all_ok = all(code == 0 for code, _ in first)
    identical = first == second
    ok = all_ok and identical
    _record(10, ok, f"{len(COMMANDS)} commands run twice, byte-identical: {identical}")
    assert all_ok
    assert identical
