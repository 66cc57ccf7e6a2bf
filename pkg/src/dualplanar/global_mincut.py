"""Directed global minimum cut as a minimum simple dart cycle of the dual.

Every edge ``u -> v`` of weight ``w`` gives two dual arcs: its own dart with
weight ``w`` and the reversed dart with weight zero.  A directed cut leaving
a vertex set ``S`` corresponds to a dual cycle made of the darts leaving
``S``, and its value is the cycle's weight.  A dart together with its
reversal is a zero-cost two-cycle that is not a cut, so only *simple dart
cycles* (no dart used with its reversal) count.

The minimum is found bottom-up on the decomposition.  Leaves enumerate
every arc ``d`` and close it with a shortest path that avoids ``rev d``.  A
non-leaf bag combines its children's minima with two searches on its dense
distance graph: cycles using a separator dart ``d`` (shortest path back
without ``rev d``), and cycles that leave a split face in one child and
come back to it in another.  The winning cycle is then recovered from a
shortest-path tree rooted at one of its faces.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .bdd import BddTree, build_bdd
from .congest_sim import RoundLedger
from .dual_labeling import INF, LabelSet, compute_labels, sssp_tree_dual
from .errors import Disconnected
from .planar_core import EmbeddedPlanarGraph, FaceStructure


@dataclass
class DartCycle:
    """A closed walk of dual arcs, given by the primal darts that induce them."""

    darts: list[int]
    weight: float
    anchor: int
    bag_id: int

    def key(self) -> tuple[float, int]:
        return (self.weight, self.anchor)

    def check(self, fs: FaceStructure) -> None:
        """Assert the cycle is closed, visits no face twice and uses no dart with its reversal."""
        if not self.darts:
            raise AssertionError("empty cycle")
        seen_darts = set(self.darts)
        if any((d ^ 1) in seen_darts for d in self.darts):
            raise AssertionError("cycle uses a dart together with its reversal")
        faces = []
        for i, d in enumerate(self.darts):
            nxt = self.darts[(i + 1) % len(self.darts)]
            if fs.dart_face[d] != fs.dart_face[nxt ^ 1]:
                raise AssertionError("cycle is not closed")
            faces.append(fs.dart_face[d])
        if len(set(faces)) != len(faces):
            raise AssertionError("cycle revisits a face")


@dataclass
class DirectedCutResult:
    value: int
    side: set[int]  # vertex ids
    cut_edges: list[int]  # edge ids
    cycle: DartCycle
    ledger: RoundLedger
    per_bag: dict[int, float] = field(default_factory=dict)
    recovered_by_fallback: bool = False


def _dart_weights(g: EmbeddedPlanarGraph) -> list[int]:
    w = [0] * g.num_darts
    for e, x in enumerate(g.weight):
        w[2 * e] = x
    return w


def _dijkstra_darts(
    fs: FaceStructure, arcs: Sequence[int], weights: Sequence[float], source: int, target: int, banned: int
) -> tuple[float, list[int]]:
    """Shortest path (as darts) from ``source`` to ``target`` over ``arcs`` minus ``banned``."""
    adj: dict[int, list[tuple[int, float, int]]] = {}
    for d in arcs:
        if d == banned:
            continue
        adj.setdefault(fs.dart_face[d ^ 1], []).append((fs.dart_face[d], weights[d], d))
    dist = {source: 0.0}
    back: dict[int, int] = {}
    heap = [(0.0, 0, source)]
    hops = {source: 0}
    while heap:
        dv, hv, v = heapq.heappop(heap)
        if dv > dist[v] or (dv == dist[v] and hv > hops[v]):
            continue
        if v == target:
            break
        for u, w, d in adj.get(v, ()):
            nd, nh = dv + w, hv + 1
            if nd < dist.get(u, INF) or (nd == dist.get(u, INF) and nh < hops[u]):
                dist[u] = nd
                hops[u] = nh
                back[u] = d
                heapq.heappush(heap, (nd, nh, u))
    if target not in dist:
        return INF, []
    path = []
    v = target
    while v != source:
        d = back[v]
        path.append(d)
        v = fs.dart_face[d ^ 1]
    return dist[target], path[::-1]


def min_simple_dart_cycle_leaf(
    fs: FaceStructure, arcs: Sequence[int], weights: Sequence[float], bag_id: int = -1
) -> DartCycle | None:
    """Exact minimum simple dart cycle among the given arcs (a leaf bag).

    For every arc ``d`` from ``u`` to ``v``, the best cycle through ``d`` is
    ``d`` followed by a shortest ``v``-to-``u`` path avoiding ``rev d``; a
    self-loop arc is a cycle on its own.  Ties go to the smaller anchor
    (smallest face on the cycle).
    """
    best: DartCycle | None = None
    arcs = sorted(arcs)
    for d in arcs:
        u, v = fs.dart_face[d ^ 1], fs.dart_face[d]
        if u == v:
            cand = DartCycle([d], weights[d], u, bag_id)
        else:
            dist, path = _dijkstra_darts(fs, arcs, weights, v, u, d ^ 1)
            if not math.isfinite(dist):
                continue
            darts = [d] + path
            cand = DartCycle(darts, weights[d] + dist, min(fs.dart_face[x] for x in darts), bag_id)
        if best is None or cand.key() < best.key():
            best = cand
    return best


def _dense_dijkstra(w: np.ndarray, source: int) -> np.ndarray:
    k = w.shape[0]
    dist = np.full(k, INF)
    dist[source] = 0.0
    done = np.zeros(k, dtype=bool)
    for _ in range(k):
        cand = np.where(done, INF, dist)
        v = int(np.argmin(cand))
        if not math.isfinite(cand[v]):
            break
        done[v] = True
        np.minimum(dist, dist[v] + w[v], out=dist)
    return dist


@dataclass
class _BagCore:
    parts: list[tuple[int, int]]
    clique: np.ndarray  # child cliques only (diagonal 0)
    sx_arcs: list[tuple[int, int, float, int]]  # (from part, to part, weight, dart)
    links: dict[int, list[int]]  # face -> its part indices


def _bag_core(labels: LabelSet, bag_id: int, weights: Sequence[float]) -> _BagCore:
    tree = labels.tree
    fs = tree.faces
    bag = tree.bags[bag_id]
    db = tree.dual_bags[bag_id]
    child_of = tree.child_of_dart[bag_id]
    parts = [(f, pos) for f in db.fx for pos in db.node_children[f]]
    pidx = {p: i for i, p in enumerate(parts)}
    k = len(parts)
    clique = np.full((k, k), INF)
    np.fill_diagonal(clique, 0.0)
    by_child: dict[int, list[int]] = {}
    for i, (_, pos) in enumerate(parts):
        by_child.setdefault(pos, []).append(i)
    for pos, idx in by_child.items():
        faces = [parts[i][0] for i in idx]
        block = labels.decode_block(bag.children[pos], faces, faces)
        sel = np.ix_(idx, idx)
        clique[sel] = np.minimum(clique[sel], block)
    sx = []
    for e in db.sx_edges:
        for d in (2 * e, 2 * e + 1):
            a = pidx[(fs.dart_face[d ^ 1], child_of[d ^ 1])]
            b = pidx[(fs.dart_face[d], child_of[d])]
            sx.append((a, b, float(weights[d]), d))
    links = {f: [pidx[(f, pos)] for pos in db.node_children[f]] for f in db.fx}
    return _BagCore(parts, clique, sx, links)


def _matrix(core: _BagCore, *, banned_dart: int | None = None, use_sx: bool = True, unlinked: int | None = None) -> np.ndarray:
    w = core.clique.copy()
    if use_sx:
        for a, b, x, d in core.sx_arcs:
            if d != banned_dart and x < w[a, b]:
                w[a, b] = x
    for f, idx in core.links.items():
        if f == unlinked:
            continue
        for i in idx:
            for j in idx:
                if i != j:
                    w[i, j] = min(w[i, j], 0.0)
    return w


def _bag_candidate(labels: LabelSet, bag_id: int, weights: Sequence[float]) -> tuple[float, int] | None:
    """Best ``(weight, anchor face)`` over cycles of the bag that meet its separator nodes."""
    core = _bag_core(labels, bag_id, weights)
    best: tuple[float, int] | None = None

    def offer(value: float, anchor: int) -> None:
        nonlocal best
        if math.isfinite(value) and (best is None or (value, anchor) < best):
            best = (value, anchor)

    # cycles through a separator dart d: d plus a path back avoiding rev d
    for a, b, x, d in core.sx_arcs:
        w = _matrix(core, banned_dart=d ^ 1)
        dist = _dense_dijkstra(w, b)
        offer(x + dist[a], core.parts[b][0])
    # cycles without separator darts that change child at a split face
    base_no_sx = None
    for f, idx in core.links.items():
        if len(idx) < 2:
            continue
        if base_no_sx is None:
            base_no_sx = True
        w = _matrix(core, use_sx=False, unlinked=f)
        for j in idx:
            dist = _dense_dijkstra(w, j)
            for i in idx:
                if i != j:
                    offer(dist[i], f)
    return best


def _recover(
    labels_tb: LabelSet, fs: FaceStructure, weights: Sequence[float], anchor: int, target: float
) -> tuple[DartCycle, bool]:
    """Minimum simple dart cycle through ``anchor``, from a shortest-path tree."""
    sp = sssp_tree_dual(labels_tb, anchor)
    best: tuple[float, int, list[int]] | None = None
    for d in range(len(weights)):
        if fs.dart_face[d] != anchor:
            continue
        u = fs.dart_face[d ^ 1]
        if u == anchor:
            cand = (float(weights[d]), d, [d])
        else:
            path = sp.path_darts(u)
            if not path or path[0] == d ^ 1 or not math.isfinite(sp.dist[u]):
                continue
            cand = (sp.dist[u] + weights[d], d, path + [d])
        if best is None or cand[:2] < best[:2]:
            best = cand
    if best is not None and best[0] == target:
        return DartCycle(best[2], best[0], anchor, 0), False
    # fallback: exact search per entering dart
    all_arcs = list(range(len(weights)))
    chosen: tuple[float, int, list[int]] | None = None
    for d in range(len(weights)):
        if fs.dart_face[d] != anchor:
            continue
        u = fs.dart_face[d ^ 1]
        if u == anchor:
            cand = (float(weights[d]), d, [d])
        else:
            dist, path = _dijkstra_darts(fs, all_arcs, weights, anchor, u, d ^ 1)
            if not math.isfinite(dist):
                continue
            cand = (dist + weights[d], d, path + [d])
        if chosen is None or cand[:2] < chosen[:2]:
            chosen = cand
    if chosen is None or chosen[0] != target:
        raise AssertionError(f"no cycle of weight {target} through face {anchor}")
    return DartCycle(chosen[2], chosen[0], anchor, 0), True


def directed_global_min_cut(
    g: EmbeddedPlanarGraph,
    *,
    leaf_size: int | None = None,
    ledger: RoundLedger | None = None,
    tree: BddTree | None = None,
) -> DirectedCutResult:
    """Minimum over non-trivial vertex sets ``S`` of the weight of edges leaving ``S``.

    Raises
    ------
    Disconnected
        When the graph is not connected in the undirected sense.
    """
    if g.n < 2:
        raise ValueError("a cut needs at least two vertices")
    if not g.is_connected():
        raise Disconnected("the graph must be connected")
    if any(w < 0 for w in g.weight):
        raise ValueError("weights must be non-negative")
    ledger = ledger if ledger is not None else RoundLedger()
    tree = tree or build_bdd(g, leaf_size=leaf_size, ledger=ledger)
    fs = tree.faces
    weights = _dart_weights(g)
    labels = compute_labels(tree, weights, ledger=ledger)
    per_bag: dict[int, float] = {}
    best_by_bag: dict[int, tuple[float, int] | None] = {}
    latency = max(tree.diameter, 1)
    levels = tree.levels()
    for lvl in range(len(levels) - 1, -1, -1):
        level_cost = 0
        for bag_id in levels[lvl]:
            bag = tree.bags[bag_id]
            if bag.is_leaf:
                cyc = min_simple_dart_cycle_leaf(fs, tree.dual_bags[bag_id].arcs, weights, bag_id)
                if cyc is not None:
                    cyc.check(fs)
                best = None if cyc is None else cyc.key()
                level_cost = max(level_cost, latency + len(bag.edges))
            else:
                best = _bag_candidate(labels, bag_id, weights)
                for c in bag.children:
                    cb = best_by_bag[c]
                    if cb is not None and (best is None or cb < best):
                        best = cb
                db = tree.dual_bags[bag_id]
                searches = 2 * len(db.sx_edges) + sum(len(db.node_children[f]) for f in db.fx)
                level_cost = max(level_cost, latency * (1 + searches))
            best_by_bag[bag_id] = best
            if best is not None:
                per_bag[bag_id] = best[0]
        ledger.charge("dart_cycle_level", level_cost)
    top = best_by_bag[0]
    if top is None:
        raise AssertionError("the dual has no simple dart cycle")
    value, anchor = top
    labels_tb = compute_labels(tree, weights, hop_tiebreak=True, ledger=ledger)
    cycle, fallback = _recover(labels_tb, fs, weights, anchor, value)
    cycle.check(fs)
    side, cut = _bisection(g, cycle)
    total = sum(g.weight[e] for e in cut)
    if total != value:
        raise AssertionError(f"cut weight {total} differs from cycle weight {value}")
    return DirectedCutResult(
        int(value),
        {g.vertex_ids[v] for v in side},
        sorted(g.edge_ids[e] for e in cut),
        cycle,
        ledger,
        per_bag,
        fallback,
    )


def _bisection(g: EmbeddedPlanarGraph, cycle: DartCycle) -> tuple[set[int], list[int]]:
    removed = {d >> 1 for d in cycle.darts}
    adj: dict[int, list[int]] = {v: [] for v in range(g.n)}
    for e in range(g.m):
        if e not in removed:
            adj[g.tail[e]].append(g.head[e])
            adj[g.head[e]].append(g.tail[e])
    comp = [-1] * g.n
    count = 0
    for s in range(g.n):
        if comp[s] != -1:
            continue
        comp[s] = count
        stack = [s]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if comp[u] == -1:
                    comp[u] = count
                    stack.append(u)
        count += 1
    if count != 2:
        raise AssertionError(f"removing the cycle's edges leaves {count} components")
    tails = {comp[g.dart_tail(d)] for d in cycle.darts}
    if len(tails) != 1:
        raise AssertionError("cycle darts do not all leave one side")
    side_comp = tails.pop()
    side = {v for v in range(g.n) if comp[v] == side_comp}
    cut = [e for e in range(g.m) if g.tail[e] in side and g.head[e] not in side]
    return side, cut
