"""Exact dual distance labels computed bottom-up over a decomposition.

For a bag ``X`` with separator node set ``F`` (primal faces), the label of a
dual node ``g`` stores the distances in ``X*`` from ``g`` to every node of
``F`` and back, plus, when ``g`` is not in ``F``, the label of ``g`` in the
unique child that contains it.  Leaves store full distance tables.  Two
labels of one bag decode to the exact ``X*`` distance: either a shortest
path passes through ``F``, or it stays inside one child and the nested
labels answer.

Internally every bag keeps its labels as two dense blocks, ``to`` (nodes by
``F``) and ``frm`` (``F`` by nodes); :class:`DistanceLabel` is the per-node
view used by the public decoding API.  Unreachable pairs hold ``inf``.

Weights are per dart; the arc of dart ``d`` runs from ``face(rev d)`` to
``face(d)`` and exists in a bag when both darts belong to it.  Negative
weights are allowed; a negative cycle raises
:class:`~dualplanar.errors.NegativeCycleReport` naming the detecting bag.

With ``hop_tiebreak`` every weight ``w`` is stored as ``w * (N + 1) + 1``
(``N`` = number of dual nodes).  Distances are then recovered by floor
division, and among equal-weight paths the one with fewer arcs is shorter,
which makes shortest-path trees acyclic even with zero-weight arcs.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .bdd import BddTree
from .congest_sim import RoundLedger
from .errors import BagMismatch, NegativeCycleReport, UnknownFace

INF = math.inf


def floyd_warshall(w: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths on a dense weight matrix (``inf`` = no arc).

    The diagonal of the result is negative exactly when a negative cycle
    exists.
    """
    d = np.array(w, dtype=float)
    k = d.shape[0]
    for i in range(k):
        np.minimum(d, d[:, i : i + 1] + d[i : i + 1, :], out=d)
    return d


def min_plus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance product ``c[i, j] = min_k a[i, k] + b[k, j]``."""
    if a.shape[1] == 0:
        return np.full((a.shape[0], b.shape[1]), INF)
    out = np.full((a.shape[0], b.shape[1]), INF)
    for k in range(a.shape[1]):
        np.minimum(out, a[:, k : k + 1] + b[k : k + 1, :], out=out)
    return out


@dataclass
class BagLabels:
    """Label blocks of one bag."""

    bag_id: int
    nodes: list[int]
    index: dict[int, int]
    fx: list[int]  # for leaves: every node
    to: np.ndarray  # len(nodes) x len(fx)
    frm: np.ndarray  # len(fx) x len(nodes)
    child_pos: dict[int, int]  # non-separator node -> child position
    leaf: bool


@dataclass
class DistanceLabel:
    """Label of one dual node in one bag.

    ``triples`` holds ``(f, dist(node -> f), dist(f -> node))`` for every
    separator node ``f`` of the bag (every node for a leaf); ``nested`` is the
    label in the child containing the node, absent for separator members
    and leaves.
    """

    bag_id: int
    node: int
    triples: list[tuple[int, float, float]]
    nested: DistanceLabel | None = None

    def bits(self, word: int = 64) -> int:
        own = 3 * word * len(self.triples)
        return own + (self.nested.bits(word) if self.nested is not None else 0)

    def depth(self) -> int:
        return 1 + (self.nested.depth() if self.nested is not None else 0)


@dataclass
class DenseDistanceGraph:
    """Small graph whose distances equal bag distances among its nodes.

    ``nodes`` are ``(face, child position)`` pairs (``child position`` is
    ``-1`` for the extra node ``g``); ``weight`` is a dense arc matrix.
    """

    nodes: list[tuple[int, int]]
    weight: np.ndarray

    def distances(self) -> np.ndarray:
        return floyd_warshall(self.weight)


@dataclass
class LabelSet:
    tree: BddTree
    dart_weight: list[float | None]
    bags: list[BagLabels]
    scale: int
    hop_tiebreak: bool
    ledger: RoundLedger
    per_level_rounds: list[int] = field(default_factory=list)

    # ---------------------------------------------------------------- decoding
    def decode_block(self, bag_id: int, a: Sequence[int], b: Sequence[int]) -> np.ndarray:
        """Raw (scaled) distance matrix from faces ``a`` to faces ``b`` in a bag."""
        lab = self.bags[bag_id]
        ia = [lab.index[f] for f in a]
        ib = [lab.index[f] for f in b]
        if lab.leaf:
            return lab.to[np.ix_(ia, ib)]
        out = min_plus(lab.to[ia, :], lab.frm[:, ib])
        bag = self.tree.bags[bag_id]
        groups_a: dict[int, list[int]] = {}
        groups_b: dict[int, list[int]] = {}
        for i, f in enumerate(a):
            if f in lab.child_pos:
                groups_a.setdefault(lab.child_pos[f], []).append(i)
        for j, f in enumerate(b):
            if f in lab.child_pos:
                groups_b.setdefault(lab.child_pos[f], []).append(j)
        for pos, rows in groups_a.items():
            cols = groups_b.get(pos)
            if not cols:
                continue
            sub = self.decode_block(bag.children[pos], [a[i] for i in rows], [b[j] for j in cols])
            idx = np.ix_(rows, cols)
            out[idx] = np.minimum(out[idx], sub)
        return out

    def unscale(self, raw: np.ndarray | float) -> np.ndarray | float:
        if self.scale == 1:
            return raw
        arr = np.asarray(raw, dtype=float)
        res = np.where(np.isfinite(arr), np.floor(arr / self.scale), arr)
        return res if isinstance(raw, np.ndarray) else float(res)

    def distance(self, g: int, h: int, *, bag_id: int = 0) -> float:
        """Exact distance from face ``g`` to face ``h`` in a bag's dual."""
        self._check_face(g, bag_id)
        self._check_face(h, bag_id)
        return float(self.unscale(self.decode_block(bag_id, [g], [h])[0, 0]))

    def all_pairs(self, bag_id: int = 0) -> np.ndarray:
        nodes = self.bags[bag_id].nodes
        return np.asarray(self.unscale(self.decode_block(bag_id, nodes, nodes)))

    def _check_face(self, f: int, bag_id: int) -> None:
        if f not in self.bags[bag_id].index:
            raise UnknownFace(f"face {f} is not in bag {bag_id}")

    # ------------------------------------------------------------------ labels
    def label(self, face: int, bag_id: int = 0) -> DistanceLabel:
        """The :class:`DistanceLabel` of ``face`` in a bag (unscaled distances)."""
        self._check_face(face, bag_id)
        lab = self.bags[bag_id]
        i = lab.index[face]
        to = self.unscale(lab.to[i, :]) if lab.to.shape[1] else lab.to[i, :]
        frm = self.unscale(lab.frm[:, i]) if lab.frm.shape[0] else lab.frm[:, i]
        triples = [(f, float(to[k]), float(frm[k])) for k, f in enumerate(lab.fx)]
        nested = None
        if not lab.leaf and face in lab.child_pos:
            nested = self.label(face, self.tree.bags[bag_id].children[lab.child_pos[face]])
        return DistanceLabel(bag_id, face, triples, nested)

    def max_label_bits(self, word: int = 64) -> int:
        best = 0
        for f in self.bags[0].nodes:
            words = 0
            bag_id: int | None = 0
            while bag_id is not None:
                lab = self.bags[bag_id]
                words += 3 * len(lab.fx)
                if lab.leaf or f not in lab.child_pos:
                    bag_id = None
                else:
                    bag_id = self.tree.bags[bag_id].children[lab.child_pos[f]]
            best = max(best, words * word)
        return best


def decode_distance(a: DistanceLabel, b: DistanceLabel) -> float:
    """Distance from ``a.node`` to ``b.node`` using only the two labels."""
    if a.bag_id != b.bag_id:
        raise BagMismatch(f"labels from bags {a.bag_id} and {b.bag_id}")
    if a.node == b.node:
        return 0.0
    frm_b = {f: back for f, _, back in b.triples}
    best = INF
    for f, to, _ in a.triples:
        other = frm_b.get(f)
        if other is not None and to + other < best:
            best = to + other
    if a.nested is not None and b.nested is not None and a.nested.bag_id == b.nested.bag_id:
        best = min(best, decode_distance(a.nested, b.nested))
    return best


# ----------------------------------------------------------------------
# computation
# ----------------------------------------------------------------------
def _arc_matrix(tree: BddTree, bag_id: int, weights: Sequence[float | None], index: dict[int, int]) -> np.ndarray:
    fs = tree.faces
    k = len(index)
    w = np.full((k, k), INF)
    np.fill_diagonal(w, 0.0)
    for d in tree.dual_bags[bag_id].arcs:
        x = weights[d]
        if x is None:
            continue
        a, b = index[fs.dart_face[d ^ 1]], index[fs.dart_face[d]]
        if x < w[a, b] or (a == b and x < 0):
            w[a, b] = x
    return w


def _core_ddg(
    labels: list[BagLabels | None], tree: BddTree, bag_id: int, weights: Sequence[float | None], decode
) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Dense graph on the separator node-parts of a non-leaf bag."""
    fs = tree.faces
    bag = tree.bags[bag_id]
    db = tree.dual_bags[bag_id]
    child_of = tree.child_of_dart[bag_id]
    parts: list[tuple[int, int]] = []
    for f in db.fx:
        for pos in db.node_children[f]:
            parts.append((f, pos))
    pidx = {p: i for i, p in enumerate(parts)}
    k = len(parts)
    w = np.full((k, k), INF)
    np.fill_diagonal(w, 0.0)
    # child cliques of decoded distances
    by_child: dict[int, list[int]] = {}
    for i, (f, pos) in enumerate(parts):
        by_child.setdefault(pos, []).append(i)
    for pos, idx in by_child.items():
        faces = [parts[i][0] for i in idx]
        block = decode(bag.children[pos], faces, faces)
        sel = np.ix_(idx, idx)
        w[sel] = np.minimum(w[sel], block)
    # separator arcs
    for e in db.sx_edges:
        for d in (2 * e, 2 * e + 1):
            x = weights[d]
            if x is None:
                continue
            a = pidx[(fs.dart_face[d ^ 1], child_of[d ^ 1])]
            b = pidx[(fs.dart_face[d], child_of[d])]
            if x < w[a, b]:
                w[a, b] = x
    # zero links between parts of one face
    for f in db.fx:
        idx = [pidx[(f, pos)] for pos in db.node_children[f]]
        for i in idx:
            for j in idx:
                if i != j:
                    w[i, j] = min(w[i, j], 0.0)
    return parts, w


def compute_labels(
    tree: BddTree,
    dart_weight: Sequence[float | None],
    *,
    hop_tiebreak: bool = False,
    ledger: RoundLedger | None = None,
) -> LabelSet:
    """Compute labels for every bag, leaves first.

    Raises
    ------
    NegativeCycleReport
        When some bag's dual contains a negative cycle.
    """
    ledger = ledger if ledger is not None else RoundLedger()
    num_nodes = tree.faces.num_faces
    scale = num_nodes + 1 if hop_tiebreak else 1
    if hop_tiebreak:
        weights: list[float | None] = [None if x is None else float(x) * scale + 1 for x in dart_weight]
    else:
        weights = [None if x is None else float(x) for x in dart_weight]
    labels: list[BagLabels | None] = [None] * len(tree.bags)
    result = LabelSet(tree, weights, [], scale, hop_tiebreak, ledger)  # bags filled below

    def decode(bag_id: int, a: Sequence[int], b: Sequence[int]) -> np.ndarray:
        result.bags = labels  # type: ignore[assignment]
        return result.decode_block(bag_id, a, b)

    logn = max(1, math.ceil(math.log2(max(tree.graph.n, 2))))
    latency = max(tree.diameter, 1) * logn
    levels = tree.levels()
    per_level: list[int] = []
    for lvl in range(len(levels) - 1, -1, -1):
        level_max = 0
        for bag_id in levels[lvl]:
            bag = tree.bags[bag_id]
            db = tree.dual_bags[bag_id]
            index = {f: i for i, f in enumerate(db.nodes)}
            if bag.is_leaf:
                dist = floyd_warshall(_arc_matrix(tree, bag_id, weights, index))
                if np.any(np.diag(dist) < 0):
                    raise NegativeCycleReport(bag_id)
                labels[bag_id] = BagLabels(bag_id, db.nodes, index, list(db.nodes), dist, dist, {}, True)
                payload = len(bag.edges)
            else:
                parts, w = _core_ddg(labels, tree, bag_id, weights, decode)
                core = floyd_warshall(w)
                if np.any(np.diag(core) < 0):
                    raise NegativeCycleReport(bag_id)
                pidx = {p: i for i, p in enumerate(parts)}
                first = [pidx[(f, db.node_children[f][0])] for f in db.fx]
                fx_pos = {f: i for i, f in enumerate(db.fx)}
                to = np.full((len(db.nodes), len(db.fx)), INF)
                frm = np.full((len(db.fx), len(db.nodes)), INF)
                child_pos: dict[int, int] = {}
                for f in db.fx:
                    i = index[f]
                    to[i, :] = core[first[fx_pos[f]], first]
                    frm[:, i] = core[first, first[fx_pos[f]]]
                members: dict[int, list[int]] = {}
                for f in db.nodes:
                    if f not in fx_pos:
                        (pos,) = db.node_children[f]
                        child_pos[f] = pos
                        members.setdefault(pos, []).append(f)
                for pos, faces in members.items():
                    pi = [pidx[(f, p)] for (f, p) in parts if p == pos]
                    pf = [parts[i][0] for i in pi]
                    rows = [index[f] for f in faces]
                    if pi:
                        d_in = decode(bag.children[pos], faces, pf)
                        d_out = decode(bag.children[pos], pf, faces)
                        to[rows, :] = min_plus(d_in, core[np.ix_(pi, first)])
                        frm[:, rows] = min_plus(core[np.ix_(first, pi)], d_out)
                labels[bag_id] = BagLabels(bag_id, db.nodes, index, list(db.fx), to, frm, child_pos, False)
                payload = sum(3 * len(labels[bag.children[pos]].fx) for _, pos in parts)  # type: ignore[union-attr]
            level_max = max(level_max, latency + payload)
        ledger.charge("labels_level", level_max)
        per_level.append(level_max)
    result.bags = labels  # type: ignore[assignment]
    result.per_level_rounds = per_level
    return result


def build_ddg(labels: LabelSet, bag_id: int, g: int) -> DenseDistanceGraph:
    """Dense distance graph of a non-leaf bag on its separator parts plus ``g``.

    ``g`` is added as node ``(g, -1)`` with arcs to and from the parts of its
    own child, weighted by that child's distances.  When ``g`` is itself a
    separator node it is linked to its parts by zero arcs.
    """
    tree = labels.tree
    bag = tree.bags[bag_id]
    if bag.is_leaf:
        raise ValueError("leaf bags have no dense distance graph")
    db = tree.dual_bags[bag_id]
    labels._check_face(g, bag_id)
    parts, core_w = _core_ddg(labels.bags, tree, bag_id, labels.dart_weight, labels.decode_block)  # type: ignore[arg-type]
    k = len(parts) + 1
    w = np.full((k, k), INF)
    w[:-1, :-1] = core_w
    w[-1, -1] = 0.0
    if g in db.fx:
        for i, (f, _) in enumerate(parts):
            if f == g:
                w[-1, i] = w[i, -1] = 0.0
    else:
        (pos,) = db.node_children[g]
        idx = [i for i, (_, p) in enumerate(parts) if p == pos]
        if idx:
            faces = [parts[i][0] for i in idx]
            child = bag.children[pos]
            w[-1, idx] = labels.decode_block(child, [g], faces)[0]
            w[idx, -1] = labels.decode_block(child, faces, [g])[:, 0]
    return DenseDistanceGraph(parts + [(g, -1)], np.asarray(labels.unscale(w)))


# ----------------------------------------------------------------------
# shortest-path trees
# ----------------------------------------------------------------------
@dataclass
class DualSsspTree:
    """Shortest-path tree in the dual.

    ``parent_dart[f]`` is the dart whose arc enters ``f`` on the tree path
    (``None`` for the source and for unreachable faces).
    """

    source: int
    dist: dict[int, float]
    parent_dart: dict[int, int | None]

    def path_darts(self, f: int) -> list[int]:
        """Darts of the tree path from the source to ``f``, in order."""
        out = []
        while self.parent_dart.get(f) is not None:
            d = self.parent_dart[f]
            out.append(d)
            f = self._tail[d]  # type: ignore[index]
        return out[::-1]

    _tail: dict[int, int] = field(default_factory=dict, repr=False)


def sssp_tree_dual(labels: LabelSet, source_face: int, *, ledger: RoundLedger | None = None) -> DualSsspTree:
    """Shortest-path tree from ``source_face`` over the whole dual.

    Every face picks, among incoming arcs ``u -> f`` with
    ``dist(u) + w = dist(f)``, the one with the smallest
    ``(weight, edge id, neighbour face)``.  Trees are guaranteed acyclic when
    the labels were computed with ``hop_tiebreak``.
    """
    tree = labels.tree
    fs = tree.faces
    root = labels.bags[0]
    if source_face not in root.index:
        raise UnknownFace(f"face {source_face} does not exist")
    ledger = ledger if ledger is not None else labels.ledger
    raw = labels.decode_block(0, [source_face], root.nodes)[0]
    dist_raw = {f: float(raw[i]) for i, f in enumerate(root.nodes)}
    best: dict[int, tuple] = {}
    tails: dict[int, int] = {}
    for d, w in enumerate(labels.dart_weight):
        if w is None:
            continue
        u, f = fs.dart_face[d ^ 1], fs.dart_face[d]
        tails[d] = u
        if f == source_face or u == f or not math.isfinite(dist_raw[u]):
            continue
        if dist_raw[u] + w != dist_raw[f]:
            continue
        key = (w, d >> 1, u, d)
        if f not in best or key < best[f]:
            best[f] = key
    parent: dict[int, int | None] = {f: None for f in root.nodes}
    for f, key in best.items():
        parent[f] = key[3]
    logn = max(1, math.ceil(math.log2(max(tree.graph.n, 2))))
    ledger.charge("sssp_source_broadcast", max(tree.diameter, 1) + 3 * len(root.fx) * logn)
    ledger.charge("sssp_tree_mark", 2 * max(tree.diameter, 1) + 2)
    dist = {f: float(labels.unscale(x)) for f, x in dist_raw.items()}
    out = DualSsspTree(source_face, dist, parent)
    out._tail = tails
    # acyclicity check: every tree path must reach the source
    for f in root.nodes:
        seen = 0
        x = f
        while parent.get(x) is not None:
            x = tails[parent[x]]  # type: ignore[index]
            seen += 1
            if seen > len(root.nodes):
                raise ValueError("shortest-path parents contain a cycle; use hop_tiebreak")
    return out
