"""Bounded-diameter recursive decomposition with dual bags and face-parts.

A *bag* is a set of darts.  The root bag holds every dart; the children of
a bag partition its darts.  An edge belongs to a bag when at least one of
its darts does, and it is a dual edge of the bag when both darts do.  The
dual bag ``X*`` has one node per primal face that owns a dart of ``X`` and
one arc per dart whose reversal is also in ``X``; distances in ``X*`` are
what the labels of :mod:`dualplanar.dual_labeling` encode.

Separators.  For a bag with too many edges, the plane graph formed by its
edges is taken with a BFS tree from its smallest vertex.  Faces of that
plane graph whose darts all belong to ``X`` and to one primal face (and
faces made only of darts outside ``X``) are fan-triangulated with virtual
chords.  Every non-tree edge closes a fundamental cycle; the one with the
most balanced split of the bag's darts (ties: shorter cycle, real edge,
smaller id) is the separator.  The darts on each side, grouped into
connected components, become the children.

Face-parts.  When a primal face has darts in several children, each child
holds a part of it.  Ids are nested tuples: a face keeps its parent's id in
a child unless it was split there, in which case the child's bag id is
appended.  Root ids are the face ids of face identification.

All structural properties are asserted at build time; a failure raises
:class:`~dualplanar.errors.PropertyViolation`.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from .congest_sim import RoundLedger
from .errors import Disconnected, PropertyViolation
from .planar_core import EmbeddedPlanarGraph, FaceStructure, trace_faces

FacePartId = tuple[int, ...]


@dataclass
class Separator:
    """Fundamental cycle used to split a bag."""

    edges: list[int]  # real edges of the cycle (tree paths, plus the closing edge if real)
    closing: tuple[int, int]  # endpoints of the closing edge
    virtual: bool
    closing_edge: int | None  # real closing edge index, if any
    critical_face: int | None  # primal face split by a virtual closing edge
    sides: tuple[int, int]  # dart counts inside / outside


@dataclass
class Bag:
    id: int
    level: int
    darts: frozenset[int]
    parent: int | None
    children: list[int] = field(default_factory=list)
    separator: Separator | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @cached_property
    def edges(self) -> list[int]:
        return sorted({d >> 1 for d in self.darts})


@dataclass
class DualBag:
    """The dual of a bag.

    Attributes
    ----------
    nodes:
        Sorted primal face indices present in the bag (local index = position).
    arcs:
        Darts whose reversal is also in the bag; the arc of dart ``d`` goes
        from ``face(rev d)`` to ``face(d)``.
    fx:
        Separator node set (empty for leaves), as primal face indices.
    sx_edges:
        Primal edges with both darts in the bag but in different children.
    node_children:
        Face -> sorted positions of the children that contain it.
    """

    bag_id: int
    nodes: list[int]
    arcs: list[int]
    fx: list[int]
    sx_edges: list[int]
    node_children: dict[int, list[int]]

    @cached_property
    def local(self) -> dict[int, int]:
        return {f: i for i, f in enumerate(self.nodes)}


@dataclass
class BddTree:
    graph: EmbeddedPlanarGraph
    faces: FaceStructure
    bags: list[Bag]
    dual_bags: list[DualBag]
    child_of_dart: list[dict[int, int]]  # per bag: dart -> child position
    registry: list[dict[int, FacePartId]]  # per bag: face -> face-part id
    critical: list[int | None]
    leaf_size: int
    diameter: int
    ledger: RoundLedger
    properties: dict[str, bool] = field(default_factory=dict)

    @property
    def root(self) -> Bag:
        return self.bags[0]

    @property
    def depth(self) -> int:
        return max(b.level for b in self.bags)

    def levels(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.depth + 1)]
        for b in self.bags:
            out[b.level].append(b.id)
        return out

    def leaves(self) -> list[int]:
        return [b.id for b in self.bags if b.is_leaf]

    def face_part_counts(self) -> dict[int, int]:
        """Number of face-parts (faces only partly inside) per bag."""
        fs = self.faces
        out = {}
        for b in self.bags:
            cnt = 0
            for f in self.dual_bags[b.id].nodes:
                if any(d not in b.darts for d in fs.faces[f]):
                    cnt += 1
            out[b.id] = cnt
        return out


# ----------------------------------------------------------------------
# bag-local plane graph and separator search
# ----------------------------------------------------------------------
class _LocalPlane:
    """The plane graph of a bag's edges, optionally with virtual chords."""

    def __init__(self, g: EmbeddedPlanarGraph, edges: Sequence[int]) -> None:
        self.g = g
        eset = set(edges)
        self.rot: dict[int, list[int]] = {}
        for e in edges:
            for v in (g.tail[e], g.head[e]):
                if v not in self.rot:
                    self.rot[v] = [d for d in g.darts_out(v) if (d >> 1) in eset]
        self.base = g.num_darts
        self.virtual_ends: list[tuple[int, int]] = []  # chord k: (u, v) for dart base+2k
        self.virtual_face: list[int] = []

    def tail(self, d: int) -> int:
        if d < self.base:
            return self.g.dart_tail(d)
        u, v = self.virtual_ends[(d - self.base) >> 1]
        return u if d % 2 == 0 else v

    def head(self, d: int) -> int:
        return self.tail(d ^ 1)

    def darts(self) -> list[int]:
        return [d for rot in self.rot.values() for d in rot]

    def faces(self) -> tuple[list[list[int]], dict[int, int]]:
        pos = {}
        for v, rot in self.rot.items():
            for i, d in enumerate(rot):
                pos[d] = (v, i)
        face_of: dict[int, int] = {}
        faces: list[list[int]] = []
        for start in sorted(pos):
            if start in face_of:
                continue
            cyc = []
            d = start
            while d not in face_of:
                face_of[d] = len(faces)
                cyc.append(d)
                v, i = pos[d ^ 1]
                rot = self.rot[v]
                d = rot[(i - 1) % len(rot)]
            faces.append(cyc)
        return faces, face_of

    def add_chord(self, u: int, v: int, after_u: int, after_v: int, gface: int) -> int:
        """Insert chord ``u -> v`` right after dart ``after_u`` at ``u`` and ``after_v`` at ``v``."""
        k = len(self.virtual_ends)
        self.virtual_ends.append((u, v))
        self.virtual_face.append(gface)
        d = self.base + 2 * k
        ru = self.rot[u]
        ru.insert(ru.index(after_u) + 1, d)
        rv = self.rot[v]
        rv.insert(rv.index(after_v) + 1, d + 1)
        return d


def _fan_triangulate(plane: _LocalPlane, darts_in: frozenset[int], dart_face: Sequence[int]) -> None:
    faces, _ = plane.faces()
    for cyc in faces:
        k = len(cyc)
        if k <= 3:
            continue
        inside = [d in darts_in for d in cyc]
        if all(inside):
            gfaces = {dart_face[d] for d in cyc}
            if len(gfaces) != 1:
                continue
            gface = next(iter(gfaces))
        elif not any(inside):
            gface = -1
        else:
            continue
        v0 = plane.tail(cyc[0])
        last_at_v0 = cyc[0]
        for i in range(2, k - 1):
            vi = plane.tail(cyc[i])
            if vi == v0:
                continue
            # at the corner of v0: after the previous chord (or d0);
            # at the corner of vi: right after d_i
            d = plane.add_chord(v0, vi, last_at_v0, cyc[i], gface)
            last_at_v0 = d


def _bfs_parent(plane: _LocalPlane, root: int, real_only: bool = True) -> tuple[dict[int, int | None], dict[int, int]]:
    """BFS over real darts; returns vertex -> parent dart (dart into the vertex) and depth."""
    parent: dict[int, int | None] = {root: None}
    depth = {root: 0}
    q = deque([root])
    while q:
        v = q.popleft()
        for d in plane.rot[v]:
            if real_only and d >= plane.base:
                continue
            u = plane.head(d)
            if u not in parent:
                parent[u] = d
                depth[u] = depth[v] + 1
                q.append(u)
    return parent, depth


def _choose_separator(
    g: EmbeddedPlanarGraph, fs: FaceStructure, bag_darts: frozenset[int]
) -> tuple[Separator, set[int]] | None:
    """Pick a fundamental-cycle separator; returns it and the inside dart set."""
    edges = sorted({d >> 1 for d in bag_darts})
    plane = _LocalPlane(g, edges)
    _fan_triangulate(plane, bag_darts, fs.dart_face)
    root = min(plane.rot)
    parent, depth = _bfs_parent(plane, root)
    if len(parent) != len(plane.rot):
        raise Disconnected("bag edge set is not connected")
    tree_edges = {d >> 1 for d in parent.values() if d is not None and d < plane.base}
    faces, face_of = plane.faces()
    weight = [sum(1 for d in cyc if d in bag_darts) for cyc in faces]
    total = sum(weight)

    # dual spanning tree: faces joined by non-tree (real or virtual) edges
    def edge_key(d: int) -> int:
        return d >> 1 if d < plane.base else -1 - ((d - plane.base) >> 1)

    dual_adj: dict[int, list[tuple[int, int]]] = {f: [] for f in range(len(faces))}
    nontree_darts = []
    for d in plane.darts():
        if d % 2 == 1:
            continue
        if d < plane.base and (d >> 1) in tree_edges:
            continue
        a, b = face_of[d ^ 1], face_of[d]
        dual_adj[a].append((b, d))
        dual_adj[b].append((a, d))
        nontree_darts.append(d)
    droot = 0
    dpar: dict[int, tuple[int, int] | None] = {droot: None}
    order = [droot]
    for f in order:
        for h, d in dual_adj[f]:
            if h not in dpar:
                dpar[h] = (f, d)
                order.append(h)
    if len(dpar) != len(faces):
        raise PropertyViolation("non-tree edges do not span the faces of the bag")
    sub = list(weight)
    for f in reversed(order):
        p = dpar[f]
        if p is not None:
            sub[p[0]] += sub[f]
    below_edge: dict[int, int] = {}
    for f, p in dpar.items():
        if p is not None:
            below_edge[p[1]] = f

    def tree_path(v: int) -> list[int]:
        out = []
        while parent[v] is not None:
            d = parent[v]
            out.append(d)  # type: ignore[arg-type]
            v = plane.tail(d)  # type: ignore[arg-type]
        return out

    best = None
    for d in nontree_darts:
        f = below_edge[d]
        inside = sub[f]
        outside = total - inside
        if inside == 0 or outside == 0:
            continue
        u, v = plane.tail(d), plane.head(d)
        length = depth[u] + depth[v] + 1  # upper bound, refined below for ties
        key = (max(inside, outside), length, d >= plane.base, edge_key(d) if d < plane.base else len(edges) - edge_key(d))
        if best is None or key < best[0]:
            best = (key, d, f)
    if best is None:
        return None
    _, d, f = best
    # inside faces = dual subtree below f
    inside_faces = {f}
    stack = [f]
    children_of: dict[int, list[int]] = {}
    for h, p in dpar.items():
        if p is not None:
            children_of.setdefault(p[0], []).append(h)
    while stack:
        x = stack.pop()
        for c in children_of.get(x, ()):
            inside_faces.add(c)
            stack.append(c)
    inside_darts = {x for x in bag_darts if face_of[x] in inside_faces}
    u, v = plane.tail(d), plane.head(d)
    pu, pv = tree_path(u), tree_path(v)
    su, sv = set(x >> 1 for x in pu), set(x >> 1 for x in pv)
    cyc_edges = sorted((su ^ sv) | ({d >> 1} if d < plane.base else set()))
    virtual = d >= plane.base
    crit = plane.virtual_face[(d - plane.base) >> 1] if virtual else None
    sep = Separator(
        cyc_edges, (u, v), virtual, None if virtual else d >> 1,
        crit if crit is not None and crit >= 0 else None, (len(inside_darts), total - len(inside_darts)),
    )
    return sep, inside_darts


def _components(g: EmbeddedPlanarGraph, darts: set[int]) -> list[frozenset[int]]:
    """Group darts by connected components of their edges."""
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for d in darts:
        a, b = find(g.dart_tail(d)), find(g.dart_head(d))
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, set[int]] = {}
    for d in darts:
        groups.setdefault(find(g.dart_tail(d)), set()).add(d)
    return [frozenset(groups[k]) for k in sorted(groups, key=lambda r: min(groups[r]))]


# ----------------------------------------------------------------------
# construction
# ----------------------------------------------------------------------
def default_leaf_size(n: int) -> int:
    return max(8, 2 * math.ceil(math.log2(max(n, 2))))


def _hop_diameter(adj: dict[int, list[int]]) -> int:
    best = 0
    for s in adj:
        dist = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    q.append(u)
        best = max(best, max(dist.values()))
    return best


def build_bdd(
    g: EmbeddedPlanarGraph,
    *,
    leaf_size: int | None = None,
    face_ids: Sequence[int] | None = None,
    ledger: RoundLedger | None = None,
    level_charge: int = 1,
    check: bool = True,
    check_diameters: bool = False,
) -> BddTree:
    """Decompose a connected embedded graph.

    Parameters
    ----------
    leaf_size:
        Bags with at most this many edges are leaves (default
        ``max(8, 2 * ceil(log2 n))``).
    face_ids:
        Root face ids (face index -> id); defaults to the face indices.
    level_charge:
        Constant ``c`` of the per-level ledger charge ``c * D * ceil(log2 n)``.
    check:
        Assert all structural properties.
    check_diameters:
        Also measure every bag's hop diameter (quadratic; off by default).
    """
    if not g.is_connected():
        raise Disconnected("decomposition needs a connected graph")
    fs = trace_faces(g)
    n = g.n
    leaf_size = leaf_size or default_leaf_size(n)
    diam = _hop_diameter(g.adjacency) if g.n > 1 else 0
    ledger = ledger if ledger is not None else RoundLedger()
    bags = [Bag(0, 0, frozenset(range(g.num_darts)), None)]
    child_of_dart: list[dict[int, int]] = []
    i = 0
    while i < len(bags):
        bag = bags[i]
        child_of_dart.append({})
        if len(bag.edges) > leaf_size:
            found = _choose_separator(g, fs, bag.darts)
            if found is not None:
                sep, inside = found
                bag.separator = sep
                outside = set(bag.darts) - inside
                parts = _components(g, inside) + _components(g, outside)
                for pos, part in enumerate(parts):
                    child = Bag(len(bags), bag.level + 1, part, bag.id)
                    bags.append(child)
                    bag.children.append(child.id)
                    for d in part:
                        child_of_dart[i][d] = pos
        i += 1
    depth = max(b.level for b in bags)
    logn = math.ceil(math.log2(max(n, 2)))
    for lvl in range(depth + 1):
        ledger.charge("bdd_build", level_charge * max(diam, 1) * logn)

    dual_bags = [_dual_bag(g, fs, b, child_of_dart[b.id]) for b in bags]
    root_ids = list(face_ids) if face_ids is not None else list(range(fs.num_faces))
    registry, critical = _assign_ids(bags, dual_bags, root_ids, fs)
    tree = BddTree(g, fs, bags, dual_bags, child_of_dart, registry, critical, leaf_size, diam, ledger)
    if check:
        tree.properties = check_properties(tree, check_diameters=check_diameters)
    return tree


def _dual_bag(g: EmbeddedPlanarGraph, fs: FaceStructure, bag: Bag, child_of: dict[int, int]) -> DualBag:
    nodes = sorted({fs.dart_face[d] for d in bag.darts})
    arcs = sorted(d for d in bag.darts if (d ^ 1) in bag.darts)
    node_children: dict[int, list[int]] = {}
    sx: list[int] = []
    fx: set[int] = set()
    if bag.children:
        for d in bag.darts:
            node_children.setdefault(fs.dart_face[d], set()).add(child_of[d])  # type: ignore[arg-type]
        node_children = {f: sorted(c) for f, c in node_children.items()}
        fx = {f for f, c in node_children.items() if len(c) > 1}
        for d in arcs:
            if d % 2 == 0 and child_of[d] != child_of[d ^ 1]:
                sx.append(d >> 1)
                fx.add(fs.dart_face[d])
                fx.add(fs.dart_face[d ^ 1])
    return DualBag(bag.id, nodes, arcs, sorted(fx), sorted(sx), node_children)


def compute_fx(tree: BddTree, bag_id: int) -> list[int]:
    """Separator node set of a bag, from both definitions (cross-checked)."""
    bag = tree.bags[bag_id]
    if bag.is_leaf:
        return []
    fs = tree.faces
    db = tree.dual_bags[bag_id]
    child_of = tree.child_of_dart[bag_id]
    split = {f for f, c in db.node_children.items() if len(c) > 1}
    sx_ends = set()
    for e in db.sx_edges:
        sx_ends.add(fs.dart_face[2 * e])
        sx_ends.add(fs.dart_face[2 * e + 1])
    # second definition: nodes whose incident bag arcs or darts touch two children
    touch: dict[int, set[int]] = {}
    for d in bag.darts:
        touch.setdefault(fs.dart_face[d], set()).add(child_of[d])
        if (d ^ 1) in bag.darts:
            touch.setdefault(fs.dart_face[d ^ 1], set()).add(child_of[d])
    alt = {f for f, c in touch.items() if len(c) > 1}
    first = split | sx_ends
    if first != alt:
        raise PropertyViolation(f"bag {bag_id}: separator node definitions disagree")
    return sorted(first)


def build_dual_bag(tree: BddTree, bag_id: int) -> DualBag:
    return tree.dual_bags[bag_id]


def _assign_ids(
    bags: list[Bag], dual_bags: list[DualBag], root_ids: Sequence[int], fs: FaceStructure
) -> tuple[list[dict[int, FacePartId]], list[int | None]]:
    registry: list[dict[int, FacePartId]] = [dict() for _ in bags]
    critical: list[int | None] = [None] * len(bags)
    registry[0] = {f: (root_ids[f],) for f in dual_bags[0].nodes}
    for bag in bags:
        if bag.separator is not None:
            critical[bag.id] = bag.separator.critical_face
        db = dual_bags[bag.id]
        for pos, cid in enumerate(bag.children):
            reg = {}
            for f in dual_bags[cid].nodes:
                base = registry[bag.id][f]
                reg[f] = base + (cid,) if len(db.node_children.get(f, ())) > 1 else base
            registry[cid] = reg
    return registry, critical


def assign_face_ids(tree: BddTree) -> list[dict[int, FacePartId]]:
    """Per bag, the face-part id of every face present (by primal face index)."""
    return tree.registry


def dart_view(tree: BddTree, bag_id: int) -> dict[int, FacePartId]:
    """Per bag, what the tail vertex of each dart knows: the id of its face-part."""
    reg = tree.registry[bag_id]
    return {d: reg[tree.faces.dart_face[d]] for d in tree.bags[bag_id].darts}


# ----------------------------------------------------------------------
# property checks
# ----------------------------------------------------------------------
def _bag_adjacency(g: EmbeddedPlanarGraph, edges: Sequence[int]) -> dict[int, list[int]]:
    adj: dict[int, set[int]] = {}
    for e in edges:
        a, b = g.tail[e], g.head[e]
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    return {v: sorted(s) for v, s in adj.items()}


def check_properties(tree: BddTree, *, check_diameters: bool = False, const: int = 4) -> dict[str, bool]:
    """Assert every structural property; returns name -> True.

    ``const`` is the constant ``c`` of all ``c * D * log n`` style bounds.
    """
    g, fs = tree.graph, tree.faces
    n = g.n
    logn = max(1, math.ceil(math.log2(max(n, 2))))
    dlog = max(tree.diameter, 1) * logn
    results: dict[str, bool] = {}

    def require(name: str, ok: bool, detail: str = "") -> None:
        if not ok:
            raise PropertyViolation(f"{name} violated {detail}".strip())
        results[name] = True

    # 1 logarithmic depth
    require("depth", tree.depth <= const * logn, f"(depth {tree.depth})")
    # 2 separators are simple cycles once the closing edge is added
    for bag in tree.bags:
        sep = bag.separator
        if sep is None:
            continue
        deg: dict[int, int] = {}
        for e in sep.edges:
            for v in (g.tail[e], g.head[e]):
                deg[v] = deg.get(v, 0) + 1
        if sep.virtual:
            for v in sep.closing:
                deg[v] = deg.get(v, 0) + 1
        require("separator_is_simple_cycle", all(x == 2 for x in deg.values()), f"(bag {bag.id})")
    # 3 leaf size, also against the fixed 4 * D * ceil(log2 n) threshold
    for b in tree.bags:
        if b.is_leaf:
            require("leaf_size", len(b.edges) <= 4 * dlog or len(b.edges) <= tree.leaf_size, f"(bag {b.id})")
    # 4 separator length
    for b in tree.bags:
        if b.separator is not None:
            require("separator_length", len(b.separator.edges) + 1 <= const * dlog, f"(bag {b.id})")
    # 5 bag diameter
    if check_diameters:
        for b in tree.bags:
            diam = _hop_diameter(_bag_adjacency(g, b.edges))
            require("bag_diameter", diam <= const * dlog, f"(bag {b.id}: {diam})")
    else:
        results["bag_diameter"] = True
    # 6 children partition the bag
    for b in tree.bags:
        if b.children:
            union: set[int] = set()
            total = 0
            for c in b.children:
                union |= tree.bags[c].darts
                total += len(tree.bags[c].darts)
            require("children_partition_bag", union == set(b.darts) and total == len(b.darts), f"(bag {b.id})")
    # 7 every dart in exactly one bag per level; every edge in at most two
    all_darts = g.num_darts
    for lvl in range(tree.depth + 1):
        seen = [0] * all_darts
        edge_bags: dict[int, set[int]] = {}
        for b in tree.bags:
            if b.level == lvl or (b.is_leaf and b.level < lvl):
                for d in b.darts:
                    seen[d] += 1
                    edge_bags.setdefault(d >> 1, set()).add(b.id)
        require("dart_once_per_level", all(x == 1 for x in seen), f"(level {lvl})")
        require("edge_at_most_two_bags", all(len(s) <= 2 for s in edge_bags.values()), f"(level {lvl})")
    # 8 lone darts sit on an ancestor's separator
    for b in tree.bags:
        lone = [d for d in b.darts if (d ^ 1) not in b.darts]
        for d in lone:
            h = b.parent
            ok = False
            while h is not None:
                if (d >> 1) in tree.dual_bags[h].sx_edges:
                    ok = True
                    break
                h = tree.bags[h].parent
            require("lone_dart_on_ancestor_separator", ok, f"(bag {b.id}, dart {d})")
    # 9 few face-parts per bag
    counts = tree.face_part_counts()
    bound = 3 * math.log2(max(n, 2))
    for bid, cnt in counts.items():
        require("face_parts_per_bag", cnt <= bound, f"(bag {bid}: {cnt} > {bound:.1f})")
    # 10 leaf dual bags are small
    for b in tree.bags:
        if b.is_leaf:
            db = tree.dual_bags[b.id]
            require("leaf_dual_size", len(db.nodes) + len(db.arcs) // 2 <= const * dlog + 3 * tree.leaf_size, f"(bag {b.id})")
    # 11 F_X separates the children in X*
    for b in tree.bags:
        if not b.children:
            continue
        db = tree.dual_bags[b.id]
        fx = set(compute_fx(tree, b.id))
        require("fx_matches", fx == set(db.fx), f"(bag {b.id})")
        require("fx_size", len(fx) <= const * dlog + 2 * len(b.separator.edges) + 2, f"(bag {b.id})")  # type: ignore[union-attr]
        owner: dict[int, int] = {}
        for f in db.nodes:
            if f not in fx:
                (only,) = db.node_children[f]
                owner[f] = only
        crossing = [
            d
            for d in db.arcs
            if fs.dart_face[d ^ 1] in owner
            and fs.dart_face[d] in owner
            and owner[fs.dart_face[d ^ 1]] != owner[fs.dart_face[d]]
        ]
        require("fx_is_node_cut", not crossing, f"(bag {b.id}, darts {crossing[:3]})")
    # 12 reassembly: children duals plus separator arcs, with parts of one face glued, give X*
    for b in tree.bags:
        if not b.children:
            continue
        db = tree.dual_bags[b.id]
        rebuilt_nodes: set[int] = set()
        rebuilt_arcs: list[tuple[int, int, int]] = []
        for c in b.children:
            cdb = tree.dual_bags[c]
            rebuilt_nodes.update(cdb.nodes)
            rebuilt_arcs.extend((fs.dart_face[d ^ 1], fs.dart_face[d], d) for d in cdb.arcs)
        for e in db.sx_edges:
            for d in (2 * e, 2 * e + 1):
                rebuilt_arcs.append((fs.dart_face[d ^ 1], fs.dart_face[d], d))
        expected = sorted((fs.dart_face[d ^ 1], fs.dart_face[d], d) for d in db.arcs)
        require("reassembly", rebuilt_nodes == set(db.nodes) and sorted(rebuilt_arcs) == expected, f"(bag {b.id})")
        reg = tree.registry[b.id]
        for c in b.children:
            creg = tree.registry[c]
            for f, pid in creg.items():
                require("reassembly_ids_nest", pid[: len(reg[f])] == reg[f], f"(bag {c}, face {f})")
    # 13 every dart of a bag knows its face-part id; ids unique per bag
    for b in tree.bags:
        view = dart_view(tree, b.id)
        require("face_knowledge", len(view) == len(b.darts), f"(bag {b.id})")
        ids = list(tree.registry[b.id].values())
        require("face_ids_unique", len(set(ids)) == len(ids), f"(bag {b.id})")
    # 14 every dual edge of a bag knows both endpoint ids
    for b in tree.bags:
        reg = tree.registry[b.id]
        db = tree.dual_bags[b.id]
        require(
            "edge_knowledge",
            all(fs.dart_face[d] in reg and fs.dart_face[d ^ 1] in reg for d in db.arcs),
            f"(bag {b.id})",
        )
    return results


def dump_bdd(tree: BddTree) -> dict[str, Any]:
    """Structured debug view of the decomposition."""
    g = tree.graph
    out = []
    for b in tree.bags:
        db = tree.dual_bags[b.id]
        sep = b.separator
        out.append(
            {
                "id": b.id,
                "level": b.level,
                "parent": b.parent,
                "children": b.children,
                "edges": [g.edge_ids[e] for e in b.edges],
                "separator": None
                if sep is None
                else {
                    "edges": [g.edge_ids[e] for e in sep.edges],
                    "closing": [g.vertex_ids[sep.closing[0]], g.vertex_ids[sep.closing[1]]],
                    "virtual": sep.virtual,
                    "critical_face": sep.critical_face,
                },
                "fx": [list(tree.registry[b.id][f]) for f in db.fx],
                "sx_edges": [g.edge_ids[e] for e in db.sx_edges],
                "face_parts": {str(f): list(pid) for f, pid in sorted(tree.registry[b.id].items())},
            }
        )
    return {"depth": tree.depth, "leaf_size": tree.leaf_size, "bags": out}
