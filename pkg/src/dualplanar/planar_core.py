"""Embedded planar graphs given by rotation systems, their faces and duals.

Vertices and edges carry arbitrary non-negative integer ids in documents.
Internally both are re-indexed densely in increasing id order, so "smallest
id" and "smallest index" tie-breaks coincide.

Darts are integers: edge ``i`` owns dart ``2*i`` (tail to head) and dart
``2*i + 1`` (head to tail).  ``d ^ 1`` is the reversal of ``d``.

Face successor convention: ``succ(d)`` is the dart leaving ``head(d)`` that
immediately precedes ``rev(d)`` in the clockwise rotation at ``head(d)``.
The face containing ``d`` lies to the right of ``d``; the dual edge of ``e``
runs from ``face(rev(d+))`` to ``face(d+)``.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

from .errors import DuplicateId, MalformedDocument, NonPlanarRotation


def rev(dart: int) -> int:
    """Reversal of a dart."""
    return dart ^ 1


def dart_edge(dart: int) -> int:
    """Index of the edge a dart belongs to."""
    return dart >> 1


class EmbeddedPlanarGraph:
    """Immutable graph with a clockwise rotation system.

    Parameters
    ----------
    n:
        Number of vertices; vertex indices are ``0..n-1``.
    tail, head:
        Endpoint indices per edge.
    rotation:
        For each vertex, the clockwise cyclic list of incident edge indices.
        A self-loop appears twice (first slot is its tail slot).
    directed:
        Whether edge orientation is meaningful.
    weight, capacity:
        Integer attributes per edge (default 1).
    vertex_ids, edge_ids:
        External ids (default: the indices).
    allow_multi:
        Accept parallel edges and self-loops.  Input documents never set
        this; it exists for internal constructions such as the
        reversal-augmented graph and the face-disjoint graph.
    validate:
        Run the rotation and Euler checks.
    """

    def __init__(
        self,
        n: int,
        tail: Sequence[int],
        head: Sequence[int],
        rotation: Sequence[Sequence[int]],
        *,
        directed: bool = False,
        weight: Sequence[int] | None = None,
        capacity: Sequence[int] | None = None,
        vertex_ids: Sequence[int] | None = None,
        edge_ids: Sequence[int] | None = None,
        allow_multi: bool = False,
        validate: bool = True,
    ) -> None:
        m = len(tail)
        if len(head) != m:
            raise MalformedDocument("tail and head lists differ in length")
        self.n = int(n)
        self.m = m
        self.directed = bool(directed)
        self.tail = tuple(int(x) for x in tail)
        self.head = tuple(int(x) for x in head)
        self.rotation = tuple(tuple(int(e) for e in rot) for rot in rotation)
        self.weight = tuple(int(w) for w in weight) if weight is not None else (1,) * m
        self.capacity = tuple(int(c) for c in capacity) if capacity is not None else (1,) * m
        self.vertex_ids = tuple(vertex_ids) if vertex_ids is not None else tuple(range(self.n))
        self.edge_ids = tuple(edge_ids) if edge_ids is not None else tuple(range(m))
        self.allow_multi = allow_multi
        if len(self.rotation) != self.n:
            raise MalformedDocument("one rotation per vertex is required")
        if len(self.weight) != m or len(self.capacity) != m:
            raise MalformedDocument("weight/capacity lists must match the edge count")
        self._out_pos = self._slot_table()
        if validate:
            self._validate()

    # ------------------------------------------------------------------
    # dart helpers
    # ------------------------------------------------------------------
    def dart_tail(self, dart: int) -> int:
        i = dart >> 1
        return self.tail[i] if dart & 1 == 0 else self.head[i]

    def dart_head(self, dart: int) -> int:
        i = dart >> 1
        return self.head[i] if dart & 1 == 0 else self.tail[i]

    @property
    def num_darts(self) -> int:
        return 2 * self.m

    def _slot_table(self) -> list[tuple[int, int]]:
        """Map each dart to (vertex, slot) where it leaves its tail."""
        pos: list[tuple[int, int] | None] = [None] * (2 * self.m)
        for v, rot in enumerate(self.rotation):
            for p, e in enumerate(rot):
                if not 0 <= e < self.m:
                    raise MalformedDocument(f"rotation of vertex {self.vertex_ids[v]} names unknown edge")
                t, h = self.tail[e], self.head[e]
                if t == h == v:
                    d = 2 * e if pos[2 * e] is None else 2 * e + 1
                elif t == v:
                    d = 2 * e
                elif h == v:
                    d = 2 * e + 1
                else:
                    raise MalformedDocument(
                        f"rotation of vertex {self.vertex_ids[v]} lists non-incident edge {self.edge_ids[e]}"
                    )
                if pos[d] is not None:
                    raise MalformedDocument(f"edge {self.edge_ids[e]} listed twice at vertex {self.vertex_ids[v]}")
                pos[d] = (v, p)
        for d, entry in enumerate(pos):
            if entry is None:
                raise MalformedDocument(f"edge {self.edge_ids[d >> 1]} missing from a rotation")
        return pos  # type: ignore[return-value]

    def out_dart(self, v: int, slot: int) -> int:
        """The dart leaving ``v`` through rotation slot ``slot``."""
        return self._out_darts[v][slot % len(self.rotation[v])]

    @cached_property
    def _out_darts(self) -> list[list[int]]:
        out: list[list[int]] = [[0] * len(rot) for rot in self.rotation]
        for d, (v, p) in enumerate(self._out_pos):
            out[v][p] = d
        return out

    def darts_out(self, v: int) -> list[int]:
        """Darts leaving ``v`` in clockwise order."""
        return list(self._out_darts[v])

    def slot_of(self, dart: int) -> tuple[int, int]:
        return self._out_pos[dart]

    @cached_property
    def succ(self) -> tuple[int, ...]:
        """Face successor of every dart."""
        out = self._out_darts
        nxt = [0] * (2 * self.m)
        for d in range(2 * self.m):
            v, p = self._out_pos[d ^ 1]
            nxt[d] = out[v][(p - 1) % len(out[v])]
        return tuple(nxt)

    def degree(self, v: int) -> int:
        return len(self.rotation[v])

    def neighbors(self, v: int) -> list[int]:
        return [self.dart_head(d) for d in self._out_darts[v]]

    @cached_property
    def adjacency(self) -> dict[int, list[int]]:
        """Undirected simple adjacency lists (sorted, no self-loops)."""
        adj: dict[int, set[int]] = {v: set() for v in range(self.n)}
        for t, h in zip(self.tail, self.head):
            if t != h:
                adj[t].add(h)
                adj[h].add(t)
        return {v: sorted(s) for v, s in adj.items()}

    def components(self) -> list[list[int]]:
        """Connected components (undirected), each sorted, ordered by min vertex."""
        seen = [False] * self.n
        comps = []
        adj = self.adjacency
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                v = stack.pop()
                comp.append(v)
                for u in adj[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    # ------------------------------------------------------------------
    # validation
    # ------------------------------------------------------------------
    def _validate(self) -> None:
        if len(set(self.vertex_ids)) != self.n:
            raise DuplicateId("duplicate vertex id")
        if len(set(self.edge_ids)) != self.m:
            raise DuplicateId("duplicate edge id")
        for i, (t, h) in enumerate(zip(self.tail, self.head)):
            if not (0 <= t < self.n and 0 <= h < self.n):
                raise MalformedDocument(f"edge {self.edge_ids[i]} has an unknown endpoint")
        if not self.allow_multi:
            seen: set[tuple[int, int]] = set()
            for i, (t, h) in enumerate(zip(self.tail, self.head)):
                if t == h:
                    raise MalformedDocument(f"edge {self.edge_ids[i]} is a self-loop")
                key = (min(t, h), max(t, h))
                if key in seen:
                    raise MalformedDocument(f"edge {self.edge_ids[i]} duplicates an existing vertex pair")
                seen.add(key)
        check_euler(self, trace_faces(self))

    # ------------------------------------------------------------------
    # conversion
    # ------------------------------------------------------------------
    def to_document(self) -> dict[str, Any]:
        return {
            "directed": self.directed,
            "vertices": [
                {"id": self.vertex_ids[v], "rotation": [self.edge_ids[e] for e in self.rotation[v]]}
                for v in range(self.n)
            ],
            "edges": [
                {
                    "id": self.edge_ids[i],
                    "tail": self.vertex_ids[self.tail[i]],
                    "head": self.vertex_ids[self.head[i]],
                    "weight": self.weight[i],
                    "capacity": self.capacity[i],
                }
                for i in range(self.m)
            ],
        }

    def with_attributes(
        self,
        *,
        weight: Sequence[int] | None = None,
        capacity: Sequence[int] | None = None,
        directed: bool | None = None,
    ) -> EmbeddedPlanarGraph:
        """Copy with replaced weights/capacities (structure is shared and trusted)."""
        return EmbeddedPlanarGraph(
            self.n,
            self.tail,
            self.head,
            self.rotation,
            directed=self.directed if directed is None else directed,
            weight=self.weight if weight is None else weight,
            capacity=self.capacity if capacity is None else capacity,
            vertex_ids=self.vertex_ids,
            edge_ids=self.edge_ids,
            allow_multi=self.allow_multi,
            validate=False,
        )

    def vertex_index(self, vid: int) -> int:
        try:
            return self._vindex[vid]
        except KeyError:
            raise MalformedDocument(f"unknown vertex id {vid}") from None

    @cached_property
    def _vindex(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.vertex_ids)}

    def edge_index(self, eid: int) -> int:
        try:
            return self._eindex[eid]
        except KeyError:
            raise MalformedDocument(f"unknown edge id {eid}") from None

    @cached_property
    def _eindex(self) -> dict[int, int]:
        return {e: i for i, e in enumerate(self.edge_ids)}

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"EmbeddedPlanarGraph(n={self.n}, m={self.m}, {kind})"


@dataclass(frozen=True)
class FaceStructure:
    """Faces as clockwise dart cycles plus the dart-to-face map."""

    faces: tuple[tuple[int, ...], ...]
    dart_face: tuple[int, ...]

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def face_vertices(self, g: EmbeddedPlanarGraph, f: int) -> list[int]:
        return [g.dart_tail(d) for d in self.faces[f]]


def trace_faces(g: EmbeddedPlanarGraph) -> FaceStructure:
    """Partition the darts into face orbits of the successor permutation.

    Faces are numbered in order of their smallest dart and each cycle starts
    at that dart, so the output is canonical.
    """
    succ = g.succ
    dart_face = [-1] * g.num_darts
    faces: list[tuple[int, ...]] = []
    for start in range(g.num_darts):
        if dart_face[start] != -1:
            continue
        fid = len(faces)
        cycle = []
        d = start
        while dart_face[d] == -1:
            dart_face[d] = fid
            cycle.append(d)
            d = succ[d]
        if d != start:
            raise NonPlanarRotation("successor map is not a permutation")
        faces.append(tuple(cycle))
    return FaceStructure(tuple(faces), tuple(dart_face))


def check_euler(g: EmbeddedPlanarGraph, fs: FaceStructure) -> None:
    """Raise :class:`NonPlanarRotation` unless every component has genus 0."""
    comp_of = [0] * g.n
    comps = g.components()
    for c, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = c
    edges = [0] * len(comps)
    faces = [0] * len(comps)
    for i in range(g.m):
        edges[comp_of[g.tail[i]]] += 1
    for cyc in fs.faces:
        faces[comp_of[g.dart_tail(cyc[0])]] += 1
    for c, comp in enumerate(comps):
        if edges[c] == 0:
            continue
        if len(comp) - edges[c] + faces[c] != 2:
            raise NonPlanarRotation(
                f"component containing vertex {g.vertex_ids[comp[0]]} has "
                f"V-E+F = {len(comp) - edges[c] + faces[c]}, expected 2"
            )


@dataclass(frozen=True)
class DualEdge:
    """Dual of primal edge ``index``: from the face left of it to the face right of it."""

    index: int
    id: int
    tail: int
    head: int
    weight: int


@dataclass(frozen=True)
class DualGraph:
    nodes: tuple[int, ...]
    edges: tuple[DualEdge, ...]
    self_loops: tuple[int, ...]

    @property
    def is_multigraph(self) -> bool:
        pairs = [(min(e.tail, e.head), max(e.tail, e.head)) for e in self.edges]
        return len(set(pairs)) != len(pairs) or bool(self.self_loops)

    def degree_multiset(self) -> list[int]:
        deg = [0] * len(self.nodes)
        for e in self.edges:
            deg[e.tail] += 1
            deg[e.head] += 1
        return sorted(deg)


def build_dual(g: EmbeddedPlanarGraph, fs: FaceStructure | None = None, *, attr: str = "weight") -> DualGraph:
    """One dual edge per primal edge, oriented from left face to right face."""
    fs = fs or trace_faces(g)
    vals = g.weight if attr == "weight" else g.capacity
    edges = []
    loops = []
    for i in range(g.m):
        t = fs.dart_face[2 * i + 1]
        h = fs.dart_face[2 * i]
        edges.append(DualEdge(i, g.edge_ids[i], t, h, vals[i]))
        if t == h:
            loops.append(i)
    return DualGraph(tuple(range(fs.num_faces)), tuple(edges), tuple(loops))


@dataclass(frozen=True)
class DualArc:
    """Dual arc of a single dart: from ``face(rev(dart))`` to ``face(dart)``."""

    dart: int
    tail: int
    head: int
    weight: int


def dual_arcs(
    fs: FaceStructure, dart_weight: Mapping[int, int] | Sequence[int | None]
) -> list[DualArc]:
    """Arcs of the dart-level dual for the darts that carry a weight.

    ``dart_weight`` maps dart -> weight; darts mapped to ``None`` (or absent)
    have no arc.  A directed graph uses forward darts only, the reversal
    augmentation adds zero-weight reverse darts, and an undirected graph
    weights both darts equally.
    """
    arcs = []
    items = dart_weight.items() if isinstance(dart_weight, Mapping) else enumerate(dart_weight)
    for d, w in sorted(items):
        if w is None:
            continue
        arcs.append(DualArc(d, fs.dart_face[d ^ 1], fs.dart_face[d], int(w)))
    return arcs


def standard_dart_weights(g: EmbeddedPlanarGraph, attr: str = "weight", *, reverse: str = "auto") -> list[int | None]:
    """Per-dart weights for the common cases.

    ``reverse`` is ``"auto"`` (mirror for undirected, absent for directed),
    ``"zero"`` (reversal augmentation) or ``"none"``.
    """
    vals = g.weight if attr == "weight" else g.capacity
    out: list[int | None] = [None] * g.num_darts
    for i, w in enumerate(vals):
        out[2 * i] = w
        if reverse == "zero":
            out[2 * i + 1] = 0
        elif reverse == "auto" and not g.directed:
            out[2 * i + 1] = w
    return out


def build_embedded_graph(document: Mapping[str, Any] | str) -> EmbeddedPlanarGraph:
    """Parse and validate a graph document (mapping or JSON text)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise MalformedDocument("document must be an object")
    try:
        vertices = list(document["vertices"])
        edges = list(document["edges"])
    except (KeyError, TypeError) as exc:
        raise MalformedDocument("document needs 'vertices' and 'edges' lists") from exc
    directed = bool(document.get("directed", False))

    def _int(x: Any, what: str) -> int:
        if isinstance(x, bool) or not isinstance(x, int):
            raise MalformedDocument(f"{what} must be an integer")
        return x

    try:
        vids = [_int(v["id"], "vertex id") for v in vertices]
        eids = [_int(e["id"], "edge id") for e in edges]
    except (KeyError, TypeError) as exc:
        raise MalformedDocument("every vertex and edge needs an 'id'") from exc
    if len(set(vids)) != len(vids):
        raise DuplicateId("duplicate vertex id")
    if len(set(eids)) != len(eids):
        raise DuplicateId("duplicate edge id")
    if any(x < 0 for x in vids + eids):
        raise MalformedDocument("ids must be non-negative")
    vorder = sorted(vids)
    eorder = sorted(eids)
    vidx = {v: i for i, v in enumerate(vorder)}
    eidx = {e: i for i, e in enumerate(eorder)}
    m = len(eorder)
    tail = [0] * m
    head = [0] * m
    weight = [1] * m
    cap = [1] * m
    for e in edges:
        i = eidx[e["id"]]
        try:
            tail[i] = vidx[_int(e["tail"], "tail")]
            head[i] = vidx[_int(e["head"], "head")]
        except KeyError as exc:
            raise MalformedDocument(f"edge {e['id']} references an unknown vertex") from exc
        weight[i] = _int(e.get("weight", 1), "weight")
        cap[i] = _int(e.get("capacity", 1), "capacity")
    rotation: list[list[int]] = [[] for _ in vorder]
    for v in vertices:
        try:
            rot = [eidx[_int(x, "rotation entry")] for x in v.get("rotation", [])]
        except KeyError as exc:
            raise MalformedDocument(f"rotation of vertex {v['id']} references an unknown edge") from exc
        rotation[vidx[v["id"]]] = rot
    return EmbeddedPlanarGraph(
        len(vorder),
        tail,
        head,
        rotation,
        directed=directed,
        weight=weight,
        capacity=cap,
        vertex_ids=vorder,
        edge_ids=eorder,
    )


def augment_with_reversal_darts(g: EmbeddedPlanarGraph) -> tuple[EmbeddedPlanarGraph, list[int]]:
    """Add a zero weight/capacity anti-parallel companion for every edge.

    The companion of edge ``e = (u, v)`` directly follows ``e`` in the
    rotation of the endpoint with the larger id and directly precedes it at
    the other endpoint, so the two copies bound a 2-gon face.

    Returns the augmented graph and, per original edge index, the index of
    its companion.  Original edges keep their indices ``0..m-1``.
    """
    m = g.m
    next_id = (max(g.edge_ids) + 1) if m else 0
    tail = list(g.tail) + list(g.head)
    head = list(g.head) + list(g.tail)
    weight = list(g.weight) + [0] * m
    cap = list(g.capacity) + [0] * m
    eids = list(g.edge_ids) + [next_id + i for i in range(m)]
    rotation = []
    for v in range(g.n):
        rot: list[int] = []
        for e in g.rotation[v]:
            other = g.head[e] if g.tail[e] == v else g.tail[e]
            if v > other:
                rot.extend([e, m + e])
            else:
                rot.extend([m + e, e])
        rotation.append(rot)
    aug = EmbeddedPlanarGraph(
        g.n,
        tail,
        head,
        rotation,
        directed=True,
        weight=weight,
        capacity=cap,
        vertex_ids=g.vertex_ids,
        edge_ids=eids,
        allow_multi=True,
    )
    return aug, [m + i for i in range(m)]


def induced_component(g: EmbeddedPlanarGraph, vertex: int) -> tuple[EmbeddedPlanarGraph, list[int], list[int]]:
    """The connected component of ``vertex`` as its own embedded graph.

    Returns ``(sub, vertex_map, edge_map)`` where the maps send sub indices
    to indices of ``g``.
    """
    comp = next(c for c in g.components() if vertex in c)
    vmap = comp
    vnew = {v: i for i, v in enumerate(vmap)}
    emap = [i for i in range(g.m) if g.tail[i] in vnew]
    enew = {e: i for i, e in enumerate(emap)}
    sub = EmbeddedPlanarGraph(
        len(vmap),
        [vnew[g.tail[e]] for e in emap],
        [vnew[g.head[e]] for e in emap],
        [[enew[e] for e in g.rotation[v]] for v in vmap],
        directed=g.directed,
        weight=[g.weight[e] for e in emap],
        capacity=[g.capacity[e] for e in emap],
        vertex_ids=[g.vertex_ids[v] for v in vmap],
        edge_ids=[g.edge_ids[e] for e in emap],
        allow_multi=g.allow_multi,
        validate=False,
    )
    return sub, vmap, emap
