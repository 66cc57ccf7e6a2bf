"""Computing on the dual graph through the face-disjoint communication graph.

The face-disjoint graph expands every primal vertex ``v`` into a star: a
center plus one *region copy* per corner of ``v`` (the angle between two
consecutive rotation edges).  Copies of neighbouring corners that lie in
the same face are joined (region edges), so every face of the primal graph
becomes its own vertex-disjoint cycle; one extra *crossing edge* per primal
edge joins the two faces on its sides.  Any algorithm on this graph can be
run on the primal network with a factor-two slowdown.

On top of it this module provides

* face identification (component labels of the region-edge cycles),
* part-wise aggregation over connected sets of faces,
* minor-aggregation rounds on the dual, simulated with deterministic
  joiner/receiver star merges, together with a reference interpreter that
  runs the same round descriptors on the explicit dual,
* virtual nodes, orientation with parallel-edge deactivation, tree
  primitives, and cut-edge marking.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from .congest_sim import RoundLedger, log2_ceil, message_bits
from .errors import (
    CutNotRespecting,
    InvalidDualPartition,
    NotATree,
    OversizedValue,
    TooManyVirtualNodes,
)
from .planar_core import EmbeddedPlanarGraph, FaceStructure, trace_faces
from .shortcuts import (
    MAX,
    MIN,
    SUM,
    AggregationOperator,
    Partition,
    RootedTree,
    custom_operator,
    global_bfs_tree,
    part_wise_aggregate,
)

ARBORICITY = 3

# ----------------------------------------------------------------------
# face-disjoint graph
# ----------------------------------------------------------------------
STAR, REGION, CROSSING = "S", "R", "C"


@dataclass
class FaceDisjointGraph:
    """Expanded communication graph in which faces are disjoint cycles.

    Attributes
    ----------
    primal:
        The primal graph.
    faces:
        Face structure of the primal graph.
    graph:
        The expanded graph as an embedded (multi)graph.  Vertex ``v < n`` is
        the star center of primal vertex ``v``; copy ``k`` of ``v`` (the
        corner between rotation edges ``k-1`` and ``k``) has id
        ``n + offset[v] + k``.
    edge_kind, edge_primal:
        Class (``"S"``, ``"R"``, ``"C"``) and primal edge index of every
        expanded edge.
    crossing_edge:
        Primal edge index -> expanded edge index of its crossing edge.
    copy_of_dart:
        Dart -> a region copy lying in ``face(dart)`` at the endpoint that
        hosts the edge's crossing edge.
    """

    primal: EmbeddedPlanarGraph
    faces: FaceStructure
    graph: EmbeddedPlanarGraph
    offset: list[int]
    edge_kind: list[str]
    edge_primal: list[int]
    crossing_edge: list[int]
    copy_of_dart: list[int]
    owner: list[int]
    ledger: RoundLedger = field(default_factory=RoundLedger)
    bandwidth_const: int = 8
    _face_ids: list[int] | None = None

    @property
    def n_primal(self) -> int:
        return self.primal.n

    def copy_id(self, v: int, k: int) -> int:
        return self.primal.n + self.offset[v] + k % self.primal.degree(v)

    def copies(self, v: int) -> list[int]:
        return [self.copy_id(v, k) for k in range(self.primal.degree(v))]

    @cached_property
    def copy_face(self) -> dict[int, int]:
        """Region copy -> face index (by construction)."""
        out = {}
        g = self.primal
        for v in range(g.n):
            darts = g.darts_out(v)
            for k in range(g.degree(v)):
                out[self.copy_id(v, k)] = self.faces.dart_face[darts[k - 1]]
        return out

    @cached_property
    def face_copies(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.faces.num_faces)]
        for c, f in sorted(self.copy_face.items()):
            out[f].append(c)
        return out

    @cached_property
    def host_tree(self) -> RootedTree:
        return global_bfs_tree(self.graph.adjacency)

    @property
    def face_ids(self) -> list[int]:
        """Face index -> face id (smallest copy id on the face's cycle)."""
        if self._face_ids is None:
            self._face_ids = [min(cs) for cs in self.face_copies]
        return self._face_ids

    def counts(self) -> dict[str, int]:
        out = {STAR: 0, REGION: 0, CROSSING: 0}
        for k in self.edge_kind:
            out[k] += 1
        return out


def crossing_endpoint(g: EmbeddedPlanarGraph, e: int) -> int:
    """Primal endpoint hosting the crossing edge of ``e``.

    The endpoint with the larger id, unless that endpoint has degree one and
    the other does not; then the other endpoint, which keeps the crossing
    edge from being a loop whenever possible.
    """
    a, b = g.tail[e], g.head[e]
    hi, lo = (a, b) if a > b else (b, a)
    if g.degree(hi) == 1 and g.degree(lo) > 1:
        return lo
    return hi


def build_face_disjoint(
    g: EmbeddedPlanarGraph, *, ledger: RoundLedger | None = None, bandwidth_const: int = 8
) -> FaceDisjointGraph:
    """Construct the face-disjoint graph and validate its embedding."""
    fs = trace_faces(g)
    n = g.n
    offset = [0] * n
    acc = 0
    for v in range(n):
        offset[v] = acc
        acc += g.degree(v)
    total = n + acc

    def cid(v: int, k: int) -> int:
        return n + offset[v] + k % g.degree(v)

    tails: list[int] = []
    heads: list[int] = []
    kind: list[str] = []
    prim: list[int] = []

    def add(a: int, b: int, k: str, e: int) -> int:
        tails.append(a)
        heads.append(b)
        kind.append(k)
        prim.append(e)
        return len(tails) - 1

    star_edge = [[0] * g.degree(v) for v in range(n)]
    for v in range(n):
        for k in range(g.degree(v)):
            star_edge[v][k] = add(v, cid(v, k), STAR, -1)

    # position of every dart's edge in the rotation of its tail
    pos = [g.slot_of(d)[1] for d in range(g.num_darts)]
    region_plus: dict[int, int] = {}  # dart -> region edge at copy (tail, pos+1)
    region_minus: dict[int, int] = {}  # dart -> region edge at copy (tail, pos)
    for e in range(g.m):
        d = 2 * e
        v, x = g.tail[e], g.head[e]
        j, l = pos[d], pos[d ^ 1]
        r1 = add(cid(v, j + 1), cid(x, l), REGION, e)
        r2 = add(cid(v, j), cid(x, l + 1), REGION, e)
        region_plus[d], region_minus[d ^ 1] = r1, r1
        region_minus[d], region_plus[d ^ 1] = r2, r2

    crossing = [0] * g.m
    crossing_at: dict[int, int] = {}  # dart leaving the hosting endpoint -> crossing edge
    copy_of_dart = [0] * g.num_darts
    for e in range(g.m):
        v = crossing_endpoint(g, e)
        d = 2 * e if g.tail[e] == v else 2 * e + 1
        j = pos[d]
        crossing[e] = add(cid(v, j), cid(v, j + 1), CROSSING, e)
        crossing_at[d] = crossing[e]
        copy_of_dart[d] = cid(v, j + 1)
        copy_of_dart[d ^ 1] = cid(v, j)

    rotation: list[list[int]] = [[] for _ in range(total)]
    for v in range(n):
        rotation[v] = list(star_edge[v])
        darts = g.darts_out(v)
        deg = len(darts)
        for k in range(deg):
            prev_d, cur_d = darts[k - 1], darts[k]
            rot = [region_plus[prev_d], region_minus[cur_d]]
            if cur_d in crossing_at:
                rot.append(crossing_at[cur_d])
            rot.append(star_edge[v][k])
            if prev_d in crossing_at:
                rot.append(crossing_at[prev_d])
            rotation[cid(v, k)] = rot

    owner = list(range(n)) + [v for v in range(n) for _ in range(g.degree(v))]
    hat = EmbeddedPlanarGraph(total, tails, heads, rotation, allow_multi=True)
    fdg = FaceDisjointGraph(
        g, fs, hat, offset, kind, prim, crossing, copy_of_dart, owner,
        ledger=ledger if ledger is not None else RoundLedger(), bandwidth_const=bandwidth_const,
    )
    fdg.ledger.charge("face_disjoint_build", 2)
    return fdg


def region_components(fdg: FaceDisjointGraph) -> dict[int, int]:
    """Centralized labels of the region-edge components (min member id)."""
    adj: dict[int, list[int]] = {c: [] for c in range(fdg.n_primal, fdg.graph.n)}
    for i, k in enumerate(fdg.edge_kind):
        if k == REGION:
            a, b = fdg.graph.tail[i], fdg.graph.head[i]
            adj[a].append(b)
            adj[b].append(a)
    label: dict[int, int] = {}
    for s in sorted(adj):
        if s in label:
            continue
        comp = [s]
        label[s] = s
        stack = [s]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in label:
                    label[u] = s
                    comp.append(u)
                    stack.append(u)
    return label


@dataclass(frozen=True)
class FaceIdentification:
    """What every primal vertex knows after face identification."""

    copy_face_id: dict[int, int]
    faces_at_vertex: dict[int, list[int]]
    edge_faces: dict[int, tuple[int, int]]
    rounds: int


def identify_faces(fdg: FaceDisjointGraph) -> FaceIdentification:
    """Label each region-edge cycle by its smallest copy id via part-wise MIN.

    Returns per copy the face id, per primal vertex the sorted ids of the
    faces around it, and per primal edge the ids of the faces on the left
    and the right of its forward dart.
    """
    comps = region_components(fdg)
    groups: dict[int, set[int]] = {}
    for c, lab in comps.items():
        groups.setdefault(lab, set()).add(c)
    partition = Partition.from_labels(comps)
    res = part_wise_aggregate(
        fdg.graph.adjacency, partition, {c: c for c in comps}, MIN,
        tree=fdg.host_tree, ledger=fdg.ledger, bandwidth_const=fdg.bandwidth_const,
        host_factor=2, phase="identify_faces", validate=False,
    )
    copy_face_id = dict(res.by_vertex)
    g = fdg.primal
    at_vertex = {v: sorted({copy_face_id[c] for c in fdg.copies(v)}) for v in range(g.n)}
    edge_faces = {}
    for e in range(g.m):
        edge_faces[e] = (copy_face_id[fdg.copy_of_dart[2 * e + 1]], copy_face_id[fdg.copy_of_dart[2 * e]])
    return FaceIdentification(copy_face_id, at_vertex, edge_faces, res.rounds)


# ----------------------------------------------------------------------
# part-wise aggregation on the dual
# ----------------------------------------------------------------------
NODES, INSIDE, OUTGOING = "nodes", "inside-edges", "outgoing-edges"


def dual_edge_endpoints(fdg: FaceDisjointGraph, e: int) -> tuple[int, int]:
    """(tail face, head face) of the dual of primal edge ``e``."""
    return fdg.faces.dart_face[2 * e + 1], fdg.faces.dart_face[2 * e]


def _check_dual_partition(fdg: FaceDisjointGraph, partition: Partition) -> None:
    nf = fdg.faces.num_faces
    adj: list[set[int]] = [set() for _ in range(nf)]
    for e in range(fdg.primal.m):
        a, b = dual_edge_endpoints(fdg, e)
        adj[a].add(b)
        adj[b].add(a)
    seen: set[int] = set()
    for pid, part in zip(partition.ids, partition.parts):
        if not part or not part <= set(range(nf)) or part & seen:
            raise InvalidDualPartition(f"dual part {pid} is empty, overlapping or names unknown faces")
        seen |= part
        start = min(part)
        reached = {start}
        stack = [start]
        while stack:
            f = stack.pop()
            for h in adj[f]:
                if h in part and h not in reached:
                    reached.add(h)
                    stack.append(h)
        if reached != part:
            raise InvalidDualPartition(f"dual part {pid} is not connected in the dual")


def pa_on_dual(
    fdg: FaceDisjointGraph,
    partition: Partition,
    op: AggregationOperator,
    *,
    node_inputs: Mapping[int, Any] | None = None,
    edge_inputs: Mapping[int, Any] | Mapping[int, tuple[Any, Any]] | None = None,
    scope: str = NODES,
    validate: bool = True,
    phase: str = "pa_dual",
) -> dict[int, Any]:
    """Aggregate over connected sets of faces; returns part id -> value.

    ``partition`` groups face indices.  Node inputs are placed at each
    face's leader copy.  Edge inputs (keyed by primal edge index) are placed
    at the crossing-edge copies: for ``inside-edges`` once per edge whose
    both faces are in the part, for ``outgoing-edges`` once per side that
    lies in the part.  For outgoing edges the input may be a pair
    ``(value for the tail-face side, value for the head-face side)``.

    Star centers are relays only.  Every copy of every face in a part
    learns the result; the rounds are charged to ``fdg.ledger``.
    """
    if validate:
        _check_dual_partition(fdg, partition)
    part_of_face = partition.part_of
    ghat_parts = [set() for _ in partition.parts]
    for f, copies in enumerate(fdg.face_copies):
        i = part_of_face.get(f)
        if i is not None:
            ghat_parts[i].update(copies)
    inputs: dict[int, Any] = {}

    def put(c: int, val: Any) -> None:
        if val is None:
            return
        cur = inputs.get(c)
        inputs[c] = val if cur is None else op.combine(cur, val)

    if scope == NODES:
        for f, val in (node_inputs or {}).items():
            if f in part_of_face:
                put(fdg.face_ids[f], val)
    elif scope in (INSIDE, OUTGOING):
        for e, val in (edge_inputs or {}).items():
            a, b = dual_edge_endpoints(fdg, e)
            pa, pb = part_of_face.get(a), part_of_face.get(b)
            if scope == INSIDE:
                if pa is not None and pa == pb:
                    put(fdg.copy_of_dart[2 * e + 1], val)
            else:
                va, vb = val if isinstance(val, tuple) and len(val) == 2 and scope == OUTGOING else (val, val)
                if pa is not None and pa != pb:
                    put(fdg.copy_of_dart[2 * e + 1], va)
                if pb is not None and pa != pb:
                    put(fdg.copy_of_dart[2 * e], vb)
    else:
        raise ValueError(f"unknown scope {scope!r}")
    hat_partition = Partition(tuple(frozenset(p) for p in ghat_parts), partition.ids)
    res = part_wise_aggregate(
        fdg.graph.adjacency, hat_partition, inputs, op,
        tree=fdg.host_tree, ledger=fdg.ledger, bandwidth_const=fdg.bandwidth_const,
        host_factor=2, phase=phase, validate=False,
    )
    return res.by_part


# ----------------------------------------------------------------------
# minor aggregation
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class DualNetwork:
    """Explicit dual multigraph: nodes are face indices, edges primal edge indices."""

    node_ids: tuple[int, ...]
    tail: tuple[int, ...]
    head: tuple[int, ...]
    edge_ids: tuple[int, ...]

    @property
    def num_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def num_edges(self) -> int:
        return len(self.tail)

    @classmethod
    def from_face_disjoint(cls, fdg: FaceDisjointGraph) -> DualNetwork:
        g = fdg.primal
        ends = [dual_edge_endpoints(fdg, e) for e in range(g.m)]
        return cls(tuple(fdg.face_ids), tuple(a for a, _ in ends), tuple(b for _, b in ends), tuple(g.edge_ids))


@dataclass
class RoundSpec:
    """One minor-aggregation round as pure per-node / per-edge functions.

    Attributes
    ----------
    contract:
        ``history -> iterable of edge indices`` choosing 1.
    consensus:
        ``history -> {node: value}``; missing nodes contribute nothing.
    consensus_op:
        Operator folding a super-node's inputs.
    edge_values:
        ``(edge, y_tail, y_head, history) -> (z for tail side, z for head side)``
        evaluated on every edge between different super-nodes.
    aggregation_op:
        Operator folding a super-node's incident edge values.
    """

    contract: Callable[[list[RoundOutput]], Iterable[int]]
    consensus: Callable[[list[RoundOutput]], Mapping[int, Any]]
    consensus_op: AggregationOperator
    edge_values: Callable[[int, Any, Any, list[RoundOutput]], tuple[Any, Any]] | None = None
    aggregation_op: AggregationOperator | None = None


@dataclass(frozen=True)
class RoundOutput:
    """Per-node outputs of one round: super-node leader id, consensus, aggregate."""

    leader: tuple[int, ...]
    consensus: tuple[Any, ...]
    aggregate: tuple[Any, ...]


@dataclass
class VirtualNode:
    id: int
    edges: list[tuple[int, int, int]] = field(default_factory=list)  # (real node, weight, edge id)


@dataclass
class MinorState:
    """Super-node partition plus edge activity and virtual-node registry."""

    network: DualNetwork
    leader: list[int]
    active: list[bool]
    virtual: list[VirtualNode] = field(default_factory=list)
    virtual_edges: list[tuple[int, int, int]] = field(default_factory=list)
    replaced: dict[int, list[int]] = field(default_factory=dict)
    known_virtual: dict[int, list[int]] = field(default_factory=dict)
    virtual_bound: int = 8

    @classmethod
    def initial(cls, network: DualNetwork, *, virtual_bound: int = 8) -> MinorState:
        active = [network.tail[e] != network.head[e] for e in range(network.num_edges)]
        return cls(network, list(network.node_ids), active, virtual_bound=virtual_bound)


WORD_BITS = 64


def _check_word(val: Any) -> None:
    if val is not None and message_bits(val) > 2 * WORD_BITS:
        raise OversizedValue(f"value {val!r} exceeds {2 * WORD_BITS} bits")


class ReferenceInterpreter:
    """Runs round descriptors directly on the explicit dual (union-find)."""

    def __init__(self, network: DualNetwork) -> None:
        self.network = network

    def run_round(self, spec: RoundSpec, history: list[RoundOutput], active: Sequence[bool] | None = None) -> RoundOutput:
        net = self.network
        nn = net.num_nodes
        parent = list(range(nn))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in spec.contract(history):
            if active is not None and not active[e]:
                continue
            a, b = find(net.tail[e]), find(net.head[e])
            if a != b:
                parent[a] = b
        groups: dict[int, list[int]] = {}
        for v in range(nn):
            groups.setdefault(find(v), []).append(v)
        leader = [0] * nn
        for members in groups.values():
            lid = min(net.node_ids[v] for v in members)
            for v in members:
                leader[v] = lid
        x = spec.consensus(history)
        for val in x.values():
            _check_word(val)
        y_by_root = {r: spec.consensus_op.fold(x.get(v) for v in members) for r, members in groups.items()}
        y = [y_by_root[find(v)] for v in range(nn)]
        z_by_root: dict[int, Any] = {}
        if spec.edge_values is not None and spec.aggregation_op is not None:
            op = spec.aggregation_op
            for e in range(net.num_edges):
                if active is not None and not active[e]:
                    continue
                a, b = net.tail[e], net.head[e]
                ra, rb = find(a), find(b)
                if ra == rb:
                    continue
                za, zb = spec.edge_values(e, y[a], y[b], history)
                _check_word(za)
                _check_word(zb)
                for r, z in ((ra, za), (rb, zb)):
                    if z is None:
                        continue
                    cur = z_by_root.get(r)
                    z_by_root[r] = z if cur is None else op.combine(cur, z)
        z = [z_by_root.get(find(v)) for v in range(nn)]
        return RoundOutput(tuple(leader), tuple(y), tuple(z))

    def run_program(self, program: Sequence[RoundSpec], active: Sequence[bool] | None = None) -> list[RoundOutput]:
        history: list[RoundOutput] = []
        for spec in program:
            history.append(self.run_round(spec, history, active))
        return history


def _pair_op(first: AggregationOperator, second: AggregationOperator) -> AggregationOperator:
    def comb(a: tuple, b: tuple) -> tuple:
        return (first.fold([a[0], b[0]]), second.fold([a[1], b[1]]))

    return custom_operator(f"({first.name},{second.name})", comb)


_MERGE_OP = _pair_op(MAX, MIN)


class DualSimulator:
    """Runs round descriptors on the face-disjoint graph.

    Contraction is realised by repeated star merges.  In merge phase ``p``
    a super-node is a *joiner* iff bit ``p mod L`` of its leader id is one
    (``L`` = bit length of the largest node id); joiners with a neighbouring
    receiver along a chosen edge join the smallest such receiver, and the
    merged super-node elects its smallest member id by part-wise MIN.  The
    loop stops when no super-node has an outgoing chosen edge.
    """

    def __init__(self, fdg: FaceDisjointGraph, network: DualNetwork | None = None) -> None:
        self.fdg = fdg
        self.network = network or DualNetwork.from_face_disjoint(fdg)
        self.merge_phases: list[int] = []
        self._primal_depth = global_bfs_tree(fdg.primal.adjacency).height if fdg.primal.n > 1 else 0

    def _exchange(self, phase: str) -> None:
        # one round across every crossing edge, emulated by two host rounds
        self.fdg.ledger.charge(phase, 2)

    def _termination_check(self) -> None:
        # global OR over a BFS tree of the primal graph: up and down
        self.fdg.ledger.charge("ma_termination", 2 * self._primal_depth + 2)

    def _contract(self, chosen: set[int]) -> list[int]:
        net = self.network
        nn = net.num_nodes
        leader = list(net.node_ids)
        bits = max(1, max(net.node_ids).bit_length())
        phase = 0
        while True:
            self._exchange("ma_round")
            receivers_needed = [(e, net.tail[e], net.head[e]) for e in chosen if leader[net.tail[e]] != leader[net.head[e]]]
            # each super-node learns whether it still has an outgoing chosen
            # edge and the smallest receiver leader across one
            bit = phase % bits

            def is_joiner(lid: int) -> bool:
                return (lid >> bit) & 1 == 1

            edge_inputs: dict[int, tuple[Any, Any]] = {}
            for e, a, b in receivers_needed:
                la, lb = leader[a], leader[b]
                va = (1, lb if is_joiner(la) and not is_joiner(lb) else None)
                vb = (1, la if is_joiner(lb) and not is_joiner(la) else None)
                edge_inputs[e] = (va, vb)
            partition = Partition.from_labels({v: leader[v] for v in range(nn)})
            by_part = pa_on_dual(
                self.fdg, partition, _MERGE_OP, edge_inputs=edge_inputs, scope=OUTGOING,
                validate=False, phase="ma_round",
            )
            self._termination_check()
            if not any(val is not None and val[0] for val in by_part.values()):
                break
            target = {lid: val[1] for lid, val in by_part.items() if val is not None and val[1] is not None}
            merged = {v: target.get(leader[v], leader[v]) for v in range(nn)}
            partition = Partition.from_labels(merged)
            new_leader = pa_on_dual(
                self.fdg, partition, MIN, node_inputs={v: net.node_ids[v] for v in range(nn)},
                validate=False, phase="ma_round",
            )
            leader = [new_leader[merged[v]] for v in range(nn)]
            phase += 1
        self.merge_phases.append(phase)
        return leader

    def run_round(self, spec: RoundSpec, history: list[RoundOutput], active: Sequence[bool] | None = None) -> RoundOutput:
        net = self.network
        nn = net.num_nodes
        chosen = {e for e in spec.contract(history) if active is None or active[e]}
        chosen = {e for e in chosen if net.tail[e] != net.head[e]}
        leader = self._contract(chosen)
        partition = Partition.from_labels({v: leader[v] for v in range(nn)})
        x = spec.consensus(history)
        for val in x.values():
            _check_word(val)
        y_part = pa_on_dual(
            self.fdg, partition, spec.consensus_op, node_inputs=x, validate=False, phase="ma_round"
        )
        y = [y_part[leader[v]] for v in range(nn)]
        z = [None] * nn
        if spec.edge_values is not None and spec.aggregation_op is not None:
            self._exchange("ma_round")
            edge_inputs: dict[int, tuple[Any, Any]] = {}
            for e in range(net.num_edges):
                if active is not None and not active[e]:
                    continue
                a, b = net.tail[e], net.head[e]
                if leader[a] == leader[b]:
                    continue
                za, zb = spec.edge_values(e, y[a], y[b], history)
                _check_word(za)
                _check_word(zb)
                edge_inputs[e] = (za, zb)
            z_part = pa_on_dual(
                self.fdg, partition, spec.aggregation_op, edge_inputs=edge_inputs, scope=OUTGOING,
                validate=False, phase="ma_round",
            )
            z = [z_part[leader[v]] for v in range(nn)]
        return RoundOutput(tuple(leader), tuple(y), tuple(z))

    def run_program(self, program: Sequence[RoundSpec], active: Sequence[bool] | None = None) -> list[RoundOutput]:
        history: list[RoundOutput] = []
        for spec in program:
            history.append(self.run_round(spec, history, active))
        return history


def minor_agg_round(
    state: MinorState,
    backend: ReferenceInterpreter | DualSimulator,
    spec: RoundSpec,
    history: list[RoundOutput] | None = None,
) -> tuple[MinorState, RoundOutput]:
    """Execute one round on ``backend`` and record the new super-node leaders."""
    out = backend.run_round(spec, history or [], state.active)
    state.leader = list(out.leader)
    return state, out


# ----------------------------------------------------------------------
# virtual nodes
# ----------------------------------------------------------------------
def store_virtual_graph(
    state: MinorState,
    additions: Sequence[VirtualNode],
    *,
    virtual_edges: Sequence[tuple[int, int, int]] = (),
    replacements: Mapping[int, Sequence[int]] | None = None,
    merge: AggregationOperator = MIN,
    ledger: RoundLedger | None = None,
    broadcast_depth: int = 0,
) -> MinorState:
    """Register virtual nodes and make them known to every real node.

    ``additions`` carry real-to-virtual edges as ``(real node, weight, edge
    id)``; parallel edges between the same real node and virtual node are
    merged with ``merge``.  ``virtual_edges`` are ``(virtual id, virtual id,
    weight)`` triples.  ``replacements`` maps a real node to the virtual
    nodes that take over its role; replaced nodes become inactive.
    """
    if len(state.virtual) + len(additions) > state.virtual_bound:
        raise TooManyVirtualNodes(
            f"{len(state.virtual) + len(additions)} virtual nodes exceed the bound {state.virtual_bound}"
        )
    for node in additions:
        merged: dict[int, tuple[int, int]] = {}
        for real, w, eid in node.edges:
            if real in merged:
                w0, e0 = merged[real]
                merged[real] = (merge.combine(w0, w), min(e0, eid))
            else:
                merged[real] = (w, eid)
        state.virtual.append(VirtualNode(node.id, [(r, w, e) for r, (w, e) in sorted(merged.items())]))
    state.virtual_edges.extend(virtual_edges)
    for real, vids in (replacements or {}).items():
        state.replaced[real] = list(vids)
        for e in range(state.network.num_edges):
            if real in (state.network.tail[e], state.network.head[e]):
                state.active[e] = False
    ids = [v.id for v in state.virtual]
    state.known_virtual = {v: list(ids) for v in range(state.network.num_nodes)}
    if ledger is not None:
        items = len(additions) + len(virtual_edges)
        ledger.charge("ma_virtual", 2 * broadcast_depth + items + 2)
    return state


def virtual_adjacency(state: MinorState) -> dict[int, list[tuple[int, int]]]:
    """Real node -> list of (virtual id, weight) it records."""
    out: dict[int, list[tuple[int, int]]] = {v: [] for v in range(state.network.num_nodes)}
    for node in state.virtual:
        for real, w, _ in node.edges:
            out[real].append((node.id, w))
    return out


# ----------------------------------------------------------------------
# orientation and parallel-edge deactivation
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Orientation:
    """Low out-degree orientation of the simple dual plus active edges.

    Attributes
    ----------
    layer:
        Peeling layer of every node (1-based).
    out_neighbors:
        Node -> sorted simple out-neighbours.
    active_edge:
        Unordered node pair -> the representative (smallest id) edge.
    merged_weight:
        Unordered node pair -> combined weight of all parallel edges.
    active:
        Per edge, whether it is the active representative.
    """

    layer: tuple[int, ...]
    out_neighbors: dict[int, list[int]]
    active_edge: dict[tuple[int, int], int]
    merged_weight: dict[tuple[int, int], int]
    active: tuple[bool, ...]


def _capped_union(cap: int) -> AggregationOperator:
    def comb(a: frozenset, b: frozenset) -> frozenset:
        u = a | b
        if len(u) > cap:
            u = frozenset(sorted(u)[:cap])
        return u

    return custom_operator(f"UNION<={cap}", comb)


def orient_and_deactivate(
    fdg: FaceDisjointGraph,
    weights: Sequence[int],
    op: AggregationOperator = MIN,
    *,
    network: DualNetwork | None = None,
) -> Orientation:
    """Orient the simple dual with out-degree at most ``3 * ARBORICITY``.

    Nodes are peeled in layers: in each layer every remaining node with at
    most ``3 * ARBORICITY`` remaining distinct neighbours is removed.  Edges
    point from the lower layer to the higher one, and toward the larger id
    inside a layer.  Every parallel class keeps its smallest-id edge active,
    carrying ``op`` over the class' weights; self-loops are inactive.

    The distinct-neighbour counts are gathered per face with a capped set
    union, pipelined one id per message.
    """
    net = network or DualNetwork.from_face_disjoint(fdg)
    nn = net.num_nodes
    cap = 3 * ARBORICITY
    nbrs: list[set[int]] = [set() for _ in range(nn)]
    classes: dict[tuple[int, int], list[int]] = {}
    for e in range(net.num_edges):
        a, b = net.tail[e], net.head[e]
        if a == b:
            continue
        nbrs[a].add(b)
        nbrs[b].add(a)
        classes.setdefault((min(a, b), max(a, b)), []).append(e)
    layers_allowed = 2 * log2_ceil(nn)
    layer = [0] * nn
    remaining = set(range(nn))
    current = 0
    singleton = Partition.from_sets([[f] for f in range(nn)])
    while remaining:
        current += 1
        # every face gathers up to cap+1 distinct remaining neighbour ids
        edge_inputs = {}
        for e in range(net.num_edges):
            a, b = net.tail[e], net.head[e]
            if a == b or a not in remaining or b not in remaining:
                continue
            edge_inputs[e] = (frozenset([net.node_ids[b]]), frozenset([net.node_ids[a]]))
        # a set of up to cap+1 ids travels as cap+1 pipelined one-id messages:
        # simulate with a widened word, then charge every round cap+1 times
        scratch = RoundLedger()
        saved, saved_bw = fdg.ledger, fdg.bandwidth_const
        fdg.ledger = scratch
        fdg.bandwidth_const = saved_bw * (cap + 1)
        try:
            pa_on_dual(
                fdg, singleton, _capped_union(cap + 1), edge_inputs=edge_inputs, scope=OUTGOING,
                validate=False, phase="orient_layer",
            )
        finally:
            fdg.ledger, fdg.bandwidth_const = saved, saved_bw
        fdg.ledger.charge("orient_layer", scratch.rounds * (cap + 1))
        peel = [v for v in sorted(remaining) if len(nbrs[v] & remaining) <= cap]
        if not peel:
            raise AssertionError("peeling stalled; the dual is not planar")
        for v in peel:
            layer[v] = current
        remaining.difference_update(peel)
    if current > layers_allowed:
        raise AssertionError(f"peeling used {current} layers, more than {layers_allowed}")
    out: dict[int, list[int]] = {v: [] for v in range(nn)}
    for a, b in classes:
        ka = (layer[a], net.node_ids[a])
        kb = (layer[b], net.node_ids[b])
        if ka < kb:
            out[a].append(b)
        else:
            out[b].append(a)
    active = [False] * net.num_edges
    active_edge: dict[tuple[int, int], int] = {}
    merged: dict[tuple[int, int], int] = {}
    for pair, es in classes.items():
        rep = min(es, key=lambda e: net.edge_ids[e])
        active[rep] = True
        active_edge[pair] = rep
        merged[pair] = op.fold(weights[e] for e in es)
    fdg.ledger.charge("deactivate", 2)
    return Orientation(tuple(layer), {v: sorted(o) for v, o in out.items()}, active_edge, merged, tuple(active))


# ----------------------------------------------------------------------
# tree primitives
# ----------------------------------------------------------------------
def _tree_adjacency(net: DualNetwork, tree: Iterable[int]) -> dict[int, list[tuple[int, int]]]:
    tree = sorted(set(tree))
    nn = net.num_nodes
    if len(tree) != nn - 1:
        raise NotATree(f"{len(tree)} edges cannot span {nn} nodes")
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(nn)}
    for e in tree:
        a, b = net.tail[e], net.head[e]
        if a == b:
            raise NotATree(f"edge {net.edge_ids[e]} is a self-loop")
        adj[a].append((b, e))
        adj[b].append((a, e))
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u, _ in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    if len(seen) != nn:
        raise NotATree("edge set is not connected")
    return adj


def _charge_tree_primitive(ledger: RoundLedger | None, nn: int, per_round: int) -> None:
    if ledger is not None:
        ledger.charge("ma_tree_primitive", log2_ceil(nn) * per_round)


def root_tree(
    net: DualNetwork, tree: Iterable[int], root: int, *, ledger: RoundLedger | None = None, per_round: int = 1
) -> dict[int, tuple[int, int] | None]:
    """Parent pointers ``node -> (parent, edge)`` of ``tree`` rooted at ``root``."""
    adj = _tree_adjacency(net, tree)
    parent: dict[int, tuple[int, int] | None] = {root: None}
    order = deque([root])
    while order:
        v = order.popleft()
        for u, e in sorted(adj[v]):
            if u not in parent:
                parent[u] = (v, e)
                order.append(u)
    _charge_tree_primitive(ledger, net.num_nodes, per_round)
    return parent


def subtree_sum(
    net: DualNetwork,
    tree: Iterable[int],
    root: int,
    node_inputs: Mapping[int, int],
    *,
    ledger: RoundLedger | None = None,
    per_round: int = 1,
) -> dict[int, int]:
    """Sum of inputs in every node's subtree of ``tree`` rooted at ``root``."""
    parent = root_tree(net, tree, root, ledger=ledger, per_round=per_round)
    order = sorted(parent, key=lambda v: _depth(parent, v), reverse=True)
    sums = {v: node_inputs.get(v, 0) for v in parent}
    for v in order:
        p = parent[v]
        if p is not None:
            sums[p[0]] += sums[v]
    return sums


def _depth(parent: Mapping[int, tuple[int, int] | None], v: int) -> int:
    d = 0
    while parent[v] is not None:
        v = parent[v][0]  # type: ignore[index]
        d += 1
    return d


# ----------------------------------------------------------------------
# cut marking
# ----------------------------------------------------------------------
def mark_cut_program(net: DualNetwork, tree: Sequence[int], e1: int, e2: int) -> list[RoundSpec]:
    """The two-round program that marks the cut a tree edge pair defines.

    Round one contracts the tree without ``e1`` and ``e2``; every component
    learns its smallest node id and how many of ``e1``, ``e2`` touch it
    (its cost).  Round two contracts everything and takes the maximum of
    ``(cost, component id)``, so all nodes agree on one side of the cut.
    """
    cut = {e1, e2}
    rest = [e for e in tree if e not in cut]

    def contract_rest(history: list[RoundOutput]) -> list[int]:
        return rest

    def own_ids(history: list[RoundOutput]) -> dict[int, int]:
        return {v: net.node_ids[v] for v in range(net.num_nodes)}

    def count_cut(e: int, ya: Any, yb: Any, history: list[RoundOutput]) -> tuple[int, int]:
        return (1, 1) if e in cut else (0, 0)

    def contract_all(history: list[RoundOutput]) -> range:
        return range(net.num_edges)

    def cost_and_id(history: list[RoundOutput]) -> dict[int, tuple[int, int]]:
        first = history[0]
        return {v: (first.aggregate[v] or 0, first.consensus[v]) for v in range(net.num_nodes)}

    return [
        RoundSpec(contract_rest, own_ids, MIN, count_cut, SUM),
        RoundSpec(contract_all, cost_and_id, MAX),
    ]


def mark_cut_edges(
    net: DualNetwork,
    tree: Sequence[int],
    e1: int,
    e2: int,
    backend: ReferenceInterpreter | DualSimulator,
) -> set[int]:
    """Edges crossing the cut that ``e1``/``e2`` cut out of ``tree``."""
    tree_set = set(tree)
    _tree_adjacency(net, tree_set)
    if e1 not in tree_set or e2 not in tree_set:
        raise CutNotRespecting("cut edges must be tree edges")
    outs = backend.run_program(mark_cut_program(net, sorted(tree_set), e1, e2))
    first, second = outs
    side_id = second.consensus[0][1]
    marked = set()
    for e in range(net.num_edges):
        a, b = net.tail[e], net.head[e]
        if (first.consensus[a] == side_id) != (first.consensus[b] == side_id):
            marked.add(e)
    return marked


def direct_cut_edges(net: DualNetwork, tree: Iterable[int], e1: int, e2: int) -> set[int]:
    """Centralized reference for :func:`mark_cut_edges`."""
    cut = {e1, e2}
    adj: dict[int, list[int]] = {v: [] for v in range(net.num_nodes)}
    for e in tree:
        if e not in cut:
            adj[net.tail[e]].append(net.head[e])
            adj[net.head[e]].append(net.tail[e])
    comp = [-1] * net.num_nodes
    for s in range(net.num_nodes):
        if comp[s] != -1:
            continue
        comp[s] = s
        stack = [s]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if comp[u] == -1:
                    comp[u] = s
                    stack.append(u)
    touches: dict[int, int] = {}
    for e in cut:
        for v in {comp[net.tail[e]], comp[net.head[e]]}:
            touches[v] = touches.get(v, 0) + 1
    # the middle component of a 2-respecting cut touches both cut edges
    side = max(touches, key=lambda c: (touches[c], c))
    return {e for e in range(net.num_edges) if (comp[net.tail[e]] == side) != (comp[net.head[e]] == side)}


def hop_diameter(adj: Mapping[int, Sequence[int]]) -> int:
    """Exact hop diameter of a connected graph by BFS from every vertex."""
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
