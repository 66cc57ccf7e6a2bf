"""Tree-restricted low-congestion shortcuts and part-wise aggregation.

Given a partition of (a subset of) the vertices into parts that each induce
a connected subgraph, part-wise aggregation makes every member of a part
learn the aggregate of the members' inputs.  Parts communicate over their
own edges plus a shortcut subgraph: the union of global-BFS-tree paths from
the members up to the part's apex (the topmost vertex of that union that is
still needed to keep it connected).

The aggregation itself is simulated message by message: a BFS tree of each
part's augmented subgraph is rooted at the apex, values are convergecast to
the root and broadcast back.  Every directed edge carries one message per
round; when several parts want the same edge, the smallest part id goes
first.  The number of simulated rounds is charged to a
:class:`~dualplanar.congest_sim.RoundLedger`.
"""

from __future__ import annotations

import heapq
from collections import deque
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Any

from .congest_sim import RoundLedger, log2_ceil, message_bits
from .errors import BandwidthExceeded, Disconnected, InvalidPartition
from .planar_core import EmbeddedPlanarGraph

PHASE_NAME = "pa_tree_restricted_shortcut"


@dataclass(frozen=True)
class AggregationOperator:
    """Associative and commutative binary operator with a display name."""

    name: str
    combine: Callable[[Any, Any], Any]

    def fold(self, values: Iterable[Any]) -> Any:
        vals = [v for v in values if v is not None]
        return reduce(self.combine, vals) if vals else None


MIN = AggregationOperator("MIN", min)
MAX = AggregationOperator("MAX", max)
SUM = AggregationOperator("SUM", lambda a, b: a + b)
OR = AggregationOperator("OR", lambda a, b: bool(a) or bool(b))
AND = AggregationOperator("AND", lambda a, b: bool(a) and bool(b))
OPERATORS = {op.name: op for op in (MIN, MAX, SUM, OR, AND)}


def custom_operator(name: str, fn: Callable[[Any, Any], Any]) -> AggregationOperator:
    """Wrap a user-supplied associative, commutative function."""
    return AggregationOperator(name, fn)


def _adjacency(graph: EmbeddedPlanarGraph | Mapping[int, Iterable[int]]) -> dict[int, list[int]]:
    if isinstance(graph, EmbeddedPlanarGraph):
        return graph.adjacency
    return {v: sorted(set(nb) - {v}) for v, nb in graph.items()}


@dataclass(frozen=True)
class Partition:
    """Disjoint vertex sets with integer part ids (default ``0..N-1``)."""

    parts: tuple[frozenset[int], ...]
    ids: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.ids:
            object.__setattr__(self, "ids", tuple(range(len(self.parts))))
        if len(self.ids) != len(self.parts) or len(set(self.ids)) != len(self.ids):
            raise InvalidPartition("part ids must be unique, one per part")

    @classmethod
    def from_sets(cls, parts: Iterable[Iterable[int]], ids: Sequence[int] | None = None) -> Partition:
        return cls(tuple(frozenset(p) for p in parts), tuple(ids) if ids is not None else ())

    @classmethod
    def from_labels(cls, labels: Mapping[int, int]) -> Partition:
        """Group vertices by label; the label becomes the part id."""
        groups: dict[int, set[int]] = {}
        for v, lab in labels.items():
            groups.setdefault(lab, set()).add(v)
        keys = sorted(groups)
        return cls(tuple(frozenset(groups[k]) for k in keys), tuple(keys))

    @cached_property
    def part_of(self) -> dict[int, int]:
        """Vertex -> position of its part in :attr:`parts`."""
        return {v: i for i, p in enumerate(self.parts) for v in p}

    def validate(self, adj: Mapping[int, Sequence[int]]) -> None:
        seen: set[int] = set()
        for pid, part in zip(self.ids, self.parts):
            if not part:
                raise InvalidPartition(f"part {pid} is empty")
            if seen & part:
                raise InvalidPartition(f"part {pid} overlaps an earlier part")
            if not part <= adj.keys():
                raise InvalidPartition(f"part {pid} names unknown vertices")
            seen |= part
            start = min(part)
            reached = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for u in adj[v]:
                    if u in part and u not in reached:
                        reached.add(u)
                        stack.append(u)
            if len(reached) != len(part):
                raise InvalidPartition(f"part {pid} induces a disconnected subgraph")


@dataclass(frozen=True)
class RootedTree:
    """Spanning tree of a host graph given by parent pointers."""

    root: int
    parent: dict[int, int | None]
    depth: dict[int, int]

    @property
    def height(self) -> int:
        return max(self.depth.values())


def global_bfs_tree(adj: Mapping[int, Sequence[int]], root: int | None = None) -> RootedTree:
    """BFS tree with smallest-id parent choice (centralized; same tree as the flooding one)."""
    root = min(adj) if root is None else root
    parent: dict[int, int | None] = {root: None}
    depth = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for v in sorted(frontier):
            for u in adj[v]:
                if u not in parent:
                    parent[u] = v
                    depth[u] = depth[v] + 1
                    nxt.append(u)
        frontier = nxt
    if len(parent) != len(adj):
        raise Disconnected("host graph is not connected")
    return RootedTree(root, parent, depth)


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass
class ShortcutSet:
    """Per-part shortcut edges with measured congestion and (lazily) dilation."""

    adj: dict[int, list[int]]
    partition: Partition
    tree: RootedTree
    apex: list[int]
    shortcut_edges: list[frozenset[tuple[int, int]]]
    congestion: int
    _dilation: int | None = field(default=None, repr=False)

    def part_adjacency(self, i: int) -> dict[int, list[int]]:
        """Adjacency of ``G[S_i]`` plus the shortcut edges ``H_i``."""
        part = self.partition.parts[i]
        out: dict[int, set[int]] = {v: set() for v in part}
        for v in part:
            for u in self.adj[v]:
                if u in part:
                    out[v].add(u)
        for a, b in self.shortcut_edges[i]:
            out.setdefault(a, set()).add(b)
            out.setdefault(b, set()).add(a)
        return {v: sorted(nb) for v, nb in out.items()}

    @property
    def dilation(self) -> int:
        """Largest diameter among the augmented part subgraphs."""
        if self._dilation is None:
            best = 0
            for i in range(len(self.partition.parts)):
                adj = self.part_adjacency(i)
                for s in adj:
                    best = max(best, max(_bfs_depths(adj, s).values()))
            self._dilation = best
        return self._dilation


def _bfs_depths(adj: Mapping[int, Sequence[int]], s: int) -> dict[int, int]:
    dist = {s: 0}
    q = deque([s])
    while q:
        v = q.popleft()
        for u in adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def build_shortcuts(
    graph: EmbeddedPlanarGraph | Mapping[int, Iterable[int]],
    partition: Partition,
    *,
    tree: RootedTree | None = None,
    validate: bool = True,
) -> ShortcutSet:
    """Tree-restricted shortcuts on a global BFS tree.

    For part ``S_i`` take the union ``U`` of tree paths from its members to
    the root, then drop the top of ``U`` while it is a non-member with a
    single child in ``U``; the vertex reached is the apex.  ``H_i`` is the
    set of remaining tree edges of ``U`` that do not already lie inside
    ``G[S_i]``.
    """
    adj = _adjacency(graph)
    if validate:
        partition.validate(adj)
    tree = tree or global_bfs_tree(adj)
    parent = tree.parent
    apexes: list[int] = []
    hsets: list[frozenset[tuple[int, int]]] = []
    usage: dict[tuple[int, int], int] = {}
    for part in partition.parts:
        if len(part) == 1:
            apexes.append(next(iter(part)))
            hsets.append(frozenset())
            continue
        union: set[int] = set()
        kids: dict[int, set[int]] = {}
        for v in part:
            x = v
            while x not in union:
                union.add(x)
                p = parent[x]
                if p is None:
                    break
                kids.setdefault(p, set()).add(x)
                x = p
        apex = tree.root
        while apex not in part and len(kids.get(apex, ())) == 1:
            apex = next(iter(kids[apex]))
        below = _subtree_within(apex, kids)
        h = frozenset(
            _edge(x, parent[x])  # type: ignore[arg-type]
            for x in below
            if x != apex and not (x in part and parent[x] in part)
        )
        for e in h:
            usage[e] = usage.get(e, 0) + 1
        apexes.append(apex)
        hsets.append(h)
    return ShortcutSet(adj, partition, tree, apexes, hsets, max(usage.values(), default=0))


def _subtree_within(root: int, kids: Mapping[int, set[int]]) -> list[int]:
    out = [root]
    stack = [root]
    while stack:
        v = stack.pop()
        for c in kids.get(v, ()):
            out.append(c)
            stack.append(c)
    return out


@dataclass(frozen=True)
class PartwiseResult:
    """Outcome of one part-wise aggregation."""

    by_part: dict[int, Any]
    by_vertex: dict[int, Any]
    rounds: int


def part_wise_aggregate(
    graph: EmbeddedPlanarGraph | Mapping[int, Iterable[int]],
    partition: Partition,
    inputs: Mapping[int, Any],
    op: AggregationOperator,
    *,
    shortcuts: ShortcutSet | None = None,
    tree: RootedTree | None = None,
    ledger: RoundLedger | None = None,
    bandwidth_const: int = 8,
    host_factor: int = 1,
    phase: str = PHASE_NAME,
    validate: bool = True,
) -> PartwiseResult:
    """Every member of every part learns the aggregate of its part's inputs.

    Parameters
    ----------
    inputs:
        Per-vertex input; vertices without an entry (or with ``None``)
        contribute nothing.  Only members' inputs count.
    op:
        Aggregation operator.
    host_factor:
        Host rounds per simulated round, charged to the ledger.
    """
    sc = shortcuts or build_shortcuts(graph, partition, tree=tree, validate=validate)
    bandwidth = bandwidth_const * log2_ceil(len(sc.adj))
    parts = partition.parts
    ids = partition.ids

    # per-part BFS tree of the augmented subgraph, rooted at the apex
    tparent: list[dict[int, int | None]] = []
    pending: dict[tuple[int, int], int] = {}
    acc: dict[tuple[int, int], Any] = {}
    children: dict[tuple[int, int], list[int]] = {}
    for i, part in enumerate(parts):
        padj = sc.part_adjacency(i)
        root = sc.apex[i]
        par: dict[int, int | None] = {root: None}
        q = deque([root])
        while q:
            v = q.popleft()
            for u in padj[v]:
                if u not in par:
                    par[u] = v
                    children.setdefault((i, v), []).append(u)
                    q.append(u)
        tparent.append(par)
        for v in par:
            pending[(i, v)] = len(children.get((i, v), ()))
            acc[(i, v)] = inputs.get(v) if v in part else None

    queues: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    # message: (part position, kind, receiver) where kind 0 = up, 1 = down

    def send(i: int, frm: int, to: int, kind: int) -> None:
        q = queues.get((frm, to))
        if q is None:
            queues[(frm, to)] = q = []
        heapq.heappush(q, (ids[i], i, kind))

    result: dict[int, Any] = {}
    id_bits = [message_bits(x) for x in ids]
    result_bits: dict[int, int] = {}

    def finish_up(i: int, v: int) -> None:
        p = tparent[i][v]
        if p is not None:
            send(i, v, p, 0)
        else:
            result[i] = acc[(i, v)]
            result_bits[i] = message_bits(result[i])
            for c in children.get((i, v), ()):
                send(i, v, c, 1)

    for i in range(len(parts)):
        for v in tparent[i]:
            if pending[(i, v)] == 0:
                finish_up(i, v)

    rounds = 0
    max_bits = 0
    while queues:
        rounds += 1
        delivered = []
        for edge in list(queues):
            q = queues[edge]
            _, i, kind = heapq.heappop(q)
            if not q:
                del queues[edge]
            delivered.append((edge, i, kind))
        for (frm, to), i, kind in delivered:
            if kind == 0:
                payload = acc[(i, frm)]
                bits = id_bits[i] + message_bits(payload)
            else:
                bits = id_bits[i] + result_bits[i]
            if bits > bandwidth:
                raise BandwidthExceeded(f"part {ids[i]} sends {bits} bits; B = {bandwidth}")
            max_bits = max(max_bits, bits)
            if kind == 0:
                key = (i, to)
                a = acc[key]
                acc[key] = payload if a is None else (a if payload is None else op.combine(a, payload))
                pending[key] -= 1
                if pending[key] == 0:
                    finish_up(i, to)
            else:
                for c in children.get((i, to), ()):
                    send(i, to, c, 1)

    if ledger is not None:
        ledger.charge(phase, rounds * host_factor)
        ledger.note_bits(max_bits)
    by_part = {ids[i]: result[i] for i in range(len(parts))}
    by_vertex = {v: result[i] for i, part in enumerate(parts) for v in part}
    return PartwiseResult(by_part, by_vertex, rounds * host_factor)


def direct_part_aggregate(partition: Partition, inputs: Mapping[int, Any], op: AggregationOperator) -> dict[int, Any]:
    """Centralized reference: fold each part's inputs directly."""
    return {pid: op.fold(inputs.get(v) for v in sorted(part)) for pid, part in zip(partition.ids, partition.parts)}


def leader_ids(partition: Partition) -> dict[Hashable, int]:
    """Smallest vertex id of every part (the tie-breaking leader rule)."""
    return {pid: min(part) for pid, part in zip(partition.ids, partition.parts)}
