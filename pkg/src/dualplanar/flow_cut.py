"""Maximum flow, minimum cut and weighted girth through dual shortest paths.

Exact flow.  Pushing ``lam`` units along an s-t dart path ``P`` and reading
each dart's residual capacity as the weight of its dual arc, a flow of value
``lam`` exists exactly when the dual has no negative cycle.  A binary search
over ``lam`` with the dual labels as the negative-cycle test gives the
maximum value; dual distances from one face then turn into a feasible flow:
the flow on dart ``d`` is ``lam * P(d) + phi(face d) - phi(face rev d)``.

Approximate flow when ``s`` and ``t`` share a face.  The common face is split
in two by a virtual edge from ``s`` to ``t``; the distance between the two
halves in the dual is the max-flow value, and smooth approximate distances
from one half give a feasible flow.

Girth.  A shortest cycle of the primal graph is a minimum cut of the dual
with parallel edges merged by summing their weights.  The cut is found
centrally and marked on the dual with a two-round minor-aggregation
program executed on the face-disjoint graph.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from .bdd import build_bdd
from .congest_sim import RoundLedger, log2_ceil
from .dual_agg import (
    DualNetwork,
    DualSimulator,
    MinorState,
    ReferenceInterpreter,
    VirtualNode,
    build_face_disjoint,
    mark_cut_edges,
    orient_and_deactivate,
    store_virtual_graph,
    virtual_adjacency,
)
from .dual_labeling import compute_labels, sssp_tree_dual
from .errors import (
    Acyclic,
    Disconnected,
    NegativeCycleReport,
    NotSameFace,
    OracleContractViolation,
    SmoothingFailed,
    STIdentical,
)
from .oracles import min_cut_reference
from .planar_core import EmbeddedPlanarGraph, induced_component, trace_faces
from .shortcuts import MIN, SUM

Arc = tuple[int, int, float]
SsspOracle = Callable[[int, Sequence[Arc], int, float], list[float]]


# ----------------------------------------------------------------------
# flow assignments
# ----------------------------------------------------------------------
@dataclass
class FlowAssignment:
    """Net flow per edge, measured from the edge's tail to its head.

    For directed graphs every edge flow lies in ``[0, capacity]``; for
    undirected graphs its absolute value is at most the capacity.
    """

    graph: EmbeddedPlanarGraph
    source: int
    sink: int
    edge_flow: list[float]
    value: float
    meta: dict[str, Any] = field(default_factory=dict)

    def dart_flow(self, d: int) -> float:
        f = self.edge_flow[d >> 1]
        return f if d % 2 == 0 else -f

    def net_out(self, v: int) -> float:
        return sum(self.dart_flow(d) for d in self.graph.darts_out(v))

    def violations(self, *, rel_tol: float = 1e-9) -> list[str]:
        g = self.graph
        out = []
        for e, f in enumerate(self.edge_flow):
            c = g.capacity[e]
            slack = rel_tol * max(1.0, c)
            if g.directed and (f < -slack or f > c + slack):
                out.append(f"edge {g.edge_ids[e]} carries {f} outside [0, {c}]")
            if not g.directed and abs(f) > c + slack:
                out.append(f"edge {g.edge_ids[e]} carries |{f}| > {c}")
        scale = rel_tol * max(1.0, self.value)
        for v in range(g.n):
            net = self.net_out(v)
            want = self.value if v == self.source else -self.value if v == self.sink else 0.0
            if abs(net - want) > scale + rel_tol * sum(g.capacity):
                out.append(f"vertex {g.vertex_ids[v]} has net outflow {net}, expected {want}")
        return out

    def check(self) -> None:
        problems = self.violations()
        if problems:
            raise AssertionError("; ".join(problems[:5]))

    def to_dict(self) -> dict[str, Any]:
        g = self.graph
        return {
            "value": _num(self.value),
            "flow": {str(g.edge_ids[e]): _num(f) for e, f in enumerate(self.edge_flow) if f},
        }


def _num(x: float) -> float | int:
    return int(x) if float(x).is_integer() else float(x)


def _dart_capacity(g: EmbeddedPlanarGraph) -> list[int]:
    cap = [0] * g.num_darts
    for e, c in enumerate(g.capacity):
        cap[2 * e] = c
        cap[2 * e + 1] = 0 if g.directed else c
    return cap


def _bfs_dart_path(g: EmbeddedPlanarGraph, s: int, t: int) -> list[int]:
    """Darts of an undirected BFS path from ``s`` to ``t`` (smallest-dart parents)."""
    parent: dict[int, int | None] = {s: None}
    q = deque([s])
    while q:
        v = q.popleft()
        for d in sorted(g.darts_out(v)):
            u = g.dart_head(d)
            if u not in parent:
                parent[u] = d
                q.append(u)
    if t not in parent:
        raise Disconnected("t is not connected to s")
    path = []
    v = t
    while parent[v] is not None:
        d = parent[v]
        path.append(d)
        v = g.dart_tail(d)  # type: ignore[arg-type]
    return path[::-1]


# ----------------------------------------------------------------------
# exact flow and cut
# ----------------------------------------------------------------------
def max_st_flow_exact(
    g: EmbeddedPlanarGraph,
    s: int,
    t: int,
    *,
    leaf_size: int | None = None,
    ledger: RoundLedger | None = None,
) -> tuple[int, FlowAssignment]:
    """Exact maximum s-t flow of a planar graph with integer capacities.

    ``s`` and ``t`` are vertex ids.  Undirected graphs are treated as having
    the capacity available in both directions.

    Raises
    ------
    STIdentical
        When ``s == t``.
    """
    si, ti = g.vertex_index(s), g.vertex_index(t)
    if si == ti:
        raise STIdentical("source and sink coincide")
    ledger = ledger if ledger is not None else RoundLedger()
    sub, vmap, emap = induced_component(g, si)
    if ti not in vmap:
        return 0, FlowAssignment(g, si, ti, [0] * g.m, 0, {"disconnected": True})
    ls, lt = vmap.index(si), vmap.index(ti)
    value, flow, meta = _exact_flow_connected(sub, ls, lt, leaf_size, ledger)
    edge_flow = [0] * g.m
    for i, e in enumerate(emap):
        edge_flow[e] = flow[i]
    meta["ledger"] = ledger.to_dict()
    return value, FlowAssignment(g, si, ti, edge_flow, value, meta)


def _exact_flow_connected(
    g: EmbeddedPlanarGraph, s: int, t: int, leaf_size: int | None, ledger: RoundLedger
) -> tuple[int, list[int], dict[str, Any]]:
    cap = _dart_capacity(g)
    path = _bfs_dart_path(g, s, t)
    tree = build_bdd(g, leaf_size=leaf_size, ledger=ledger)

    def residual(lam: int) -> list[int]:
        w = list(cap)
        for d in path:
            w[d] -= lam
            w[d ^ 1] += lam
        return w

    def feasible(lam: int) -> bool:
        try:
            compute_labels(tree, residual(lam), ledger=ledger)
        except NegativeCycleReport:
            return False
        return True

    lo = 0
    hi = sum(cap[d] for d in g.darts_out(s))
    searches = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        searches += 1
        if feasible(mid):
            lo = mid
        else:
            hi = mid - 1
    labels = compute_labels(tree, residual(lo), hop_tiebreak=True, ledger=ledger)
    source_face = min(labels.bags[0].nodes)
    sp = sssp_tree_dual(labels, source_face, ledger=ledger)
    fs = tree.faces
    on_path = [0] * g.num_darts
    for d in path:
        on_path[d] += lo
        on_path[d ^ 1] -= lo
    flow = []
    for e in range(g.m):
        d = 2 * e
        x = sp.dist[fs.dart_face[d]] - sp.dist[fs.dart_face[d ^ 1]]
        flow.append(int(on_path[d] + x))
    return lo, flow, {"labelings": searches + 1, "bdd_depth": tree.depth}


def _residual_zero_side(g: EmbeddedPlanarGraph, s: int, dart_residual: Sequence[float]) -> set[int]:
    """Vertices at distance 0 from ``s`` when saturated darts cost 1 and others 0."""
    dist = {s: 0}
    dq = deque([(0, s)])
    while dq:
        dv, v = dq.popleft()
        if dv > dist.get(v, math.inf):
            continue
        for d in g.darts_out(v):
            w = 0 if dart_residual[d] > 0 else 1
            u = g.dart_head(d)
            if dv + w < dist.get(u, math.inf):
                dist[u] = dv + w
                if w == 0:
                    dq.appendleft((dv, u))
                else:
                    dq.append((dv + 1, u))
    return {v for v, x in dist.items() if x == 0}


def min_st_cut_exact(
    g: EmbeddedPlanarGraph,
    s: int,
    t: int,
    *,
    leaf_size: int | None = None,
    ledger: RoundLedger | None = None,
) -> tuple[int, set[int], list[int]]:
    """Exact minimum s-t cut: ``(value, source side vertex ids, cut edge ids)``."""
    value, flow = max_st_flow_exact(g, s, t, leaf_size=leaf_size, ledger=ledger)
    cap = _dart_capacity(g)
    res = [cap[d] - flow.dart_flow(d) for d in range(g.num_darts)]
    side = _residual_zero_side(g, flow.source, res)
    cut = []
    for e in range(g.m):
        a, b = g.tail[e] in side, g.head[e] in side
        if (a and not b) or (not g.directed and b and not a):
            cut.append(e)
    total = sum(g.capacity[e] for e in cut)
    if total != value:
        raise AssertionError(f"cut capacity {total} differs from flow value {value}")
    return value, {g.vertex_ids[v] for v in side}, sorted(g.edge_ids[e] for e in cut)


# ----------------------------------------------------------------------
# smooth distances
# ----------------------------------------------------------------------
def dijkstra(num_nodes: int, arcs: Sequence[Arc], source: int) -> list[float]:
    """Exact single-source distances for non-negative arc weights."""
    adj: list[list[tuple[int, float]]] = [[] for _ in range(num_nodes)]
    for u, v, w in arcs:
        adj[u].append((v, w))
    dist = [math.inf] * num_nodes
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        dv, v = heapq.heappop(heap)
        if dv > dist[v]:
            continue
        for u, w in adj[v]:
            nd = dv + w
            if nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def exact_sssp_oracle(num_nodes: int, arcs: Sequence[Arc], source: int, eps_prime: float) -> list[float]:
    """Exact distances; satisfies every approximation contract."""
    return dijkstra(num_nodes, arcs, source)


class NoisySsspOracle:
    """Exact distances inflated by an independent factor in ``[1, 1 + eps']`` per node."""

    def __init__(self, seed: int = 0) -> None:
        self.rng = random.Random(seed)

    def __call__(self, num_nodes: int, arcs: Sequence[Arc], source: int, eps_prime: float) -> list[float]:
        exact = dijkstra(num_nodes, arcs, source)
        return [x if v == source or not math.isfinite(x) else x * (1 + self.rng.uniform(0, eps_prime)) for v, x in enumerate(exact)]


@dataclass
class SmoothDistances:
    """Approximate distances ``d`` with ``d(v) - d(u) <= (1 + eps) * w(u, v)`` on every edge."""

    dist: list[float]
    eps: float
    source: int
    phases: int = 0
    sweeps: int = 0

    @property
    def delta(self) -> list[float]:
        return [(1 - self.eps) * x for x in self.dist]

    def violations(self, edges: Sequence[Arc]) -> list[tuple[int, int]]:
        bad = []
        for u, v, w in edges:
            for a, b in ((u, v), (v, u)):
                if math.isfinite(self.dist[a]) and self.dist[b] - self.dist[a] > (1 + self.eps) * w * (1 + 1e-12):
                    bad.append((a, b))
        return bad


def _checked(oracle: SsspOracle, eps_prime: float, check: bool) -> Callable[[int, Sequence[Arc], int], list[float]]:
    def call(num_nodes: int, arcs: Sequence[Arc], source: int) -> list[float]:
        est = list(oracle(num_nodes, arcs, source, eps_prime))
        if check:
            exact = dijkstra(num_nodes, arcs, source)
            for v, (a, b) in enumerate(zip(est, exact)):
                if a < b * (1 - 1e-12) or a > b * (1 + eps_prime) * (1 + 1e-12):
                    raise OracleContractViolation(f"estimate {a} for node {v} outside [{b}, (1 + {eps_prime}) * {b}]")
        return est

    return call


def smooth_sssp(
    num_nodes: int,
    edges: Sequence[Arc],
    source: int,
    eps: float,
    oracle: SsspOracle | None = None,
    *,
    eps_prime: float | None = None,
    check_contract: bool = True,
) -> SmoothDistances:
    """Smooth ``(1 + eps)``-approximate distances on an undirected graph.

    An initial estimate comes from one oracle call on the whole graph.  Then,
    for ``omega = Delta, Delta / 2, ..., 1`` (``Delta`` the smallest power of
    two at least ``2 * num_nodes * max weight``) and both shifts
    ``sigma in {0, omega / 2}``, every node takes the level
    ``floor((d + sigma) / omega)``; edges between different levels are
    dropped, a virtual source is attached to every node with weight equal to
    its offset inside the level, and the oracle's answer, shifted back,
    lowers the estimate.  Remaining edge-wise violations are repaired by
    local relaxation sweeps, each of which only lowers estimates.

    Raises
    ------
    ValueError
        When some edge weight is not positive.
    OracleContractViolation
        When the oracle under-estimates or over-estimates beyond ``eps'``.
    SmoothingFailed
        When the repair sweeps do not converge.
    """
    if any(w <= 0 for _, _, w in edges):
        raise ValueError("smoothing needs positive edge weights")
    oracle = oracle or exact_sssp_oracle
    if eps_prime is None:
        eps_prime = eps / (2 * log2_ceil(num_nodes))
    call = _checked(oracle, eps_prime, check_contract)
    arcs: list[Arc] = [(u, v, w) for u, v, w in edges] + [(v, u, w) for u, v, w in edges]
    d = call(num_nodes, arcs, source)
    top = max((w for _, _, w in edges), default=1)
    delta = 1
    while delta < 2 * num_nodes * top:
        delta *= 2
    omega = float(delta)
    phases = 0
    virtual = num_nodes
    while omega >= 1:
        for sigma in (0.0, omega / 2):
            level = [math.floor((x + sigma) / omega) if math.isfinite(x) else None for x in d]
            sub: list[Arc] = [(u, v, w) for u, v, w in arcs if level[u] is not None and level[u] == level[v]]
            for v, x in enumerate(d):
                if level[v] is not None:
                    sub.append((virtual, v, x + sigma - level[v] * omega))  # type: ignore[operator]
            est = call(num_nodes + 1, sub, virtual)
            for v in range(num_nodes):
                if level[v] is not None and math.isfinite(est[v]):
                    cand = est[v] + level[v] * omega - sigma  # type: ignore[operator]
                    if cand < d[v]:
                        d[v] = cand
        omega /= 2
        phases += 1
    d[source] = 0.0
    sweeps = 0
    slack = 1 + eps
    while True:
        changed = False
        for u, v, w in arcs:
            if d[v] - d[u] > slack * w:
                d[v] = d[u] + slack * w
                changed = True
        if not changed:
            break
        sweeps += 1
        if sweeps > num_nodes:
            raise SmoothingFailed(f"still violated after {sweeps} sweeps")
    return SmoothDistances(d, eps, source, phases, sweeps)


# ----------------------------------------------------------------------
# st-planar approximate flow and cut
# ----------------------------------------------------------------------
@dataclass
class _SplitDual:
    num_nodes: int
    edges: list[tuple[int, int, float, int]]  # (a, b, weight, primal edge or -1)
    node_of_dart: list[int]
    f1: int
    f2: int
    face: int


def common_face(g: EmbeddedPlanarGraph, s: int, t: int) -> int:
    """Smallest face index whose boundary visits both ``s`` and ``t`` (vertex indices)."""
    fs = trace_faces(g)
    for f, cyc in enumerate(fs.faces):
        tails = {g.dart_tail(d) for d in cyc}
        if s in tails and t in tails:
            return f
    raise NotSameFace("s and t share no face")


def _split_dual(g: EmbeddedPlanarGraph, s: int, t: int, ledger: RoundLedger) -> _SplitDual:
    fdg = build_face_disjoint(g, ledger=ledger)
    fs = fdg.faces
    f = common_face(g, s, t)
    cyc = fs.faces[f]
    a = next(i for i, d in enumerate(cyc) if g.dart_tail(d) == s)
    b = next(i for i, d in enumerate(cyc) if g.dart_tail(d) == t)
    in_f2: set[int] = set()
    i = a
    while i != b:
        in_f2.add(cyc[i])
        i = (i + 1) % len(cyc)
    nf = fs.num_faces
    f1, f2 = nf, nf + 1
    node_of_dart = [fs.dart_face[d] for d in range(g.num_darts)]
    for d in cyc:
        node_of_dart[d] = f2 if d in in_f2 else f1
    # register the two halves as virtual nodes replacing the split face
    net = DualNetwork.from_face_disjoint(fdg)
    state = MinorState.initial(net, virtual_bound=2)
    halves: dict[int, list[tuple[int, int, int]]] = {f1: [], f2: []}
    between: list[tuple[int, int, int]] = []
    for e in range(g.m):
        x, y = node_of_dart[2 * e + 1], node_of_dart[2 * e]
        ends = {x, y}
        if ends <= {f1, f2}:
            if x != y:
                between.append((f1, f2, g.capacity[e]))
            continue
        for half in (f1, f2):
            if half in ends:
                other = y if x == half else x
                halves[half].append((other, g.capacity[e], g.edge_ids[e]))
    top = max(g.capacity, default=1) or 1
    between.append((f1, f2, g.n * top))
    store_virtual_graph(
        state,
        [VirtualNode(f1, halves[f1]), VirtualNode(f2, halves[f2])],
        virtual_edges=between,
        replacements={f: [f1, f2]},
        merge=MIN,
        ledger=ledger,
        broadcast_depth=fdg.host_tree.height,
    )
    # explicit edge list: active real edges, recorded virtual edges
    best: dict[tuple[int, int], tuple[float, int]] = {}

    def put(x: int, y: int, w: float, e: int) -> None:
        if x == y:
            return
        key = (min(x, y), max(x, y))
        if key not in best or (w, e) < best[key]:
            best[key] = (w, e)

    # explicit edge list straight from the darts, so every pair keeps the
    # primal edge of minimum capacity; the registry above agrees on weights
    for e in range(g.m):
        put(node_of_dart[2 * e + 1], node_of_dart[2 * e], g.capacity[e], e)
    for real, items in virtual_adjacency(state).items():
        for vid, w in items:
            if best[(min(real, vid), max(real, vid))][0] != w:
                raise AssertionError("virtual registry disagrees with the split dual")
    heavy = state.virtual_edges[-1]
    if (f1, f2) not in best or heavy[2] < best[(f1, f2)][0]:
        best[(f1, f2)] = (heavy[2], -1)
    edges = [(x, y, w, e) for (x, y), (w, e) in sorted(best.items())]
    return _SplitDual(nf + 2, edges, node_of_dart, f1, f2, f)


@dataclass
class _Contracted:
    cls: list[int]  # node -> class index
    num: int
    edges: list[tuple[int, int, float, int]]


def _contract_zero(split: _SplitDual) -> _Contracted:
    """Merge nodes joined by zero-weight edges; classes are spanned by those edges."""
    parent = list(range(split.num_nodes))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, w, _ in split.edges:
        if w == 0:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = sorted({find(x) for x in range(split.num_nodes)})
    index = {r: i for i, r in enumerate(roots)}
    cls = [index[find(x)] for x in range(split.num_nodes)]
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for a, b, w, e in split.edges:
        ca, cb = cls[a], cls[b]
        if ca == cb or w == 0:
            continue
        key = (min(ca, cb), max(ca, cb))
        if key not in best or (w, e) < best[key]:
            best[key] = (w, e)
    return _Contracted(cls, len(roots), [(a, b, w, e) for (a, b), (w, e) in sorted(best.items())])


@dataclass
class _Approx:
    split: _SplitDual
    contracted: _Contracted
    smooth: SmoothDistances | None
    node_dist: list[float]
    ledger: RoundLedger


def _approx_distances(
    g: EmbeddedPlanarGraph, s: int, t: int, eps: float, oracle: SsspOracle | None, ledger: RoundLedger, **kw: Any
) -> _Approx:
    split = _split_dual(g, s, t, ledger)
    con = _contract_zero(split)
    src = con.cls[split.f1]
    smooth = None
    if con.num == 1 or not con.edges:
        cdist = [0.0] * con.num
    else:
        smooth = smooth_sssp(con.num, [(a, b, w) for a, b, w, _ in con.edges], src, eps, oracle, **kw)
        cdist = smooth.dist
    node_dist = [cdist[con.cls[x]] for x in range(split.num_nodes)]
    ledger.charge("smooth_sssp", (smooth.phases * 2 + 1 + smooth.sweeps) if smooth else 1)
    return _Approx(split, con, smooth, node_dist, ledger)


def max_st_flow_stplanar_approx(
    g: EmbeddedPlanarGraph,
    s: int,
    t: int,
    eps: float = 0.0,
    oracle: SsspOracle | None = None,
    *,
    ledger: RoundLedger | None = None,
    **smooth_kw: Any,
) -> tuple[float, FlowAssignment]:
    """Approximate max flow on an undirected graph with ``s``, ``t`` on one face.

    Returns ``(value, assignment)`` with ``value = (1 - eps) * d(f2)``; the
    assignment's ``meta["unscaled_value"]`` holds ``d(f2)``, which equals the
    exact maximum flow when the oracle is exact.  ``meta["split_node_dist"]``
    and ``meta["split_edges"]`` expose the smoothed distances on the split
    dual and its edges ``(a, b, weight)`` so callers can audit smoothness.
    """
    si, ti = g.vertex_index(s), g.vertex_index(t)
    if si == ti:
        raise STIdentical("source and sink coincide")
    if not g.is_connected():
        raise Disconnected("the graph must be connected")
    ledger = ledger if ledger is not None else RoundLedger()
    ap = _approx_distances(g, si, ti, eps, oracle, ledger, **smooth_kw)
    split = ap.split
    delta = [(1 - eps) * x for x in ap.node_dist]
    flow = []
    for e in range(g.m):
        head_side, tail_side = split.node_of_dart[2 * e], split.node_of_dart[2 * e + 1]
        flow.append(delta[head_side] - delta[tail_side])
    assign = FlowAssignment(g, si, ti, flow, 0.0)
    net = assign.net_out(si)
    if net < 0:
        assign.edge_flow = [-x for x in flow]
        net = -net
    unscaled = ap.node_dist[split.f2]
    value = (1 - eps) * unscaled
    assign.value = net
    assign.meta = {
        "unscaled_value": unscaled,
        "eps": eps,
        "smooth_phases": ap.smooth.phases if ap.smooth else 0,
        "repair_sweeps": ap.smooth.sweeps if ap.smooth else 0,
        "split_node_dist": list(ap.node_dist),
        "split_edges": [(a, b, w) for a, b, w, _ in ap.split.edges],
        "ledger": ledger.to_dict(),
    }
    if abs(net - value) > 1e-9 * max(1.0, value) + 1e-9:
        raise AssertionError(f"assignment value {net} differs from {value}")
    assign.value = value
    return value, assign


def min_st_cut_stplanar_approx(
    g: EmbeddedPlanarGraph,
    s: int,
    t: int,
    eps: float = 0.0,
    oracle: SsspOracle | None = None,
    *,
    ledger: RoundLedger | None = None,
    **smooth_kw: Any,
) -> tuple[float, set[int], list[int]]:
    """Approximate min cut for co-facial ``s``, ``t``: ``(value, side ids, cut edge ids)``.

    The cut is the set of primal edges dual to a path from one half of the
    split face to the other, traced backwards from ``f2`` by always stepping
    to the neighbour with smaller estimate minimising ``d(u) + w(u, v)``.
    """
    si, ti = g.vertex_index(s), g.vertex_index(t)
    if si == ti:
        raise STIdentical("source and sink coincide")
    if not g.is_connected():
        raise Disconnected("the graph must be connected")
    ledger = ledger if ledger is not None else RoundLedger()
    ap = _approx_distances(g, si, ti, eps, oracle, ledger, **smooth_kw)
    con = ap.contracted
    cd = [math.inf] * con.num
    for x, dx in enumerate(ap.node_dist):
        cd[con.cls[x]] = dx
    adj: list[list[tuple[int, float, int]]] = [[] for _ in range(con.num)]
    for a, b, w, e in con.edges:
        adj[a].append((b, w, e))
        adj[b].append((a, w, e))
    src, dst = con.cls[ap.split.f1], con.cls[ap.split.f2]
    path_edges: list[int] = []
    v = dst
    steps = 0
    fallback = False
    while v != src:
        cands = [(cd[u] + w, u, e) for u, w, e in adj[v] if cd[u] < cd[v] and e >= 0]
        if not cands or steps > con.num:
            fallback = True
            break
        _, u, e = min(cands)
        path_edges.append(e)
        v = u
        steps += 1
    if fallback:
        path_edges = _dijkstra_path(con, src, dst)
    marked = {e for e in path_edges if e >= 0}
    if any(e < 0 for e in path_edges):
        raise AssertionError("the separating path used the virtual split edge")
    # 0/1 classification: marked edges cost one, the rest zero
    res = [0.0] * g.num_darts
    for e in range(g.m):
        if e not in marked and g.capacity[e] > 0:
            res[2 * e] = res[2 * e + 1] = 1.0
    side = _residual_zero_side(g, si, res)
    if ti in side:
        raise AssertionError("marked edges do not separate s from t")
    cut = [e for e in range(g.m) if (g.tail[e] in side) != (g.head[e] in side)]
    value = float(sum(g.capacity[e] for e in cut))
    ledger.charge("cut_marking", 2 * log2_ceil(g.n))
    return value, {g.vertex_ids[x] for x in side}, sorted(g.edge_ids[e] for e in cut)


def _dijkstra_path(con: _Contracted, src: int, dst: int) -> list[int]:
    adj: list[list[tuple[int, float, int]]] = [[] for _ in range(con.num)]
    for a, b, w, e in con.edges:
        adj[a].append((b, w, e))
        adj[b].append((a, w, e))
    dist = [math.inf] * con.num
    back: list[tuple[int, int] | None] = [None] * con.num
    dist[src] = 0
    heap = [(0.0, src)]
    while heap:
        dv, v = heapq.heappop(heap)
        if dv > dist[v]:
            continue
        for u, w, e in adj[v]:
            if e < 0:
                continue
            if dv + w < dist[u]:
                dist[u] = dv + w
                back[u] = (v, e)
                heapq.heappush(heap, (dist[u], u))
    out = []
    v = dst
    while back[v] is not None:
        p, e = back[v]  # type: ignore[misc]
        out.append(e)
        v = p
    return out


# ----------------------------------------------------------------------
# weighted girth
# ----------------------------------------------------------------------
MinCutProvider = Callable[[int, Sequence[tuple[int, int, float]]], tuple[float, set[int], list[int], int]]


def weighted_girth(
    g: EmbeddedPlanarGraph,
    *,
    min_cut: MinCutProvider = min_cut_reference,
    simulate: bool = True,
    ledger: RoundLedger | None = None,
    bandwidth_const: int = 8,
) -> tuple[int, list[int]]:
    """Weight and edge ids of a minimum-weight cycle of an undirected graph.

    Parameters
    ----------
    min_cut:
        Provider returning ``(value, side, tree, crossing)`` for a simple
        weighted graph, where ``tree`` is a spanning tree the cut 1-respects.
    simulate:
        Mark the cycle on the face-disjoint graph (default) instead of the
        direct reference interpreter.
    bandwidth_const:
        Per-edge bandwidth is ``bandwidth_const * ceil(log2 n)`` bits.

    Raises
    ------
    Acyclic
        When the graph has no cycle.
    """
    if not g.is_connected():
        raise Disconnected("girth needs a connected graph")
    if any(w < 0 for w in g.weight):
        raise ValueError("girth needs non-negative weights")
    ledger = ledger if ledger is not None else RoundLedger()
    fdg = build_face_disjoint(g, ledger=ledger, bandwidth_const=bandwidth_const)
    if fdg.faces.num_faces < 2:
        raise Acyclic("the graph is a forest")
    net = DualNetwork.from_face_disjoint(fdg)
    orient = orient_and_deactivate(fdg, g.weight, SUM, network=net)
    pairs = sorted(orient.active_edge)
    simple = [(a, b, orient.merged_weight[(a, b)]) for a, b in pairs]
    value, _, tree_idx, crossing = min_cut(net.num_nodes, simple)
    tree = [orient.active_edge[pairs[i]] for i in tree_idx]
    cross = orient.active_edge[pairs[crossing]]
    backend = DualSimulator(fdg, net) if simulate else ReferenceInterpreter(net)
    marked = mark_cut_edges(net, tree, cross, cross, backend)
    total = sum(g.weight[e] for e in marked)
    if total != value:
        raise AssertionError(f"marked cycle weighs {total}, the cut {value}")
    return int(value), sorted(g.edge_ids[e] for e in marked)
