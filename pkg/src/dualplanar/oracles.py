"""Centralized reference algorithms and planar test-graph generators.

Everything here is deliberately independent of the distributed machinery
in the rest of the package: references work on explicit graphs with
textbook algorithms (or scipy), so they can arbitrate the results of the
decomposition-based code paths.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
import time
from collections import deque
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import NegativeCycleError, csgraph_from_dense, dijkstra, shortest_path

from .errors import Acyclic, Disconnected
from .planar_core import EmbeddedPlanarGraph

INF = float("inf")


@dataclass(frozen=True)
class OracleReport:
    """Outcome of one oracle invocation."""

    algorithm: str
    input_digest: str
    output: Any
    elapsed: float


def graph_digest(g: EmbeddedPlanarGraph) -> str:
    text = json.dumps(g.to_document(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def run_oracle(name: str, fn: Callable[..., Any], g: EmbeddedPlanarGraph, *args: Any) -> OracleReport:
    start = time.perf_counter()
    out = fn(g, *args)
    return OracleReport(name, graph_digest(g), out, time.perf_counter() - start)


# ----------------------------------------------------------------------
# generators
# ----------------------------------------------------------------------
def _finish(
    n: int,
    nbr_rot: list[list[int]],
    rng: random.Random,
    weight_range: tuple[int, int],
    capacity_range: tuple[int, int] | None,
    directed: bool,
    drop: float,
) -> EmbeddedPlanarGraph:
    """Turn neighbour rotations of a simple plane graph into an EmbeddedPlanarGraph."""
    pairs: dict[tuple[int, int], int] = {}
    tail: list[int] = []
    head: list[int] = []
    for v in range(n):
        for u in nbr_rot[v]:
            key = (min(u, v), max(u, v))
            if key not in pairs:
                pairs[key] = len(tail)
                tail.append(key[0])
                head.append(key[1])
    m = len(tail)
    keep = [True] * m
    if drop > 0 and m:
        # keep a random spanning tree so the graph stays connected
        order = list(range(m))
        rng.shuffle(order)
        parent = list(range(n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        tree = set()
        for i in order:
            a, b = find(tail[i]), find(head[i])
            if a != b:
                parent[a] = b
                tree.add(i)
        for i in range(m):
            if i not in tree and rng.random() < drop:
                keep[i] = False
    new_index = {}
    for i in range(m):
        if keep[i]:
            new_index[i] = len(new_index)
    t2, h2 = [], []
    for i in range(m):
        if keep[i]:
            a, b = tail[i], head[i]
            if directed and rng.random() < 0.5:
                a, b = b, a
            t2.append(a)
            h2.append(b)
    lo, hi = weight_range
    weight = [rng.randint(lo, hi) for _ in t2]
    clo, chi = capacity_range if capacity_range is not None else weight_range
    capacity = [rng.randint(clo, chi) for _ in t2]
    rotation = []
    for v in range(n):
        rot = []
        for u in nbr_rot[v]:
            i = pairs[(min(u, v), max(u, v))]
            if keep[i]:
                rot.append(new_index[i])
        rotation.append(rot)
    return EmbeddedPlanarGraph(n, t2, h2, rotation, directed=directed, weight=weight, capacity=capacity)


def _grid_rotation(rows: int, cols: int) -> list[list[int]]:
    rot = []
    for r in range(rows):
        for c in range(cols):
            nb = []
            # clockwise on screen (row index grows downward): east, south, west, north
            if c + 1 < cols:
                nb.append(r * cols + c + 1)
            if r + 1 < rows:
                nb.append((r + 1) * cols + c)
            if c - 1 >= 0:
                nb.append(r * cols + c - 1)
            if r - 1 >= 0:
                nb.append((r - 1) * cols + c)
            rot.append(nb)
    return rot


def _triangulation_rotation(n: int, rng: random.Random) -> list[list[int]]:
    if n < 3:
        return [[u for u in range(n) if u != v] for v in range(n)]
    rot = [[1, 2], [2, 0], [0, 1]]
    faces = [(0, 1, 2), (0, 2, 1)]
    for w in range(3, n):
        k = rng.randrange(len(faces))
        a, b, c = faces[k]
        # the incoming dart at each corner is (prev -> corner); the new edge
        # goes directly before the reversal of that dart
        rot[a].insert(rot[a].index(c), w)
        rot[b].insert(rot[b].index(a), w)
        rot[c].insert(rot[c].index(b), w)
        rot.append([a, b, c])
        faces[k] = (a, b, w)
        faces.append((b, c, w))
        faces.append((c, a, w))
    return rot


def _tree_rotation(n: int, rng: random.Random) -> list[list[int]]:
    rot: list[list[int]] = [[] for _ in range(n)]
    for v in range(1, n):
        p = rng.randrange(v)
        rot[p].insert(rng.randint(0, len(rot[p])), v)
        rot[v].append(p)
    return rot


def gen_planar(
    kind: str,
    n: int,
    weight_range: tuple[int, int] = (1, 1),
    seed: int = 0,
    *,
    directed: bool = False,
    capacity_range: tuple[int, int] | None = None,
    drop: float = 0.0,
) -> EmbeddedPlanarGraph:
    """Generate a connected embedded planar graph.

    Parameters
    ----------
    kind:
        ``"grid"`` (``r x c`` with ``r = isqrt(n)``, ``c = n // r``),
        ``"triangulation"`` (alias ``"random-triangulation"``; maximal planar
        by repeated vertex insertion into a random triangular face),
        ``"tree"`` (random recursive tree) or ``"cycle"``.
    weight_range, capacity_range:
        Inclusive integer ranges; capacities default to the weight range.
    directed:
        Orient every edge at random.
    drop:
        Probability of deleting each edge outside a random spanning tree.
    """
    rng = random.Random(seed)
    kind = {"random-triangulation": "triangulation"}.get(kind, kind)
    if n < 1:
        raise ValueError("n must be positive")
    if kind == "grid":
        rows = max(1, int(np.sqrt(n)))
        cols = max(1, n // rows)
        nbr = _grid_rotation(rows, cols)
        size = rows * cols
    elif kind == "triangulation":
        nbr = _triangulation_rotation(n, rng)
        size = n
    elif kind == "tree":
        nbr = _tree_rotation(n, rng)
        size = n
    elif kind == "cycle":
        if n < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        nbr = [[(v + 1) % n, (v - 1) % n] for v in range(n)]
        size = n
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    return _finish(size, nbr, rng, weight_range, capacity_range, directed, drop)


# ----------------------------------------------------------------------
# shortest paths
# ----------------------------------------------------------------------
class NegativeCycle(Exception):
    """Raised by the reference shortest-path routines."""


def bellman_ford(num_nodes: int, arcs: Iterable[tuple[int, int, float]], source: int) -> list[float]:
    """Single-source distances; raises :class:`NegativeCycle` if one is reachable."""
    arcs = list(arcs)
    dist = [INF] * num_nodes
    dist[source] = 0
    for _ in range(num_nodes):
        changed = False
        for a, b, w in arcs:
            if dist[a] != INF and dist[a] + w < dist[b]:
                dist[b] = dist[a] + w
                changed = True
        if not changed:
            return dist
    for a, b, w in arcs:
        if dist[a] != INF and dist[a] + w < dist[b]:
            raise NegativeCycle(f"negative cycle through node {b}")
    return dist


def apsp_reference(num_nodes: int, arcs: Iterable[tuple[int, int, float]]) -> np.ndarray:
    """All-pairs distances (float matrix, ``inf`` = unreachable) via Johnson.

    Raises :class:`NegativeCycle` when any negative cycle exists, reachable
    or not.
    """
    dense = np.full((num_nodes, num_nodes), np.inf)
    for a, b, w in arcs:
        if a == b:
            if w < 0:
                raise NegativeCycle(f"negative self-loop at node {a}")
            continue
        if w < dense[a, b]:
            dense[a, b] = w
    if num_nodes == 0:
        return dense
    graph = csgraph_from_dense(dense, null_value=np.inf)
    try:
        out = shortest_path(graph, method="J", directed=True)
    except NegativeCycleError as exc:
        raise NegativeCycle(str(exc)) from exc
    return out


def _dijkstra_pair(adj: list[list[tuple[int, float, int]]], s: int, t: int, banned: int) -> tuple[float, list[int]]:
    """Shortest s-t path avoiding edge ``banned``; returns (dist, edge list)."""
    dist = {s: 0.0}
    pred: dict[int, tuple[int, int]] = {}
    heap = [(0.0, s)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v == t:
            path = []
            while v != s:
                u, e = pred[v]
                path.append(e)
                v = u
            return d, path[::-1]
        for u, w, e in adj[v]:
            if e == banned:
                continue
            nd = d + w
            if nd < dist.get(u, INF):
                dist[u] = nd
                pred[u] = (v, e)
                heapq.heappush(heap, (nd, u))
    return INF, []


def brute_girth(g: EmbeddedPlanarGraph) -> tuple[int, list[int]]:
    """Minimum over edges ``e=(u,v)`` of ``dist_{G-e}(u, v) + w(e)``.

    Returns ``(girth, cycle edge indices)``; raises :class:`Acyclic` when
    the graph has no cycle.
    """
    n, m = g.n, g.m
    adj: list[list[tuple[int, float, int]]] = [[] for _ in range(n)]
    for i in range(m):
        a, b, w = g.tail[i], g.head[i], g.weight[i]
        adj[a].append((b, w, i))
        adj[b].append((a, w, i))
    rows = [g.tail[i] for i in range(m)] + [g.head[i] for i in range(m)]
    cols = [g.head[i] for i in range(m)] + [g.tail[i] for i in range(m)]
    data = np.array([float(w) for w in g.weight] * 2)
    mat = csr_matrix((data, (rows, cols)), shape=(n, n))
    # locate each edge's two stored entries so we can mask it out
    best = (INF, -1)
    for i in range(m):
        a, b = g.tail[i], g.head[i]
        masked = mat.copy()
        masked[a, b] = np.inf
        masked[b, a] = np.inf
        d = dijkstra(masked, indices=a)[b]
        cand = d + g.weight[i]
        if cand < best[0]:
            best = (cand, i)
    if best[0] == INF:
        raise Acyclic("graph has no cycle")
    i = best[1]
    _, path = _dijkstra_pair(adj, g.tail[i], g.head[i], i)
    return int(best[0]), sorted(path + [i])


# ----------------------------------------------------------------------
# flows and cuts
# ----------------------------------------------------------------------
class _Residual:
    def __init__(self, n: int) -> None:
        self.to: list[int] = []
        self.cap: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(n)]

    def add(self, a: int, b: int, c_ab: int, c_ba: int) -> int:
        k = len(self.to)
        self.to += [b, a]
        self.cap += [c_ab, c_ba]
        self.adj[a].append(k)
        self.adj[b].append(k + 1)
        return k


def max_flow_reference(
    g: EmbeddedPlanarGraph, s: int, t: int, *, capacity: Sequence[int] | None = None
) -> tuple[int, list[int]]:
    """Edmonds-Karp max flow; returns (value, net flow per edge tail->head).

    Directed graphs use each edge one way; undirected graphs allow both.
    """
    caps = list(capacity) if capacity is not None else list(g.capacity)
    res = _Residual(g.n)
    arc_of = []
    for i in range(g.m):
        back = 0 if g.directed else caps[i]
        arc_of.append(res.add(g.tail[i], g.head[i], caps[i], back))
    value = 0
    while True:
        pred = [-1] * g.n
        pred[s] = -2
        queue = deque([s])
        while queue and pred[t] == -1:
            v = queue.popleft()
            for k in res.adj[v]:
                u = res.to[k]
                if res.cap[k] > 0 and pred[u] == -1:
                    pred[u] = k
                    queue.append(u)
        if pred[t] == -1:
            break
        push = None
        v = t
        while v != s:
            k = pred[v]
            push = res.cap[k] if push is None else min(push, res.cap[k])
            v = res.to[k ^ 1]
        v = t
        while v != s:
            k = pred[v]
            res.cap[k] -= push
            res.cap[k ^ 1] += push
            v = res.to[k ^ 1]
        value += push
    flow = []
    for i, k in enumerate(arc_of):
        if g.directed:
            flow.append(caps[i] - res.cap[k])
        else:
            flow.append((res.cap[k + 1] - res.cap[k]) // 2)
    return value, flow


def stoer_wagner(num_nodes: int, edges: Iterable[tuple[int, int, float]]) -> tuple[float, set[int]]:
    """Global min cut of an undirected weighted graph by vertex contraction."""
    if num_nodes < 2:
        raise ValueError("a cut needs at least two nodes")
    w = np.zeros((num_nodes, num_nodes))
    for a, b, c in edges:
        if a != b:
            w[a, b] += c
            w[b, a] += c
    groups: list[list[int]] = [[v] for v in range(num_nodes)]
    active = list(range(num_nodes))
    best = (np.inf, set())
    while len(active) > 1:
        idx = np.array(active)
        sub = w[np.ix_(idx, idx)]
        k = len(active)
        key = np.zeros(k)
        used = np.zeros(k, dtype=bool)
        prev = last = -1
        for _ in range(k):
            cand = np.where(used, -np.inf, key)
            j = int(np.argmax(cand))
            used[j] = True
            prev, last = last, j
            key += sub[j]
        cut_val = key[last] - sub[last, last]
        s_node, t_node = active[prev], active[last]
        if cut_val < best[0]:
            best = (float(cut_val), set(groups[t_node]))
        # merge t into s
        w[s_node, :] += w[t_node, :]
        w[:, s_node] += w[:, t_node]
        w[s_node, s_node] = 0
        groups[s_node] += groups[t_node]
        active.remove(t_node)
    return best


def min_cut_reference(
    num_nodes: int, edges: Sequence[tuple[int, int, float]]
) -> tuple[float, set[int], list[int], int]:
    """Exact global min cut plus a spanning tree the cut 1-respects.

    ``edges`` is a list of ``(a, b, weight)``; returned tree and crossing edge
    are indices into it.  Returns ``(value, side, tree_edge_indices,
    crossing_edge_index)``.
    """
    value, side = stoer_wagner(num_nodes, edges)
    parent = list(range(num_nodes))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree: list[int] = []
    crossing = -1
    for i, (a, b, _) in enumerate(edges):
        if a == b:
            continue
        if (a in side) != (b in side):
            if crossing == -1:
                crossing = i
            continue
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            tree.append(i)
    if crossing == -1 or len(tree) != num_nodes - 2:
        raise Disconnected("min-cut sides are not both connected")
    tree.append(crossing)
    return value, side, sorted(tree), crossing


def exhaustive_min_cut(num_nodes: int, edges: Sequence[tuple[int, int, float]]) -> float:
    """Undirected global min cut by enumerating every bisection (tiny graphs)."""
    best = np.inf
    for mask in range(1, 2 ** (num_nodes - 1)):
        val = sum(w for a, b, w in edges if ((mask >> a) & 1) != ((mask >> b) & 1))
        best = min(best, val)
    return float(best)


def brute_directed_global_cut(g: EmbeddedPlanarGraph, *, exhaustive_limit: int = 12) -> tuple[int, set[int]]:
    """Directed global min cut ``min_S w(S -> V\\S)`` over non-trivial S.

    Exhaustive over all bisections when ``n <= exhaustive_limit``, otherwise
    the min over ``s = 0`` and every ``t`` of both ``0 -> t`` and ``t -> 0``
    max flows.  Returns ``(value, side)``.
    """
    n = g.n
    if n < 2:
        raise ValueError("a cut needs at least two vertices")
    weights = list(g.weight)
    if n <= exhaustive_limit:
        masks = np.arange(1, 2**n - 1, dtype=np.int64)
        tails = np.array(g.tail, dtype=np.int64)
        heads = np.array(g.head, dtype=np.int64)
        w = np.array(weights, dtype=np.int64)
        in_t = (masks[:, None] >> tails[None, :]) & 1
        in_h = (masks[:, None] >> heads[None, :]) & 1
        vals = ((in_t == 1) & (in_h == 0)).astype(np.int64) @ w
        k = int(np.argmin(vals))
        mask = int(masks[k])
        return int(vals[k]), {v for v in range(n) if (mask >> v) & 1}
    dg = g.with_attributes(capacity=weights, directed=True)
    best: tuple[int, set[int]] | None = None
    for t in range(1, n):
        for a, b in ((0, t), (t, 0)):
            val, _ = max_flow_reference(dg, a, b)
            if best is None or val < best[0]:
                side = _residual_side(dg, a, b)
                best = (val, side)
    assert best is not None
    return best


def _residual_side(g: EmbeddedPlanarGraph, s: int, t: int) -> set[int]:
    """Source side of a minimum s-t cut (recomputes the flow)."""
    value, flow = max_flow_reference(g, s, t)
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for i in range(g.m):
        a, b = g.tail[i], g.head[i]
        if g.capacity[i] - flow[i] > 0:
            adj[a].append(b)
        if flow[i] > 0:
            adj[b].append(a)
    seen = {s}
    stack = [s]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen
