"""Small hand-built graphs shared by the test modules."""

from __future__ import annotations

from dualplanar.dual_agg import RoundSpec
from dualplanar.planar_core import EmbeddedPlanarGraph
from dualplanar.shortcuts import MAX, MIN, SUM


def cycle_graph(n: int, weights=None, *, directed: bool = False, capacity=None) -> EmbeddedPlanarGraph:
    """Cycle ``0 -> 1 -> ... -> n-1 -> 0``; edge ``i`` leaves vertex ``i``."""
    tail = list(range(n))
    head = [(i + 1) % n for i in range(n)]
    rotation = [[i, (i - 1) % n] for i in range(n)]
    return EmbeddedPlanarGraph(n, tail, head, rotation, directed=directed, weight=weights, capacity=capacity)


def path_graph(n: int, weights=None, *, directed: bool = False) -> EmbeddedPlanarGraph:
    """Path ``0 - 1 - ... - n-1``; edge ``i`` joins ``i`` and ``i+1``."""
    tail = list(range(n - 1))
    head = list(range(1, n))
    rotation = [[e for e in (v - 1, v) if 0 <= e < n - 1] for v in range(n)]
    return EmbeddedPlanarGraph(n, tail, head, rotation, directed=directed, weight=weights)


def star_graph(leaves: int) -> EmbeddedPlanarGraph:
    """Center 0 joined to vertices ``1..leaves``."""
    tail = [0] * leaves
    head = list(range(1, leaves + 1))
    rotation = [list(range(leaves))] + [[i] for i in range(leaves)]
    return EmbeddedPlanarGraph(leaves + 1, tail, head, rotation)


def single_edge(capacity: int = 1, *, directed: bool = True, weight: int = 1) -> EmbeddedPlanarGraph:
    return EmbeddedPlanarGraph(2, [0], [1], [[0], [0]], directed=directed, capacity=[capacity], weight=[weight])


def two_paths(first: int, second: int) -> EmbeddedPlanarGraph:
    """Directed ``0 -> 1 -> 3`` (capacity ``first``) and ``0 -> 2 -> 3`` (``second``)."""
    tail = [0, 1, 0, 2]
    head = [1, 3, 2, 3]
    rotation = [[0, 2], [1, 0], [3, 2], [1, 3]]
    caps = [first, first, second, second]
    return EmbeddedPlanarGraph(4, tail, head, rotation, directed=True, capacity=caps)


def bowtie(bridge: int = 1) -> EmbeddedPlanarGraph:
    """Directed triangles ``{0,1,2}`` and ``{3,4,5}`` joined by the bridge ``2 -> 3``.

    Every edge has capacity 10 except the bridge; with ``s = 0`` and
    ``t = 5`` the bridge is the unique minimum cut when ``bridge < 10``.
    """
    # edges: 0:(0,1) 1:(1,2) 2:(0,2) 3:(2,3) 4:(3,4) 5:(4,5) 6:(3,5)
    tail = [0, 1, 0, 2, 3, 4, 3]
    head = [1, 2, 2, 3, 4, 5, 5]
    rotation = [[0, 2], [1, 0], [1, 2, 3], [3, 4, 6], [5, 4], [6, 5]]
    caps = [10, 10, 10, bridge, 10, 10, 10]
    return EmbeddedPlanarGraph(6, tail, head, rotation, directed=True, capacity=caps)


def complete_five() -> tuple[int, list[int], list[int], list[list[int]]]:
    """K5 with the rotation that lists neighbours in increasing order."""
    tail, head = [], []
    index = {}
    for a in range(5):
        for b in range(a + 1, 5):
            index[(a, b)] = len(tail)
            tail.append(a)
            head.append(b)
    rotation = [[index[(min(v, u), max(v, u))] for u in range(5) if u != v] for v in range(5)]
    return 5, tail, head, rotation


def nested_cycles() -> EmbeddedPlanarGraph:
    """Square ``0-1-2-3`` of total weight 10 with a chord ``0-2`` of weight 2.

    The triangles ``0-1-2`` and ``0-2-3`` weigh 4 and 10, so the girth is 4.
    """
    # edges: 0:(0,1) 1:(1,2) 2:(2,3) 3:(3,0) 4:(0,2)
    tail = [0, 1, 2, 3, 0]
    head = [1, 2, 3, 0, 2]
    rotation = [[0, 4, 3], [1, 0], [2, 4, 1], [3, 2]]
    weights = [1, 1, 4, 4, 2]
    return EmbeddedPlanarGraph(4, tail, head, rotation, weight=weights)


def random_connected_partition(adj, parts: int, rng) -> dict[int, int]:
    """Label every vertex with a part id so that each part is connected.

    Parts grow from ``parts`` random seeds by a randomized multi-source
    search; a vertex joins the part that reaches it first.
    """
    vertices = sorted(adj)
    seeds = rng.sample(vertices, min(parts, len(vertices)))
    label = {s: s for s in seeds}
    frontier = list(seeds)
    while frontier:
        v = frontier.pop(rng.randrange(len(frontier)))
        for u in adj[v]:
            if u not in label:
                label[u] = label[v]
                frontier.append(u)
    return label


def random_program(net, rng, rounds=3):
    """A random minor-aggregation program: contraction masks plus MIN/SUM steps."""
    program = []
    for _ in range(rounds):
        mask = [e for e in range(net.num_edges) if rng.random() < 0.5]
        base = {v: rng.randint(0, 30) for v in range(net.num_nodes)}
        edge_weight = [rng.randint(1, 9) for _ in range(net.num_edges)]
        consensus_op = rng.choice([MIN, SUM, MAX])
        aggregation_op = rng.choice([MIN, SUM])

        def consensus(history, base=base):
            if not history:
                return dict(base)
            previous = history[-1]
            return {v: base[v] + (previous.aggregate[v] or 0) % 97 for v in range(net.num_nodes)}

        def edge_values(e, y_tail, y_head, history, edge_weight=edge_weight):
            return (y_head + edge_weight[e]) % 1000, (y_tail + edge_weight[e]) % 1000

        program.append(RoundSpec(lambda h, mask=mask: mask, consensus, consensus_op, edge_values, aggregation_op))
    return program
