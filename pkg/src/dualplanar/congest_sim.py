"""Deterministic synchronous CONGEST simulator with round and bandwidth accounting.

A :class:`SimNetwork` wraps an undirected communication graph given as
adjacency lists.  Each call of :func:`run_round` lets every vertex read its
inbox and emit at most one message of at most ``B`` bits per incident edge;
messages are delivered at the start of the next round.

Higher-level algorithms that are not simulated message by message charge
their rounds into the same :class:`RoundLedger` under a descriptive phase
name, so every reported round count is traceable to a phase.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any

from .errors import BandwidthExceeded, Disconnected, ItemTooLarge
from .planar_core import EmbeddedPlanarGraph

Message = Any
Handler = Callable[[int, dict, dict[int, Message]], Mapping[int, Message] | None]


def message_bits(msg: Message) -> int:
    """Size of a message in bits.

    Integers cost their bit length plus a sign bit, sequences the sum of
    their items, strings and bytes eight bits per character, ``None`` zero.
    """
    if msg is None:
        return 0
    if type(msg) is int:
        return max(1, abs(msg).bit_length()) + 1
    if isinstance(msg, bool):
        return 1
    if isinstance(msg, int):
        return max(1, abs(msg).bit_length()) + 1
    if isinstance(msg, float):
        return 64
    if isinstance(msg, (str, bytes)):
        return 8 * len(msg)
    if isinstance(msg, (tuple, list, frozenset, set)):
        return sum(message_bits(x) for x in msg)
    raise TypeError(f"cannot size message of type {type(msg).__name__}")


def log2_ceil(n: int) -> int:
    return max(1, math.ceil(math.log2(max(n, 2))))


@dataclass
class RoundLedger:
    """Round counter with per-phase entries and the largest per-edge load seen."""

    rounds: int = 0
    max_edge_bits: int = 0
    phases: list[tuple[str, int]] = field(default_factory=list)

    def charge(self, phase: str, rounds: int) -> None:
        if rounds < 0:
            raise ValueError("cannot charge a negative number of rounds")
        self.rounds += int(rounds)
        self.phases.append((phase, int(rounds)))

    def note_bits(self, bits: int) -> None:
        if bits > self.max_edge_bits:
            self.max_edge_bits = bits

    def absorb(self, other: RoundLedger, *, prefix: str = "") -> None:
        for name, r in other.phases:
            self.charge(prefix + name, r)
        self.note_bits(other.max_edge_bits)

    def by_phase(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for name, r in self.phases:
            out[name] = out.get(name, 0) + r
        return dict(sorted(out.items()))

    def to_dict(self) -> dict[str, Any]:
        return {"rounds": self.rounds, "max_edge_bits": self.max_edge_bits, "phases": self.by_phase()}


class SimNetwork:
    """Synchronous message-passing network.

    Parameters
    ----------
    graph:
        An :class:`EmbeddedPlanarGraph` or an adjacency mapping.
    bandwidth_const:
        ``B = bandwidth_const * ceil(log2 n)`` bits per edge per direction.
    ledger:
        Ledger to charge; a fresh one is created when omitted.
    host_factor:
        Number of host rounds needed per simulated round (2 when this network
        is emulated on a host graph, as for the face-disjoint graph).
    """

    def __init__(
        self,
        graph: EmbeddedPlanarGraph | Mapping[int, Iterable[int]],
        *,
        bandwidth_const: int = 8,
        ledger: RoundLedger | None = None,
        host_factor: int = 1,
        size_hint: int | None = None,
    ) -> None:
        if isinstance(graph, EmbeddedPlanarGraph):
            adj = graph.adjacency
        else:
            adj = {v: sorted(set(nb) - {v}) for v, nb in graph.items()}
        self.adj: dict[int, list[int]] = {v: list(nb) for v, nb in sorted(adj.items())}
        self.n = len(self.adj)
        self.bandwidth = bandwidth_const * log2_ceil(size_hint or self.n)
        self.ledger = ledger if ledger is not None else RoundLedger()
        self.host_factor = host_factor
        self.state: dict[int, dict] = {v: {} for v in self.adj}
        self.inbox: dict[int, dict[int, Message]] = {v: {} for v in self.adj}

    def run_round(self, handler: Handler, *, phase: str = "round") -> int:
        """Execute one synchronous round; returns the number of messages sent."""
        outbox: dict[int, dict[int, Message]] = {v: {} for v in self.adj}
        sent = 0
        for v in self.adj:
            out = handler(v, self.state[v], self.inbox[v]) or {}
            for u, msg in out.items():
                if u not in self.adj[v] and u != v:
                    raise ValueError(f"vertex {v} sent to non-neighbour {u}")
                bits = message_bits(msg)
                if bits > self.bandwidth:
                    raise BandwidthExceeded(f"vertex {v} sent {bits} bits to {u}; B = {self.bandwidth}")
                self.ledger.note_bits(bits)
                outbox[u][v] = msg
                sent += 1
        self.inbox = outbox
        self.ledger.charge(phase, self.host_factor)
        return sent


@dataclass(frozen=True)
class BfsTree:
    root: int
    parent: dict[int, int | None]
    depth: dict[int, int]
    children: dict[int, list[int]]

    @property
    def height(self) -> int:
        return max(self.depth.values())

    def path_to_root(self, v: int) -> list[int]:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])  # type: ignore[arg-type]
        return out


def bfs_tree(net: SimNetwork, root: int, *, phase: str = "bfs") -> BfsTree:
    """Flood from ``root``; every vertex adopts the smallest-id sender as parent."""
    for v in net.adj:
        net.state[v].pop("bfs", None)
    net.inbox = {v: {} for v in net.adj}
    net.state[root]["bfs"] = (None, 0, True)

    def step(v: int, st: dict, inbox: dict[int, Message]) -> dict[int, Message] | None:
        if "bfs" not in st and inbox:
            p = min(inbox)
            st["bfs"] = (p, inbox[p] + 1, True)
        if "bfs" in st and st["bfs"][2]:
            p, d, _ = st["bfs"]
            st["bfs"] = (p, d, False)
            return {u: d for u in net.adj[v] if u != p}
        return None

    while True:
        if net.run_round(step, phase=phase) == 0:
            break
    parent, depth = {}, {}
    for v in net.adj:
        if "bfs" not in net.state[v]:
            raise Disconnected(f"vertex {v} not reached from {root}")
        parent[v], depth[v], _ = net.state[v]["bfs"]
    children: dict[int, list[int]] = {v: [] for v in net.adj}
    for v, p in parent.items():
        if p is not None:
            children[p].append(v)
    return BfsTree(root, parent, depth, children)


def pipelined_broadcast(
    net: SimNetwork,
    tree: BfsTree,
    items_at: Mapping[int, Iterable[Hashable]],
    *,
    phase: str = "broadcast",
) -> set:
    """Flood items over the tree edges until every vertex holds all of them.

    Every tree edge carries at most one item per direction per round, the
    smallest item not yet exchanged over that edge going first.  A vertex
    forwards a given item once per edge (duplicate suppression), so items
    injected at several vertices are delivered once.
    """
    nbrs = {v: ([tree.parent[v]] if tree.parent[v] is not None else []) + tree.children[v] for v in net.adj}
    known: dict[int, set] = {v: set() for v in net.adj}
    for v, items in items_at.items():
        for it in items:
            if message_bits(it) > net.bandwidth:
                raise ItemTooLarge(f"item {it!r} exceeds B = {net.bandwidth} bits")
            known[v].add(it)
    universe = set().union(*known.values()) if known else set()
    exchanged: dict[tuple[int, int], set] = {(v, u): set() for v in net.adj for u in nbrs[v]}
    net.inbox = {v: {} for v in net.adj}

    def step(v: int, st: dict, inbox: dict[int, Message]) -> dict[int, Message]:
        for u, it in inbox.items():
            known[v].add(it)
            exchanged[(v, u)].add(it)
            exchanged[(u, v)].add(it)
        out = {}
        for u in nbrs[v]:
            pending = known[v] - exchanged[(v, u)]
            if pending:
                it = min(pending, key=_sort_key)
                exchanged[(v, u)].add(it)
                out[u] = it
        return out

    while any(known[v] != universe for v in net.adj):
        net.run_round(step, phase=phase)
    return universe


def _sort_key(x: Hashable) -> tuple:
    return (type(x).__name__, repr(x))


def converge_cast(
    net: SimNetwork,
    tree: BfsTree,
    inputs: Mapping[int, Any],
    op: Callable[[Any, Any], Any],
    *,
    phase: str = "convergecast",
) -> Any:
    """Aggregate ``inputs`` up the tree; returns the value held by the root."""
    acc = {v: inputs.get(v) for v in net.adj}
    waiting = {v: len(tree.children[v]) for v in net.adj}
    sent: set[int] = set()
    net.inbox = {v: {} for v in net.adj}

    def combine(a: Any, b: Any) -> Any:
        if a is None:
            return b
        if b is None:
            return a
        return op(a, b)

    def step(v: int, st: dict, inbox: dict[int, Message]) -> dict[int, Message] | None:
        for _, val in inbox.items():
            acc[v] = combine(acc[v], val)
            waiting[v] -= 1
        if waiting[v] == 0 and v not in sent and tree.parent[v] is not None:
            sent.add(v)
            return {tree.parent[v]: acc[v]}
        return None

    while waiting[tree.root] > 0:
        net.run_round(step, phase=phase)
    return acc[tree.root]
