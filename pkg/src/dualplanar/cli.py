"""Command-line entry point.

Every subcommand loads a graph (``--in PATH``) or generates one
(``--gen KIND:N`` with ``--seed``), runs one algorithm and prints a report.
Structured reports are a single JSON document with sorted keys and a
``"schema": 1`` field, so equal inputs give byte-identical output.

Exit status is 0 on success, 1 when ``--verify`` finds a disagreement with
the reference oracle and 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from . import oracles
from .bdd import build_bdd, dump_bdd
from .congest_sim import RoundLedger
from .dual_labeling import compute_labels
from .errors import DualPlanarError, NegativeCycleReport
from .flow_cut import (
    NoisySsspOracle,
    exact_sssp_oracle,
    max_st_flow_exact,
    max_st_flow_stplanar_approx,
    min_st_cut_exact,
    min_st_cut_stplanar_approx,
    weighted_girth,
)
from .global_mincut import directed_global_min_cut
from .planar_core import EmbeddedPlanarGraph, build_embedded_graph, standard_dart_weights, trace_faces

SCHEMA_VERSION = 1
COMMANDS = ("gen", "girth", "maxflow", "mincut", "dirmincut", "labels", "verify")

# Generator defaults per command: (directed, weight range, capacity range).
_GEN_DEFAULTS: dict[str, tuple[bool, tuple[int, int], tuple[int, int] | None]] = {
    "gen": (False, (1, 100), (1, 100)),
    "girth": (False, (1, 10**6), None),
    "maxflow": (True, (1, 1), (1, 1000)),
    "mincut": (True, (1, 1), (1, 1000)),
    "dirmincut": (True, (1, 100), None),
    "labels": (True, (-20, 100), None),
}


class VerificationFailed(Exception):
    """An algorithm disagreed with its reference oracle."""


@dataclass
class RunConfig:
    command: str
    source_path: str | None
    generator: tuple[str, int] | None
    seed: int
    bandwidth_const: int
    eps: float | None
    oracle: str
    output_format: str
    verify: bool
    ledger: bool
    dump_bdd: bool
    s: int | None
    t: int | None
    corpus: int


def _generator_spec(text: str) -> tuple[str, int]:
    kind, sep, size = text.partition(":")
    if not sep or not kind:
        raise argparse.ArgumentTypeError("expected KIND:N, for example grid:16")
    try:
        n = int(size)
    except ValueError:
        raise argparse.ArgumentTypeError(f"N must be an integer, got {size!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("N must be positive")
    return kind, n


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualplanar", description="Dual-graph algorithms on embedded planar graphs.")
    parser.add_argument("command", choices=COMMANDS)
    src = parser.add_mutually_exclusive_group()
    src.add_argument("--in", dest="source_path", metavar="PATH", help="graph document to load")
    src.add_argument("--gen", dest="generator", type=_generator_spec, metavar="KIND:N", help="generate a graph")
    parser.add_argument("--seed", type=_seed, default=0)
    parser.add_argument("--s", type=int, help="source vertex id")
    parser.add_argument("--t", type=int, help="sink vertex id")
    parser.add_argument("--eps", type=float, help="use the approximate same-face flow with this accuracy")
    parser.add_argument("--oracle", choices=("exact", "noisy"), default="exact", help="shortest-path oracle for --eps")
    parser.add_argument("--bandwidth-const", type=int, default=8, help="bits per edge are this times ceil(log2 n)")
    parser.add_argument("--verify", action="store_true", help="cross-check against the reference oracle")
    parser.add_argument("--ledger", action="store_true", help="include the round ledger in the report")
    parser.add_argument("--dump-bdd", action="store_true", help="include the decomposition tree (labels only)")
    parser.add_argument("--corpus", type=int, default=20, help="number of graphs for the verify command")
    parser.add_argument("--format", dest="output_format", choices=("human", "structured"), default="human")
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(list(argv))
    if args.bandwidth_const < 1:
        build_parser().error("--bandwidth-const must be positive")
    if args.eps is not None and not 0 <= args.eps < 1:
        build_parser().error("--eps must lie in [0, 1)")
    return RunConfig(
        command=args.command,
        source_path=args.source_path,
        generator=args.generator,
        seed=args.seed,
        bandwidth_const=args.bandwidth_const,
        eps=args.eps,
        oracle=args.oracle,
        output_format=args.output_format,
        verify=args.verify,
        ledger=args.ledger,
        dump_bdd=args.dump_bdd,
        s=args.s,
        t=args.t,
        corpus=args.corpus,
    )


# ----------------------------------------------------------------------
# inputs
# ----------------------------------------------------------------------
def load_graph(cfg: RunConfig, *, directed: bool | None = None) -> EmbeddedPlanarGraph:
    """The graph named by ``--in`` or ``--gen``."""
    if cfg.source_path is not None:
        with open(cfg.source_path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if isinstance(doc, dict) and "result" in doc and "graph" in doc["result"]:
            doc = doc["result"]["graph"]
        return build_embedded_graph(doc)
    if cfg.generator is None:
        raise DualPlanarError("give either --in PATH or --gen KIND:N")
    kind, n = cfg.generator
    default_directed, weights, caps = _GEN_DEFAULTS.get(cfg.command, _GEN_DEFAULTS["gen"])
    if directed is None:
        directed = default_directed
    try:
        return oracles.gen_planar(kind, n, weights, cfg.seed, directed=directed, capacity_range=caps)
    except ValueError as exc:
        raise DualPlanarError(str(exc)) from exc


def _default_terminals(g: EmbeddedPlanarGraph, same_face: bool) -> tuple[int, int]:
    """Vertex ids for ``s`` and ``t``; on one face when ``same_face`` is set."""
    if g.n < 2:
        raise DualPlanarError("the graph needs two vertices for s and t")
    if not same_face:
        return g.vertex_ids[0], g.vertex_ids[g.n - 1]
    fs = trace_faces(g)
    s = 0
    start = g.darts_out(s)[0]
    walk = fs.faces[fs.dart_face[start]]
    boundary = [g.dart_tail(d) for d in walk]
    others = [v for v in boundary if v != s]
    if not others:
        raise DualPlanarError("vertex 0 shares no face with another vertex")
    return g.vertex_ids[0], g.vertex_ids[others[len(others) // 2]]


def _terminals(cfg: RunConfig, g: EmbeddedPlanarGraph, same_face: bool) -> tuple[int, int]:
    if cfg.s is not None and cfg.t is not None:
        return cfg.s, cfg.t
    s, t = _default_terminals(g, same_face)
    return (cfg.s if cfg.s is not None else s), (cfg.t if cfg.t is not None else t)


def _oracle(cfg: RunConfig):
    return NoisySsspOracle(cfg.seed) if cfg.oracle == "noisy" else exact_sssp_oracle


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise VerificationFailed(message)


def _num(x: float) -> float | int:
    return int(x) if float(x).is_integer() else float(x)


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------
def cmd_gen(cfg: RunConfig, ledger: RoundLedger) -> dict[str, Any]:
    g = load_graph(cfg)
    fs = trace_faces(g)
    result = {"graph": g.to_document(), "vertices": g.n, "edges": g.m, "faces": fs.num_faces}
    if cfg.verify:
        from .planar_core import check_euler

        check_euler(g, fs)
        result["verified"] = True
    return result


def cmd_girth(cfg: RunConfig, ledger: RoundLedger) -> dict[str, Any]:
    g = load_graph(cfg, directed=False)
    value, edges = weighted_girth(g, ledger=ledger, bandwidth_const=cfg.bandwidth_const)
    result: dict[str, Any] = {"value": value, "edges": edges}
    if cfg.verify:
        ref, _ = oracles.brute_girth(g)
        weight = sum(g.weight[g.edge_index(e)] for e in edges)
        _check(ref == value, f"girth {value} differs from the reference {ref}")
        _check(weight == value, f"marked cycle weighs {weight}, reported {value}")
        result["oracle"] = {"value": ref, "agrees": True}
    return result


def _reference_flow(g: EmbeddedPlanarGraph, s: int, t: int) -> int:
    value, _ = oracles.max_flow_reference(g, g.vertex_index(s), g.vertex_index(t))
    return value


def cmd_maxflow(cfg: RunConfig, ledger: RoundLedger) -> dict[str, Any]:
    approx = cfg.eps is not None
    g = load_graph(cfg, directed=False if approx else None)
    s, t = _terminals(cfg, g, approx)
    if approx:
        value, assignment = max_st_flow_stplanar_approx(g, s, t, cfg.eps, _oracle(cfg), ledger=ledger)
    else:
        value, assignment = max_st_flow_exact(g, s, t, ledger=ledger)
    result: dict[str, Any] = {"s": s, "t": t, "value": _num(value), "assignment": assignment.to_dict()["flow"]}
    if cfg.verify:
        ref = _reference_flow(g, s, t)
        bad = assignment.violations(rel_tol=1e-9)
        _check(not bad, f"flow assignment infeasible: {bad[:3]}")
        if approx:
            lower = (1 - 2.5 * cfg.eps) * ref
            _check(lower - 1e-9 <= value <= ref + 1e-9, f"approximate value {value} outside [{lower}, {ref}]")
        else:
            _check(value == ref, f"flow {value} differs from the reference {ref}")
        result["oracle"] = {"value": ref, "agrees": True}
    return result


def cmd_mincut(cfg: RunConfig, ledger: RoundLedger) -> dict[str, Any]:
    approx = cfg.eps is not None
    g = load_graph(cfg, directed=False if approx else None)
    s, t = _terminals(cfg, g, approx)
    if approx:
        value, side, cut = min_st_cut_stplanar_approx(g, s, t, cfg.eps, _oracle(cfg), ledger=ledger)
    else:
        value, side, cut = min_st_cut_exact(g, s, t, ledger=ledger)
    result: dict[str, Any] = {"s": s, "t": t, "value": _num(value), "side": sorted(side), "edges": sorted(cut)}
    if cfg.verify:
        ref = _reference_flow(g, s, t)
        weight = sum(g.capacity[g.edge_index(e)] for e in cut)
        _check(weight == value, f"cut edges weigh {weight}, reported {value}")
        _check(_separates(g, s, t, set(cut)), "removing the cut edges leaves t reachable from s")
        if approx:
            _check(ref <= value <= (1 + 2.5 * cfg.eps) * ref + 1e-9, f"cut {value} outside [{ref}, (1+2.5 eps) {ref}]")
        else:
            _check(value == ref, f"cut {value} differs from the reference {ref}")
        result["oracle"] = {"value": ref, "agrees": True}
    return result


def _separates(g: EmbeddedPlanarGraph, s: int, t: int, cut_ids: set[int]) -> bool:
    """Whether ``t`` is unreachable from ``s`` along residual-usable edges once ``cut_ids`` are removed."""
    adj: dict[int, list[int]] = {v: [] for v in range(g.n)}
    for e in range(g.m):
        if g.edge_ids[e] in cut_ids or g.capacity[e] <= 0:
            continue
        adj[g.tail[e]].append(g.head[e])
        if not g.directed:
            adj[g.head[e]].append(g.tail[e])
    start, goal = g.vertex_index(s), g.vertex_index(t)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return goal not in seen


def cmd_dirmincut(cfg: RunConfig, ledger: RoundLedger) -> dict[str, Any]:
    g = load_graph(cfg, directed=True)
    res = directed_global_min_cut(g, ledger=ledger)
    result: dict[str, Any] = {"value": res.value, "side": sorted(res.side), "edges": res.cut_edges}
    if cfg.verify:
        ref, _ = oracles.brute_directed_global_cut(g)
        weight = sum(g.weight[g.edge_index(e)] for e in res.cut_edges)
        _check(ref == res.value, f"cut {res.value} differs from the reference {ref}")
        _check(weight == res.value, f"cut edges weigh {weight}, reported {res.value}")
        result["oracle"] = {"value": ref, "agrees": True}
    return result


def cmd_labels(cfg: RunConfig, ledger: RoundLedger) -> dict[str, Any]:
    g = load_graph(cfg)
    tree = build_bdd(g, ledger=ledger)
    weights = standard_dart_weights(g)
    fs = tree.faces
    result: dict[str, Any] = {"faces": fs.num_faces, "bags": len(tree.bags), "depth": tree.depth}
    if cfg.dump_bdd:
        result["bdd"] = dump_bdd(tree)
    try:
        labels = compute_labels(tree, weights, ledger=ledger)
    except NegativeCycleReport as exc:
        result["negative_cycle"] = {"bag": exc.bag_id}
        if cfg.verify:
            try:
                oracles.apsp_reference(fs.num_faces, _dual_arc_list(fs, weights))
            except oracles.NegativeCycle:
                result["oracle"] = {"negative_cycle": True, "agrees": True}
            else:
                raise VerificationFailed("labels report a negative cycle the reference does not see") from None
        return result
    result["negative_cycle"] = None
    result["label_bits"] = {str(f): labels.label(f).bits() for f in range(fs.num_faces)}
    result["max_label_bits"] = labels.max_label_bits()
    matrix = labels.all_pairs()
    spots = _spot_pairs(fs.num_faces)
    result["spot_checks"] = [{"from": a, "to": b, "distance": _json_distance(matrix[a, b])} for a, b in spots]
    if cfg.verify:
        try:
            ref = oracles.apsp_reference(fs.num_faces, _dual_arc_list(fs, weights))
        except oracles.NegativeCycle:
            raise VerificationFailed("the reference finds a negative cycle the labels missed") from None
        diff = [(a, b) for a in range(fs.num_faces) for b in range(fs.num_faces) if ref[a, b] != matrix[a, b]]
        _check(not diff, f"decoded distances differ from the reference at {diff[:3]}")
        result["oracle"] = {"pairs_checked": fs.num_faces**2, "agrees": True}
    return result


def _dual_arc_list(fs, weights) -> list[tuple[int, int, float]]:
    return [(fs.dart_face[d ^ 1], fs.dart_face[d], w) for d, w in enumerate(weights) if w is not None]


def _spot_pairs(count: int) -> list[tuple[int, int]]:
    step = max(1, count // 4)
    return [(a, (a * 7 + 3) % count) for a in range(0, count, step)]


def _json_distance(x: float) -> float | int | None:
    return None if not math.isfinite(x) else _num(x)


def cmd_verify(cfg: RunConfig, ledger: RoundLedger) -> dict[str, Any]:
    """Run girth, exact flow and directed min cut on a seeded corpus against their oracles."""
    kinds = ("grid", "triangulation", "tree", "cycle")
    size = cfg.generator[1] if cfg.generator else 12
    checks = {"girth": 0, "maxflow": 0, "dirmincut": 0}
    failures: list[str] = []
    for i in range(cfg.corpus):
        kind = cfg.generator[0] if cfg.generator else kinds[i % len(kinds)]
        seed = cfg.seed + i
        try:
            und = oracles.gen_planar(kind, size, (1, 1000), seed)
            und_dir = oracles.gen_planar(kind, size, (0, 100), seed, directed=True, capacity_range=(1, 100))
        except ValueError as exc:
            raise DualPlanarError(str(exc)) from exc
        if und.m >= und.n:
            value, _ = weighted_girth(und, ledger=ledger, bandwidth_const=cfg.bandwidth_const)
            ref, _ = oracles.brute_girth(und)
            checks["girth"] += 1
            if value != ref:
                failures.append(f"girth seed {seed}: {value} != {ref}")
        s, t = und_dir.vertex_ids[0], und_dir.vertex_ids[und_dir.n - 1]
        value, _ = max_st_flow_exact(und_dir, s, t, ledger=ledger)
        ref = _reference_flow(und_dir, s, t)
        checks["maxflow"] += 1
        if value != ref:
            failures.append(f"maxflow seed {seed}: {value} != {ref}")
        cut = directed_global_min_cut(und_dir, ledger=ledger)
        ref, _ = oracles.brute_directed_global_cut(und_dir)
        checks["dirmincut"] += 1
        if cut.value != ref:
            failures.append(f"dirmincut seed {seed}: {cut.value} != {ref}")
    if failures:
        raise VerificationFailed("; ".join(failures))
    return {"corpus": cfg.corpus, "checks": checks, "agrees": True}


_HANDLERS = {
    "gen": cmd_gen,
    "girth": cmd_girth,
    "maxflow": cmd_maxflow,
    "mincut": cmd_mincut,
    "dirmincut": cmd_dirmincut,
    "labels": cmd_labels,
    "verify": cmd_verify,
}


# ----------------------------------------------------------------------
# output
# ----------------------------------------------------------------------
def render(report: dict[str, Any], output_format: str) -> str:
    if output_format == "structured":
        return json.dumps(report, sort_keys=True, separators=(",", ":"))
    lines = [f"{report['command']}: {report['status']}"]
    for key, value in sorted(report.get("result", {}).items()):
        if key in ("graph", "bdd"):
            lines.append(f"  {key}: {json.dumps(value, sort_keys=True)}")
        elif isinstance(value, (dict, list)):
            text = json.dumps(value, sort_keys=True)
            lines.append(f"  {key}: {text if len(text) <= 200 else text[:197] + '...'}")
        else:
            lines.append(f"  {key}: {value}")
    if "ledger" in report:
        led = report["ledger"]
        lines.append(f"  rounds: {led['rounds']} (max edge bits {led['max_edge_bits']})")
        for phase, rounds in sorted(led["phases"].items()):
            lines.append(f"    {phase}: {rounds}")
    if "error" in report:
        lines.append(f"  error: {report['error']}")
    return "\n".join(lines)


def run(cfg: RunConfig) -> tuple[int, dict[str, Any]]:
    """Execute a parsed configuration; returns ``(exit status, report)``."""
    ledger = RoundLedger()
    report: dict[str, Any] = {"schema": SCHEMA_VERSION, "command": cfg.command, "seed": cfg.seed}
    status = 0
    try:
        report["result"] = _HANDLERS[cfg.command](cfg, ledger)
        report["status"] = "verified" if cfg.verify else "ok"
    except VerificationFailed as exc:
        report["status"] = "disagreement"
        report["error"] = str(exc)
        status = 1
    if cfg.ledger:
        report["ledger"] = ledger.to_dict()
    return status, report


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    try:
        status, report = run(cfg)
    except (DualPlanarError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(render(report, cfg.output_format))
    if status == 1:
        print(f"error: {report['error']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
