"""Generators, brute-force oracles, and the benchmark harness.

Everything here is tooling around the engine: synthetic graph and query
generation, exact reference implementations for testing, and a grid runner
that emits TSV. Oracles use direct graph access, so they never touch the
message counters.
"""

from __future__ import annotations

import math
import random
import statistics
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .coordinator import RunConfig, run_distributed_query
from .errors import ValidationError
from .graph_store import PartitionedGraph, load_graph
from .joiner import MatchTuple
from .query_model import QueryGraph

DEFAULT_PROBS = (0.45, 0.15, 0.15, 0.25)


@dataclass
class RmatParams:
    """Recursive-quadrant generator parameters.

    `probs` are the quadrant probabilities (upper-left, upper-right,
    lower-left, lower-right). `label_density` is label_count / node_count,
    kept for reporting when the caller specified density instead of a count.
    """

    node_count: int
    edge_count: int
    probs: tuple[float, float, float, float] = DEFAULT_PROBS
    label_count: int = 10
    seed: int = 0
    label_density: float | None = None

    def validate(self) -> None:
        if self.node_count < 2:
            raise ValidationError(f"node count must be >= 2, got {self.node_count}")
        capacity = self.node_count * (self.node_count - 1) // 2
        if not 0 < self.edge_count <= capacity:
            raise ValidationError(
                f"edge count {self.edge_count} outside (0, {capacity}] for a simple graph"
            )
        if len(self.probs) != 4 or any(p < 0 for p in self.probs):
            raise ValidationError("quadrant probabilities must be four nonnegative numbers")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValidationError(f"quadrant probabilities sum to {sum(self.probs)}, not 1")
        if self.label_count < 1:
            raise ValidationError("label count must be >= 1")


def gen_rmat(params: RmatParams) -> str:
    """Generate graph text with exactly the requested number of edges.

    Each edge picks one quadrant per bit level; self-loops, repeats, and
    positions beyond the node count are resampled. Deterministic per seed.
    """
    params.validate()
    n = params.node_count
    levels = max(1, math.ceil(math.log2(n)))
    rng = np.random.default_rng(params.seed)
    weights = 1 << np.arange(levels - 1, -1, -1)

    edges: set[tuple[int, int]] = set()
    need = params.edge_count
    rounds = 0
    while need > 0:
        rounds += 1
        if rounds > 10_000:
            raise RuntimeError("edge sampling failed to converge")
        batch = max(2 * need, 1024)
        quadrant = rng.choice(4, size=(batch, levels), p=list(params.probs))
        src = (((quadrant >> 1) & 1) * weights).sum(axis=1)
        dst = ((quadrant & 1) * weights).sum(axis=1)
        keep = (src < n) & (dst < n) & (src != dst)
        for u, v in zip(src[keep].tolist(), dst[keep].tolist()):
            key = (u, v) if u < v else (v, u)
            if key not in edges:
                edges.add(key)
                need -= 1
                if need == 0:
                    break

    labels = rng.integers(0, params.label_count, size=n)
    lines = [f"v {i} l{labels[i]}" for i in range(n)]
    lines.extend(f"e {u} {v}" for u, v in sorted(edges))
    return "\n".join(lines) + "\n"


def gen_query_dfs(
    graph: PartitionedGraph,
    n: int,
    seed: int,
    tree_only: bool = False,
    max_attempts: int = 50,
) -> QueryGraph:
    """A query cut from the data graph: the first `n` nodes of a random DFS.

    Query edges are the induced data edges among the kept nodes, so the
    query always has at least its own embedding as a match. With
    `tree_only`, only the DFS tree edges are kept instead. Qnode ids follow
    visit order; labels come from the data nodes.
    """
    if n < 2:
        raise ValidationError(f"query node count must be >= 2, got {n}")
    if graph.node_count < n:
        raise ValidationError(f"graph has only {graph.node_count} nodes, need {n}")
    rng = random.Random(seed)
    ids = sorted(graph.node_ids())
    for _ in range(max_attempts):
        start = rng.choice(ids)
        visited: list[int] = []
        seen: set[int] = set()
        tree_edges: list[tuple[int, int]] = []
        stack: list[tuple[int, int | None]] = [(start, None)]
        while stack and len(visited) < n:
            node, parent = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            visited.append(node)
            if parent is not None:
                tree_edges.append((parent, node))
            neighbors = list(graph.neighbors_of(node))
            rng.shuffle(neighbors)
            for nbr in neighbors:
                if nbr not in seen:
                    stack.append((nbr, node))
        if len(visited) < n:
            continue
        position = {node: i for i, node in enumerate(visited)}
        labels = {i: graph.label_of(node) for node, i in position.items()}
        if tree_only:
            qedges = {(position[u], position[v]) for u, v in tree_edges}
        else:
            kept = set(visited)
            qedges = {
                (position[u], position[v])
                for u in visited
                for v in graph.neighbors_of(u)
                if v in kept and u < v
            }
        return QueryGraph(labels, qedges)
    raise ValidationError(f"no connected region of {n} nodes found in {max_attempts} attempts")


def gen_query_random(n: int, e: int, labels: Sequence[str], seed: int) -> QueryGraph:
    """Random connected simple query: a spanning tree plus extra edges."""
    if n < 2:
        raise ValidationError(f"query node count must be >= 2, got {n}")
    capacity = n * (n - 1) // 2
    if not n - 1 <= e <= capacity:
        raise ValidationError(f"edge count {e} outside [{n - 1}, {capacity}] for {n} nodes")
    if not labels:
        raise ValidationError("label pool is empty")
    rng = random.Random(seed)
    edges = {(rng.randrange(i), i) for i in range(1, n)}
    free = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    edges.update(rng.sample(free, e - len(edges)))
    node_labels = {i: rng.choice(list(labels)) for i in range(n)}
    return QueryGraph(node_labels, edges)


def oracle_match(
    graph: PartitionedGraph,
    query: QueryGraph,
    node_limit: int = 2000,
    force: bool = False,
) -> set[MatchTuple]:
    """Exhaustive backtracking reference: exact answer set, small graphs only.

    Assignments are injective, label-preserving, and map every query edge to
    a data edge. The guard keeps accidental large runs out; `force` lifts it.
    """
    if graph.node_count > node_limit and not force:
        raise ValidationError(
            f"graph has {graph.node_count} nodes, oracle guard is {node_limit}"
        )
    adjacency = {id: set(graph.neighbors_of(id)) for id in graph.node_ids()}
    freq = graph.label_freq

    qids = list(query.qnode_ids)
    order = [min(qids, key=lambda q: (freq.get(query.label(q), 0), q))]
    placed = {order[0]}
    while len(order) < len(qids):
        frontier = [
            q
            for q in qids
            if q not in placed and any(nb in placed for nb in query.neighbors(q))
        ]
        nxt = min(frontier, key=lambda q: (freq.get(query.label(q), 0), q))
        order.append(nxt)
        placed.add(nxt)

    matches: set[MatchTuple] = set()
    assignment: dict[int, int] = {}
    used: set[int] = set()

    def extend(depth: int) -> None:
        if depth == len(order):
            matches.add(MatchTuple.from_assignment(assignment))
            return
        qnode = order[depth]
        label = query.label(qnode)
        anchors = [nb for nb in query.neighbors(qnode) if nb in assignment]
        if anchors:
            candidates: Iterable[int] = adjacency[assignment[anchors[0]]]
        else:
            candidates = graph.nodes_with_label(label)
        for node in candidates:
            if node in used or graph.label_of(node) != label:
                continue
            if any(assignment[a] not in adjacency[node] for a in anchors):
                continue
            assignment[qnode] = node
            used.add(node)
            extend(depth + 1)
            del assignment[qnode]
            used.discard(node)

    extend(0)
    return matches


def brute_min_stwig_cover(query: QueryGraph, node_limit: int = 12) -> int:
    """Exact minimum cover size by exhaustive vertex-cover search.

    A set of roots covering every query edge yields one STwig per root and
    vice versa, so the minimum cover size equals the minimum vertex cover.
    """
    qids = query.qnode_ids
    if len(qids) > node_limit:
        raise ValidationError(f"query has {len(qids)} nodes, brute-force guard is {node_limit}")
    edges = query.qedges
    for size in range(1, len(qids) + 1):
        for combo in combinations(qids, size):
            cover = set(combo)
            if all(u in cover or v in cover for u, v in edges):
                return size
    raise RuntimeError("unreachable: the full vertex set covers every edge")


BENCH_COLUMNS = (
    "nodes",
    "edges",
    "labels",
    "partitions",
    "mode",
    "load_sets",
    "queries",
    "mean_ms",
    "median_ms",
    "mean_matches",
    "mean_fetch",
    "mean_haslabel",
    "mean_bindings",
    "over_timeout",
)


def bench(config: dict) -> list[dict]:
    """Run query batches over a (graph, partitions, mode, load-sets) grid.

    Config keys: `graphs` (list of RmatParams-style dicts with nodes,
    avg_degree or edge count, label_count or label_density, seed),
    `partitions`, `modes`, `load_sets`, `queries` (kind dfs|random, count,
    nodes, edges, seed), `limit`, `block_size`, `timeout_ms`.
    """
    partitions = config.get("partitions", [1])
    modes = config.get("modes", ["global"])
    load_set_modes = config.get("load_sets", ["on"])
    qconf = config.get("queries", {})
    kind = qconf.get("kind", "dfs")
    count = qconf.get("count", 100)
    qnodes = qconf.get("nodes", 10)
    qedges = qconf.get("edges", 20)
    qseed = qconf.get("seed", 0)
    limit = config.get("limit", 1024)
    block_size = config.get("block_size", 4096)
    timeout_ms = config.get("timeout_ms")

    rows: list[dict] = []
    for gconf in config.get("graphs", []):
        n = gconf["nodes"]
        if "edges" in gconf:
            edge_count = gconf["edges"]
        else:
            edge_count = max(1, round(n * gconf.get("avg_degree", 8) / 2))
        if "label_count" in gconf:
            label_count = gconf["label_count"]
            density = label_count / n
        else:
            density = gconf.get("label_density", 0.01)
            label_count = max(1, round(density * n))
        params = RmatParams(
            node_count=n,
            edge_count=edge_count,
            label_count=label_count,
            seed=gconf.get("seed", 0),
            label_density=density,
        )
        text = gen_rmat(params)
        for k in partitions:
            graph = load_graph(text.splitlines(), k, placement_seed=gconf.get("seed", 0))
            queries = _bench_queries(graph, kind, count, qnodes, qedges, qseed)
            for mode in modes:
                for ls in load_set_modes:
                    run_config = RunConfig(
                        mode=mode, load_sets=ls, limit=limit, block_size=block_size
                    )
                    elapsed: list[float] = []
                    matched: list[int] = []
                    fetches: list[int] = []
                    haslabels: list[int] = []
                    bindings: list[int] = []
                    over = 0
                    for q in queries:
                        t0 = time.perf_counter()
                        result = run_distributed_query(graph, q, run_config)
                        ms = (time.perf_counter() - t0) * 1000
                        elapsed.append(ms)
                        matched.append(result.stats.matches)
                        fetches.append(result.stats.messages_fetch)
                        haslabels.append(result.stats.messages_haslabel)
                        bindings.append(result.stats.messages_bindings)
                        if timeout_ms is not None and ms > timeout_ms:
                            over += 1
                    rows.append(
                        {
                            "nodes": n,
                            "edges": edge_count,
                            "labels": label_count,
                            "partitions": k,
                            "mode": mode,
                            "load_sets": ls,
                            "queries": len(queries),
                            "mean_ms": round(statistics.mean(elapsed), 3),
                            "median_ms": round(statistics.median(elapsed), 3),
                            "mean_matches": round(statistics.mean(matched), 3),
                            "mean_fetch": round(statistics.mean(fetches), 3),
                            "mean_haslabel": round(statistics.mean(haslabels), 3),
                            "mean_bindings": round(statistics.mean(bindings), 3),
                            "over_timeout": over,
                        }
                    )
    return rows


def _bench_queries(
    graph: PartitionedGraph, kind: str, count: int, n: int, e: int, seed: int
) -> list[QueryGraph]:
    queries = []
    labels = sorted(graph.label_freq)
    capacity = n * (n - 1) // 2
    clamped = min(max(e, n - 1), capacity)
    for i in range(count):
        if kind == "dfs":
            queries.append(gen_query_dfs(graph, n, seed + i))
        elif kind == "random":
            queries.append(gen_query_random(n, clamped, labels, seed + i))
        else:
            raise ValidationError(f"unknown query kind {kind!r}")
    return queries


def bench_rows_to_tsv(rows: list[dict]) -> str:
    lines = ["\t".join(BENCH_COLUMNS)]
    for row in rows:
        lines.append("\t".join(str(row[c]) for c in BENCH_COLUMNS))
    return "\n".join(lines) + "\n"
