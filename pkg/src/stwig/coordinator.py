"""Distributed query driver: cluster graph, head STwig, load sets, union.

Every machine matches every STwig locally, then assembles the result tables
it needs for its own join. The head STwig is never fetched remotely, so the
per-machine joins anchor on disjoint local head tuples and their union needs
no deduplication. Load sets bound which machines are worth fetching from,
using cluster-graph distances against query-graph distances.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .decomposer import stwig_order_selection
from .errors import UnmatchableQueryError
from .graph_store import LabelPairCatalog, PartitionedGraph
from .joiner import MatchTuple, pipelined_join, select_join_order
from .matcher import STwigResult, explore
from .query_model import Decomposition, QueryGraph, STwig


@dataclass
class ClusterGraph:
    """Machine-level connectivity induced by a query's edge label pairs."""

    machine_count: int
    edges: frozenset[tuple[int, int]]  # (i, j) with i < j
    dist: tuple[tuple[float, ...], ...]  # math.inf when unreachable

    def distance(self, i: int, j: int) -> float:
        return self.dist[i][j]


class QueryDistanceMatrix:
    """All-pairs hop distances between qnodes."""

    def __init__(self, dist: dict[tuple[int, int], int]):
        self._dist = dist

    def get(self, u: int, v: int) -> int:
        return self._dist[(u, v)]


@dataclass
class LoadSetTable:
    """F(machine, stwig): which machines to fetch that STwig's results from."""

    head: int
    table: dict[tuple[int, int], frozenset[int]]

    def get(self, machine: int, stwig_index: int) -> frozenset[int]:
        return self.table.get((machine, stwig_index), frozenset())


def build_cluster_graph(catalog: LabelPairCatalog, query: QueryGraph, k: int) -> ClusterGraph:
    """Edge i-j iff some query edge's label pair crosses machines i and j."""
    edges: set[tuple[int, int]] = set()
    for label_a, label_b in query.edge_label_pairs():
        for i, j in catalog.machine_pairs(label_a, label_b):
            if i != j:
                edges.add((min(i, j), max(i, j)))
    adjacency: list[list[int]] = [[] for _ in range(k)]
    for i, j in edges:
        adjacency[i].append(j)
        adjacency[j].append(i)

    dist = [[math.inf] * k for _ in range(k)]
    for start in range(k):
        dist[start][start] = 0
        frontier = [start]
        depth = 0
        while frontier:
            depth += 1
            nxt = []
            for node in frontier:
                for nbr in adjacency[node]:
                    if math.isinf(dist[start][nbr]):
                        dist[start][nbr] = depth
                        nxt.append(nbr)
            frontier = nxt
    return ClusterGraph(
        machine_count=k,
        edges=frozenset(edges),
        dist=tuple(tuple(row) for row in dist),
    )


def query_distances(query: QueryGraph) -> QueryDistanceMatrix:
    """All-pairs shortest hop counts over the query graph (Floyd recurrence)."""
    ids = query.qnode_ids
    dist: dict[tuple[int, int], float] = {}
    for u in ids:
        for v in ids:
            if u == v:
                dist[(u, v)] = 0
            elif v in query.neighbors(u):
                dist[(u, v)] = 1
            else:
                dist[(u, v)] = math.inf
    for w in ids:
        for u in ids:
            through = dist[(u, w)]
            if math.isinf(through):
                continue
            for v in ids:
                cand = through + dist[(w, v)]
                if cand < dist[(u, v)]:
                    dist[(u, v)] = cand
    # connectivity is validated at parse time, so every entry is finite
    return QueryDistanceMatrix({k: int(v) for k, v in dist.items()})


def select_head_stwig(
    stwigs: list[STwig], m: QueryDistanceMatrix, cluster: ClusterGraph
) -> tuple[int, int, int]:
    """Pick the STwig minimizing total fetch cost.

    For candidate s, d(s) is the largest root-to-root query distance and the
    cost T(s) counts, over every machine k, the machines within cluster
    distance d(s) of k (k itself included). Returns (index, d(s), T(s));
    ties prefer smaller d(s), then the earlier STwig.
    """
    k = cluster.machine_count
    best: tuple[int, int, int] | None = None
    for s, stwig in enumerate(stwigs):
        d_s = max(m.get(stwig.root, other.root) for other in stwigs)
        t_s = sum(
            1
            for machine in range(k)
            for j in range(k)
            if cluster.distance(machine, j) <= d_s
        )
        key = (t_s, d_s, s)
        if best is None or key < best:
            best = key
    assert best is not None
    t_s, d_s, s = best
    return s, d_s, t_s


def compute_load_sets(
    head: int, stwigs: list[STwig], m: QueryDistanceMatrix, cluster: ClusterGraph
) -> LoadSetTable:
    """F(k, t) = machines j != k within cluster distance of the root gap.

    The threshold for STwig t is the query distance between the head root
    and t's root; the head itself is never fetched (F(k, head) is empty).
    """
    k = cluster.machine_count
    table: dict[tuple[int, int], frozenset[int]] = {}
    head_root = stwigs[head].root
    for t, stwig in enumerate(stwigs):
        if t == head:
            continue
        threshold = m.get(head_root, stwig.root)
        for machine in range(k):
            table[(machine, t)] = frozenset(
                j for j in range(k) if j != machine and cluster.distance(machine, j) <= threshold
            )
    return LoadSetTable(head=head, table=table)


def fetch_all_load_sets(head: int, stwig_count: int, k: int) -> LoadSetTable:
    """Baseline: fetch every non-head STwig from every other machine."""
    table = {
        (machine, t): frozenset(j for j in range(k) if j != machine)
        for machine in range(k)
        for t in range(stwig_count)
        if t != head
    }
    return LoadSetTable(head=head, table=table)


@dataclass
class RunConfig:
    mode: str = "global"  # binding propagation: "global" or "local"
    load_sets: str = "on"  # "on" (distance-bounded) or "fetch-all"
    limit: int | None = None
    block_size: int = 4096
    sample_rate: float = 0.1
    seed: int = 0


@dataclass
class RunStats:
    partitions: int
    head: int
    d_s: int
    t_s: int
    messages_fetch: int
    messages_haslabel: int
    messages_bindings: int
    stwig_result_sizes: tuple[int, ...]
    matches: int
    elapsed_ms: int

    def to_text(self) -> str:
        sizes = ",".join(str(n) for n in self.stwig_result_sizes)
        lines = [
            f"partitions={self.partitions}",
            f"head={self.head}",
            f"d_s={self.d_s}",
            f"T_s={self.t_s}",
            f"messages_fetch={self.messages_fetch}",
            f"messages_haslabel={self.messages_haslabel}",
            f"messages_bindings={self.messages_bindings}",
            f"stwig_result_sizes={sizes}",
            f"matches={self.matches}",
            f"elapsed_ms={self.elapsed_ms}",
        ]
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {
            "partitions": self.partitions,
            "head": self.head,
            "d_s": self.d_s,
            "T_s": self.t_s,
            "messages_fetch": self.messages_fetch,
            "messages_haslabel": self.messages_haslabel,
            "messages_bindings": self.messages_bindings,
            "stwig_result_sizes": list(self.stwig_result_sizes),
            "matches": self.matches,
            "elapsed_ms": self.elapsed_ms,
        }


@dataclass
class RunResult:
    matches: list[MatchTuple]
    stats: RunStats
    decomposition: Decomposition | None
    per_machine: list[list[MatchTuple]] = field(default_factory=list)


def run_distributed_query(
    graph: PartitionedGraph, query: QueryGraph, config: RunConfig | None = None
) -> RunResult:
    """Full pipeline: decompose, explore, assemble per-machine tables, join.

    Machine k joins R_k(q_i) = its own G_k(q_i) plus the tables fetched per
    its load sets, except the head STwig which stays strictly local; the
    per-machine outputs are disjoint, so the final answer is their plain
    concatenation. A result limit is global across machines.
    """
    config = config or RunConfig()
    start = time.perf_counter()
    before = graph.bus.snapshot()
    k = graph.partition_count

    def finish(matches, per_machine, decomposition, head, d_s, t_s, sizes):
        after = graph.bus.snapshot()
        elapsed_ms = int((time.perf_counter() - start) * 1000)
        stats = RunStats(
            partitions=k,
            head=head,
            d_s=d_s,
            t_s=t_s,
            messages_fetch=after["fetch"] - before["fetch"],
            messages_haslabel=after["haslabel"] - before["haslabel"],
            messages_bindings=after["bindings"] - before["bindings"],
            stwig_result_sizes=sizes,
            matches=len(matches),
            elapsed_ms=elapsed_ms,
        )
        return RunResult(matches, stats, decomposition, per_machine)

    try:
        decomposition = stwig_order_selection(query, graph.label_freq)
    except UnmatchableQueryError:
        return finish([], [[] for _ in range(k)], None, -1, -1, -1, ())

    stwigs = decomposition.stwigs
    m = query_distances(query)
    cluster = build_cluster_graph(graph.catalog, query, k)
    head, d_s, t_s = select_head_stwig(stwigs, m, cluster)
    decomposition.head_index = head
    if config.load_sets == "fetch-all":
        load_sets = fetch_all_load_sets(head, len(stwigs), k)
    elif config.load_sets == "on":
        load_sets = compute_load_sets(head, stwigs, m, cluster)
    else:
        raise ValueError(f"unknown load-set mode {config.load_sets!r}")

    results = explore(graph, query, decomposition, mode=config.mode)
    sizes = tuple(
        sum(len(results[part][i].tuples) for part in range(k)) for i in range(len(stwigs))
    )

    all_matches: list[MatchTuple] = []
    per_machine: list[list[MatchTuple]] = []
    remaining = config.limit
    for machine in range(k):
        if remaining is not None and remaining <= 0:
            per_machine.append([])
            continue
        suppliers: set[int] = set()
        tables: list[STwigResult] = []
        for i in range(len(stwigs)):
            tuples = set(results[machine][i].tuples)
            for j in load_sets.get(machine, i):
                tuples |= results[j][i].tuples
                suppliers.add(j)
            tables.append(STwigResult(i, results[machine][i].schema, tuples))
        # one message per supplier: a machine batches every table it needs
        # from the same peer into a single request
        if suppliers:
            graph.bus.record("fetch", machine, len(suppliers))
        plan = select_join_order(
            tables,
            query,
            sample_rate=config.sample_rate,
            seed=config.seed * 10007 + machine,
            head_index=head,
        )
        local = list(pipelined_join(tables, plan, config.block_size, limit=remaining))
        per_machine.append(local)
        all_matches.extend(local)
        if remaining is not None:
            remaining -= len(local)

    return finish(all_matches, per_machine, decomposition, head, d_s, t_s, sizes)
