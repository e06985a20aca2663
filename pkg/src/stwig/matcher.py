"""Per-partition STwig matching by exploration with binding propagation.

Each STwig is matched by loading local root candidates and label-checking
their children. Binding tables carry, per qnode, the set of data nodes still
in play; later STwigs restrict their candidates to those sets. A bound set
only ever shrinks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .graph_store import PartitionedGraph, cloud_load, index_get_ids, index_has_label
from .query_model import Decomposition, QueryGraph, STwig


class _UnboundType:
    """Sentinel: no constraint yet for a qnode (every node could match)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unbound"


Unbound = _UnboundType()


class BindingTable:
    """Per-qnode candidate sets H_x with monotone narrowing."""

    def __init__(self):
        self._bindings: dict[int, frozenset[int]] = {}

    def get(self, qnode: int):
        """The bound set for `qnode`, or the Unbound sentinel."""
        return self._bindings.get(qnode, Unbound)

    def is_bound(self, qnode: int) -> bool:
        return qnode in self._bindings

    def narrow(self, qnode: int, nodes) -> frozenset[int]:
        """Bind `qnode` to `nodes`, intersecting with any existing binding."""
        new = frozenset(nodes)
        if qnode in self._bindings:
            new &= self._bindings[qnode]
        self._bindings[qnode] = new
        return new

    def copy(self) -> "BindingTable":
        clone = BindingTable()
        clone._bindings = dict(self._bindings)
        return clone

    def snapshot(self) -> dict[int, frozenset[int]]:
        return dict(self._bindings)


@dataclass
class STwigResult:
    """Match tuples for one STwig on one partition (or a union of them).

    `schema` is the qnode column order (root first, then leaves); `tuples`
    holds data node ids in that order.
    """

    stwig_index: int
    schema: tuple[int, ...]
    tuples: set[tuple[int, ...]]

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def column(self, position: int) -> set[int]:
        return {t[position] for t in self.tuples}


def match_stwig(
    graph: PartitionedGraph,
    partition_id: int,
    stwig: STwig,
    query: QueryGraph,
    bindings: BindingTable,
    stwig_index: int = 0,
) -> STwigResult:
    """Match one STwig against one partition's local root candidates.

    Root candidates come from the local label index, or from the bound root
    set restricted to locally owned nodes. For each candidate the children
    are scanned per leaf: an unbound leaf needs a label check (remote checks
    cost one message each); a bound leaf needs only membership in its set,
    because bound sets contain label-verified nodes. Tuples that repeat a
    data node are discarded.
    """
    partition = graph.partitions[partition_id]
    root_binding = bindings.get(stwig.root)
    if root_binding is Unbound:
        roots = index_get_ids(partition, query.label(stwig.root))
    else:
        roots = sorted(n for n in root_binding if graph.owner(n) == partition_id)

    leaf_info = [(leaf, query.label(leaf), bindings.get(leaf)) for leaf in stwig.leaves]
    tuples: set[tuple[int, ...]] = set()
    for n in roots:
        children = cloud_load(graph, n, partition_id).neighbors
        leaf_sets: list[list[int]] = []
        for _, label, binding in leaf_info:
            if binding is Unbound:
                matched = [m for m in children if index_has_label(graph, m, label, partition_id)]
            else:
                matched = [m for m in children if m in binding]
            if not matched:
                leaf_sets = []
                break
            leaf_sets.append(matched)
        if not leaf_sets:
            continue
        for combo in itertools.product(*leaf_sets):
            tup = (n, *combo)
            if len(set(tup)) == len(tup):
                tuples.add(tup)
    return STwigResult(stwig_index=stwig_index, schema=stwig.schema, tuples=tuples)


def update_bindings(bindings: BindingTable, result: STwigResult) -> BindingTable:
    """Narrow each schema qnode to the nodes seen in its result column."""
    for position, qnode in enumerate(result.schema):
        bindings.narrow(qnode, result.column(position))
    return bindings


def explore(
    graph: PartitionedGraph,
    query: QueryGraph,
    decomposition: Decomposition,
    mode: str = "global",
) -> list[list[STwigResult]]:
    """Run every STwig on every partition, in order, propagating bindings.

    Returns results[k][i] for partition k and STwig i. In "global" mode one
    synchronization round per STwig merges the per-partition columns before
    any table is narrowed; the round costs 2*(K-1) messages (every other
    machine sends its sets to a hub, the hub sends the merged table back).
    In "local" mode each partition narrows only from its own results, which
    is cheaper but can prune matches that straddle partitions.
    """
    if mode not in ("global", "local"):
        raise ValueError(f"unknown binding mode {mode!r}")
    k = graph.partition_count
    results: list[list[STwigResult]] = [[] for _ in range(k)]

    if mode == "local":
        tables = [BindingTable() for _ in range(k)]
        for index, stwig in enumerate(decomposition.stwigs):
            for part in range(k):
                res = match_stwig(graph, part, stwig, query, tables[part], index)
                results[part].append(res)
                update_bindings(tables[part], res)
        return results

    table = BindingTable()
    for index, stwig in enumerate(decomposition.stwigs):
        round_results = [
            match_stwig(graph, part, stwig, query, table, index) for part in range(k)
        ]
        for part, res in enumerate(round_results):
            results[part].append(res)
        merged: dict[int, set[int]] = {q: set() for q in stwig.schema}
        for res in round_results:
            for position, qnode in enumerate(res.schema):
                merged[qnode] |= res.column(position)
        for qnode, nodes in merged.items():
            table.narrow(qnode, nodes)
        if k > 1:
            for part in range(1, k):
                graph.bus.record("bindings", part)  # send local sets to the hub
            graph.bus.record("bindings", 0, k - 1)  # hub returns the merged table
    return results


def dump_results(results: list[list[STwigResult]]) -> str:
    """Debug text: one `G[k](q_i): (...)` line per tuple, sorted."""
    lines = []
    for part, per_stwig in enumerate(results):
        for res in per_stwig:
            for tup in res.sorted_tuples():
                body = ",".join(str(v) for v in tup)
                lines.append(f"G[{part}](q_{res.stwig_index}): ({body})")
    return "\n".join(lines) + ("\n" if lines else "")
