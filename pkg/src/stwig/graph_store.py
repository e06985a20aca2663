"""Immutable partitioned labeled graph with message-counted remote access.

The graph is undirected and simple, split into K partitions ("machines") by a
seeded hash of the node id. Each partition keeps its own label index; label
checks and record loads that cross a partition boundary are tallied on a
message bus so tests can assert on communication counts.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import NotFoundError, ParseError, ValidationError

log = logging.getLogger(__name__)


def iter_records(lines: Iterable[str]) -> Iterator[tuple]:
    """Parse the shared `v <id> <label>` / `e <src> <dst>` line grammar.

    Yields ("v", lineno, id, label) and ("e", lineno, src, dst) tuples.
    `#` starts a comment (whole line or trailing); blank lines are skipped.
    """
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) != 3:
                raise ParseError(f"line {lineno}: expected 'v <id> <label>'")
            yield ("v", lineno, _parse_id(parts[1], lineno), parts[2])
        elif parts[0] == "e":
            if len(parts) != 3:
                raise ParseError(f"line {lineno}: expected 'e <src> <dst>'")
            yield ("e", lineno, _parse_id(parts[1], lineno), _parse_id(parts[2], lineno))
        else:
            raise ParseError(f"line {lineno}: unknown record type {parts[0]!r}")


def _parse_id(text: str, lineno: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ParseError(f"line {lineno}: node id {text!r} is not an integer") from None
    if value < 0:
        raise ParseError(f"line {lineno}: node id {value} is negative")
    return value


def _open_lines(source) -> Iterable[str]:
    # str and Path name a file on disk; anything else is used as a line iterable
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8").splitlines()
    return source


class MessageBus:
    """Exact per-partition tallies of cross-partition messages, by category.

    Categories: "load" (remote record loads), "haslabel" (remote label
    checks), "bindings" (binding synchronization rounds), "fetch" (result
    table transfers during join assembly). Counts are attributed to the
    partition that sends the request.
    """

    CATEGORIES = ("load", "haslabel", "bindings", "fetch")

    def __init__(self, partition_count: int):
        self._lock = threading.Lock()
        self._counts = {cat: [0] * partition_count for cat in self.CATEGORIES}

    def record(self, category: str, partition: int, count: int = 1) -> None:
        with self._lock:
            self._counts[category][partition] += count

    def total(self, category: str) -> int:
        with self._lock:
            return sum(self._counts[category])

    def per_partition(self, category: str) -> list[int]:
        with self._lock:
            return list(self._counts[category])

    def snapshot(self) -> dict[str, int]:
        """Totals per category, for before/after deltas around a run."""
        with self._lock:
            return {cat: sum(vals) for cat, vals in self._counts.items()}


@dataclass(frozen=True)
class NodeRecord:
    """One data node: global id, its label, and sorted global neighbor ids."""

    id: int
    label: str
    neighbors: tuple[int, ...]


@dataclass
class Partition:
    partition_id: int
    nodes: dict[int, NodeRecord]
    label_index: dict[str, tuple[int, ...]]  # label -> sorted local node ids


class LabelPairCatalog:
    """Which machine pairs hold an edge for each label pair.

    Entries are stored symmetrically: ((A,B),(i,j)) is present iff
    ((B,A),(j,i)) is. Built once at load time, then read-only.
    """

    def __init__(self):
        self._by_pair: dict[tuple[str, str], set[tuple[int, int]]] = {}

    def add(self, label_a: str, label_b: str, machine_i: int, machine_j: int) -> None:
        self._by_pair.setdefault((label_a, label_b), set()).add((machine_i, machine_j))
        self._by_pair.setdefault((label_b, label_a), set()).add((machine_j, machine_i))

    def machine_pairs(self, label_a: str, label_b: str) -> frozenset[tuple[int, int]]:
        return frozenset(self._by_pair.get((label_a, label_b), ()))

    def __contains__(self, entry: tuple[tuple[str, str], tuple[int, int]]) -> bool:
        labels, machines = entry
        return machines in self._by_pair.get(labels, ())

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_pair.values())

    def entries(self) -> Iterator[tuple[tuple[str, str], tuple[int, int]]]:
        for labels, machines in sorted(self._by_pair.items()):
            for pair in sorted(machines):
                yield (labels, pair)


@dataclass
class PartitionedGraph:
    partitions: list[Partition]
    placement: dict[int, int]
    catalog: LabelPairCatalog
    bus: MessageBus
    label_freq: dict[str, int]  # global label counts, replicated everywhere
    edge_count: int
    placement_seed: int

    @property
    def partition_count(self) -> int:
        return len(self.partitions)

    @property
    def node_count(self) -> int:
        return len(self.placement)

    def owner(self, id: int) -> int:
        try:
            return self.placement[id]
        except KeyError:
            raise NotFoundError(f"unknown node id {id}") from None

    def record(self, id: int) -> NodeRecord:
        """Direct record access without message accounting (tooling only)."""
        return self.partitions[self.owner(id)].nodes[id]

    def label_of(self, id: int) -> str:
        return self.record(id).label

    def neighbors_of(self, id: int) -> tuple[int, ...]:
        return self.record(id).neighbors

    def node_ids(self) -> Iterator[int]:
        for part in self.partitions:
            yield from part.nodes

    def nodes_with_label(self, label: str) -> list[int]:
        """All node ids with the label, across partitions (tooling only)."""
        out: list[int] = []
        for part in self.partitions:
            out.extend(part.label_index.get(label, ()))
        return sorted(out)


def default_placement(id: int, seed: int, k: int) -> int:
    """Stable seeded hash of the node id onto [0, k)."""
    digest = hashlib.blake2b(f"{seed}:{id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") % k


def load_graph(
    source,
    k: int,
    placement_seed: int = 0,
    placement: dict[int, int] | None = None,
) -> PartitionedGraph:
    """Load, symmetrize and partition a graph from `v`/`e` text.

    `source` is a path or an iterable of lines. `placement`, when given, maps
    every node id to a partition and overrides the seeded hash; this keeps
    hand-built multi-machine layouts reproducible in tests.

    Self-loops and repeated edges are dropped with a warning. A duplicate
    node id or an edge endpoint that is never declared is rejected.
    """
    if k < 1:
        raise ValidationError(f"partition count must be >= 1, got {k}")

    labels: dict[int, str] = {}
    pending_edges: list[tuple[int, int, int]] = []
    for rec in iter_records(_open_lines(source)):
        if rec[0] == "v":
            _, lineno, id, label = rec
            if id in labels:
                raise ParseError(f"line {lineno}: duplicate node id {id}")
            labels[id] = label
        else:
            _, lineno, src, dst = rec
            pending_edges.append((lineno, src, dst))

    edges: set[tuple[int, int]] = set()
    for lineno, src, dst in pending_edges:
        for endpoint in (src, dst):
            if endpoint not in labels:
                raise ParseError(f"line {lineno}: edge endpoint {endpoint} is not declared")
        if src == dst:
            log.warning("dropping self-loop at node %d (line %d)", src, lineno)
            continue
        key = (min(src, dst), max(src, dst))
        if key in edges:
            log.warning("dropping repeated edge %d-%d (line %d)", src, dst, lineno)
            continue
        edges.add(key)

    if placement is not None:
        missing = set(labels) - set(placement)
        if missing:
            raise ValidationError(f"placement is missing node ids: {sorted(missing)[:5]}")
        bad = {id: p for id, p in placement.items() if id in labels and not 0 <= p < k}
        if bad:
            raise ValidationError(f"placement out of range [0,{k}): {bad}")
        owner = {id: placement[id] for id in labels}
    else:
        owner = {id: default_placement(id, placement_seed, k) for id in labels}

    adjacency: dict[int, list[int]] = {id: [] for id in labels}
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)

    partitions = [Partition(i, {}, {}) for i in range(k)]
    per_label: list[dict[str, list[int]]] = [{} for _ in range(k)]
    for id in sorted(labels):
        part = partitions[owner[id]]
        part.nodes[id] = NodeRecord(id, labels[id], tuple(sorted(adjacency[id])))
        per_label[owner[id]].setdefault(labels[id], []).append(id)
    for i, part in enumerate(partitions):
        part.label_index = {lab: tuple(ids) for lab, ids in sorted(per_label[i].items())}

    catalog = LabelPairCatalog()
    for u, v in edges:
        catalog.add(labels[u], labels[v], owner[u], owner[v])

    return PartitionedGraph(
        partitions=partitions,
        placement=owner,
        catalog=catalog,
        bus=MessageBus(k),
        label_freq=dict(Counter(labels.values())),
        edge_count=len(edges),
        placement_seed=placement_seed,
    )


def parse_placement(source) -> dict[int, int]:
    """Read a placement override file: one `<node_id> <partition>` per line."""
    out: dict[int, int] = {}
    for lineno, raw in enumerate(_open_lines(source), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected '<node_id> <partition>'")
        id = _parse_id(parts[0], lineno)
        part = _parse_id(parts[1], lineno)
        if id in out:
            raise ParseError(f"line {lineno}: duplicate placement for node {id}")
        out[id] = part
    return out


def cloud_load(graph: PartitionedGraph, id: int, requester: int) -> NodeRecord:
    """Fetch a node record; a remote owner costs the requester one message."""
    owner = graph.owner(id)
    if owner != requester:
        graph.bus.record("load", requester)
    return graph.partitions[owner].nodes[id]


def index_get_ids(partition: Partition, label: str) -> tuple[int, ...]:
    """Local node ids carrying `label`, sorted. Never touches the network."""
    return partition.label_index.get(label, ())


def index_has_label(graph: PartitionedGraph, id: int, label: str, requester: int) -> bool:
    """Check a node's label; a remote owner costs the requester one message."""
    owner = graph.owner(id)
    if owner != requester:
        graph.bus.record("haslabel", requester)
    return graph.partitions[owner].nodes[id].label == label


def dump_partitions(graph: PartitionedGraph, directory) -> list[Path]:
    """Write one canonical text file per partition for bit-exact diffing.

    Each file lists the partition's `v` lines sorted by id, then the `e`
    lines for edges whose lower endpoint is local, sorted.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for part in graph.partitions:
        lines = [f"v {id} {rec.label}" for id, rec in sorted(part.nodes.items())]
        edge_lines = []
        for id, rec in sorted(part.nodes.items()):
            edge_lines.extend(f"e {id} {nbr}" for nbr in rec.neighbors if id < nbr)
        lines.extend(sorted(edge_lines, key=lambda s: tuple(map(int, s.split()[1:]))))
        path = directory / f"part-{part.partition_id}.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(path)
    return paths
