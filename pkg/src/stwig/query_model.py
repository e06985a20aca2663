"""Query graph representation, validation, and the STwig decomposition unit."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .graph_store import _open_lines, iter_records

log = logging.getLogger(__name__)


class QueryGraph:
    """A connected, simple, labeled pattern graph.

    Query nodes are addressed by integer qnode id; labels may repeat across
    qnodes. Immutable after construction.
    """

    def __init__(self, qnodes: dict[int, str], qedges: set[tuple[int, int]]):
        self._labels = dict(qnodes)
        self._edges = frozenset((min(u, v), max(u, v)) for u, v in qedges)
        adjacency: dict[int, set[int]] = {q: set() for q in self._labels}
        for u, v in self._edges:
            for endpoint in (u, v):
                if endpoint not in self._labels:
                    raise ValidationError(f"edge endpoint {endpoint} is not a query node")
            adjacency[u].add(v)
            adjacency[v].add(u)
        self._adjacency = {q: tuple(sorted(nbrs)) for q, nbrs in adjacency.items()}
        self._validate()

    def _validate(self) -> None:
        if not self._edges:
            raise ValidationError("query has no edges")
        if any(u == v for u, v in self._edges):
            raise ValidationError("query contains a self-loop")
        # connectivity over all declared qnodes, isolated nodes included
        start = next(iter(self._labels))
        seen = {start}
        stack = [start]
        while stack:
            for nbr in self._adjacency[stack.pop()]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        if seen != set(self._labels):
            raise ValidationError("query is not connected")

    @property
    def qnode_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._labels))

    @property
    def qedges(self) -> frozenset[tuple[int, int]]:
        return self._edges

    def label(self, qnode: int) -> str:
        return self._labels[qnode]

    @property
    def labels(self) -> dict[int, str]:
        return dict(self._labels)

    def neighbors(self, qnode: int) -> tuple[int, ...]:
        return self._adjacency[qnode]

    def degree(self, qnode: int) -> int:
        return len(self._adjacency[qnode])

    def edge_label_pairs(self) -> set[tuple[str, str]]:
        """Unordered label pairs realized by the query's edges."""
        return {(self._labels[u], self._labels[v]) for u, v in self._edges}

    def to_text(self) -> str:
        lines = [f"v {q} {self._labels[q]}" for q in sorted(self._labels)]
        lines.extend(f"e {u} {v}" for u, v in sorted(self._edges))
        return "\n".join(lines) + "\n"

    def __eq__(self, other) -> bool:
        if not isinstance(other, QueryGraph):
            return NotImplemented
        return self._labels == other._labels and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((tuple(sorted(self._labels.items())), self._edges))

    def __repr__(self) -> str:
        return f"QueryGraph(nodes={len(self._labels)}, edges={len(self._edges)})"


@dataclass(frozen=True)
class STwig:
    """A two-level tree unit: a root qnode plus the leaf qnodes under it.

    The covered query edges (root, leaf) are the unit's provenance within a
    decomposition.
    """

    root: int
    leaves: tuple[int, ...]

    def __post_init__(self):
        if self.root in self.leaves:
            raise ValidationError(f"STwig root {self.root} repeated among its leaves")
        if len(set(self.leaves)) != len(self.leaves):
            raise ValidationError("STwig leaves are not distinct")
        if not self.leaves:
            raise ValidationError("STwig has no leaves")

    @property
    def schema(self) -> tuple[int, ...]:
        """Column order of result tuples: root first, then the leaves."""
        return (self.root, *self.leaves)

    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset((min(self.root, l), max(self.root, l)) for l in self.leaves)


@dataclass
class Decomposition:
    """Ordered STwig cover; the head index is filled in by the coordinator."""

    stwigs: list[STwig]
    head_index: int | None = None

    def __len__(self) -> int:
        return len(self.stwigs)


def parse_query(source) -> QueryGraph:
    """Parse a query from the shared `v`/`e` grammar and validate it.

    Rejects disconnected queries, self-loops, and empty edge sets. A repeated
    edge is dropped with a warning, mirroring graph loading.
    """
    labels: dict[int, str] = {}
    edges: set[tuple[int, int]] = set()
    pending: list[tuple[int, int, int]] = []
    for rec in iter_records(_open_lines(source)):
        if rec[0] == "v":
            _, lineno, id, label = rec
            if id in labels:
                raise ParseError(f"line {lineno}: duplicate qnode id {id}")
            labels[id] = label
        else:
            _, lineno, u, v = rec
            pending.append((lineno, u, v))
    for lineno, u, v in pending:
        for endpoint in (u, v):
            if endpoint not in labels:
                raise ParseError(f"line {lineno}: edge endpoint {endpoint} is not declared")
        if u == v:
            raise ValidationError(f"line {lineno}: query contains self-loop at {u}")
        key = (min(u, v), max(u, v))
        if key in edges:
            log.warning("dropping repeated query edge %d-%d (line %d)", u, v, lineno)
            continue
        edges.add(key)
    return QueryGraph(labels, edges)
