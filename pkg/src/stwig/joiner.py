"""Join STwig results into full matches.

Join order is picked greedily from sampled cardinality estimates, then the
join itself runs as a block-based pipeline: the first relation is swept in
blocks, each block is extended through hash lookups into the remaining
relations, and finished rows stream out before later blocks start.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ValidationError
from .matcher import STwigResult
from .query_model import QueryGraph

MIN_SAMPLE = 100


@dataclass(frozen=True)
class MatchTuple:
    """A complete query match: qnode id -> data node id, injective."""

    items: tuple[tuple[int, int], ...]  # sorted by qnode id

    @classmethod
    def from_assignment(cls, assignment: dict[int, int]) -> "MatchTuple":
        return cls(tuple(sorted(assignment.items())))

    @property
    def assignment(self) -> dict[int, int]:
        return dict(self.items)

    def row(self, order: Sequence[int]) -> tuple[int, ...]:
        mapping = dict(self.items)
        return tuple(mapping[q] for q in order)


@dataclass
class JoinPlan:
    order: tuple[int, ...]  # positions into the relation list
    estimated_sizes: tuple[float, ...]  # one estimate per prefix
    sample_rate: float


def _rows(result: STwigResult) -> list[dict[int, int]]:
    return [dict(zip(result.schema, t)) for t in result.sorted_tuples()]


def _join_rows(
    left: list[dict[int, int]], right: STwigResult
) -> list[dict[int, int]]:
    """Natural join on shared qnodes with a per-row distinctness filter."""
    if not left:
        return []
    key = tuple(sorted(set(left[0]) & set(right.schema)))
    index: dict[tuple[int, ...], list[dict[int, int]]] = defaultdict(list)
    for row in _rows(right):
        index[tuple(row[q] for q in key)].append(row)
    out = []
    for row in left:
        for cand in index.get(tuple(row[q] for q in key), ()):
            merged = dict(row)
            merged.update(cand)
            values = list(merged.values())
            if len(set(values)) == len(values):
                out.append(merged)
    return out


def select_join_order(
    results: Sequence[STwigResult],
    query: QueryGraph,
    sample_rate: float = 0.1,
    seed: int = 0,
    head_index: int | None = None,
) -> JoinPlan:
    """Greedy join order from sampled intermediate-size estimates.

    Starts from the head relation when one is designated, otherwise from the
    smallest relation. Each step joins a uniform sample of the current
    intermediate against every connected candidate and appends the one with
    the smallest scaled estimate. Ties go to the smaller relation, then the
    lower position.
    """
    if not results:
        raise ValidationError("nothing to join")
    if not 0 < sample_rate <= 1:
        raise ValidationError(f"sample rate must be in (0,1], got {sample_rate}")
    rng = random.Random(seed)

    def sample(rows: list[dict[int, int]], population: float) -> list[dict[int, int]]:
        want = max(math.ceil(sample_rate * population), MIN_SAMPLE)
        if len(rows) <= want:
            return rows
        return rng.sample(rows, want)

    if head_index is not None:
        start = head_index
    else:
        start = min(range(len(results)), key=lambda i: (len(results[i].tuples), i))

    order = [start]
    chosen_qnodes = set(results[start].schema)
    estimate = float(len(results[start].tuples))
    estimates = [estimate]
    working = sample(_rows(results[start]), estimate)

    pending = [i for i in range(len(results)) if i != start]
    while pending:
        connected = [i for i in pending if chosen_qnodes & set(results[i].schema)]
        if not connected:
            raise RuntimeError("join graph is disconnected; not a cover of a connected query")
        scored = []
        for i in connected:
            joined = _join_rows(working, results[i])
            scale = estimate / len(working) if working else 0.0
            scored.append((len(joined) * scale, len(results[i].tuples), i, joined))
        est, _, best, joined = min(scored, key=lambda s: (s[0], s[1], s[2]))
        order.append(best)
        pending.remove(best)
        chosen_qnodes |= set(results[best].schema)
        estimate = est
        estimates.append(estimate)
        working = sample(joined, estimate)
    return JoinPlan(order=tuple(order), estimated_sizes=tuple(estimates), sample_rate=sample_rate)


def pipelined_join(
    results: Sequence[STwigResult],
    plan: JoinPlan,
    block_size: int = 4096,
    limit: int | None = None,
) -> Iterator[MatchTuple]:
    """Stream complete matches, at most `block_size` driver rows in flight.

    Hash indexes over the non-driving relations are built once; the driving
    relation is consumed block by block so early matches surface before the
    whole join finishes. Stops after `limit` tuples when a limit is given.
    """
    if block_size < 1:
        raise ValidationError(f"block size must be >= 1, got {block_size}")
    if limit is not None and limit <= 0:
        return
    ordered = [results[i] for i in plan.order]
    driver = ordered[0]

    indexed: list[tuple[tuple[int, ...], dict[tuple[int, ...], list[dict[int, int]]]]] = []
    accumulated = set(driver.schema)
    for rel in ordered[1:]:
        key = tuple(sorted(accumulated & set(rel.schema)))
        if not key:
            raise RuntimeError("join graph is disconnected; not a cover of a connected query")
        index: dict[tuple[int, ...], list[dict[int, int]]] = defaultdict(list)
        for row in _rows(rel):
            index[tuple(row[q] for q in key)].append(row)
        indexed.append((key, index))
        accumulated |= set(rel.schema)

    emitted = 0
    driver_rows = driver.sorted_tuples()
    for offset in range(0, len(driver_rows), block_size):
        block = [dict(zip(driver.schema, t)) for t in driver_rows[offset : offset + block_size]]
        rows = block
        for key, index in indexed:
            extended = []
            for row in rows:
                for cand in index.get(tuple(row[q] for q in key), ()):
                    merged = dict(row)
                    merged.update(cand)
                    values = list(merged.values())
                    if len(set(values)) == len(values):
                        extended.append(merged)
            rows = extended
            if not rows:
                break
        for row in rows:
            yield MatchTuple.from_assignment(row)
            emitted += 1
            if limit is not None and emitted >= limit:
                return
