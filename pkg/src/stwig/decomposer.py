"""STwig cover and processing order via f-value guided edge selection.

The decomposition repeatedly picks the residual edge with the largest
f-value sum, roots one STwig at each endpoint that still has edges, and
keeps a pool S of leaf qnodes so that later STwig roots are already bound
by earlier results. Picked edges never share an endpoint, which bounds the
cover size by twice the optimum.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import UnmatchableQueryError
from .query_model import Decomposition, QueryGraph, STwig

FreqTable = dict[str, int]


def f_value(qnode: int, query: QueryGraph, freqs: FreqTable) -> Fraction | None:
    """Selectivity score deg(v)/freq(label(v)), exact.

    Returns None when the label never occurs in the data graph; any query
    containing such a node has an empty answer.
    """
    freq = freqs.get(query.label(qnode), 0)
    if freq <= 0:
        return None
    return Fraction(query.degree(qnode), freq)


def stwig_order_selection(query: QueryGraph, freqs: FreqTable) -> Decomposition:
    """Decompose the query into an ordered STwig cover.

    Raises UnmatchableQueryError if some query label has zero frequency.
    f-values are computed once on the original query degrees. Ties between
    edges with equal f-value sums go to the lexicographically smallest
    (min qnode id, max qnode id) pair, so output is deterministic.
    """
    score: dict[int, Fraction] = {}
    for q in query.qnode_ids:
        f = f_value(q, query, freqs)
        if f is None:
            raise UnmatchableQueryError(query.label(q))
        score[q] = f

    residual: dict[int, set[int]] = {q: set(query.neighbors(q)) for q in query.qnode_ids}
    remaining = {e for e in query.qedges}
    pool: set[int] = set()  # qnodes eligible as the next root
    stwigs: list[STwig] = []

    def emit(root: int) -> None:
        leaves = tuple(sorted(residual[root]))
        stwigs.append(STwig(root, leaves))
        pool.update(leaves)
        for leaf in leaves:
            residual[leaf].discard(root)
            remaining.discard((min(root, leaf), max(root, leaf)))
        residual[root].clear()

    while remaining:
        candidates = [e for e in remaining if e[0] in pool or e[1] in pool]
        if not candidates:
            # first iteration, or a defensive fallback if the pool drains
            candidates = list(remaining)
        best = max(candidates, key=lambda e: (score[e[0]] + score[e[1]], (-e[0], -e[1])))
        u, v = best
        in_pool = [q for q in (u, v) if q in pool]
        if len(in_pool) == 1:
            first = in_pool[0]
        else:
            # both or neither in the pool: root the higher f-value endpoint
            first = max((u, v), key=lambda q: (score[q], -q))
        second = v if first == u else u

        emit(first)
        if residual[second]:
            emit(second)
        pool.difference_update((u, v))
        pool.difference_update([q for q in tuple(pool) if not residual[q]])

    return Decomposition(stwigs=stwigs)


def verify_cover(query: QueryGraph, stwigs: list[STwig]) -> bool:
    """True iff the STwigs' edges partition the query's edge set exactly."""
    seen: set[tuple[int, int]] = set()
    for stwig in stwigs:
        edges = stwig.edges()
        if not edges <= query.qedges:
            return False
        if edges & seen:
            return False
        seen |= edges
    return seen == query.qedges
