"""Distributed STwig-based subgraph matching over partitioned labeled graphs.

Queries are decomposed into two-level tree units (STwigs), matched per
partition by graph exploration with binding propagation, and joined with a
head-STwig anchor and distance-bounded load sets so per-machine answers
union without duplicates.
"""

from .coordinator import RunConfig, RunResult, RunStats, run_distributed_query
from .decomposer import stwig_order_selection, verify_cover
from .errors import (
    NotFoundError,
    ParseError,
    UnmatchableQueryError,
    ValidationError,
)
from .graph_store import PartitionedGraph, load_graph
from .joiner import MatchTuple
from .query_model import Decomposition, QueryGraph, STwig, parse_query

__version__ = "0.1.0"

__all__ = [
    "Decomposition",
    "MatchTuple",
    "NotFoundError",
    "ParseError",
    "PartitionedGraph",
    "QueryGraph",
    "RunConfig",
    "RunResult",
    "RunStats",
    "STwig",
    "UnmatchableQueryError",
    "ValidationError",
    "load_graph",
    "parse_query",
    "run_distributed_query",
    "stwig_order_selection",
    "verify_cover",
    "__version__",
]
