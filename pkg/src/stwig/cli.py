"""Command line front end. All logic lives in the library modules; commands
just translate arguments, call in, and format output.

Exit codes: 0 success, 2 validation error (bad input or parameters),
1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coordinator import RunConfig, run_distributed_query
from .decomposer import stwig_order_selection
from .errors import UnmatchableQueryError, ValidationError
from .graph_store import dump_partitions, load_graph, parse_placement
from .query_model import QueryGraph, parse_query
from .workbench import (
    RmatParams,
    bench,
    bench_rows_to_tsv,
    gen_query_dfs,
    gen_query_random,
    gen_rmat,
    oracle_match,
)


def _write_output(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _matches_tsv(matches, query: QueryGraph, sort_rows: bool) -> str:
    order = query.qnode_ids
    rows = [m.row(order) for m in matches]
    if sort_rows:
        rows.sort()
    lines = ["\t".join(str(q) for q in order)]
    lines.extend("\t".join(str(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _load_graph_arg(args):
    placement = parse_placement(args.placement) if getattr(args, "placement", None) else None
    return load_graph(args.graph, args.k, placement_seed=args.seed, placement=placement)


def cmd_load(args) -> int:
    graph = _load_graph_arg(args)
    sizes = ",".join(str(len(p.nodes)) for p in graph.partitions)
    print(f"nodes={graph.node_count}")
    print(f"edges={graph.edge_count}")
    print(f"partitions={graph.partition_count}")
    print(f"partition_sizes={sizes}")
    print(f"catalog_pairs={len(graph.catalog)}")
    if args.dump_dir:
        paths = dump_partitions(graph, args.dump_dir)
        print(f"dumped={len(paths)}")
    return 0


def cmd_decompose(args) -> int:
    freq_graph = load_graph(args.freqs, 1)
    query = parse_query(args.query)
    try:
        decomposition = stwig_order_selection(query, freq_graph.label_freq)
    except UnmatchableQueryError as exc:
        print(f"note: {exc}; the query has no matches", file=sys.stderr)
        return 0
    for i, stwig in enumerate(decomposition.stwigs, start=1):
        leaves = ",".join(str(l) for l in stwig.leaves)
        print(f"T{i}: root={stwig.root} leaves={leaves}")
    return 0


def cmd_query(args) -> int:
    graph = _load_graph_arg(args)
    query = parse_query(args.query)
    config = RunConfig(
        mode=args.mode,
        load_sets=args.load_sets,
        limit=args.limit,
        block_size=args.block,
        sample_rate=args.sample_rate,
        seed=args.join_seed,
    )
    result = run_distributed_query(graph, query, config)
    _write_output(_matches_tsv(result.matches, query, args.sorted), args.out)
    if args.stats:
        Path(args.stats).write_text(result.stats.to_text(), encoding="utf-8")
    return 0


def cmd_gen_rmat(args) -> int:
    if args.edges is not None:
        edge_count = args.edges
    else:
        edge_count = max(1, round(args.nodes * args.avg_degree / 2))
    if args.labels is not None:
        label_count = args.labels
        density = label_count / args.nodes
    else:
        density = args.label_density
        label_count = max(1, round(density * args.nodes))
    params = RmatParams(
        node_count=args.nodes,
        edge_count=edge_count,
        probs=(args.pa, args.pb, args.pc, args.pd),
        label_count=label_count,
        seed=args.seed,
        label_density=density,
    )
    _write_output(gen_rmat(params), args.out)
    return 0


def cmd_gen_query(args) -> int:
    if args.kind == "dfs":
        graph = load_graph(args.graph, 1)
        query = gen_query_dfs(graph, args.nodes, args.seed, tree_only=args.tree_only)
    else:
        labels = [l for l in args.labels.split(",") if l]
        query = gen_query_random(args.nodes, args.edges, labels, args.seed)
    _write_output(query.to_text(), args.out)
    return 0


def cmd_oracle(args) -> int:
    graph = load_graph(args.graph, 1)
    query = parse_query(args.query)
    matches = oracle_match(graph, query, force=args.force)
    _write_output(_matches_tsv(sorted(matches, key=lambda m: m.items), query, args.sorted), args.out)
    return 0


def cmd_bench(args) -> int:
    config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    rows = bench(config)
    _write_output(bench_rows_to_tsv(rows), args.out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stwig",
        description="Distributed STwig-based subgraph matching over partitioned labeled graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_partition_args(p):
        p.add_argument("-k", type=int, default=1, help="partition count")
        p.add_argument("--seed", type=int, default=0, help="placement seed")
        p.add_argument("--placement", help="placement override file: '<node_id> <partition>' lines")

    p = sub.add_parser("load", help="load and partition a graph, print a summary")
    p.add_argument("graph")
    add_partition_args(p)
    p.add_argument("--dump-dir", help="write one canonical text file per partition")
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("decompose", help="print the STwig cover in processing order")
    p.add_argument("query")
    p.add_argument("--freqs", required=True, help="graph file supplying label frequencies")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("query", help="run a query and print matches as TSV")
    p.add_argument("graph")
    p.add_argument("query")
    add_partition_args(p)
    p.add_argument("--mode", choices=["global", "local"], default="global",
                   help="binding propagation scope")
    p.add_argument("--load-sets", choices=["on", "fetch-all"], default="on",
                   help="distance-bounded result fetching, or fetch everything")
    p.add_argument("--limit", type=int, default=None, help="stop after N matches (global)")
    p.add_argument("--block", type=int, default=4096, help="join block size")
    p.add_argument("--sample-rate", type=float, default=0.1, help="join planning sample rate")
    p.add_argument("--join-seed", type=int, default=0, help="join planning sample seed")
    p.add_argument("--sorted", action="store_true", help="sort output rows")
    p.add_argument("--stats", help="write run statistics to this file")
    p.add_argument("-o", "--out", help="write matches to this file instead of stdout")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("gen-rmat", help="generate a synthetic graph")
    p.add_argument("-n", "--nodes", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("-e", "--edges", type=int)
    group.add_argument("--avg-degree", type=float)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--labels", type=int, help="number of distinct labels")
    group.add_argument("--label-density", type=float, default=0.01,
                       help="labels per node (label count / node count)")
    p.add_argument("--pa", type=float, default=0.45)
    p.add_argument("--pb", type=float, default=0.15)
    p.add_argument("--pc", type=float, default=0.15)
    p.add_argument("--pd", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen_rmat)

    p = sub.add_parser("gen-query", help="generate a query")
    qsub = p.add_subparsers(dest="kind", required=True)
    pd = qsub.add_parser("dfs", help="cut a query out of a data graph")
    pd.add_argument("graph")
    pd.add_argument("-n", "--nodes", type=int, default=10)
    pd.add_argument("--seed", type=int, default=0)
    pd.add_argument("--tree-only", action="store_true",
                    help="keep only traversal tree edges instead of induced edges")
    pd.add_argument("-o", "--out")
    pd.set_defaults(func=cmd_gen_query)
    pr = qsub.add_parser("random", help="spanning tree plus random extra edges")
    pr.add_argument("-n", "--nodes", type=int, default=10)
    pr.add_argument("-e", "--edges", type=int, default=20)
    pr.add_argument("--labels", required=True, help="comma separated label pool")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("-o", "--out")
    pr.set_defaults(func=cmd_gen_query)

    p = sub.add_parser("oracle", help="exact reference matcher (small graphs)")
    p.add_argument("graph")
    p.add_argument("query")
    p.add_argument("--sorted", action="store_true")
    p.add_argument("--force", action="store_true", help="lift the graph size guard")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run a benchmark grid from a JSON config")
    p.add_argument("config")
    p.add_argument("-o", "--out", help="TSV output file (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
