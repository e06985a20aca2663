"""HTTP service: load named graphs once, query them repeatedly.

Graphs live in process memory keyed by name, so clients pay the load and
partitioning cost once per graph instead of per query.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException

from ..coordinator import RunConfig, run_distributed_query
from ..decomposer import stwig_order_selection
from ..errors import UnmatchableQueryError, ValidationError
from ..graph_store import PartitionedGraph, load_graph
from ..query_model import parse_query
from .models import (
    DecomposeRequest,
    DecomposeResponse,
    GraphInfo,
    GraphLoadRequest,
    QueryRequest,
    QueryResponse,
    RunStatsModel,
    StwigModel,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="stwig",
        description="Distributed STwig-based subgraph matching over partitioned labeled graphs",
    )
    graphs: dict[str, PartitionedGraph] = {}
    lock = threading.Lock()

    def info(name: str, graph: PartitionedGraph) -> GraphInfo:
        return GraphInfo(
            name=name,
            nodes=graph.node_count,
            edges=graph.edge_count,
            partitions=graph.partition_count,
            labels=len(graph.label_freq),
        )

    def get_graph(name: str) -> PartitionedGraph:
        with lock:
            graph = graphs.get(name)
        if graph is None:
            raise HTTPException(status_code=404, detail=f"no graph named {name!r}")
        return graph

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/graphs", response_model=GraphInfo, status_code=201)
    def load(request: GraphLoadRequest) -> GraphInfo:
        with lock:
            if request.name in graphs:
                raise HTTPException(status_code=409, detail=f"graph {request.name!r} exists")
        try:
            graph = load_graph(
                request.text.splitlines(),
                request.partitions,
                placement_seed=request.seed,
                placement=request.placement,
            )
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        with lock:
            graphs[request.name] = graph
        return info(request.name, graph)

    @app.get("/graphs", response_model=list[GraphInfo])
    def list_graphs() -> list[GraphInfo]:
        with lock:
            return [info(name, g) for name, g in sorted(graphs.items())]

    @app.get("/graphs/{name}", response_model=GraphInfo)
    def get_info(name: str) -> GraphInfo:
        return info(name, get_graph(name))

    @app.delete("/graphs/{name}", status_code=204)
    def delete(name: str) -> None:
        with lock:
            if name not in graphs:
                raise HTTPException(status_code=404, detail=f"no graph named {name!r}")
            del graphs[name]

    @app.post("/graphs/{name}/query", response_model=QueryResponse)
    def query(name: str, request: QueryRequest) -> QueryResponse:
        graph = get_graph(name)
        try:
            query_graph = parse_query(request.text.splitlines())
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        config = RunConfig(
            mode=request.mode,
            load_sets=request.load_sets,
            limit=request.limit,
            block_size=request.block_size,
            sample_rate=request.sample_rate,
            seed=request.seed,
        )
        result = run_distributed_query(graph, query_graph, config)
        order = query_graph.qnode_ids
        rows = [list(m.row(order)) for m in result.matches]
        if request.sorted_rows:
            rows.sort()
        return QueryResponse(
            header=list(order),
            rows=rows,
            stats=RunStatsModel(**result.stats.as_dict()),
        )

    @app.post("/graphs/{name}/decompose", response_model=DecomposeResponse)
    def decompose(name: str, request: DecomposeRequest) -> DecomposeResponse:
        graph = get_graph(name)
        try:
            query_graph = parse_query(request.text.splitlines())
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            decomposition = stwig_order_selection(query_graph, graph.label_freq)
        except UnmatchableQueryError as exc:
            return DecomposeResponse(stwigs=[], note=str(exc))
        return DecomposeResponse(
            stwigs=[StwigModel(root=s.root, leaves=list(s.leaves)) for s in decomposition.stwigs]
        )

    return app
