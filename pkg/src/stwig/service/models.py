"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class GraphLoadRequest(BaseModel):
    name: str = Field(min_length=1, max_length=128)
    text: str
    partitions: int = Field(default=1, ge=1)
    seed: int = 0
    placement: Optional[dict[int, int]] = None


class GraphInfo(BaseModel):
    name: str
    nodes: int
    edges: int
    partitions: int
    labels: int


class QueryRequest(BaseModel):
    text: str
    mode: Literal["global", "local"] = "global"
    load_sets: Literal["on", "fetch-all"] = "on"
    limit: Optional[int] = Field(default=None, ge=1)
    block_size: int = Field(default=4096, ge=1)
    sample_rate: float = Field(default=0.1, gt=0, le=1)
    seed: int = 0
    sorted_rows: bool = False


class RunStatsModel(BaseModel):
    partitions: int
    head: int
    d_s: int
    T_s: int
    messages_fetch: int
    messages_haslabel: int
    messages_bindings: int
    stwig_result_sizes: list[int]
    matches: int
    elapsed_ms: int


class QueryResponse(BaseModel):
    header: list[int]
    rows: list[list[int]]
    stats: RunStatsModel


class DecomposeRequest(BaseModel):
    text: str


class StwigModel(BaseModel):
    root: int
    leaves: list[int]


class DecomposeResponse(BaseModel):
    stwigs: list[StwigModel]
    note: Optional[str] = None
