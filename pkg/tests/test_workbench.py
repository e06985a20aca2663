"""Generators, reference oracles, and the benchmark grid."""

from __future__ import annotations

import pytest

from stwig.errors import ValidationError
from stwig.graph_store import load_graph
from stwig.joiner import MatchTuple
from stwig.query_model import QueryGraph, parse_query
from stwig.workbench import (
    RmatParams,
    bench,
    bench_rows_to_tsv,
    brute_min_stwig_cover,
    gen_query_dfs,
    gen_query_random,
    gen_rmat,
    oracle_match,
)

from instances import PAW_GRAPH, PAW_MATCHES, PAW_QUERY, branch_query, star_query


def test_rmat_exact_simple_graph():
    params = RmatParams(node_count=100, edge_count=300, label_count=5, seed=1)
    g = load_graph(gen_rmat(params).splitlines(), 1)
    assert g.node_count == 100
    assert g.edge_count == 300
    for id in g.node_ids():
        nbrs = g.neighbors_of(id)
        assert id not in nbrs  # no self-loop survives
        assert len(set(nbrs)) == len(nbrs)
    assert set(g.label_freq) <= {f"l{i}" for i in range(5)}


def test_rmat_deterministic_per_seed():
    params = RmatParams(node_count=64, edge_count=128, seed=9)
    assert gen_rmat(params) == gen_rmat(RmatParams(node_count=64, edge_count=128, seed=9))
    other = gen_rmat(RmatParams(node_count=64, edge_count=128, seed=10))
    assert gen_rmat(params) != other


def test_rmat_uniform_probs_degree_sanity():
    params = RmatParams(
        node_count=512, edge_count=2048, probs=(0.25, 0.25, 0.25, 0.25), seed=3
    )
    g = load_graph(gen_rmat(params).splitlines(), 1)
    max_degree = max(len(g.neighbors_of(id)) for id in g.node_ids())
    assert max_degree < 64  # mean degree 8; uniform quadrants stay unskewed


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(node_count=1, edge_count=1),
        dict(node_count=4, edge_count=0),
        dict(node_count=4, edge_count=7),  # above n*(n-1)/2
        dict(node_count=4, edge_count=3, probs=(0.5, 0.5, 0.5, 0.5)),
        dict(node_count=4, edge_count=3, label_count=0),
    ],
)
def test_rmat_param_validation(kwargs):
    defaults = dict(node_count=10, edge_count=10)
    defaults.update(kwargs)
    with pytest.raises(ValidationError):
        RmatParams(**defaults).validate()


def test_dfs_query_is_embedded_in_graph():
    g = load_graph(PAW_GRAPH.splitlines(), 1)
    q = gen_query_dfs(g, 4, seed=0)
    assert len(q.qnode_ids) == 4
    assert oracle_match(g, q)  # the cut region itself matches


def test_dfs_query_tree_only():
    g = load_graph(PAW_GRAPH.splitlines(), 1)
    q = gen_query_dfs(g, 5, seed=2, tree_only=True)
    assert len(q.qedges) == 4  # a tree on five qnodes


def test_dfs_query_rejections():
    g = load_graph(PAW_GRAPH.splitlines(), 1)
    with pytest.raises(ValidationError, match="need 20"):
        gen_query_dfs(g, 20, seed=0)
    with pytest.raises(ValidationError):
        gen_query_dfs(g, 1, seed=0)
    # two components of two nodes each: no connected region of three exists
    split = load_graph(["v 1 a", "v 2 a", "v 3 a", "v 4 a", "e 1 2", "e 3 4"], 1)
    with pytest.raises(ValidationError, match="no connected region"):
        gen_query_dfs(split, 3, seed=0)


def test_dfs_query_deterministic():
    g = load_graph(gen_rmat(RmatParams(node_count=60, edge_count=150, seed=4)).splitlines(), 1)
    assert gen_query_dfs(g, 6, seed=11) == gen_query_dfs(g, 6, seed=11)


def test_random_query_shape():
    q = gen_query_random(3, 2, ["a", "b"], seed=0)
    assert len(q.qnode_ids) == 3
    assert len(q.qedges) == 2
    assert set(q.labels.values()) <= {"a", "b"}
    full = gen_query_random(4, 6, ["x"], seed=1)
    assert len(full.qedges) == 6
    for seed in range(50):
        gen_query_random(5, 7, ["a", "b", "c"], seed=seed)  # constructor validates


def test_random_query_rejections():
    with pytest.raises(ValidationError):
        gen_query_random(1, 0, ["a"], seed=0)
    with pytest.raises(ValidationError):
        gen_query_random(4, 2, ["a"], seed=0)  # below spanning tree
    with pytest.raises(ValidationError):
        gen_query_random(4, 7, ["a"], seed=0)  # above capacity
    with pytest.raises(ValidationError, match="label pool"):
        gen_query_random(4, 3, [], seed=0)


def test_random_query_deterministic():
    a = gen_query_random(6, 9, ["a", "b"], seed=5)
    assert a == gen_query_random(6, 9, ["a", "b"], seed=5)


def test_oracle_on_fixed_instance():
    g = load_graph(PAW_GRAPH.splitlines(), 1)
    q = parse_query(PAW_QUERY.splitlines())
    got = {m.row(q.qnode_ids) for m in oracle_match(g, q)}
    assert got == PAW_MATCHES


def test_oracle_no_match_cases():
    g = load_graph(PAW_GRAPH.splitlines(), 1)
    q = QueryGraph({0: "a", 1: "zz"}, {(0, 1)})
    assert oracle_match(g, q) == set()
    big = QueryGraph({i: "a" for i in range(4)}, {(i, i + 1) for i in range(3)})
    assert oracle_match(g, big) == set()  # only three a-nodes exist


def test_oracle_injective_and_edge_preserving():
    text = gen_rmat(RmatParams(node_count=40, edge_count=90, label_count=3, seed=6))
    g = load_graph(text.splitlines(), 1)
    q = gen_query_dfs(g, 4, seed=1)
    for m in oracle_match(g, q):
        a = m.assignment
        assert len(set(a.values())) == len(a)
        for u, v in q.qedges:
            assert a[v] in g.neighbors_of(a[u])
            assert g.label_of(a[u]) == q.label(u)


def test_oracle_guard():
    text = gen_rmat(RmatParams(node_count=50, edge_count=60, seed=0))
    g = load_graph(text.splitlines(), 1)
    q = gen_query_dfs(g, 3, seed=0)
    with pytest.raises(ValidationError, match="oracle guard"):
        oracle_match(g, q, node_limit=10)
    assert isinstance(oracle_match(g, q, node_limit=10, force=True), set)


def test_oracle_returns_match_tuples():
    g = load_graph(PAW_GRAPH.splitlines(), 1)
    q = star_query()
    for m in oracle_match(g, q):
        assert isinstance(m, MatchTuple)


def test_brute_min_cover_known_values():
    triangle = QueryGraph({0: "a", 1: "a", 2: "a"}, {(0, 1), (1, 2), (0, 2)})
    assert brute_min_stwig_cover(triangle) == 2
    edge = QueryGraph({0: "a", 1: "b"}, {(0, 1)})
    assert brute_min_stwig_cover(edge) == 1
    assert brute_min_stwig_cover(star_query()) == 1
    assert brute_min_stwig_cover(branch_query()) == 3
    big = QueryGraph({i: "a" for i in range(13)}, {(i, i + 1) for i in range(12)})
    with pytest.raises(ValidationError, match="guard"):
        brute_min_stwig_cover(big)


def test_bench_grid_and_tsv():
    config = {
        "graphs": [{"nodes": 60, "edges": 150, "label_count": 4, "seed": 1}],
        "partitions": [1, 2],
        "modes": ["global"],
        "load_sets": ["on", "fetch-all"],
        "queries": {"kind": "dfs", "count": 3, "nodes": 4, "seed": 0},
        "limit": 100,
    }
    rows = bench(config)
    assert len(rows) == 4  # 1 graph x 2 partitions x 1 mode x 2 load-set modes
    again = bench(config)
    assert [r["mean_matches"] for r in rows] == [r["mean_matches"] for r in again]
    by_key = {(r["partitions"], r["load_sets"]): r for r in rows}
    assert by_key[(2, "on")]["mean_fetch"] <= by_key[(2, "fetch-all")]["mean_fetch"]
    assert by_key[(1, "on")]["mean_fetch"] == 0
    tsv = bench_rows_to_tsv(rows)
    lines = tsv.splitlines()
    assert lines[0].split("\t")[0] == "nodes"
    assert len(lines) == 5
    assert all(len(line.split("\t")) == len(lines[0].split("\t")) for line in lines)


def test_bench_random_queries_clamp_edges():
    config = {
        "graphs": [{"nodes": 40, "avg_degree": 4, "label_count": 3, "seed": 2}],
        "queries": {"kind": "random", "count": 2, "nodes": 3, "edges": 50, "seed": 1},
    }
    rows = bench(config)
    assert rows[0]["queries"] == 2
    assert rows[0]["edges"] == 80  # avg degree over 40 nodes
