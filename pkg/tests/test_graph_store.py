"""Graph loading, partitioning, atomic operators, and the label pair catalog."""

from __future__ import annotations

import threading

import pytest

from stwig.errors import NotFoundError, ParseError, ValidationError
from stwig.graph_store import (
    MessageBus,
    cloud_load,
    dump_partitions,
    index_get_ids,
    index_has_label,
    load_graph,
    parse_placement,
)
from stwig.workbench import RmatParams, gen_rmat

from instances import PAW_GRAPH, QUAD_GRAPH, QUAD_PLACEMENT


def test_load_single_partition_counts():
    g = load_graph(PAW_GRAPH.splitlines(), 1)
    assert g.node_count == 9
    assert g.edge_count == 8
    assert g.partition_count == 1
    assert g.label_freq == {"a": 3, "b": 2, "c": 2, "d": 2}


def test_adjacency_is_symmetric_and_sorted():
    g = load_graph(PAW_GRAPH.splitlines(), 3, placement_seed=5)
    for id in g.node_ids():
        nbrs = g.neighbors_of(id)
        assert list(nbrs) == sorted(nbrs)
        for nbr in nbrs:
            assert id in g.neighbors_of(nbr)


def test_partitions_disjoint_and_cover():
    g = load_graph(PAW_GRAPH.splitlines(), 4, placement_seed=2)
    seen: set[int] = set()
    for part in g.partitions:
        assert not (seen & set(part.nodes))
        seen |= set(part.nodes)
        for id in part.nodes:
            assert g.placement[id] == part.partition_id
    assert seen == set(g.placement)


def test_comments_and_blank_lines_ok():
    text = "# header\nv 1 a\n\nv 2 b  # trailing\ne 1 2\n"
    g = load_graph(text.splitlines(), 1)
    assert g.node_count == 2
    assert g.edge_count == 1


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("v 1\n", "line 1"),
        ("w 1 a\n", "unknown record"),
        ("v x a\n", "not an integer"),
        ("v 1 a\nv 1 b\n", "duplicate node id"),
        ("v 1 a\ne 1 2\n", "not declared"),
        ("e 1\n", "line 1"),
    ],
)
def test_parse_rejections(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        load_graph(text.splitlines(), 1)


def test_self_loop_and_repeat_dropped_with_warning(caplog):
    text = "v 1 a\nv 2 b\ne 1 1\ne 1 2\ne 2 1\n"
    with caplog.at_level("WARNING"):
        g = load_graph(text.splitlines(), 1)
    assert g.edge_count == 1
    assert any("self-loop" in r.getMessage() for r in caplog.records)
    assert any("repeated edge" in r.getMessage() for r in caplog.records)


def test_load_determinism():
    a = load_graph(PAW_GRAPH.splitlines(), 4, placement_seed=9)
    b = load_graph(PAW_GRAPH.splitlines(), 4, placement_seed=9)
    assert a.placement == b.placement
    assert list(a.catalog.entries()) == list(b.catalog.entries())
    for pa, pb in zip(a.partitions, b.partitions):
        assert pa.nodes == pb.nodes
        assert pa.label_index == pb.label_index


def test_explicit_placement_and_catalog():
    g = load_graph(QUAD_GRAPH.splitlines(), 4, placement=QUAD_PLACEMENT)
    assert g.placement == QUAD_PLACEMENT
    # the a-b edge 1-14 crosses machines 0 and 3
    assert (("a", "b"), (0, 3)) in g.catalog
    assert (("b", "a"), (3, 0)) in g.catalog
    # every catalog entry is realized by some edge and vice versa
    realized = set()
    for id in g.node_ids():
        for nbr in g.neighbors_of(id):
            realized.add(((g.label_of(id), g.label_of(nbr)), (g.owner(id), g.owner(nbr))))
    assert set(g.catalog.entries()) == realized


def test_placement_must_cover_and_fit():
    with pytest.raises(ValidationError, match="missing node ids"):
        load_graph(PAW_GRAPH.splitlines(), 2, placement={1: 0})
    bad = {id: 0 for id in QUAD_PLACEMENT}
    bad[1] = 7
    with pytest.raises(ValidationError, match="out of range"):
        load_graph(QUAD_GRAPH.splitlines(), 4, placement=bad)


def test_single_partition_catalog_pairs_are_local():
    g = load_graph(PAW_GRAPH.splitlines(), 1)
    assert all(machines == (0, 0) for _, machines in g.catalog.entries())


def test_catalog_on_random_graph_exhaustive():
    text = gen_rmat(RmatParams(node_count=200, edge_count=500, label_count=4, seed=11))
    g = load_graph(text.splitlines(), 4, placement_seed=3)
    for id in g.node_ids():
        for nbr in g.neighbors_of(id):
            pair = ((g.label_of(id), g.label_of(nbr)), (g.owner(id), g.owner(nbr)))
            assert pair in g.catalog


def test_cloud_load_local_and_remote_counting():
    g = load_graph(QUAD_GRAPH.splitlines(), 4, placement=QUAD_PLACEMENT)
    rec = cloud_load(g, 2, requester=1)  # node 2 lives on machine 1
    assert rec.label == "a"
    assert rec.neighbors == (11, 12, 21, 22, 23)
    assert g.bus.total("load") == 0
    rec = cloud_load(g, 2, requester=0)
    assert rec.id == 2
    assert g.bus.per_partition("load") == [1, 0, 0, 0]
    with pytest.raises(NotFoundError):
        cloud_load(g, 999, requester=0)


def test_index_get_ids_local_only():
    g = load_graph(QUAD_GRAPH.splitlines(), 4, placement=QUAD_PLACEMENT)
    assert index_get_ids(g.partitions[0], "a") == (1,)
    assert index_get_ids(g.partitions[3], "b") == (13, 14)
    assert index_get_ids(g.partitions[0], "nope") == ()
    for label in g.label_freq:
        union = sorted(
            id for part in g.partitions for id in index_get_ids(part, label)
        )
        assert union == g.nodes_with_label(label)


def test_index_has_label_counting():
    g = load_graph(QUAD_GRAPH.splitlines(), 4, placement=QUAD_PLACEMENT)
    assert index_has_label(g, 1, "a", requester=0) is True
    assert index_has_label(g, 1, "b", requester=0) is False
    assert g.bus.total("haslabel") == 0
    assert index_has_label(g, 1, "a", requester=2) is True
    assert g.bus.per_partition("haslabel") == [0, 0, 1, 0]
    with pytest.raises(NotFoundError):
        index_has_label(g, 999, "a", requester=0)


def test_has_label_agrees_with_direct_lookup():
    text = gen_rmat(RmatParams(node_count=200, edge_count=400, label_count=5, seed=2))
    g = load_graph(text.splitlines(), 2, placement_seed=1)
    labels = sorted(g.label_freq)
    for id in g.node_ids():
        for label in labels:
            assert index_has_label(g, id, label, requester=0) == (g.label_of(id) == label)


def test_dump_partitions_bit_exact(tmp_path):
    g = load_graph(QUAD_GRAPH.splitlines(), 4, placement=QUAD_PLACEMENT)
    first = dump_partitions(g, tmp_path / "one")
    second = dump_partitions(g, tmp_path / "two")
    assert [p.read_text() for p in first] == [p.read_text() for p in second]
    merged = "\n".join(p.read_text() for p in first)
    reloaded = load_graph(merged.splitlines(), 4, placement=QUAD_PLACEMENT)
    assert reloaded.placement == g.placement
    assert reloaded.edge_count == g.edge_count
    for id in g.node_ids():
        assert reloaded.neighbors_of(id) == g.neighbors_of(id)


def test_parse_placement_file(tmp_path):
    path = tmp_path / "placement.txt"
    path.write_text("# comment\n1 0\n2 1\n")
    assert parse_placement(path) == {1: 0, 2: 1}
    path.write_text("1 0\n1 1\n")
    with pytest.raises(ParseError, match="duplicate placement"):
        parse_placement(path)
    path.write_text("1\n")
    with pytest.raises(ParseError):
        parse_placement(path)


def test_message_bus_exact_under_threads():
    bus = MessageBus(2)
    def hammer():
        for _ in range(5000):
            bus.record("haslabel", 0)
    threads = [threading.Thread(target=hammer) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert bus.total("haslabel") == 20000
    assert bus.snapshot()["haslabel"] == 20000


def test_partition_count_must_be_positive():
    with pytest.raises(ValidationError):
        load_graph(PAW_GRAPH.splitlines(), 0)
