"""Path traversal and tensor export."""

import itertools

import numpy as np
import pytest

from hogdb import (
    BadParams,
    HigherOrderDB,
    MissingKey,
    Path,
    RaggedFeatures,
    UnboundVariable,
    UnknownKindTransition,
    export_edge_index,
    export_node_features,
    traverse_path,
)
from hogdb.query import Edge, HyperEdge, Node, Subgraph


@pytest.fixture
def hyper():
    hdb = HigherOrderDB(family="hypergraph")
    for i, uid in enumerate("abc"):
        hdb.add_node({"V"}, {"name": uid.upper(), "rank": 3 - i}, uid=uid)
    hdb.add_hyperedge({"a", "b", "c"}, {"Team"}, uid="h")
    return hdb


def test_node_hyperedge_node_pairs(hyper):
    path = Path().add("x", Node()).add("h", HyperEdge({"Team"})).add("y", Node())
    result = hyper.traverse_path(path, ["x", "y"])
    assert result.rows == [p for p in itertools.permutations("abc", 2)]


def test_single_node_path(hyper):
    result = hyper.traverse_path(Path().add("n", Node()), ["n"])
    assert result.rows == [("a",), ("b",), ("c",)]
    assert result.column("n") == ["a", "b", "c"]


def test_sort_and_distinct(hyper):
    path = Path().add("x", Node()).add("h", HyperEdge()).add("y", Node())
    ordered = hyper.traverse_path(path, ["x.name"], sort=["x.rank"])
    assert ordered.column("x.name") == ["C", "C", "B", "B", "A", "A"]
    unique = hyper.traverse_path(path, ["x.name"], sort=["x.rank"], distinct=True)
    assert unique.rows == [("C",), ("B",), ("A",)]


def test_property_constraints(hyper):
    path = Path().add("x", Node(properties={"name": "A"})).add("h", HyperEdge()).add("y", Node())
    assert hyper.traverse_path(path, ["y"]).rows == [("b",), ("c",)]


def test_results_are_repeatable(hyper):
    path = Path().add("x", Node()).add("h", HyperEdge()).add("y", Node())
    first = hyper.traverse_path(path, ["x", "y.name"]).to_csv()
    assert hyper.traverse_path(path, ["x", "y.name"]).to_csv() == first


def test_unbound_variable(hyper):
    with pytest.raises(UnboundVariable):
        hyper.traverse_path(Path().add("n", Node()), ["m.name"])
    with pytest.raises(UnboundVariable):
        hyper.traverse_path(Path().add("n", Node()), ["n"], sort=["z.name"])


def test_unknown_kind_transition():
    with pytest.raises(UnknownKindTransition):
        Path().add("h", HyperEdge()).add("s", Subgraph())


def test_duplicate_variable_in_path():
    with pytest.raises(BadParams):
        Path().add("x", Node()).add("h", HyperEdge()).add("x", Node())


def test_path_add_keyword_forms_agree():
    a = Path().add(s=Subgraph({"Group"}))
    b = Path().add("s", kind="subgraph", labels={"Group"})
    assert [(v, e.kind, e.labels) for v, e in a] == [(v, e.kind, e.labels) for v, e in b]


def _research_groups() -> HigherOrderDB:
    hdb = HigherOrderDB(family="subgraph")
    hdb.add_node({"Person"}, {"name": "Alice"}, uid="alice")
    hdb.add_node({"Person"}, {"name": "Bob"}, uid="bob")
    hdb.add_node({"University"}, {"name": "ABC"}, uid="abc")
    hdb.add_node({"University"}, {"name": "XYZ"}, uid="xyz")
    for name, uni in (("Theory", "abc"), ("Systems", "abc"), ("Vision", "xyz")):
        members = {"alice", uni} if name != "Vision" else {"alice", "bob", uni}
        hdb.add_subgraph(members, labels={"ResearchGroup"}, properties={"name": name}, uid=name)
    return hdb


def test_joined_paths_list_groups():
    hdb = _research_groups()
    p1 = Path().add("p", Node({"Person"}, {"name": "Alice"})).add("s1", Subgraph({"ResearchGroup"}))
    p2 = Path().add("s1", Subgraph({"ResearchGroup"})).add("u", Node({"University"}, {"name": "ABC"}))
    result = hdb.traverse_path([p1, p2], ["s1.name"], sort=["s1.name"])
    assert result.rows == [("Systems",), ("Theory",)]


def test_edge_elements_match_native_and_reified_edges():
    for family in ("lpg", "tuple"):
        hdb = HigherOrderDB(family=family)
        hdb.add_node(uid="a")
        hdb.add_node(uid="b")
        hdb.add_edge("a", "b", {"r"}, uid="e")
        path = Path().add("x", Node()).add("e", Edge({"r"})).add("y", Node())
        assert hdb.traverse_path(path, ["x", "y"]).rows == [("a", "b"), ("b", "a")]
        directed = Path().add("x", Node()).add("e", Edge(properties={"_direction": "out"})).add("y", Node())
        assert hdb.traverse_path(directed, ["x", "y"]).rows == [("a", "b")], family


def test_traverse_on_empty_store():
    assert traverse_path(HigherOrderDB().db, Path().add("n", Node())).rows == []


# --- export ------------------------------------------------------------------

def _featured(feats, ids):
    hdb = HigherOrderDB()
    for f, i in zip(feats, ids):
        hdb.add_node({"Atom"}, {"feat": f, "id": i})
    return hdb


def test_node_features_sorted_by_id():
    out = export_node_features(_featured([[1.0], [2.0], [3.0]], [2, 0, 1]).db, {"Atom"})
    assert out.shape == (3, 1)
    assert out.x[:, 0].tolist() == [2.0, 3.0, 1.0]
    assert out.ids == [0, 1, 2]


def test_node_features_empty():
    out = export_node_features(HigherOrderDB().db, {"Atom"})
    assert out.shape == (0, 0)
    assert out.to_csv() == "id\r\n"


def test_scalar_features_become_one_column():
    out = export_node_features(_featured([0.5, 1], [0, 1]).db)
    assert out.x.tolist() == [[0.5], [1.0]]


@pytest.mark.parametrize("feats, error", [
    ([[1.0], [1.0, 2.0]], RaggedFeatures),
    ([[1.0], "text"], RaggedFeatures),
    ([[1.0], True], RaggedFeatures),
])
def test_bad_features(feats, error):
    with pytest.raises(error):
        export_node_features(_featured(feats, [0, 1]).db)


def test_missing_feature_key():
    hdb = _featured([[1.0]], [0])
    hdb.add_node({"Atom"}, {"id": 5})
    with pytest.raises(MissingKey):
        export_node_features(hdb.db, {"Atom"})


def test_feature_csv_is_round_trip_exact():
    value = 0.1 + 0.2
    text = export_node_features(_featured([[value, -1e-300]], [7]).db).to_csv()
    header, row, end = text.split("\r\n")
    assert header == "id,feat_0,feat_1" and end == ""
    cells = row.split(",")
    assert float(cells[1]) == value and float(cells[2]) == -1e-300


def _triangle(family="lpg"):
    hdb = HigherOrderDB(family=family)
    for i, uid in enumerate("abc"):
        hdb.add_node(uid=uid, properties={"id": i})
    for s, d, w in (("a", "b", 1.0), ("b", "c", 2.0), ("c", "a", 3.0)):
        hdb.add_edge(s, d, {"bond"}, {"w": w})
    return hdb


@pytest.mark.parametrize("family", ["lpg", "tuple"])
def test_edge_index_triangle(family):
    out = export_edge_index(_triangle(family).db, {"bond"}, attr_key="w")
    assert out.pairs == [(0, 1), (0, 2), (1, 2)]
    assert out.attrs[:, 0].tolist() == [1.0, 3.0, 2.0]
    assert out.as_array().shape == (3, 2)


def test_edge_index_directed_keeps_orientation():
    out = export_edge_index(_triangle().db, directed=True)
    assert out.pairs == [(0, 1), (1, 2), (2, 0)]


def test_edge_index_empty():
    out = export_edge_index(HigherOrderDB().db, {"bond"})
    assert out.pairs == [] and out.as_array().shape == (0, 2)
    assert out.to_csv() == "src,dst\r\n"


def test_edge_index_missing_id():
    hdb = HigherOrderDB()
    hdb.add_node(uid="a")
    hdb.add_node(uid="b", properties={"id": 1})
    hdb.add_edge("a", "b")
    with pytest.raises(MissingKey):
        export_edge_index(hdb.db)


def test_subgraph_membership_index_matches_lift():
    hdb = HigherOrderDB(family="subgraph")
    for i in range(4):
        hdb.add_node(uid=f"n{i}", properties={"id": i})
    hdb.add_subgraph({"n0", "n1", "n2"}, properties={"id": 10}, uid="s0")
    hdb.add_subgraph({"n2", "n3"}, properties={"id": 11}, uid="s1")
    out = hdb.export_edge_index(kind="subgraph")
    g = hdb.lift()
    expected = sorted((g.nodes[n].properties["id"], s.properties["id"])
                      for s in g.subgraphs.values() for n in s.subgraph_nodes)
    assert out.pairs == expected
    assert np.array_equal(out.as_array(), np.array(expected))
