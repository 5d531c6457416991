"""Lowering/lifting: size formulas, worked examples, malformed stores."""

import random

import pytest

from hogdb import (
    ClosureViolation,
    Edge,
    HigherOrderGraph,
    HyperEdge,
    MalformedLowering,
    Node,
    NodeTuple,
    Simplex,
    Subgraph,
    SubgraphEdge,
    TooLarge,
    ValidationFailed,
    canonical_form_small,
    expected_size,
    fingerprint,
    lift,
    lift_hypergraph,
    lift_simplicial,
    lift_subgraph_graph,
    lift_tuple_graph,
    lower,
    lower_hypergraph,
    lower_simplicial,
    lower_subgraph_graph,
    lower_tuple_graph,
)
from hogdb.txn import Database

from oracles import random_graph


def _graph(*entities) -> HigherOrderGraph:
    g = HigherOrderGraph()
    for e in entities:
        g.add(e)
    return g


def _abc(**props):
    return [Node(uid=u, labels={"V"}, properties=props) for u in "abc"]


def _counts(db) -> tuple:
    s = db.stats()
    return s.nodes, s.edges


def _edges_by_label(db, label):
    with db.snapshot() as view:
        return [e for e in view.edges() if label in e.labels]


def test_hyperedge_example():
    g = _graph(*_abc(), HyperEdge("abc", labels={"Team"}, uid="h"))
    db = lower_hypergraph(g)
    assert _counts(db) == (4, 3) == expected_size(g)
    assert lift_hypergraph(db) == g


def test_triangle_complex_example():
    g = _graph(*_abc(), Simplex("abc", uid="t"), Simplex("ab", uid="s1"),
               Simplex("ac", uid="s2"), Simplex("bc", uid="s3"))
    db = lower_simplicial(g)
    assert _counts(db) == (7, 9) == expected_size(g)
    assert lift_simplicial(db) == g


def test_node_tuple_example():
    g = _graph(Node(uid="a"), Node(uid="b"), Edge("a", "b", uid="e"), NodeTuple(["a", "b", "a"], uid="t"))
    db = lower_tuple_graph(g)
    assert _counts(db) == (4, 5) == expected_size(g)
    memberships = _edges_by_label(db, "_node_membership")
    with db.snapshot() as view:
        a_id = view.find_uid("a")[1]
    assert sorted(m.props["_pos"] for m in memberships if m.src == a_id) == [0, 2]
    assert lift_tuple_graph(db) == g


def test_triangle_subgraph_example():
    g = _graph(*_abc(), Edge("a", "b", uid="e1"), Edge("b", "c", uid="e2"), Edge("a", "c", uid="e3"),
               Subgraph("abc", {"e1", "e2", "e3"}, labels={"Triangle"}, uid="s"))
    db = lower_subgraph_graph(g)
    assert _counts(db) == (7, 12) == expected_size(g)
    assert lift_subgraph_graph(db) == g


def test_subgraph_edge_lowering():
    g = _graph(Node(uid="a"), Node(uid="b"), Subgraph({"a"}, uid="s1"), Subgraph({"b"}, uid="s2"),
               SubgraphEdge("s1", "s2", labels={"Next"}, uid="f"))
    db = lower_subgraph_graph(g)
    assert _counts(db) == expected_size(g) == (5, 4)
    assert lift_subgraph_graph(db) == g


def test_empty_graph():
    db = lower(HigherOrderGraph())
    assert _counts(db) == (0, 0)
    assert lift(db) == HigherOrderGraph()


def test_family_guard():
    g = _graph(*_abc(), HyperEdge("ab", uid="h"))
    with pytest.raises(ValidationFailed):
        lower_tuple_graph(g)


def test_invalid_graph_is_not_lowered():
    g = _graph(Node(uid="a"), HyperEdge({"a"}, uid="h"))
    with pytest.raises(ValidationFailed):
        lower_hypergraph(g)


def test_lower_into_open_transaction_is_staged():
    db = Database()
    t = db.begin()
    lower(_graph(*_abc()), t)
    assert db.stats().nodes == 0
    t.commit()
    assert db.stats().nodes == 3


@pytest.mark.parametrize("family", ["lpg", "hypergraph", "simplicial", "tuple", "subgraph"])
@pytest.mark.parametrize("seed", range(5))
def test_round_trip_random(family, seed):
    g = random_graph(random.Random(seed), family, n_max=15)
    db = lower(g)
    assert _counts(db) == expected_size(g)
    assert lift(db, simplicial=family == "simplicial") == g


def test_lowering_is_deterministic():
    g = random_graph(random.Random(3), "subgraph", n_max=20)
    assert fingerprint(lower(g)) == fingerprint(lower(g))


# --- malformed stores -------------------------------------------------------

def _raw(build):
    db = Database()
    with db.begin() as t:
        build(t)
    return db


def _tagged(t, tag, uid):
    return t.create_node({tag}, {"_uid": uid}, allow_reserved=True)


def test_hyperedge_with_single_incidence_is_malformed():
    def build(t):
        a = _tagged(t, "_node", "a")
        h = _tagged(t, "_hyperedge", "h")
        t.create_edge(a, h, {"_incidence"}, allow_reserved=True)

    with pytest.raises(MalformedLowering):
        lift(_raw(build))


def test_reified_edge_with_one_adjacency_is_malformed():
    def build(t):
        a = _tagged(t, "_node", "a")
        e = _tagged(t, "_edge", "e")
        t.create_edge(a, e, {"_adjacency"}, allow_reserved=True)

    with pytest.raises(MalformedLowering):
        lift(_raw(build))


def test_subgraph_with_edge_but_no_node_memberships_is_malformed():
    def build(t):
        a, b = _tagged(t, "_node", "a"), _tagged(t, "_node", "b")
        e = _tagged(t, "_edge", "e")
        t.create_edge(a, e, {"_adjacency"}, allow_reserved=True)
        t.create_edge(e, b, {"_adjacency"}, allow_reserved=True)
        s = _tagged(t, "_subgraph", "s")
        t.create_edge(e, s, {"_edge_membership"}, allow_reserved=True)

    with pytest.raises(MalformedLowering):
        lift(_raw(build))


def test_link_between_wrong_tags_is_malformed():
    def build(t):
        a, b = _tagged(t, "_node", "a"), _tagged(t, "_node", "b")
        t.create_edge(a, b, {"_incidence"}, allow_reserved=True)

    with pytest.raises(MalformedLowering):
        lift(_raw(build))


def test_duplicate_uid_is_malformed():
    def build(t):
        _tagged(t, "_node", "a")
        _tagged(t, "_node", "a")

    with pytest.raises(MalformedLowering):
        lift(_raw(build))


def test_family_lift_rejects_foreign_tags():
    db = lower(_graph(*_abc(), HyperEdge("ab", uid="h")))
    with pytest.raises(MalformedLowering):
        lift_tuple_graph(db)


def test_untagged_data_is_skipped():
    db = lower(_graph(*_abc()))
    with db.begin() as t:
        t.create_node({"Plain"})
    assert lift(db) == _graph(*_abc())


def test_open_simplex_fails_closure_on_lift():
    db = lower_hypergraph(_graph(*_abc(), HyperEdge("abc", uid="t")))
    with pytest.raises(ClosureViolation):
        lift_simplicial(db)


# --- canonical form -----------------------------------------------------------

def _plain(edges, n=3):
    db = Database()
    with db.begin() as t:
        ids = [t.create_node({"V"}) for _ in range(n)]
        for s, d in edges:
            t.create_edge(ids[s], ids[d], {"r"})
    return db


def test_canonical_form_distinguishes_path_and_triangle():
    path = _plain([(0, 1), (1, 2)])
    triangle = _plain([(0, 1), (1, 2), (2, 0)])
    assert canonical_form_small(path) != canonical_form_small(triangle)


def test_canonical_form_ignores_numbering_and_uid():
    assert canonical_form_small(_plain([(0, 1), (1, 2)])) == canonical_form_small(_plain([(2, 0), (0, 1)]))
    g1 = _graph(*_abc(), HyperEdge("ab", uid="h"))
    g2 = _graph(*[Node(uid=u, labels={"V"}) for u in "xyz"], HyperEdge("yz", uid="q"))
    assert canonical_form_small(lower(g1)) == canonical_form_small(lower(g2))


def test_canonical_form_respects_direction():
    assert canonical_form_small(_plain([(0, 1), (0, 2)])) != canonical_form_small(_plain([(0, 1), (2, 0)]))


def test_canonical_form_too_large():
    with pytest.raises(TooLarge):
        canonical_form_small(_plain([], n=13))
