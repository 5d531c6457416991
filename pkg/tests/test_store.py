"""LPG core: records, matching, indexes, stats and MVCC snapshots."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hogdb import DuplicateIndex, InvalidValue, ReservedLabel, UnknownEdge, UnknownIndex, UnknownNode
from hogdb.txn import Database
from hogdb.values import normalize_value, sort_key


@pytest.fixture
def db():
    return Database()


def test_create_node_counts(db):
    with db.begin() as t:
        a = t.create_node({"Person"}, {"name": "Alice"})
        b = t.create_node()
    assert a != b
    assert db.stats().nodes == 2


def test_reserved_label_rejected_on_user_path(db):
    t = db.begin()
    with pytest.raises(ReservedLabel):
        t.create_node({"_hyperedge"})
    t.rollback()


def test_edges_degree_and_self_loop(db):
    with db.begin() as t:
        a, b = t.create_node(), t.create_node()
        t.create_edge(a, b, {"knows"})
        t.create_edge(a, a, {"self"})
    with db.snapshot() as view:
        assert view.degree(b) == 1
        assert view.degree(a) == 3  # one plain incidence plus both slots of the loop
        total = sum(view.degree(n) for n in view.node_ids())
        assert total == 2 * view.stats().edges


def test_dangling_edge_rejected(db):
    with db.begin() as t:
        a = t.create_node()
    t = db.begin()
    with pytest.raises(UnknownNode):
        t.create_edge(a, 999, {"x"})
    t.rollback()


def test_remove_node_cascades(db):
    with db.begin() as t:
        hub = t.create_node()
        leaves = [t.create_node() for _ in range(3)]
        for leaf in leaves:
            t.create_edge(hub, leaf, {"r"})
        lonely = t.create_node()
    with db.begin() as t:
        assert t.remove_node(hub) == 3
        assert t.remove_node(lonely) == 0
        with pytest.raises(UnknownNode):
            t.remove_node(hub)
    stats = db.stats()
    assert (stats.nodes, stats.edges) == (3, 0)


def test_remove_edge_then_match_empty(db):
    with db.begin() as t:
        a, b = t.create_node(), t.create_node()
        e = t.create_edge(a, b, {"knows"}, {"since": 2020})
    with db.begin() as t:
        t.remove_edge(e)
        with pytest.raises(UnknownEdge):
            t.remove_edge(e)
    with db.snapshot() as view:
        assert view.match_edges({"knows"}, {"since": 2020}) == set()
        assert view.has_node(a) and view.has_node(b)


def test_set_properties_and_remove_absent(db):
    with db.begin() as t:
        n = t.create_node({"Car"})
    with db.begin() as t:
        t.set_properties(n, {"speed": 5}, ["absent"])
    with db.snapshot() as view:
        assert view.node(n).props == {"speed": 5}


def test_ids_never_reused(db):
    with db.begin() as t:
        a = t.create_node()
    with db.begin() as t:
        t.remove_node(a)
    with db.begin() as t:
        b = t.create_node()
    assert b > a


def test_match_fixture():
    db = Database()
    with db.begin() as t:
        alice = t.create_node({"Person"}, {"name": "Alice"})
        t.create_node({"Person"}, {"name": "Bob"})
        t.create_node({"City"}, {"name": "Alice"})
    with db.snapshot() as view:
        assert view.match_nodes({"Person"}, {"name": "Alice"}) == {alice}
        assert len(view.match_nodes()) == 3


def test_match_edges_by_endpoints_on_empty_store(db):
    with db.snapshot() as view:
        assert view.match_edges(src=1, dst=2) == set()


def test_index_lifecycle(db):
    db.create_index("Person", "name")
    with pytest.raises(DuplicateIndex):
        db.create_index("Person", "name")
    db.drop_index("Person", "name")
    with pytest.raises(UnknownIndex):
        db.drop_index("Person", "name")
    db.create_index("_subgraph", "name")  # reserved labels are indexable
    assert ("_subgraph", "name") in db.indexes()


def test_index_follows_updates(db):
    db.create_index("Car", "speed")
    with db.begin() as t:
        n = t.create_node({"Car"}, {"speed": 1})
    with db.begin() as t:
        t.set_properties(n, {"speed": 2})
    store = db.store
    assert store.index_lookup("Car", "speed", 1) == []
    assert store.index_lookup("Car", "speed", 2) == [n]


def test_stats_empty(db):
    assert db.stats().as_dict() == {"nodes": 0, "edges": 0, "tags": {}, "max_degree": 0, "max_properties": 0}


def test_snapshot_is_frozen(db):
    with db.begin() as t:
        n = t.create_node({"A"}, {"v": 1})
    view = db.snapshot()
    with db.begin() as t:
        t.set_properties(n, {"v": 2})
        t.create_node({"A"})
    assert view.node(n).props == {"v": 1}
    assert len(view.match_nodes({"A"})) == 1
    view.close()
    with db.snapshot() as fresh:
        assert fresh.node(n).props == {"v": 2}


@pytest.mark.parametrize("bad", [math.nan, math.inf, {"nested": 1}, object()])
def test_invalid_values(bad, db):
    t = db.begin()
    with pytest.raises(InvalidValue):
        t.create_node({"A"}, {"x": bad})
    t.rollback()


def test_mixed_numeric_sort():
    values = [normalize_value(v) for v in (3, 1.5, "b", True, 2, "a", [1, 2])]
    ordered = sorted(values + [None], key=sort_key)
    assert ordered[0] is True and ordered[-1] is None  # absent sorts last
    assert ordered.index(1.5) < ordered.index(2) < ordered.index(3)
    assert normalize_value([1, 2.5]) == (1, 2.5)
    with pytest.raises(InvalidValue):
        normalize_value([1, [2]])


# --- differential: index vs scan -------------------------------------------

ops = st.lists(
    st.tuples(
        st.sampled_from(["add", "set", "remove", "del"]),
        st.integers(0, 9),
        st.sampled_from(["A", "B"]),
        st.one_of(st.integers(0, 3), st.sampled_from(["x", "y"]), st.floats(0, 2, allow_nan=False)),
    ),
    max_size=40,
)


@settings(max_examples=60, deadline=None)
@given(ops=ops, index_first=st.booleans())
def test_index_matches_scan(ops, index_first):
    indexed, plain = Database(), Database()
    if index_first:
        indexed.create_index("A", "k")
    for op, slot, label, value in ops:
        for db in (indexed, plain):
            with db.begin() as t:
                live = sorted(t.node_ids())
                if op == "add" or not live:
                    t.create_node({label}, {"k": value})
                elif op == "set":
                    t.set_properties(live[slot % len(live)], {"k": value})
                elif op == "remove":
                    t.set_properties(live[slot % len(live)], {}, ["k"])
                else:
                    t.remove_node(live[slot % len(live)])
    if not index_first:
        indexed.create_index("A", "k")
    for value in (0, 1, 2, 3, "x", "y", 0.5):
        with indexed.snapshot() as a, plain.snapshot() as b:
            assert a.match_nodes({"A"}, {"k": value}) == b.match_nodes({"A"}, {"k": value})
