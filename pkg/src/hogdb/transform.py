"""Lossless lowering of higher-order graphs onto the typed LPG store, and back.

Every HO entity becomes one store node tagged with its reserved type label;
memberships become typed edges:

========================  =======================  ==========================
family                    tag nodes                link edges (stored src->dst)
========================  =======================  ==========================
hypergraph / simplicial   _node, _hyperedge        _incidence  node->hyperedge
node tuples               _node, _edge,            _adjacency  src->edge->dst
                          _node_tuple              _node_membership node->tuple (+_pos)
subgraph collections      _node, _edge,            _adjacency, _node_membership
                          _subgraph,               node->subgraph, _edge_membership
                          _subgraph_edge           edge->subgraph, _subgraph_adjacency
                                                   subgraph->sgedge->subgraph
========================  =======================  ==========================

The symmetric link pairs of the set-theoretic construction are stored once;
direction on ``_adjacency`` and ``_subgraph_adjacency`` records which
endpoint is the source.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from typing import Iterable

from .errors import ClosureViolation, MalformedLowering, TooLarge, ValidationFailed
from .model import (
    Edge,
    HigherOrderGraph,
    HyperEdge,
    Node,
    NodeTuple,
    Simplex,
    Subgraph,
    SubgraphEdge,
    errors_only,
    missing_faces,
    validate,
)
from .store import EDGE_TAGS, NODE_TAGS, POS_KEY, UID_KEY, EdgeRecord, GraphView, NodeRecord
from .values import props_key, value_key

FAMILY_TAGS = {
    "hypergraph": frozenset({"_node", "_hyperedge"}),
    "simplicial": frozenset({"_node", "_hyperedge"}),
    "tuple": frozenset({"_node", "_edge", "_node_tuple"}),
    "subgraph": frozenset({"_node", "_edge", "_subgraph", "_subgraph_edge"}),
}

# kappa -> allowed (tau(src), tau(dst)) pairs
LINK_RULES = {
    "_incidence": {("_node", "_hyperedge")},
    "_adjacency": {("_node", "_edge"), ("_edge", "_node")},
    "_node_membership": {("_node", "_node_tuple"), ("_node", "_subgraph")},
    "_edge_membership": {("_edge", "_subgraph")},
    "_subgraph_adjacency": {("_subgraph", "_subgraph_edge"), ("_subgraph_edge", "_subgraph")},
}


def user_labels(labels: Iterable[str]) -> frozenset:
    return frozenset(label for label in labels if not label.startswith("_"))


def user_props(props: dict) -> dict:
    return {k: v for k, v in props.items() if not k.startswith("_")}


def _with_uid(entity) -> dict:
    props = dict(entity.properties)
    props[UID_KEY] = entity.uid
    return props


# ---------------------------------------------------------------------------
# lowering
# ---------------------------------------------------------------------------

class Lowerer:
    """Writes HO entities into an open transaction, one entity at a time.

    Used both for one-shot lowering and by the CRUD layer, so incremental
    and batch construction produce the same store.
    """

    def __init__(self, txn) -> None:
        self.txn = txn
        self._ids: dict[str, int] = {}

    def resolve(self, uid: str) -> int | None:
        nid = self._ids.get(uid)
        if nid is not None:
            return nid
        hit = self.txn.find_uid(uid)
        if hit is None or hit[0] != "node":
            return None
        return hit[1]

    def _tag_node(self, tag: str, entity) -> int:
        nid = self.txn.create_node({tag} | entity.labels, _with_uid(entity), allow_reserved=True)
        self._ids[entity.uid] = nid
        return nid

    def _link(self, src: int, dst: int, tag: str, props: dict | None = None) -> int:
        return self.txn.create_edge(src, dst, {tag}, props, allow_reserved=True)

    def node(self, n: Node) -> int:
        return self._tag_node("_node", n)

    def edge(self, e: Edge, *, reify: bool, src: int, dst: int) -> int:
        if not reify:
            eid = self.txn.create_edge(src, dst, e.labels, _with_uid(e))
            return eid
        nid = self._tag_node("_edge", e)
        self._link(src, nid, "_adjacency")
        self._link(nid, dst, "_adjacency")
        return nid

    def hyperedge(self, h, members: list[int]) -> int:
        nid = self._tag_node("_hyperedge", h)
        for m in members:
            self._link(m, nid, "_incidence")
        return nid

    def node_tuple(self, t: NodeTuple, members: list[tuple[int, int]]) -> int:
        nid = self._tag_node("_node_tuple", t)
        for pos, m in members:
            self._link(m, nid, "_node_membership", {POS_KEY: pos})
        return nid

    def subgraph(self, s: Subgraph, nodes: list[int], edges: list[int]) -> int:
        nid = self._tag_node("_subgraph", s)
        for n in nodes:
            self._link(n, nid, "_node_membership")
        for e in edges:
            self._link(e, nid, "_edge_membership")
        return nid

    def subgraph_edge(self, f: SubgraphEdge, src: int, dst: int) -> int:
        nid = self._tag_node("_subgraph_edge", f)
        self._link(src, nid, "_subgraph_adjacency")
        self._link(nid, dst, "_subgraph_adjacency")
        return nid


def _needs_reify(graph: HigherOrderGraph) -> bool:
    return bool(graph.tuples or graph.subgraphs or graph.subgraph_edges)


def lower_into(graph: HigherOrderGraph, txn, *, reify_edges: bool | None = None) -> dict[str, int]:
    """Stage the lowering of ``graph`` inside ``txn``; returns uid -> store id."""
    problems = errors_only(validate(graph))
    if problems:
        raise ValidationFailed(f"cannot lower an invalid graph: {problems[0].message}", problems)
    reify = _needs_reify(graph) if reify_edges is None else reify_edges
    if not reify and any(s.subgraph_edges for s in graph.subgraphs.values()):
        raise ValidationFailed("subgraph edge membership requires reified edges")
    low = Lowerer(txn)
    ids = low._ids
    for uid in sorted(graph.nodes):
        low.node(graph.nodes[uid])
    for uid in sorted(graph.edges):
        e = graph.edges[uid]
        eid = low.edge(e, reify=reify, src=ids[e.src], dst=ids[e.dst])
        if not reify:
            ids[uid] = eid
    for uid in sorted(graph.hyperedges):
        h = graph.hyperedges[uid]
        low.hyperedge(h, [ids[m] for m in sorted(h.members)])
    for uid in sorted(graph.simplices):
        s = graph.simplices[uid]
        low.hyperedge(s, [ids[m] for m in sorted(s.vertices)])
    for uid in sorted(graph.tuples):
        t = graph.tuples[uid]
        low.node_tuple(t, [(pos, ids[m]) for pos, m in t.elements])
    for uid in sorted(graph.subgraphs):
        s = graph.subgraphs[uid]
        low.subgraph(s, [ids[n] for n in sorted(s.subgraph_nodes)], [ids[e] for e in sorted(s.subgraph_edges)])
    for uid in sorted(graph.subgraph_edges):
        f = graph.subgraph_edges[uid]
        low.subgraph_edge(f, ids[f.src], ids[f.dst])
    return dict(ids)


def lower(graph: HigherOrderGraph, target=None, *, reify_edges: bool | None = None):
    """Lower ``graph``. With ``target=None`` a fresh in-memory database is
    built and returned; otherwise ``target`` is an open transaction (staged,
    not committed) or a database (committed in one transaction)."""
    from .txn import Database, Transaction

    if isinstance(target, Transaction):
        lower_into(graph, target, reify_edges=reify_edges)
        return target
    db = Database() if target is None else target
    with db.begin() as txn:
        lower_into(graph, txn, reify_edges=reify_edges)
    return db


def _family_check(graph: HigherOrderGraph, allowed: set[str]) -> None:
    present = {name for name in ("edges", "hyperedges", "simplices", "tuples", "subgraphs", "subgraph_edges")
               if getattr(graph, name)}
    extra = present - allowed
    if extra:
        raise ValidationFailed(f"graph holds entities outside this family: {sorted(extra)}")


def lower_hypergraph(graph: HigherOrderGraph, target=None):
    _family_check(graph, {"hyperedges"})
    return lower(graph, target, reify_edges=False)


def lower_simplicial(graph: HigherOrderGraph, target=None):
    _family_check(graph, {"simplices"})
    return lower(graph, target, reify_edges=False)


def lower_tuple_graph(graph: HigherOrderGraph, target=None):
    _family_check(graph, {"edges", "tuples"})
    return lower(graph, target, reify_edges=True)


def lower_subgraph_graph(graph: HigherOrderGraph, target=None):
    _family_check(graph, {"edges", "subgraphs", "subgraph_edges"})
    return lower(graph, target, reify_edges=True)


def expected_size(graph: HigherOrderGraph, *, reify_edges: bool | None = None) -> tuple[int, int]:
    """Closed-form (node count, edge count) of the lowered graph."""
    reify = _needs_reify(graph) if reify_edges is None else reify_edges
    n, m = len(graph.nodes), len(graph.edges)
    nodes = n + len(graph.hyperedges) + len(graph.simplices) + len(graph.tuples)
    nodes += len(graph.subgraphs) + len(graph.subgraph_edges)
    edges = sum(len(h.members) for h in graph.hyperedges.values())
    edges += sum(len(s.vertices) for s in graph.simplices.values())
    edges += sum(len(t.elements) for t in graph.tuples.values())
    edges += sum(len(s.subgraph_nodes) + len(s.subgraph_edges) for s in graph.subgraphs.values())
    edges += 2 * len(graph.subgraph_edges)
    if reify:
        nodes += m
        edges += 2 * m
    else:
        edges += m
    return nodes, edges


# ---------------------------------------------------------------------------
# lifting
# ---------------------------------------------------------------------------

def _view_of(source) -> tuple[GraphView, bool]:
    from .txn import Database

    if isinstance(source, Database):
        return source.snapshot(), True
    return source, False


def _uid(rec) -> str:
    uid = rec.props.get(UID_KEY)
    if not isinstance(uid, str):
        raise MalformedLowering(f"tagged entity {rec.id} carries no {UID_KEY}")
    return uid


def _tag(view: GraphView, rec: NodeRecord) -> str | None:
    tags = [label for label in rec.labels if label in NODE_TAGS]
    if len(tags) > 1:
        raise MalformedLowering(f"node {rec.id} has several type tags {sorted(tags)}")
    return tags[0] if tags else None


def _check_link(view: GraphView, link: EdgeRecord) -> str:
    tags = [label for label in link.labels if label in EDGE_TAGS]
    if len(tags) != 1:
        raise MalformedLowering(f"edge {link.id} must carry exactly one link tag, has {sorted(tags)}")
    kappa = tags[0]
    src, dst = view.node(link.src), view.node(link.dst)
    pair = (_tag(view, src), _tag(view, dst))
    if pair not in LINK_RULES[kappa]:
        raise MalformedLowering(f"{kappa} link {link.id} joins {pair[0]} to {pair[1]}")
    has_pos = POS_KEY in link.props
    wants_pos = kappa == "_node_membership" and pair[1] == "_node_tuple"
    if has_pos != wants_pos:
        raise MalformedLowering(f"link {link.id}: {POS_KEY} must be present exactly on tuple memberships")
    if wants_pos and (not isinstance(link.props[POS_KEY], int) or isinstance(link.props[POS_KEY], bool)):
        raise MalformedLowering(f"link {link.id}: {POS_KEY} must be an integer")
    return kappa


def _links(view: GraphView, rec: NodeRecord, kappa: str, *, into: bool | None = None) -> list[EdgeRecord]:
    out = []
    for link in view.incident(rec.id):
        if kappa not in link.labels:
            continue
        if into is True and link.dst != rec.id:
            continue
        if into is False and link.src != rec.id:
            continue
        out.append(link)
    return out


def lift_node(view: GraphView, rec: NodeRecord) -> Node:
    return Node(_uid(rec), user_labels(rec.labels), user_props(rec.props))


def lift_native_edge(view: GraphView, rec: EdgeRecord) -> Edge:
    src, dst = view.node(rec.src), view.node(rec.dst)
    return Edge(_uid(src), _uid(dst), user_labels(rec.labels), user_props(rec.props), _uid(rec))


def lift_reified_edge(view: GraphView, rec: NodeRecord) -> Edge:
    ins = _links(view, rec, "_adjacency", into=True)
    outs = _links(view, rec, "_adjacency", into=False)
    if len(ins) != 1 or len(outs) != 1:
        raise MalformedLowering(
            f"_edge node {rec.id} needs exactly 2 _adjacency links (one in, one out), "
            f"has {len(ins)} in / {len(outs)} out"
        )
    src, dst = view.node(ins[0].src), view.node(outs[0].dst)
    return Edge(_uid(src), _uid(dst), user_labels(rec.labels), user_props(rec.props), _uid(rec))


def hyperedge_members(view: GraphView, rec: NodeRecord) -> list[str]:
    members = [_uid(view.node(link.src)) for link in _links(view, rec, "_incidence", into=True)]
    if len(set(members)) != len(members):
        raise MalformedLowering(f"hyperedge node {rec.id} has repeated incidences")
    return members


def lift_hyperedge(view: GraphView, rec: NodeRecord, *, as_simplex: bool = False):
    members = hyperedge_members(view, rec)
    if len(members) < 2:
        raise MalformedLowering(f"_hyperedge node {rec.id} has {len(members)} incidence(s), needs >= 2")
    cls = Simplex if as_simplex else HyperEdge
    return cls(frozenset(members), user_labels(rec.labels), user_props(rec.props), _uid(rec))


def lift_node_tuple(view: GraphView, rec: NodeRecord) -> NodeTuple:
    elements = []
    for link in _links(view, rec, "_node_membership", into=True):
        pos = link.props.get(POS_KEY)
        if not isinstance(pos, int) or isinstance(pos, bool):
            raise MalformedLowering(f"tuple membership {link.id} lacks an integer {POS_KEY}")
        elements.append((pos, _uid(view.node(link.src))))
    positions = [p for p, _ in elements]
    if len(set(positions)) != len(positions):
        raise MalformedLowering(f"tuple node {rec.id} has duplicate {POS_KEY} values")
    return NodeTuple(tuple(sorted(elements)), user_labels(rec.labels), user_props(rec.props), _uid(rec))


def lift_subgraph(view: GraphView, rec: NodeRecord) -> Subgraph:
    nodes = set()
    for link in _links(view, rec, "_node_membership", into=True):
        nodes.add(_uid(view.node(link.src)))
    edges = set()
    for link in _links(view, rec, "_edge_membership", into=True):
        edge_rec = view.node(link.src)
        edge = lift_reified_edge(view, edge_rec)
        outside = [x for x in (edge.src, edge.dst) if x not in nodes]
        if outside:
            raise MalformedLowering(
                f"subgraph {rec.id} holds edge {edge.uid!r} whose endpoint(s) {outside} are not members"
            )
        edges.add(edge.uid)
    return Subgraph(frozenset(nodes), frozenset(edges), user_labels(rec.labels), user_props(rec.props), _uid(rec))


def lift_subgraph_edge(view: GraphView, rec: NodeRecord) -> SubgraphEdge:
    ins = _links(view, rec, "_subgraph_adjacency", into=True)
    outs = _links(view, rec, "_subgraph_adjacency", into=False)
    if len(ins) != 1 or len(outs) != 1:
        raise MalformedLowering(
            f"_subgraph_edge node {rec.id} needs exactly 2 _subgraph_adjacency links, has {len(ins) + len(outs)}"
        )
    src, dst = view.node(ins[0].src), view.node(outs[0].dst)
    return SubgraphEdge(_uid(src), _uid(dst), user_labels(rec.labels), user_props(rec.props), _uid(rec))


def lift_record(view: GraphView, rec: NodeRecord, *, simplicial: bool = False):
    """Lift the single HO entity represented by tag node ``rec``."""
    tag = _tag(view, rec)
    if tag == "_node":
        return lift_node(view, rec)
    if tag == "_edge":
        return lift_reified_edge(view, rec)
    if tag == "_hyperedge":
        return lift_hyperedge(view, rec, as_simplex=simplicial)
    if tag == "_node_tuple":
        return lift_node_tuple(view, rec)
    if tag == "_subgraph":
        return lift_subgraph(view, rec)
    if tag == "_subgraph_edge":
        return lift_subgraph_edge(view, rec)
    raise MalformedLowering(f"node {rec.id} carries no type tag")


def lift(source, *, simplicial: bool = False, allowed_tags: frozenset | None = None) -> HigherOrderGraph:
    """Reconstruct the higher-order graph stored in ``source``.

    ``source`` is a database or any read view. Untagged nodes are plain LPG
    data and are skipped; untagged edges between ``_node`` entities are
    lifted as native edges.
    """
    view, owned = _view_of(source)
    try:
        graph = HigherOrderGraph()
        uid_seen: set[str] = set()
        for rec in view.nodes():
            tag = _tag(view, rec)
            if tag is None:
                continue
            if allowed_tags is not None and tag not in allowed_tags:
                raise MalformedLowering(f"unexpected {tag} node {rec.id} for this family")
            entity = lift_record(view, rec, simplicial=simplicial)
            if entity.uid in uid_seen:
                raise MalformedLowering(f"uid {entity.uid!r} appears more than once")
            uid_seen.add(entity.uid)
            graph.add(entity)
        for link in view.edges():
            if any(label in EDGE_TAGS for label in link.labels):
                _check_link(view, link)
                continue
            src, dst = view.node(link.src), view.node(link.dst)
            if _tag(view, src) == "_node" and _tag(view, dst) == "_node":
                edge = lift_native_edge(view, link)
                if edge.uid in uid_seen:
                    raise MalformedLowering(f"uid {edge.uid!r} appears more than once")
                uid_seen.add(edge.uid)
                graph.add(edge)
        if simplicial:
            missing = missing_faces(s.vertices for s in graph.simplices.values())
            if missing:
                simplex, faces = min(missing.items(), key=lambda kv: sorted(kv[0]))
                raise ClosureViolation(
                    f"simplex {sorted(simplex)} is missing faces {[sorted(f) for f in faces]}"
                )
        return graph
    finally:
        if owned:
            view.close()


def lift_hypergraph(source) -> HigherOrderGraph:
    return lift(source, allowed_tags=FAMILY_TAGS["hypergraph"])


def lift_simplicial(source) -> HigherOrderGraph:
    return lift(source, simplicial=True, allowed_tags=FAMILY_TAGS["simplicial"])


def lift_tuple_graph(source) -> HigherOrderGraph:
    return lift(source, allowed_tags=FAMILY_TAGS["tuple"])


def lift_subgraph_graph(source) -> HigherOrderGraph:
    return lift(source, allowed_tags=FAMILY_TAGS["subgraph"])


# ---------------------------------------------------------------------------
# store comparison
# ---------------------------------------------------------------------------

def fingerprint(source) -> tuple:
    """Canonical content of a store, independent of internal ids.

    Two stores have equal fingerprints iff they hold the same nodes (by uid,
    labels, properties) and the same multiset of edges between them.
    """
    view, owned = _view_of(source)
    try:
        uid_of = {}
        nodes = []
        for rec in view.nodes():
            uid_of[rec.id] = rec.props.get(UID_KEY, f"#{rec.id}")
            nodes.append((uid_of[rec.id], tuple(sorted(rec.labels)), props_key(rec.props)))
        edges = []
        for rec in view.edges():
            edges.append((uid_of[rec.src], uid_of[rec.dst], tuple(sorted(rec.labels)), props_key(rec.props)))
        return (tuple(sorted(nodes)), tuple(sorted(edges)))
    finally:
        if owned:
            view.close()


# ---------------------------------------------------------------------------
# canonical form for small graphs
# ---------------------------------------------------------------------------

def _color(rec) -> tuple:
    props = {k: v for k, v in rec.props.items() if k != UID_KEY}
    return (tuple(sorted(rec.labels)), props_key(props))


def canonical_form_small(source, max_nodes: int = 12) -> tuple:
    """Isomorphism certificate of a small typed, property-labeled multigraph.

    Node identity (``_uid``) is ignored; labels, all other properties and
    directed, labeled edges are respected. Colors are refined by neighbour
    multisets, then every permutation inside each refined color class is
    tried and the lexicographically smallest edge list kept.
    """
    view, owned = _view_of(source)
    try:
        recs = list(view.nodes())
        if len(recs) > max_nodes:
            raise TooLarge(f"{len(recs)} nodes exceeds the brute-force limit of {max_nodes}")
        index = {rec.id: i for i, rec in enumerate(recs)}
        base = [_color(rec) for rec in recs]
        edges = [(index[e.src], index[e.dst], _color(e)) for e in view.edges()]
    finally:
        if owned:
            view.close()

    n = len(recs)
    out_nb = defaultdict(list)
    in_nb = defaultdict(list)
    for s, d, c in edges:
        out_nb[s].append((c, d))
        in_nb[d].append((c, s))

    # color refinement; ranks only depend on invariant data
    sigs = list(base)
    classes = len(set(sigs))
    while True:
        ranks = {sig: r for r, sig in enumerate(sorted(set(sigs)))}
        rank = [ranks[sig] for sig in sigs]
        sigs = [
            (rank[i],
             tuple(sorted((c, rank[d]) for c, d in out_nb[i])),
             tuple(sorted((c, rank[s]) for c, s in in_nb[i])))
            for i in range(n)
        ]
        new_classes = len(set(sigs))
        if new_classes == classes:
            break
        classes = new_classes
    ranks = {sig: r for r, sig in enumerate(sorted(set(sigs)))}
    rank = [ranks[sig] for sig in sigs]

    groups = defaultdict(list)
    for i in range(n):
        groups[rank[i]].append(i)
    ordered = [groups[r] for r in sorted(groups)]
    node_part = tuple(base[g[0]] for g in ordered for _ in g)

    best = None
    for perms in itertools.product(*(itertools.permutations(g) for g in ordered)):
        pos = {}
        k = 0
        for perm in perms:
            for i in perm:
                pos[i] = k
                k += 1
        cand = tuple(sorted((pos[s], pos[d], c) for s, d, c in edges))
        if best is None or cand < best:
            best = cand
    return (node_part, best if best is not None else ())


def value_signature(value) -> tuple:
    return value_key(value)
