"""Higher-order CRUD interface.

Each call decomposes into low-level store mutations bundled in a single
transaction: its own, or one passed in as ``txn=`` so several calls can be
composed atomically. Entities are addressed by their ``uid`` or matched by
:class:`EntityPattern`; pattern deletes affect every match.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from . import query
from .errors import (
    BadParams,
    TooLarge,
    UnknownEdge,
    UnknownNode,
    UnknownSubgraph,
    ValidationFailed,
)
from .model import (
    DEFAULT_MAX_SIMPLEX_SIZE,
    Edge,
    HigherOrderGraph,
    HyperEdge,
    Node,
    NodeTuple,
    Simplex,
    Subgraph,
    SubgraphEdge,
    _labels,
    _ref,
    errors_only,
    new_uid,
    validate,
)
from .store import POS_KEY, UID_KEY, GraphView
from .transform import (
    FAMILY_TAGS,
    Lowerer,
    hyperedge_members,
    lift,
    lift_native_edge,
    lift_record,
)
from .txn import Database, Transaction
from .values import normalize_properties

FAMILIES = ("lpg", "hypergraph", "simplicial", "tuple", "subgraph")

KIND_TAGS = {
    "node": "_node",
    "edge": "_edge",
    "hyperedge": "_hyperedge",
    "simplex": "_hyperedge",
    "node_tuple": "_node_tuple",
    "subgraph": "_subgraph",
    "subgraph_edge": "_subgraph_edge",
}


@dataclass
class EntityPattern:
    """Selects entities of one kind by uid, labels, property equality and,
    optionally, exact structure (``members``: member set for hyperedges,
    simplices and subgraph nodes; ordered members for tuples; ``(src, dst)``
    for edges and subgraph-edges)."""

    kind: str
    labels: frozenset = frozenset()
    properties: dict = field(default_factory=dict)
    uid: str | None = None
    members: Any = None

    def __post_init__(self) -> None:
        if self.kind not in KIND_TAGS:
            raise BadParams(f"unknown entity kind {self.kind!r}; expected one of {sorted(KIND_TAGS)}")
        self.labels = _labels(self.labels)
        self.properties = normalize_properties(self.properties)

    @property
    def is_empty(self) -> bool:
        return not (self.labels or self.properties or self.uid or self.members is not None)


@dataclass
class DeleteResult:
    """Outcome of :meth:`HigherOrderDB.delete_node`."""

    nodes: int = 0
    edges: int = 0
    hyperedges: int = 0
    simplices: int = 0

    @property
    def count(self) -> int:
        return self.nodes


def _check_user_data(labels: frozenset, props: Mapping[str, Any]) -> None:
    bad = sorted(label for label in labels if label.startswith("_"))
    bad_keys = sorted(key for key in props if key.startswith("_"))
    if bad or bad_keys:
        raise ValidationFailed(f"reserved '_' names are not allowed in user data: {bad + bad_keys}")


def detect_family(db: Database) -> str:
    """Best guess of the storage family from the type tags present.

    Hypergraphs and simplicial complexes share the ``_hyperedge`` tag, so
    this answers ``"hypergraph"`` for both.
    """
    tags = db.stats().tags
    if "_subgraph" in tags or "_subgraph_edge" in tags:
        return "subgraph"
    if "_node_tuple" in tags or "_edge" in tags:
        return "tuple"
    if "_hyperedge" in tags:
        return "hypergraph"
    return "lpg"


class HigherOrderDB:
    """Higher-order view over an embedded :class:`Database`.

    :param db: database to wrap; a fresh in-memory one when omitted
    :param family: storage convention; ``"tuple"`` and ``"subgraph"`` store
        pairwise edges reified as ``_edge`` nodes, the others natively
    :param max_simplex_size: largest simplex accepted by :meth:`add_simplex`
    """

    def __init__(self, db: Database | None = None, *, family: str = "lpg",
                 max_simplex_size: int = DEFAULT_MAX_SIMPLEX_SIZE) -> None:
        if family not in FAMILIES:
            raise BadParams(f"family must be one of {FAMILIES}, got {family!r}")
        self.db = db if db is not None else Database()
        self.family = family
        self.max_simplex_size = max_simplex_size

    @classmethod
    def open(cls, wal_path, *, family: str | None = None, fsync_policy: str = "always",
             **kw) -> "HigherOrderDB":
        """Open (or recover) a WAL-backed store; the family is inferred from its tags when omitted."""
        db = Database(wal_path, fsync_policy)
        return cls(db, family=family or detect_family(db), **kw)

    @property
    def reify_edges(self) -> bool:
        return self.family in ("tuple", "subgraph")

    # plumbing -----------------------------------------------------------
    def begin(self) -> Transaction:
        return self.db.begin()

    def _run(self, txn: Transaction | None, fn: Callable[[Transaction], Any]):
        if txn is not None:
            return fn(txn)
        with self.db.begin() as own:
            return fn(own)

    def _read(self, txn: Transaction | None, fn: Callable[[GraphView], Any]):
        if txn is not None:
            return fn(txn)
        with self.db.snapshot() as view:
            return fn(view)

    def _fresh_uid(self, txn: Transaction, uid: str | None) -> str:
        if not uid:
            return new_uid()
        if txn.find_uid(uid) is not None:
            raise ValidationFailed(f"uid {uid!r} is already in use")
        return uid

    def _resolve(self, view: GraphView, uid: str, tag: str, error=UnknownNode) -> int:
        hit = view.find_uid(uid)
        if hit is not None and hit[0] == "node":
            rec = view.node(hit[1])
            if tag in rec.labels:
                return hit[1]
        raise error(f"no {tag.lstrip('_')} with uid {uid!r}")

    def _resolve_edge(self, view: GraphView, uid: str) -> tuple[str, int]:
        hit = view.find_uid(uid)
        if hit is not None:
            if hit[0] == "edge":
                return hit
            if "_edge" in view.node(hit[1]).labels:
                return hit
        raise UnknownEdge(f"no edge with uid {uid!r}")

    # inserts ------------------------------------------------------------
    def add(self, entity, *, txn: Transaction | None = None) -> str:
        """Insert any HO entity object, dispatching on its type."""
        if isinstance(entity, Node):
            return self.add_node(entity.labels, entity.properties, uid=entity.uid, txn=txn)
        if isinstance(entity, Edge):
            return self.add_edge(entity.src, entity.dst, entity.labels, entity.properties, uid=entity.uid, txn=txn)
        if isinstance(entity, HyperEdge):
            return self.add_hyperedge(entity, txn=txn)
        if isinstance(entity, Simplex):
            return self.add_simplex(entity, txn=txn)
        if isinstance(entity, NodeTuple):
            return self.add_node_tuple(entity, txn=txn)
        if isinstance(entity, Subgraph):
            return self.add_subgraph(entity, txn=txn)
        if isinstance(entity, SubgraphEdge):
            return self.add_subgraph_edge(entity, txn=txn)
        raise TypeError(f"not a higher-order entity: {entity!r}")

    def add_node(self, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None, *,
                 uid: str | None = None, txn: Transaction | None = None) -> str:
        node = Node(uid or "", labels, properties or {})
        _check_user_data(node.labels, node.properties)

        def go(t: Transaction) -> str:
            final = Node(self._fresh_uid(t, node.uid), node.labels, node.properties)
            Lowerer(t).node(final)
            return final.uid

        return self._run(txn, go)

    def add_edge(self, src, dst, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None, *,
                 uid: str | None = None, txn: Transaction | None = None) -> str:
        edge = Edge(src, dst, labels, properties or {}, uid or "")
        _check_user_data(edge.labels, edge.properties)

        def go(t: Transaction) -> str:
            s = self._resolve(t, edge.src, "_node")
            d = self._resolve(t, edge.dst, "_node")
            final = Edge(edge.src, edge.dst, edge.labels, edge.properties, self._fresh_uid(t, edge.uid))
            Lowerer(t).edge(final, reify=self.reify_edges, src=s, dst=d)
            return final.uid

        return self._run(txn, go)

    def add_hyperedge(self, h, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None, *,
                      uid: str | None = None, txn: Transaction | None = None) -> str:
        """Insert a hyperedge; ``h`` is a :class:`HyperEdge` or an iterable of member uids."""
        if self.family == "simplicial":
            raise ValidationFailed("a simplicial store takes simplices, use add_simplex")
        if not isinstance(h, HyperEdge):
            h = HyperEdge(h, labels, properties or {}, uid or "")
        problems = errors_only(validate(h))
        if problems:
            raise ValidationFailed(problems[0].message, problems)

        def go(t: Transaction) -> str:
            members = [self._resolve(t, m, "_node") for m in sorted(h.members)]
            final = HyperEdge(h.members, h.labels, h.properties, self._fresh_uid(t, h.uid))
            Lowerer(t).hyperedge(final, members)
            return final.uid

        return self._run(txn, go)

    def _members(self, view: GraphView, hyperedge_id: int) -> frozenset[int]:
        return frozenset(link.src for link in view.incident(hyperedge_id)
                         if "_incidence" in link.labels and link.dst == hyperedge_id)

    def _hyperedges_containing(self, view: GraphView, node_ids: Iterable[int]) -> list[int]:
        """Hyperedge tag nodes whose member set includes every id in ``node_ids``."""
        node_ids = set(node_ids)
        if not node_ids:
            return []
        pivot = min(node_ids, key=view.degree)
        out = []
        for link in view.incident(pivot):
            if "_incidence" in link.labels and link.src == pivot:
                if node_ids <= self._members(view, link.dst):
                    out.append(link.dst)
        return out

    def _find_simplex(self, view: GraphView, vertex_ids: frozenset[int]) -> int | None:
        for hid in self._hyperedges_containing(view, vertex_ids):
            if self._members(view, hid) == vertex_ids:
                return hid
        return None

    def add_simplex(self, s, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None, *,
                    uid: str | None = None, txn: Transaction | None = None) -> str:
        """Insert a simplex together with any missing faces of size >= 2.

        Returns the uid of the simplex; when an identical vertex set is
        already stored its uid is returned and nothing is written.
        """
        if self.family not in ("simplicial", "lpg"):
            raise ValidationFailed(f"simplices cannot be added to a {self.family} store")
        if not isinstance(s, Simplex):
            s = Simplex(s, labels, properties or {}, uid or "")
        if len(s.vertices) > self.max_simplex_size:
            raise TooLarge(f"simplex of size {len(s.vertices)} exceeds the limit {self.max_simplex_size}")
        problems = errors_only(validate(s, max_simplex_size=self.max_simplex_size))
        if problems:
            raise ValidationFailed(problems[0].message, problems)

        def go(t: Transaction) -> str:
            ids = {v: self._resolve(t, v, "_node") for v in s.vertices}
            top = frozenset(ids.values())
            existing = self._find_simplex(t, top)
            if existing is not None:
                return t.node(existing).props[UID_KEY]
            low = Lowerer(t)
            verts = sorted(s.vertices)
            for size in range(2, len(verts)):
                for face in itertools.combinations(verts, size):
                    face_ids = frozenset(ids[v] for v in face)
                    if self._find_simplex(t, face_ids) is None:
                        low.hyperedge(Simplex(face, uid=new_uid()), sorted(face_ids))
            final = Simplex(s.vertices, s.labels, s.properties, self._fresh_uid(t, s.uid))
            low.hyperedge(final, sorted(top))
            return final.uid

        return self._run(txn, go)

    def add_node_tuple(self, t_, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None, *,
                       uid: str | None = None, txn: Transaction | None = None) -> str:
        """Insert a node-tuple; ``t_`` is a :class:`NodeTuple` or a sequence of member uids."""
        tup = t_ if isinstance(t_, NodeTuple) else NodeTuple(tuple(t_), labels, properties or {}, uid or "")
        problems = errors_only(validate(tup))
        if problems:
            raise ValidationFailed(problems[0].message, problems)

        def go(t: Transaction) -> str:
            members = [(pos, self._resolve(t, m, "_node")) for pos, m in tup.elements]
            final = NodeTuple(tup.elements, tup.labels, tup.properties, self._fresh_uid(t, tup.uid))
            Lowerer(t).node_tuple(final, members)
            return final.uid

        return self._run(txn, go)

    def _reify(self, t: Transaction, edge_id: int) -> int:
        """Replace native edge ``edge_id`` by an ``_edge`` node carrying the same uid."""
        rec = t.edge(edge_id)
        edge = lift_native_edge(t, rec)
        t.remove_edge(edge_id)
        return Lowerer(t).edge(edge, reify=True, src=rec.src, dst=rec.dst)

    def _edge_endpoints(self, view: GraphView, edge_node: int) -> tuple[int, int]:
        src = dst = None
        for link in view.incident(edge_node):
            if "_adjacency" not in link.labels:
                continue
            if link.dst == edge_node:
                src = link.src
            else:
                dst = link.dst
        return src, dst

    def add_subgraph(self, s, edges: Iterable = (), labels: Iterable[str] = (),
                     properties: Mapping[str, Any] | None = None, *,
                     uid: str | None = None, txn: Transaction | None = None) -> str:
        """Insert a subgraph; ``s`` is a :class:`Subgraph` or an iterable of node uids
        (then ``edges`` lists its edge uids). Native member edges are reified."""
        sub = s if isinstance(s, Subgraph) else Subgraph(s, edges, labels, properties or {}, uid or "")
        problems = errors_only(validate(sub))
        if problems:
            raise ValidationFailed(problems[0].message, problems)

        def go(t: Transaction) -> str:
            node_ids = {n: self._resolve(t, n, "_node") for n in sorted(sub.subgraph_nodes)}
            members = set(node_ids.values())
            resolved = [self._resolve_edge(t, e) for e in sorted(sub.subgraph_edges)]
            for space, ent in resolved:
                if space == "edge":
                    rec = t.edge(ent)
                    ends = (rec.src, rec.dst)
                else:
                    ends = self._edge_endpoints(t, ent)
                if not set(ends) <= members:
                    raise ValidationFailed(f"subgraph edge {t.edge(ent).uid if space == 'edge' else t.node(ent).uid!r} "
                                           "has an endpoint outside the subgraph")
            edge_nodes = [self._reify(t, ent) if space == "edge" else ent for space, ent in resolved]
            final = Subgraph(sub.subgraph_nodes, sub.subgraph_edges, sub.labels, sub.properties,
                             self._fresh_uid(t, sub.uid))
            Lowerer(t).subgraph(final, list(node_ids.values()), edge_nodes)
            return final.uid

        return self._run(txn, go)

    def add_subgraph_edge(self, f, dst=None, labels: Iterable[str] = (),
                          properties: Mapping[str, Any] | None = None, *,
                          uid: str | None = None, txn: Transaction | None = None) -> str:
        """Insert a subgraph-edge; ``f`` is a :class:`SubgraphEdge` or the source subgraph uid."""
        sge = f if isinstance(f, SubgraphEdge) else SubgraphEdge(f, dst, labels, properties or {}, uid or "")
        _check_user_data(sge.labels, sge.properties)

        def go(t: Transaction) -> str:
            s = self._resolve(t, sge.src, "_subgraph", UnknownSubgraph)
            d = self._resolve(t, sge.dst, "_subgraph", UnknownSubgraph)
            final = SubgraphEdge(sge.src, sge.dst, sge.labels, sge.properties, self._fresh_uid(t, sge.uid))
            Lowerer(t).subgraph_edge(final, s, d)
            return final.uid

        return self._run(txn, go)

    # matching -----------------------------------------------------------
    def _pattern(self, kind: str, pattern, labels, properties, uid, members) -> EntityPattern:
        if isinstance(pattern, EntityPattern):
            if pattern.kind != kind and {pattern.kind, kind} != {"hyperedge", "simplex"}:
                raise BadParams(f"expected a {kind} pattern, got {pattern.kind}")
            return pattern
        if isinstance(pattern, str):
            uid = pattern
        elif isinstance(pattern, Mapping):
            return EntityPattern(kind, pattern.get("labels", ()), pattern.get("properties", {}),
                                 pattern.get("uid"), pattern.get("members"))
        elif pattern is not None:
            uid = _ref(pattern)
        return EntityPattern(kind, labels or (), properties or {}, uid, members)

    def _structure_of(self, view: GraphView, kind: str, space: str, ent: int):
        if space == "edge":
            rec = view.edge(ent)
            return (view.node(rec.src).uid, view.node(rec.dst).uid)
        rec = view.node(ent)
        if kind == "edge":
            s, d = self._edge_endpoints(view, ent)
            return (view.node(s).uid, view.node(d).uid)
        if kind in ("hyperedge", "simplex"):
            return frozenset(hyperedge_members(view, rec))
        if kind == "node_tuple":
            return lift_record(view, rec).members
        if kind == "subgraph":
            return lift_record(view, rec).subgraph_nodes
        if kind == "subgraph_edge":
            return lift_record(view, rec).endpoints
        return None

    def _wanted_structure(self, pat: EntityPattern):
        if pat.members is None:
            return None
        if pat.kind in ("hyperedge", "simplex", "subgraph"):
            return frozenset(_ref(m) for m in pat.members)
        return tuple(_ref(m) for m in pat.members)

    def match(self, view: GraphView, pat: EntityPattern) -> list[tuple[str, int]]:
        """Store handles ``(space, id)`` of every entity matching ``pat``, in id order."""
        tag = KIND_TAGS[pat.kind]
        props = dict(pat.properties)
        if pat.uid is not None:
            props[UID_KEY] = pat.uid
        hits = [("node", nid) for nid in view.match_nodes(pat.labels | {tag}, props)]
        if pat.kind == "edge":
            for eid in view.match_edges(pat.labels, props):
                rec = view.edge(eid)
                if rec.tag is None and UID_KEY in rec.props:
                    hits.append(("edge", eid))
        wanted = self._wanted_structure(pat)
        if wanted is not None:
            hits = [h for h in hits if self._structure_of(view, pat.kind, *h) == wanted]
        return sorted(hits, key=lambda h: h[1])

    def _lift_hit(self, view: GraphView, kind: str, space: str, ent: int):
        if space == "edge":
            return lift_native_edge(view, view.edge(ent))
        as_simplex = kind == "simplex" or self.family == "simplicial"
        return lift_record(view, view.node(ent), simplicial=as_simplex)

    def get_entity(self, pattern=None, *, kind: str | None = None, labels=None, properties=None,
                   uid: str | None = None, members=None, txn: Transaction | None = None) -> list:
        """Lift every entity matching the pattern (partial lift), ordered by uid."""
        if isinstance(pattern, EntityPattern):
            pat = pattern
        else:
            if kind is None:
                raise BadParams("get_entity needs an EntityPattern or kind=")
            pat = self._pattern(kind, pattern, labels, properties, uid, members)

        def go(view: GraphView) -> list:
            found = [self._lift_hit(view, pat.kind, *h) for h in self.match(view, pat)]
            return sorted(found, key=lambda e: e.uid)

        return self._read(txn, go)

    def update_entity(self, pattern=None, updates: Mapping[str, Any] | None = None, *,
                      remove: Iterable[str] = (), kind: str | None = None, labels=None, properties=None,
                      uid: str | None = None, members=None, txn: Transaction | None = None) -> int:
        """Rewrite properties on every matched entity; returns the match count."""
        if isinstance(pattern, EntityPattern):
            pat = pattern
        else:
            if kind is None:
                raise BadParams("update_entity needs an EntityPattern or kind=")
            pat = self._pattern(kind, pattern, labels, properties, uid, members)
        if pat.is_empty:
            raise BadParams("refusing to update with an empty pattern")
        updates = normalize_properties(updates)
        remove = list(remove)
        _check_user_data(frozenset(), {**updates, **dict.fromkeys(remove)})

        def go(t: Transaction) -> int:
            hits = self.match(t, pat)
            for _, ent in hits:
                t.set_properties(ent, updates, remove)
            return len(hits)

        return self._run(txn, go)

    # deletes ------------------------------------------------------------
    def _delete_matches(self, kind, pattern, labels, properties, uid, members, txn,
                        fn: Callable[[Transaction, str, int], None]) -> int:
        pat = self._pattern(kind, pattern, labels, properties, uid, members)
        if pat.is_empty:
            raise BadParams(f"refusing to delete with an empty {kind} pattern")

        def go(t: Transaction) -> int:
            count = 0
            for space, ent in self.match(t, pat):
                exists = t.has_edge(ent) if space == "edge" else t.has_node(ent)
                if exists:  # may already be gone through an earlier cascade
                    fn(t, space, ent)
                    count += 1
            return count

        return self._run(txn, go)

    def delete_node(self, pattern=None, *, labels=None, properties=None, uid: str | None = None,
                    txn: Transaction | None = None) -> DeleteResult:
        """Delete matching nodes with the per-family cascade rules.

        Incident reified edges go with the node. Hyperedges holding exactly
        two members are removed; larger ones lose the node. In a simplicial
        store every simplex containing the node is removed, which keeps the
        complex closed. Tuples and subgraphs are kept, minus the memberships.
        """
        result = DeleteResult()

        def drop(t: Transaction, space: str, nid: int) -> None:
            done = set()
            for link in t.incident(nid):
                other = link.other(nid)
                if other in done:
                    continue
                if "_adjacency" in link.labels:
                    done.add(other)
                    t.remove_node(other)
                    result.edges += 1
                elif "_incidence" in link.labels:
                    if self.family == "simplicial":
                        done.add(other)
                        t.remove_node(other)
                        result.simplices += 1
                    elif len(self._members(t, other)) == 2:
                        done.add(other)
                        t.remove_node(other)
                        result.hyperedges += 1
                elif link.tag is None:
                    result.edges += 1
            t.remove_node(nid)
            result.nodes += 1

        self._delete_matches("node", pattern, labels, properties, uid, None, txn, drop)
        return result

    def delete_edge(self, pattern=None, *, labels=None, properties=None, uid: str | None = None,
                    members=None, txn: Transaction | None = None) -> int:
        def drop(t: Transaction, space: str, ent: int) -> None:
            if space == "edge":
                t.remove_edge(ent)
            else:
                t.remove_node(ent)

        return self._delete_matches("edge", pattern, labels, properties, uid, members, txn, drop)

    def _drop_node(self, t: Transaction, space: str, ent: int) -> None:
        t.remove_node(ent)

    def delete_hyperedge(self, pattern=None, *, labels=None, properties=None, uid: str | None = None,
                         members=None, txn: Transaction | None = None) -> int:
        return self._delete_matches("hyperedge", pattern, labels, properties, uid, members, txn,
                                    self._drop_node)

    def delete_simplex(self, pattern=None, *, labels=None, properties=None, uid: str | None = None,
                       members=None, txn: Transaction | None = None) -> int:
        """Delete matching simplices together with all their cofaces.

        The count covers matched simplices only, not the cascaded cofaces.
        """
        def drop(t: Transaction, space: str, ent: int) -> None:
            verts = self._members(t, ent)
            for coface in self._hyperedges_containing(t, verts):
                t.remove_node(coface)

        return self._delete_matches("simplex", pattern, labels, properties, uid, members, txn, drop)

    def delete_node_tuple(self, pattern=None, *, labels=None, properties=None, uid: str | None = None,
                          members=None, txn: Transaction | None = None) -> int:
        return self._delete_matches("node_tuple", pattern, labels, properties, uid, members, txn,
                                    self._drop_node)

    def delete_subgraph(self, pattern=None, *, labels=None, properties=None, uid: str | None = None,
                        members=None, txn: Transaction | None = None) -> int:
        """Delete matching subgraphs and their incident subgraph-edges; members stay."""
        def drop(t: Transaction, space: str, ent: int) -> None:
            attached = {link.other(ent) for link in t.incident(ent) if "_subgraph_adjacency" in link.labels}
            for f in sorted(attached):
                t.remove_node(f)
            t.remove_node(ent)

        return self._delete_matches("subgraph", pattern, labels, properties, uid, members, txn, drop)

    def delete_subgraph_edge(self, pattern=None, *, labels=None, properties=None, uid: str | None = None,
                             members=None, txn: Transaction | None = None) -> int:
        return self._delete_matches("subgraph_edge", pattern, labels, properties, uid, members, txn,
                                    self._drop_node)

    # whole-store helpers ------------------------------------------------
    def lift(self) -> HigherOrderGraph:
        simplicial = self.family == "simplicial"
        tags = FAMILY_TAGS.get(self.family)
        return lift(self.db, simplicial=simplicial, allowed_tags=tags)

    def traverse_path(self, paths, return_values=(), sort=(), distinct: bool = False,
                      txn: Transaction | None = None):
        return self._read(txn, lambda view: query.traverse_path(view, paths, return_values, sort, distinct))

    def export_node_features(self, labels=(), properties=None, feature_key: str = "feat", id_key: str = "id"):
        return query.export_node_features(self.db, labels, properties, feature_key, id_key)

    def export_edge_index(self, labels=(), properties=None, id_key: str = "id", attr_key: str | None = None, *,
                          kind: str = "edge", directed: bool = False):
        return query.export_edge_index(self.db, labels, properties, id_key, attr_key, kind=kind, directed=directed)

    def snapshot(self):
        return self.db.snapshot()

    def stats(self):
        return self.db.stats()

    def create_index(self, label: str, key: str) -> None:
        self.db.create_index(label, key)

    def close(self) -> None:
        self.db.close()

    def __enter__(self) -> "HigherOrderDB":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


__all__ = ["DeleteResult", "EntityPattern", "FAMILIES", "HigherOrderDB", "KIND_TAGS", "POS_KEY"]
