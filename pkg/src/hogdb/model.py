"""Higher-order entity types and their structural validation.

Entities reference their constituents by user-facing uid strings, never by
internal store ids, so a graph survives export, import and lowering/lifting
with its identity intact.
"""

from __future__ import annotations

import itertools
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .values import normalize_properties

DEFAULT_MAX_SIMPLEX_SIZE = 10

_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


class UidGenerator:
    """ULID-style identifiers: 48-bit millisecond time + 80-bit counter.

    Monotone within a process: ids issued in the same millisecond increment
    the random part instead of drawing a fresh one.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._last_ms = -1
        self._rand = 0

    def __call__(self) -> str:
        with self._lock:
            ms = int(time.time() * 1000)
            if ms <= self._last_ms:
                ms = self._last_ms
                self._rand += 1
            else:
                self._last_ms = ms
                self._rand = int.from_bytes(os.urandom(10), "big") >> 1
            value = (ms << 80) | (self._rand & ((1 << 80) - 1))
        chars = []
        for _ in range(26):
            chars.append(_CROCKFORD[value & 31])
            value >>= 5
        return "".join(reversed(chars))


new_uid = UidGenerator()


def _ref(item: Any) -> str:
    """Accept either a uid string or an entity object carrying ``uid``."""
    if isinstance(item, str):
        return item
    uid = getattr(item, "uid", None)
    if not isinstance(uid, str):
        raise TypeError(f"cannot use {item!r} as an entity reference")
    return uid


def _labels(labels: Iterable[str]) -> frozenset:
    if isinstance(labels, str):
        labels = (labels,)
    return frozenset(getattr(label, "name", label) for label in labels)


@dataclass(frozen=True)
class Node:
    uid: str = ""
    labels: frozenset = frozenset()
    properties: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", _labels(self.labels))
        object.__setattr__(self, "properties", normalize_properties(self.properties))


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    labels: frozenset = frozenset()
    properties: Mapping[str, Any] = field(default_factory=dict)
    uid: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "src", _ref(self.src))
        object.__setattr__(self, "dst", _ref(self.dst))
        object.__setattr__(self, "labels", _labels(self.labels))
        object.__setattr__(self, "properties", normalize_properties(self.properties))


@dataclass(frozen=True)
class HyperEdge:
    members: frozenset
    labels: frozenset = frozenset()
    properties: Mapping[str, Any] = field(default_factory=dict)
    uid: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(_ref(m) for m in self.members))
        object.__setattr__(self, "labels", _labels(self.labels))
        object.__setattr__(self, "properties", normalize_properties(self.properties))


@dataclass(frozen=True)
class Simplex:
    vertices: frozenset
    labels: frozenset = frozenset()
    properties: Mapping[str, Any] = field(default_factory=dict)
    uid: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", frozenset(_ref(v) for v in self.vertices))
        object.__setattr__(self, "labels", _labels(self.labels))
        object.__setattr__(self, "properties", normalize_properties(self.properties))


@dataclass(frozen=True)
class NodeTuple:
    """Ordered node interaction; ``elements`` holds ``(position, node uid)``.

    A plain sequence of references is accepted and numbered from 0.
    """

    elements: tuple
    labels: frozenset = frozenset()
    properties: Mapping[str, Any] = field(default_factory=dict)
    uid: str = ""

    def __post_init__(self) -> None:
        elems = []
        for i, item in enumerate(self.elements):
            if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], int):
                elems.append((int(item[0]), _ref(item[1])))
            else:
                elems.append((i, _ref(item)))
        elems.sort(key=lambda e: e[0])
        object.__setattr__(self, "elements", tuple(elems))
        object.__setattr__(self, "labels", _labels(self.labels))
        object.__setattr__(self, "properties", normalize_properties(self.properties))

    @property
    def members(self) -> tuple[str, ...]:
        return tuple(uid for _, uid in self.elements)

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(pos for pos, _ in self.elements)


@dataclass(frozen=True)
class Subgraph:
    subgraph_nodes: frozenset
    subgraph_edges: frozenset = frozenset()
    labels: frozenset = frozenset()
    properties: Mapping[str, Any] = field(default_factory=dict)
    uid: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "subgraph_nodes", frozenset(_ref(n) for n in self.subgraph_nodes))
        object.__setattr__(self, "subgraph_edges", frozenset(_ref(e) for e in self.subgraph_edges))
        object.__setattr__(self, "labels", _labels(self.labels))
        object.__setattr__(self, "properties", normalize_properties(self.properties))


@dataclass(frozen=True)
class SubgraphEdge:
    src: str
    dst: str
    labels: frozenset = frozenset()
    properties: Mapping[str, Any] = field(default_factory=dict)
    uid: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "src", _ref(self.src))
        object.__setattr__(self, "dst", _ref(self.dst))
        object.__setattr__(self, "labels", _labels(self.labels))
        object.__setattr__(self, "properties", normalize_properties(self.properties))

    @property
    def endpoints(self) -> tuple[str, str]:
        return (self.src, self.dst)


@dataclass
class HigherOrderGraph:
    """A whole higher-order graph, every collection keyed by uid."""

    nodes: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)
    hyperedges: dict = field(default_factory=dict)
    simplices: dict = field(default_factory=dict)
    tuples: dict = field(default_factory=dict)
    subgraphs: dict = field(default_factory=dict)
    subgraph_edges: dict = field(default_factory=dict)

    def add(self, entity):
        if not entity.uid:
            raise ValueError("entities added to a HigherOrderGraph need a uid")
        self._collection(entity)[entity.uid] = entity
        return entity

    def _collection(self, entity) -> dict:
        for cls, coll in (
            (Node, self.nodes), (Edge, self.edges), (HyperEdge, self.hyperedges),
            (Simplex, self.simplices), (NodeTuple, self.tuples), (Subgraph, self.subgraphs),
            (SubgraphEdge, self.subgraph_edges),
        ):
            if isinstance(entity, cls):
                return coll
        raise TypeError(f"not a higher-order entity: {entity!r}")

    def entities(self):
        return itertools.chain(
            self.nodes.values(), self.edges.values(), self.hyperedges.values(),
            self.simplices.values(), self.tuples.values(), self.subgraphs.values(),
            self.subgraph_edges.values(),
        )

    def family(self) -> str:
        if self.subgraphs or self.subgraph_edges:
            return "subgraph"
        if self.tuples:
            return "tuple"
        if self.simplices:
            return "simplicial"
        if self.hyperedges:
            return "hypergraph"
        return "lpg"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    refs: tuple = ()
    severity: str = "error"


def _check_entity(entity, max_simplex_size: int) -> list[Violation]:
    out = []
    for label in entity.labels:
        if label.startswith("_"):
            out.append(Violation("reserved-label", f"label {label!r} is reserved", (entity.uid,)))
    for key in entity.properties:
        if key.startswith("_"):
            out.append(Violation("reserved-key", f"property key {key!r} is reserved", (entity.uid,)))
    if isinstance(entity, HyperEdge):
        if len(entity.members) < 2:
            out.append(Violation("cardinality", "hyperedge cardinality < 2", (entity.uid,)))
    elif isinstance(entity, Simplex):
        if len(entity.vertices) < 2:
            out.append(Violation("cardinality", "simplex cardinality < 2", (entity.uid,)))
        if len(entity.vertices) > max_simplex_size:
            out.append(Violation("too-large", f"simplex larger than {max_simplex_size}", (entity.uid,)))
    elif isinstance(entity, NodeTuple):
        positions = [p for p, _ in entity.elements]
        if len(set(positions)) != len(positions):
            out.append(Violation("positions", "tuple positions are not distinct", (entity.uid,)))
        if any(p < 0 for p in positions):
            out.append(Violation("positions", "tuple positions must be non-negative", (entity.uid,)))
    return out


def validate(target, graph: HigherOrderGraph | None = None, *,
             max_simplex_size: int = DEFAULT_MAX_SIMPLEX_SIZE) -> list[Violation]:
    """Return every violated invariant; an empty list means valid.

    ``target`` is an entity or a whole :class:`HigherOrderGraph`. For a single
    entity, references are resolved against ``graph`` when given. Duplicate
    hyperedges are reported with severity ``"warning"``.
    """
    if isinstance(target, HigherOrderGraph):
        return _validate_graph(target, max_simplex_size)
    out = _check_entity(target, max_simplex_size)
    if graph is not None:
        out.extend(_check_refs(target, graph))
    return out


def _check_refs(entity, graph: HigherOrderGraph) -> list[Violation]:
    out = []

    def need(coll: dict, ref: str, what: str) -> None:
        if ref not in coll:
            out.append(Violation("dangling", f"unknown {what} {ref!r}", (entity.uid, ref)))

    if isinstance(entity, Edge):
        need(graph.nodes, entity.src, "node")
        need(graph.nodes, entity.dst, "node")
    elif isinstance(entity, HyperEdge):
        for m in sorted(entity.members):
            need(graph.nodes, m, "node")
    elif isinstance(entity, Simplex):
        for m in sorted(entity.vertices):
            need(graph.nodes, m, "node")
    elif isinstance(entity, NodeTuple):
        for _, m in entity.elements:
            need(graph.nodes, m, "node")
    elif isinstance(entity, Subgraph):
        for n in sorted(entity.subgraph_nodes):
            need(graph.nodes, n, "node")
        for e in sorted(entity.subgraph_edges):
            edge = graph.edges.get(e)
            if edge is None:
                out.append(Violation("dangling", f"unknown edge {e!r}", (entity.uid, e)))
                continue
            outside = [x for x in (edge.src, edge.dst) if x not in entity.subgraph_nodes]
            if outside:
                out.append(Violation(
                    "containment",
                    f"edge {e!r} has endpoint(s) {outside} outside the subgraph",
                    (entity.uid, e, *outside),
                ))
    elif isinstance(entity, SubgraphEdge):
        need(graph.subgraphs, entity.src, "subgraph")
        need(graph.subgraphs, entity.dst, "subgraph")
    return out


def missing_faces(simplices: Iterable[frozenset]) -> dict[frozenset, list[frozenset]]:
    """Map each simplex to its faces (size >= 2) absent from the collection."""
    present = set(simplices)
    out = {}
    for simplex in present:
        missing = []
        verts = sorted(simplex)
        for size in range(2, len(verts)):
            for face in itertools.combinations(verts, size):
                face = frozenset(face)
                if face not in present:
                    missing.append(face)
        if missing:
            out[simplex] = missing
    return out


def _validate_graph(graph: HigherOrderGraph, max_simplex_size: int) -> list[Violation]:
    out = []
    for entity in graph.entities():
        out.extend(_check_entity(entity, max_simplex_size))
        out.extend(_check_refs(entity, graph))
    seen: dict[tuple, str] = {}
    for h in graph.hyperedges.values():
        key = (h.members, h.labels)
        if key in seen:
            out.append(Violation("duplicate", "hyperedge duplicates another member set with the same labels",
                                 (seen[key], h.uid), severity="warning"))
        else:
            seen[key] = h.uid
    if graph.simplices:
        by_set = {}
        for s in graph.simplices.values():
            if s.vertices in by_set:
                out.append(Violation("duplicate", "two simplices share a vertex set", (by_set[s.vertices], s.uid)))
            by_set.setdefault(s.vertices, s.uid)
        for simplex, missing in sorted(missing_faces(by_set).items(), key=lambda kv: sorted(kv[0])):
            out.append(Violation(
                "closure",
                f"simplex {sorted(simplex)} is missing faces {[sorted(f) for f in missing]}",
                (by_set[simplex], *[tuple(sorted(f)) for f in missing]),
            ))
    return out


def errors_only(violations: Iterable[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == "error"]
