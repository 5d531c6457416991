"""Path traversal over lowered higher-order structures and tensor export.

A :class:`Path` is an ordered list of typed elements. Consecutive elements
must be joined by a link of the lowered graph (an incidence, adjacency or
membership edge, or one endpoint slot of a native edge). Links are followed
without regard to storage direction, and each link is used at most once per
path, so ``node - hyperedge - node`` never binds both ends through the same
incidence. Variables shared between paths are joined.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import BadParams, MissingKey, RaggedFeatures, UnboundVariable, UnknownKindTransition
from .model import _labels
from .store import UID_KEY, GraphView, record_matches
from .values import normalize_properties, sort_key

DIRECTION_KEY = "_direction"

KIND_TAGS = {
    "node": "_node",
    "edge": "_edge",
    "hyperedge": "_hyperedge",
    "simplex": "_hyperedge",
    "node_tuple": "_node_tuple",
    "subgraph": "_subgraph",
    "subgraph_edge": "_subgraph_edge",
}

# unordered kind pair -> link tag joining them
TRANSITIONS = {
    frozenset({"node", "edge"}): "_adjacency",
    frozenset({"node", "hyperedge"}): "_incidence",
    frozenset({"node", "simplex"}): "_incidence",
    frozenset({"node", "node_tuple"}): "_node_membership",
    frozenset({"node", "subgraph"}): "_node_membership",
    frozenset({"edge", "subgraph"}): "_edge_membership",
    frozenset({"subgraph", "subgraph_edge"}): "_subgraph_adjacency",
}

CONNECTORS = ("edge", "subgraph_edge")
# steps between a connector and one of its endpoints; only these carry a side
ENDPOINT_STEPS = (frozenset({"node", "edge"}), frozenset({"subgraph", "subgraph_edge"}))


@dataclass(frozen=True)
class PathElement:
    kind: str = "node"
    labels: frozenset = frozenset()
    properties: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KIND_TAGS:
            raise BadParams(f"unknown path element kind {self.kind!r}")
        object.__setattr__(self, "labels", _labels(self.labels))
        props = dict(self.properties)
        direction = props.pop(DIRECTION_KEY, None)
        if direction is not None and (direction not in ("out", "in") or self.kind not in CONNECTORS):
            raise BadParams(f"{DIRECTION_KEY} must be 'out' or 'in' on an edge element")
        object.__setattr__(self, "properties", normalize_properties(props))
        object.__setattr__(self, "direction", direction)


def Node(labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None) -> PathElement:
    return PathElement("node", labels, properties or {})


def Edge(labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None) -> PathElement:
    return PathElement("edge", labels, properties or {})


def HyperEdge(labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None) -> PathElement:
    return PathElement("hyperedge", labels, properties or {})


def NodeTuple(labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None) -> PathElement:
    return PathElement("node_tuple", labels, properties or {})


def Subgraph(labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None) -> PathElement:
    return PathElement("subgraph", labels, properties or {})


def SubgraphEdge(labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None) -> PathElement:
    return PathElement("subgraph_edge", labels, properties or {})


class Path:
    """Ordered ``(variable, element)`` pairs.

    ``path.add(s1=Subgraph({"ResearchGroup"}))`` and
    ``path.add("s1", kind="subgraph", labels={"ResearchGroup"})`` are equivalent.
    """

    def __init__(self, elements: Iterable[tuple[str, PathElement]] = ()) -> None:
        self.elements: list[tuple[str, PathElement]] = []
        for var, elem in elements:
            self.add(var, elem)

    def add(self, var: str | None = None, element: PathElement | None = None, *, kind: str | None = None,
            labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None,
            **named: PathElement) -> "Path":
        pairs = []
        if var is not None:
            if element is None:
                element = PathElement(kind or "node", labels, properties or {})
            pairs.append((var, element))
        pairs.extend(named.items())
        if not pairs:
            raise BadParams("Path.add needs a variable and an element")
        for name, elem in pairs:
            if any(name == v for v, _ in self.elements):
                raise BadParams(f"variable {name!r} appears twice in one path")
            if self.elements:
                prev = self.elements[-1][1].kind
                if frozenset({prev, elem.kind}) not in TRANSITIONS:
                    raise UnknownKindTransition(f"no link joins a {prev} to a {elem.kind}")
            self.elements.append((name, elem))
        return self

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[tuple[str, PathElement]]:
        return iter(self.elements)


@dataclass
class TraversalResult:
    columns: list[str]
    rows: list[tuple]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self, target=None) -> str:
        return write_csv(target, self.columns, self.rows)


# ---------------------------------------------------------------------------
# traversal engine
# ---------------------------------------------------------------------------

Handle = tuple  # ("node" | "edge", store id)


def _handle_matches(view: GraphView, handle: Handle, elem: PathElement) -> bool:
    space, ent = handle
    if space == "edge":
        if elem.kind != "edge":
            return False
        rec = view.edge(ent)
        return rec is not None and rec.tag is None and record_matches(rec, elem.labels, elem.properties)
    rec = view.node(ent)
    if rec is None or KIND_TAGS[elem.kind] not in rec.labels:
        return False
    return record_matches(rec, elem.labels, elem.properties)


def _is_native(view: GraphView, rec) -> bool:
    if rec.tag is not None:
        return False
    return "_node" in view.node(rec.src).labels and "_node" in view.node(rec.dst).labels


def candidates(view: GraphView, elem: PathElement) -> list[Handle]:
    """Every store entity satisfying ``elem`` on its own."""
    out = [("node", nid) for nid in view.match_nodes(elem.labels | {KIND_TAGS[elem.kind]}, elem.properties)]
    if elem.kind == "edge":
        for eid in view.match_edges(elem.labels, elem.properties):
            if _is_native(view, view.edge(eid)):
                out.append(("edge", eid))
    return sorted(out)


def neighbours(view: GraphView, handle: Handle, kind: str, to_kind: str) -> list[tuple]:
    """Links from ``handle`` (of ``kind``) to entities of ``to_kind``.

    Returns ``(link key, neighbour handle, side)`` where ``side`` tells
    whether the non-connector endpoint is the stored source (``"src"``) or
    target (``"dst"``) of the connector, or ``None`` for undirected joins.
    """
    space, ent = handle
    out = []
    if space == "edge":  # native edge: its two endpoint slots
        rec = view.edge(ent)
        if to_kind == "node":
            out.append((("slot", ent, "src"), ("node", rec.src), "src"))
            out.append((("slot", ent, "dst"), ("node", rec.dst), "dst"))
        return out
    tag = TRANSITIONS[frozenset({kind, to_kind})]
    want = KIND_TAGS[to_kind]
    connector_here = kind in CONNECTORS
    for link in view.incident(ent):
        if tag not in link.labels:
            continue
        other = link.other(ent)
        if want not in view.node(other).labels:
            continue
        side = None
        if frozenset({kind, to_kind}) in ENDPOINT_STEPS:
            # side of the endpoint that is not the connector
            if connector_here:
                side = "src" if link.dst == ent else "dst"
            else:
                side = "src" if link.src == ent else "dst"
        out.append((("link", link.id), ("node", other), side))
    if kind == "node" and to_kind == "edge":
        for link in view.incident(ent):
            if not _is_native(view, link):
                continue
            if link.src == ent:
                out.append((("slot", link.id, "src"), ("edge", link.id), "src"))
            if link.dst == ent:
                out.append((("slot", link.id, "dst"), ("edge", link.id), "dst"))
    return out


def _side_ok(elem_prev: PathElement, elem_next: PathElement, side, entering: bool) -> bool:
    """Check a ``_direction`` constraint on the connector side of a step.

    ``entering`` is True when the step goes from an endpoint into the
    connector (``elem_next`` is the connector), False when it leaves it.
    """
    conn = elem_next if entering else elem_prev
    direction = getattr(conn, "direction", None)
    if direction is None or side is None:
        return True
    if entering:
        return side == ("src" if direction == "out" else "dst")
    return side == ("dst" if direction == "out" else "src")


def _uid_of(view: GraphView, handle: Handle) -> str | None:
    space, ent = handle
    rec = view.edge(ent) if space == "edge" else view.node(ent)
    return rec.props.get(UID_KEY) if rec is not None else None


def _prop_of(view: GraphView, handle: Handle, key: str):
    space, ent = handle
    rec = view.edge(ent) if space == "edge" else view.node(ent)
    return rec.props.get(key) if rec is not None else None


def enumerate_assignments(view: GraphView, paths: Sequence[Path]) -> list[dict[str, Handle]]:
    """All distinct variable assignments satisfying every path."""
    results: dict[tuple, dict] = {}
    order = []
    for path in paths:
        for var, _ in path:
            if var not in order:
                order.append(var)
    cand_cache: dict[int, set] = {}

    def elem_ok(handle, elem) -> bool:
        key = id(elem)
        if key not in cand_cache:
            cand_cache[key] = set(candidates(view, elem))
        return handle in cand_cache[key]

    def walk(pi: int, ei: int, binding: dict, used: set) -> None:
        if pi == len(paths):
            key = tuple(binding[v] for v in order)
            if key not in results:
                results[key] = dict(binding)
            return
        elements = paths[pi].elements
        if ei == len(elements):
            walk(pi + 1, 0, binding, set())
            return
        var, elem = elements[ei]
        if ei == 0:
            if var in binding:
                options = [(None, binding[var], None)] if elem_ok(binding[var], elem) else []
            else:
                options = [(None, h, None) for h in candidates(view, elem)]
        else:
            pvar, pelem = elements[ei - 1]
            options = []
            for link, nb, side in neighbours(view, binding[pvar], pelem.kind, elem.kind):
                if link in used or not elem_ok(nb, elem):
                    continue
                if var in binding and binding[var] != nb:
                    continue
                if elem.kind in CONNECTORS and not _side_ok(pelem, elem, side, True):
                    continue
                if pelem.kind in CONNECTORS and not _side_ok(pelem, elem, side, False):
                    continue
                options.append((link, nb, side))
        for link, nb, _ in options:
            fresh = var not in binding
            binding[var] = nb
            if link is not None:
                used.add(link)
            walk(pi, ei + 1, binding, used)
            if link is not None:
                used.discard(link)
            if fresh:
                del binding[var]

    if paths:
        walk(0, 0, {}, set())
    return list(results.values())


def _parse_ref(ref: str) -> tuple[str, str | None]:
    var, _, key = ref.partition(".")
    return var, (key or None)


def _resolve_view(source):
    from .txn import Database

    inner = getattr(source, "db", None)
    if isinstance(inner, Database):
        source = inner
    if isinstance(source, Database):
        return source.snapshot(), True
    return source, False


def traverse_path(source, paths: Sequence[Path] | Path, return_values: Sequence[str] = (),
                  sort: Sequence[str] = (), distinct: bool = False) -> TraversalResult:
    """Match ``paths`` and project ``return_values`` (``"var"`` gives the uid,
    ``"var.key"`` a property). Rows are ordered by ``sort`` keys, then by the
    uids of all bound variables."""
    if isinstance(paths, Path):
        paths = [paths]
    bound = []
    for path in paths:
        for var, _ in path:
            if var not in bound:
                bound.append(var)
    returns = list(return_values) or list(bound)
    for ref in list(returns) + list(sort):
        var, _ = _parse_ref(ref)
        if var not in bound:
            raise UnboundVariable(f"variable {var!r} is not bound by any path")

    view, owned = _resolve_view(source)
    try:
        assignments = enumerate_assignments(view, paths)

        def value(binding: dict, ref: str):
            var, key = _parse_ref(ref)
            if key is None:
                return _uid_of(view, binding[var])
            return _prop_of(view, binding[var], key)

        decorated = []
        for binding in assignments:
            skey = tuple(sort_key(value(binding, ref)) for ref in sort)
            tie = tuple(sort_key(_uid_of(view, binding[v])) for v in bound)
            decorated.append((skey, tie, tuple(binding[v] for v in bound), binding))
        decorated.sort(key=lambda d: (d[0], d[1], d[2]))
        rows = []
        seen = set()
        for *_, binding in decorated:
            row = tuple(value(binding, ref) for ref in returns)
            if distinct:
                marker = tuple(sort_key(v) for v in row)
                if marker in seen:
                    continue
                seen.add(marker)
            rows.append(row)
        return TraversalResult(returns, rows)
    finally:
        if owned:
            view.close()


# ---------------------------------------------------------------------------
# tensor export
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, tuple):
        return "[" + ";".join(_fmt(v) for v in value) + "]"
    if value is None:
        return ""
    return str(value)


def write_csv(target, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """RFC 4180 CSV (CRLF line ends, minimal quoting); floats keep 17 digits.

    Writes to ``target`` (path or text file) when given and always returns
    the text.
    """
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if target is not None:
        if isinstance(target, (str, os.PathLike)):
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            target.write(text)
    return text


def _vector(value, what: str) -> tuple:
    if isinstance(value, bool) or not isinstance(value, (int, float, tuple)):
        raise RaggedFeatures(f"{what} is not numeric: {value!r}")
    vec = value if isinstance(value, tuple) else (value,)
    for v in vec:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise RaggedFeatures(f"{what} holds a non-numeric entry {v!r}")
    return vec


def _matrix(vectors: list[tuple], what: str) -> np.ndarray:
    if not vectors:
        return np.zeros((0, 0), dtype=np.float64)
    widths = {len(v) for v in vectors}
    if len(widths) != 1:
        raise RaggedFeatures(f"{what} vectors have differing lengths {sorted(widths)}")
    return np.asarray(vectors, dtype=np.float64).reshape(len(vectors), widths.pop())


@dataclass
class NodeFeatures:
    x: np.ndarray
    ids: list
    feature_key: str = "feat"
    id_key: str = "id"

    @property
    def shape(self) -> tuple[int, int]:
        return self.x.shape

    def to_csv(self, target=None) -> str:
        d = self.x.shape[1]
        header = [self.id_key] + [f"{self.feature_key}_{j}" for j in range(d)]
        rows = [(i, *map(float, row)) for i, row in zip(self.ids, self.x)]
        return write_csv(target, header, rows)


@dataclass
class EdgeIndex:
    pairs: list[tuple]
    attrs: np.ndarray | None = None
    attr_key: str | None = None

    def __len__(self) -> int:
        return len(self.pairs)

    def as_array(self) -> np.ndarray:
        """``(count, 2)`` array of id pairs; transpose it for libraries wanting ``(2, count)``."""
        if not self.pairs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.pairs)

    def to_csv(self, target=None) -> str:
        header = ["src", "dst"]
        d = 0
        if self.attrs is not None and self.attrs.size:
            d = self.attrs.shape[1]
            header += [f"{self.attr_key}_{j}" for j in range(d)]
        rows = []
        for i, pair in enumerate(self.pairs):
            extra = tuple(float(v) for v in self.attrs[i]) if d else ()
            rows.append((*pair, *extra))
        return write_csv(target, header, rows)


def export_node_features(source, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None,
                         feature_key: str = "feat", id_key: str = "id") -> NodeFeatures:
    """Feature matrix of matching ``_node`` entities, rows ordered by ``id_key``."""
    view, owned = _resolve_view(source)
    try:
        elem = PathElement("node", labels, properties or {})
        rows = []
        for _, nid in candidates(view, elem):
            rec = view.node(nid)
            for key in (id_key, feature_key):
                if key not in rec.props:
                    raise MissingKey(f"node {rec.props.get(UID_KEY)!r} has no {key!r} property")
            vec = _vector(rec.props[feature_key], f"feature {feature_key!r} of {rec.props.get(UID_KEY)!r}")
            rows.append((sort_key(rec.props[id_key]), rec.props[id_key], vec))
        rows.sort(key=lambda r: r[0])
        return NodeFeatures(_matrix([r[2] for r in rows], "feature"), [r[1] for r in rows], feature_key, id_key)
    finally:
        if owned:
            view.close()


def _ident(rec, id_key: str):
    if id_key not in rec.props:
        raise MissingKey(f"entity {rec.props.get(UID_KEY)!r} has no {id_key!r} property")
    return rec.props[id_key]


def export_edge_index(source, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None,
                      id_key: str = "id", attr_key: str | None = None, *, kind: str = "edge",
                      directed: bool = False) -> EdgeIndex:
    """Edge list keyed by ``id_key`` values.

    For ``kind="edge"`` both native and reified edges are exported; unless
    ``directed`` each pair is normalized to ``(min, max)``. For the other
    kinds (``hyperedge``, ``node_tuple``, ``subgraph``) the result is the
    incidence list ``(node id, entity id)``. Pairs are sorted
    lexicographically and attribute rows follow them.
    """
    view, owned = _resolve_view(source)
    try:
        elem = PathElement(kind, labels, properties or {})
        items = []
        for handle in candidates(view, elem):
            space, ent = handle
            owner = view.edge(ent) if space == "edge" else view.node(ent)
            attr = None
            if attr_key is not None:
                if attr_key not in owner.props:
                    raise MissingKey(f"entity {owner.props.get(UID_KEY)!r} has no {attr_key!r} property")
                attr = _vector(owner.props[attr_key], f"attribute {attr_key!r}")
            if kind == "edge":
                if space == "edge":
                    ends = [view.node(owner.src), view.node(owner.dst)]
                else:
                    src = dst = None
                    for link in view.incident(ent):
                        if "_adjacency" in link.labels:
                            if link.dst == ent:
                                src = view.node(link.src)
                            else:
                                dst = view.node(link.dst)
                    ends = [src, dst]
                a, b = (_ident(r, id_key) for r in ends)
                if not directed and sort_key(b) < sort_key(a):
                    a, b = b, a
                items.append(((a, b), attr))
            else:
                tag = TRANSITIONS[frozenset({"node", kind})]
                own_id = _ident(owner, id_key)
                for link in view.incident(ent):
                    if tag in link.labels and link.dst == ent:
                        member = view.node(link.src)
                        if "_node" in member.labels:
                            items.append(((_ident(member, id_key), own_id), attr))
        items.sort(key=lambda it: (sort_key(it[0][0]), sort_key(it[0][1])))
        pairs = [it[0] for it in items]
        attrs = None
        if attr_key is not None:
            attrs = _matrix([it[1] for it in items], "attribute")
        return EdgeIndex(pairs, attrs, attr_key)
    finally:
        if owned:
            view.close()
