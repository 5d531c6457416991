"""Versioned labeled-property-graph storage.

Committed state lives in per-entity version chains (``[(version, record or
None), ...]``) so readers pinned to an old version keep seeing a frozen graph
while writers commit. Secondary structures (label sets, uid map, property
indexes, incidence sets) are *supersets* across all retained versions; every
lookup re-checks the candidate against the record visible at the reader's
version. Chains and stale secondary entries are compacted once no open reader
can observe them any more.
"""

from __future__ import annotations

import threading
from collections import Counter, defaultdict, deque
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping

from .errors import DuplicateIndex, UnknownIndex
from .values import normalize_properties, value_key

NODE_TAGS = frozenset(
    {"_node", "_edge", "_hyperedge", "_node_tuple", "_subgraph", "_subgraph_edge"}
)
EDGE_TAGS = frozenset(
    {"_incidence", "_adjacency", "_node_membership", "_edge_membership", "_subgraph_adjacency"}
)
UID_KEY = "_uid"
POS_KEY = "_pos"


def is_reserved(label: str) -> bool:
    return label.startswith("_")


@dataclass(frozen=True, slots=True)
class NodeRecord:
    id: int
    labels: frozenset
    props: dict

    @property
    def uid(self) -> str | None:
        return self.props.get(UID_KEY)

    @property
    def tag(self) -> str | None:
        for label in self.labels:
            if label in NODE_TAGS:
                return label
        return None


@dataclass(frozen=True, slots=True)
class EdgeRecord:
    id: int
    src: int
    dst: int
    labels: frozenset
    props: dict

    @property
    def uid(self) -> str | None:
        return self.props.get(UID_KEY)

    @property
    def tag(self) -> str | None:
        for label in self.labels:
            if label in EDGE_TAGS:
                return label
        return None

    def other(self, node_id: int) -> int:
        return self.dst if self.src == node_id else self.src


@dataclass(frozen=True)
class Stats:
    nodes: int
    edges: int
    tags: dict
    max_degree: int
    max_properties: int

    def as_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": self.edges,
            "tags": dict(self.tags),
            "max_degree": self.max_degree,
            "max_properties": self.max_properties,
        }


def record_matches(rec, labels: frozenset, props: Mapping[str, Any]) -> bool:
    if labels and not labels <= rec.labels:
        return False
    for key, want in props.items():
        if key not in rec.props:
            return False
        if value_key(rec.props[key]) != value_key(want):
            return False
    return True


def _visible(chain: list, version: int):
    ver, rec = chain[-1]
    if ver <= version:
        return rec
    for ver, rec in reversed(chain):
        if ver <= version:
            return rec
    return None


class GraphView:
    """Read interface shared by committed snapshots and open transactions.

    Subclasses provide the primitive accessors; matching and statistics are
    implemented once here on top of them.
    """

    version: int

    # primitives ---------------------------------------------------------
    def node(self, node_id: int) -> NodeRecord | None:
        raise NotImplementedError

    def edge(self, edge_id: int) -> EdgeRecord | None:
        raise NotImplementedError

    def incident(self, node_id: int) -> list[EdgeRecord]:
        raise NotImplementedError

    def node_ids(self) -> Iterator[int]:
        raise NotImplementedError

    def edge_ids(self) -> Iterator[int]:
        raise NotImplementedError

    def find_uid(self, uid: str) -> tuple[str, int] | None:
        raise NotImplementedError

    def _node_candidates(self, labels: frozenset, props: dict) -> Iterable[int]:
        raise NotImplementedError

    def _edge_candidates(self, labels: frozenset, props: dict) -> Iterable[int]:
        raise NotImplementedError

    def _peek_node(self, node_id: int) -> NodeRecord | None:
        return self.node(node_id)

    def _peek_edge(self, edge_id: int) -> EdgeRecord | None:
        return self.edge(edge_id)

    # derived ------------------------------------------------------------
    def has_node(self, node_id: int) -> bool:
        return self._peek_node(node_id) is not None

    def has_edge(self, edge_id: int) -> bool:
        return self._peek_edge(edge_id) is not None

    def nodes(self) -> Iterator[NodeRecord]:
        for nid in self.node_ids():
            rec = self._peek_node(nid)
            if rec is not None:
                yield rec

    def edges(self) -> Iterator[EdgeRecord]:
        for eid in self.edge_ids():
            rec = self._peek_edge(eid)
            if rec is not None:
                yield rec

    def degree(self, node_id: int) -> int:
        return sum(2 if e.src == e.dst else 1 for e in self.incident(node_id))

    def match_nodes(self, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None) -> set[int]:
        labels = frozenset(labels)
        props = normalize_properties(properties)
        self._note_predicate("N", labels, props)
        out = set()
        for nid in self._node_candidates(labels, props):
            rec = self._peek_node(nid)
            if rec is not None and record_matches(rec, labels, props):
                out.add(nid)
        return out

    def match_edges(
        self,
        labels: Iterable[str] = (),
        properties: Mapping[str, Any] | None = None,
        src: int | None = None,
        dst: int | None = None,
    ) -> set[int]:
        labels = frozenset(labels)
        props = normalize_properties(properties)
        if src is not None or dst is not None:
            anchor = src if src is not None else dst
            if not self.has_node(anchor):
                return set()
            candidates = [e.id for e in self.incident(anchor)]
        else:
            self._note_predicate("E", labels, props)
            candidates = self._edge_candidates(labels, props)
        out = set()
        for eid in candidates:
            rec = self._peek_edge(eid)
            if rec is None or not record_matches(rec, labels, props):
                continue
            if src is not None and rec.src != src:
                continue
            if dst is not None and rec.dst != dst:
                continue
            out.add(eid)
        return out

    def _note_predicate(self, space: str, labels: frozenset, props: dict) -> None:
        """Hook for transactions to record predicate reads."""

    def stats(self) -> Stats:
        tags: Counter = Counter()
        n_nodes = 0
        max_props = 0
        max_degree = 0
        for rec in self.nodes():
            n_nodes += 1
            tag = rec.tag
            if tag is not None:
                tags[tag] += 1
            max_props = max(max_props, len(rec.props))
            max_degree = max(max_degree, self.degree(rec.id))
        n_edges = 0
        for rec in self.edges():
            n_edges += 1
            tag = rec.tag
            if tag is not None:
                tags[tag] += 1
            max_props = max(max_props, len(rec.props))
        return Stats(n_nodes, n_edges, dict(tags), max_degree, max_props)


class LpgStore:
    """Committed, multi-version graph contents. Mutated only via ``apply``."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._nodes: dict[int, list] = {}
        self._edges: dict[int, list] = {}
        self._incident: dict[int, set[int]] = defaultdict(set)
        self._node_labels: dict[str, set[int]] = defaultdict(set)
        self._edge_labels: dict[str, set[int]] = defaultdict(set)
        self._node_uids: dict[str, set[int]] = defaultdict(set)
        self._edge_uids: dict[str, set[int]] = defaultdict(set)
        # (label, key) -> {"node": {value_key: ids}, "edge": {value_key: ids}}
        self._indexes: dict[tuple[str, str], dict[str, dict]] = {}
        self.version = 0
        self._next_id = 1
        self._active: Counter = Counter()
        self._retired: deque = deque()

    # ids ----------------------------------------------------------------
    def allocate_id(self) -> int:
        with self._lock:
            nid = self._next_id
            self._next_id += 1
            return nid

    def reserve_ids_through(self, max_id: int) -> None:
        with self._lock:
            self._next_id = max(self._next_id, max_id + 1)

    # reader registration ------------------------------------------------
    def pin(self, version: int) -> None:
        with self._lock:
            self._active[version] += 1

    def unpin(self, version: int) -> None:
        with self._lock:
            self._active[version] -= 1
            if self._active[version] <= 0:
                del self._active[version]
            self._compact()

    def pin_current(self) -> int:
        with self._lock:
            self._active[self.version] += 1
            return self.version

    def horizon(self) -> int:
        with self._lock:
            return min(self._active) if self._active else self.version

    def snapshot(self) -> "StoreView":
        view = StoreView(self, self.pin_current(), pin=False)
        view._pinned = True
        return view

    # point reads --------------------------------------------------------
    def node_at(self, node_id: int, version: int) -> NodeRecord | None:
        chain = self._nodes.get(node_id)
        return None if chain is None else _visible(chain, version)

    def edge_at(self, edge_id: int, version: int) -> EdgeRecord | None:
        chain = self._edges.get(edge_id)
        return None if chain is None else _visible(chain, version)

    def incident_ids(self, node_id: int) -> list[int]:
        with self._lock:
            ids = self._incident.get(node_id)
            return list(ids) if ids else []

    def node_ids(self) -> list[int]:
        with self._lock:
            return list(self._nodes)

    def edge_ids(self) -> list[int]:
        with self._lock:
            return list(self._edges)

    def uid_candidates(self, uid: str) -> tuple[list[int], list[int]]:
        with self._lock:
            return list(self._node_uids.get(uid, ())), list(self._edge_uids.get(uid, ()))

    def candidates(self, space: str, labels: frozenset, props: dict) -> list[int]:
        """Superset of ids that may match; callers re-check each record."""
        with self._lock:
            if UID_KEY in props:
                uids = self._node_uids if space == "node" else self._edge_uids
                return list(uids.get(props[UID_KEY], ()))
            for label in labels:
                index = self._indexes.get
                for key, value in props.items():
                    idx = index((label, key))
                    if idx is not None:
                        return list(idx[space].get(value_key(value), ()))
            if labels:
                label_sets = self._node_labels if space == "node" else self._edge_labels
                best = min((label_sets.get(label, ()) for label in labels), key=len)
                return list(best)
            return list(self._nodes if space == "node" else self._edges)

    # indexes ------------------------------------------------------------
    def create_index(self, label: str, key: str) -> None:
        with self._lock:
            if (label, key) in self._indexes:
                raise DuplicateIndex(f"index on ({label}, {key}) already exists")
            idx = {"node": defaultdict(set), "edge": defaultdict(set)}
            for space, table in (("node", self._nodes), ("edge", self._edges)):
                for chain in table.values():
                    for _, rec in chain:
                        if rec is not None and label in rec.labels and key in rec.props:
                            idx[space][value_key(rec.props[key])].add(rec.id)
            self._indexes[(label, key)] = idx

    def drop_index(self, label: str, key: str) -> None:
        with self._lock:
            if (label, key) not in self._indexes:
                raise UnknownIndex(f"no index on ({label}, {key})")
            del self._indexes[(label, key)]

    def indexes(self) -> list[tuple[str, str]]:
        with self._lock:
            return sorted(self._indexes)

    def index_lookup(self, label: str, key: str, value: Any, space: str = "node") -> list[int]:
        with self._lock:
            idx = self._indexes.get((label, key))
            if idx is None:
                raise UnknownIndex(f"no index on ({label}, {key})")
            return list(idx[space].get(value_key(value), ()))

    # commit application -------------------------------------------------
    def apply(self, version: int, node_writes: Mapping[int, Any], edge_writes: Mapping[int, Any]) -> None:
        """Install a transaction's net writes as ``version`` and publish it."""
        with self._lock:
            retired_nodes, retired_edges = [], []
            for nid, rec in node_writes.items():
                chain = self._nodes.get(nid)
                if chain is None:
                    if rec is None:
                        continue
                    self._nodes[nid] = [(version, rec)]
                else:
                    chain.append((version, rec))
                    retired_nodes.append(nid)
                if rec is not None:
                    self._add_secondary("node", rec)
            for eid, rec in edge_writes.items():
                chain = self._edges.get(eid)
                if chain is None:
                    if rec is None:
                        continue
                    self._edges[eid] = [(version, rec)]
                    self._incident[rec.src].add(eid)
                    self._incident[rec.dst].add(eid)
                else:
                    chain.append((version, rec))
                    retired_edges.append(eid)
                if rec is not None:
                    self._add_secondary("edge", rec)
            if retired_nodes or retired_edges:
                self._retired.append((version, retired_nodes, retired_edges))
            self.version = version
            self._compact()

    def bump_version(self, version: int) -> None:
        with self._lock:
            self.version = version

    def _add_secondary(self, space: str, rec) -> None:
        labels = self._node_labels if space == "node" else self._edge_labels
        for label in rec.labels:
            labels[label].add(rec.id)
        uid = rec.props.get(UID_KEY)
        if uid is not None:
            (self._node_uids if space == "node" else self._edge_uids)[uid].add(rec.id)
        if self._indexes:
            for label in rec.labels:
                for key, value in rec.props.items():
                    idx = self._indexes.get((label, key))
                    if idx is not None:
                        idx[space][value_key(value)].add(rec.id)

    def _drop_secondary(self, space: str, dropped: list, remaining: list) -> None:
        labels = self._node_labels if space == "node" else self._edge_labels
        uids = self._node_uids if space == "node" else self._edge_uids
        keep_labels = set()
        keep_uids = set()
        keep_index = set()
        for rec in remaining:
            keep_labels |= rec.labels
            if UID_KEY in rec.props:
                keep_uids.add(rec.props[UID_KEY])
            for label in rec.labels:
                for key, value in rec.props.items():
                    keep_index.add((label, key, value_key(value)))
        for rec in dropped:
            for label in rec.labels - keep_labels:
                ids = labels.get(label)
                if ids is not None:
                    ids.discard(rec.id)
                    if not ids:
                        del labels[label]
            uid = rec.props.get(UID_KEY)
            if uid is not None and uid not in keep_uids:
                ids = uids.get(uid)
                if ids is not None:
                    ids.discard(rec.id)
                    if not ids:
                        del uids[uid]
            if self._indexes:
                for label in rec.labels:
                    for key, value in rec.props.items():
                        idx = self._indexes.get((label, key))
                        vk = value_key(value)
                        if idx is not None and (label, key, vk) not in keep_index:
                            ids = idx[space].get(vk)
                            if ids is not None:
                                ids.discard(rec.id)
                                if not ids:
                                    del idx[space][vk]

    def _compact(self) -> None:
        horizon = min(self._active) if self._active else self.version
        while self._retired and self._retired[0][0] <= horizon:
            _, node_ids, edge_ids = self._retired.popleft()
            for eid in edge_ids:
                self._compact_one("edge", eid, horizon)
            for nid in node_ids:
                self._compact_one("node", nid, horizon)

    def _compact_one(self, space: str, ent_id: int, horizon: int) -> None:
        table = self._nodes if space == "node" else self._edges
        chain = table.get(ent_id)
        if chain is None:
            return
        cut = 0
        for i, (ver, _) in enumerate(chain):
            if ver <= horizon:
                cut = i
        kept = chain[cut:]
        dropped = [rec for _, rec in chain[:cut] if rec is not None]
        gone = len(kept) == 1 and kept[0][1] is None and kept[0][0] <= horizon
        if gone:
            del table[ent_id]
            remaining = []
        else:
            if cut:
                table[ent_id] = kept
            remaining = [rec for _, rec in kept if rec is not None]
        if dropped or gone:
            if gone:
                # the last live record is among the dropped ones
                dropped = [rec for _, rec in chain if rec is not None]
            self._drop_secondary(space, dropped, remaining)
        if gone:
            if space == "edge":
                last = dropped[-1] if dropped else None
                if last is not None:
                    for end in (last.src, last.dst):
                        inc = self._incident.get(end)
                        if inc is not None:
                            inc.discard(ent_id)
                            if not inc and end not in self._nodes:
                                del self._incident[end]
            else:
                inc = self._incident.get(ent_id)
                if inc is not None and not inc:
                    del self._incident[ent_id]


class StoreView(GraphView):
    """Read-only view of the committed store pinned at one version."""

    def __init__(self, store: LpgStore, version: int, *, pin: bool = True) -> None:
        self.store = store
        self.version = version
        self._pinned = pin
        if pin:
            store.pin(version)

    def close(self) -> None:
        if self._pinned:
            self._pinned = False
            self.store.unpin(self.version)

    def __enter__(self) -> "StoreView":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __del__(self) -> None:
        try:
            self.close()
        except Exception:
            pass

    def node(self, node_id: int) -> NodeRecord | None:
        return self.store.node_at(node_id, self.version)

    def edge(self, edge_id: int) -> EdgeRecord | None:
        return self.store.edge_at(edge_id, self.version)

    def incident(self, node_id: int) -> list[EdgeRecord]:
        out = []
        for eid in self.store.incident_ids(node_id):
            rec = self.store.edge_at(eid, self.version)
            if rec is not None:
                out.append(rec)
        return out

    def node_ids(self) -> Iterator[int]:
        return iter(self.store.node_ids())

    def edge_ids(self) -> Iterator[int]:
        return iter(self.store.edge_ids())

    def find_uid(self, uid: str) -> tuple[str, int] | None:
        node_ids, edge_ids = self.store.uid_candidates(uid)
        for nid in node_ids:
            rec = self.store.node_at(nid, self.version)
            if rec is not None and rec.props.get(UID_KEY) == uid:
                return ("node", nid)
        for eid in edge_ids:
            rec = self.store.edge_at(eid, self.version)
            if rec is not None and rec.props.get(UID_KEY) == uid:
                return ("edge", eid)
        return None

    def _node_candidates(self, labels: frozenset, props: dict) -> Iterable[int]:
        return self.store.candidates("node", labels, props)

    def _edge_candidates(self, labels: frozenset, props: dict) -> Iterable[int]:
        return self.store.candidates("edge", labels, props)
