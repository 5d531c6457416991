"""Optimistic snapshot transactions, commit gate, WAL durability and recovery.

A transaction reads the committed snapshot at its begin version overlaid with
its own staged writes. At commit it is validated against every transaction
that committed after its begin version: if any of those wrote a key this
transaction read (entity state, entity existence, incidence sets, or a
label/property predicate) or wrote, it aborts with :class:`Conflict`.
Validated commits form a serial order, so committed histories are
serializable.
"""

from __future__ import annotations

import itertools
import logging
import os
import threading
from collections import defaultdict
from typing import Any, Callable, Iterable, Iterator, Mapping

from . import wal as walmod
from .errors import (
    Conflict,
    ReservedLabel,
    TxnClosed,
    UnknownEdge,
    UnknownNode,
)
from .store import (
    UID_KEY,
    EdgeRecord,
    GraphView,
    LpgStore,
    NodeRecord,
    StoreView,
    is_reserved,
)
from .values import normalize_properties

log = logging.getLogger(__name__)

OPEN, COMMITTED, ABORTED = "open", "committed", "aborted"
_PREDICATE_KEYS = frozenset({"NL", "NK", "NA", "EL", "EK"})


def _check_labels(labels: frozenset, allow_reserved: bool) -> None:
    for label in labels:
        if not isinstance(label, str) or not label:
            raise ValueError(f"labels must be non-empty text, got {label!r}")
        if not allow_reserved and is_reserved(label):
            raise ReservedLabel(f"label {label!r} is in the reserved '_' namespace")


def _record_keys(space: str, rec, keys: Iterable[str] | None = None) -> set:
    """Conflict keys touched when ``rec`` appears, disappears or changes."""
    p = space
    out = set()
    if keys is None:
        out.add((p + "X", rec.id))
        out.add((p + "L", "*"))
        for label in rec.labels:
            out.add((p + "L", label))
        keys = rec.props.keys()
        uid = rec.props.get(UID_KEY)
        if uid is not None:
            out.add((p + "U", uid))
    out.add((p, rec.id))
    for key in keys:
        out.add((p + "K", "*", key))
        for label in rec.labels:
            out.add((p + "K", label, key))
    return out


class Transaction(GraphView):
    """Unit of atomic work. Not safe for use from two threads at once."""

    def __init__(self, db: "Database", txn_id: int, base_version: int, *, replay: bool = False) -> None:
        self.db = db
        self.id = txn_id
        self.base_version = base_version
        self.version = base_version
        self.state = OPEN
        self._base = StoreView(db.store, base_version, pin=False)
        self._node_writes: dict[int, NodeRecord | None] = {}
        self._edge_writes: dict[int, EdgeRecord | None] = {}
        self._new_incident: dict[int, set[int]] = defaultdict(set)
        self._ov_node_labels: dict[str, set[int]] = defaultdict(set)
        self._ov_edge_labels: dict[str, set[int]] = defaultdict(set)
        self._ov_uids: dict[str, tuple[str, int]] = {}
        self.pending: list[tuple[int, dict]] = []
        self.read_keys: set = set()
        self.write_keys: set = set()
        self._replay = replay
        # test hook: called with the index of each low-level mutation before it is staged
        self.fault_hook: Callable[[int], None] | None = None

    # context manager ----------------------------------------------------
    def __enter__(self) -> "Transaction":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self.state != OPEN:
            return
        if exc_type is None:
            self.commit()
        else:
            self.rollback()

    def _require_open(self) -> None:
        if self.state != OPEN:
            raise TxnClosed(f"transaction {self.id} is {self.state}")

    def _read(self, key) -> None:
        if not self._replay:
            self.read_keys.add(key)

    # reads --------------------------------------------------------------
    def _peek_node(self, node_id: int) -> NodeRecord | None:
        if node_id in self._node_writes:
            return self._node_writes[node_id]
        return self._base.node(node_id)

    def _peek_edge(self, edge_id: int) -> EdgeRecord | None:
        if edge_id in self._edge_writes:
            return self._edge_writes[edge_id]
        return self._base.edge(edge_id)

    def node(self, node_id: int) -> NodeRecord | None:
        self._read(("N", node_id))
        return self._peek_node(node_id)

    def edge(self, edge_id: int) -> EdgeRecord | None:
        self._read(("E", edge_id))
        return self._peek_edge(edge_id)

    def has_node(self, node_id: int) -> bool:
        self._read(("NX", node_id))
        return self._peek_node(node_id) is not None

    def has_edge(self, edge_id: int) -> bool:
        self._read(("EX", edge_id))
        return self._peek_edge(edge_id) is not None

    def incident(self, node_id: int) -> list[EdgeRecord]:
        self._read(("NA", node_id))
        out = []
        for rec in self._base.incident(node_id):
            if rec.id in self._edge_writes:
                rec = self._edge_writes[rec.id]
                if rec is None:
                    continue
            out.append(rec)
        for eid in self._new_incident.get(node_id, ()):
            rec = self._edge_writes.get(eid)
            if rec is not None:
                out.append(rec)
        return out

    def node_ids(self) -> Iterator[int]:
        self._read(("NL", "*"))
        seen = set(self._base.node_ids())
        yield from seen
        for nid in self._node_writes:
            if nid not in seen:
                yield nid

    def edge_ids(self) -> Iterator[int]:
        self._read(("EL", "*"))
        seen = set(self._base.edge_ids())
        yield from seen
        for eid in self._edge_writes:
            if eid not in seen:
                yield eid

    def find_uid(self, uid: str) -> tuple[str, int] | None:
        self._read(("NU", uid))
        self._read(("EU", uid))
        hit = self._ov_uids.get(uid)
        if hit is not None:
            space, ent_id = hit
            rec = self._node_writes.get(ent_id) if space == "node" else self._edge_writes.get(ent_id)
            if rec is not None and rec.props.get(UID_KEY) == uid:
                return hit
        found = self._base.find_uid(uid)
        if found is not None:
            space, ent_id = found
            rec = self._peek_node(ent_id) if space == "node" else self._peek_edge(ent_id)
            if rec is not None and rec.props.get(UID_KEY) == uid:
                return found
        return None

    def _note_predicate(self, space: str, labels: frozenset, props: dict) -> None:
        if self._replay:
            return
        if UID_KEY in props:
            self.read_keys.add((space + "U", props[UID_KEY]))
        elif props:
            for key in props:
                if labels:
                    for label in labels:
                        self.read_keys.add((space + "K", label, key))
                else:
                    self.read_keys.add((space + "K", "*", key))
        elif labels:
            for label in labels:
                self.read_keys.add((space + "L", label))
        else:
            self.read_keys.add((space + "L", "*"))

    def _overlay_candidates(self, writes: dict, ov_labels: dict, space: str, labels, props) -> Iterable[int]:
        if UID_KEY in props:
            hit = self._ov_uids.get(props[UID_KEY])
            return [hit[1]] if hit is not None and hit[0] == space else []
        if labels:
            return min((ov_labels.get(label, ()) for label in labels), key=len)
        return writes.keys()

    def _node_candidates(self, labels: frozenset, props: dict) -> Iterable[int]:
        base = self._base._node_candidates(labels, props)
        extra = self._overlay_candidates(self._node_writes, self._ov_node_labels, "node", labels, props)
        if not extra:
            return base
        return set(base).union(extra)

    def _edge_candidates(self, labels: frozenset, props: dict) -> Iterable[int]:
        base = self._base._edge_candidates(labels, props)
        extra = self._overlay_candidates(self._edge_writes, self._ov_edge_labels, "edge", labels, props)
        if not extra:
            return base
        return set(base).union(extra)

    # writes -------------------------------------------------------------
    def _stage(self, op: int, payload: dict) -> None:
        if self.fault_hook is not None:
            self.fault_hook(len(self.pending))
        self.pending.append((op, payload))

    def _put_node(self, rec: NodeRecord | None, nid: int) -> None:
        self._node_writes[nid] = rec
        if rec is not None:
            for label in rec.labels:
                self._ov_node_labels[label].add(nid)
            uid = rec.props.get(UID_KEY)
            if uid is not None:
                self._ov_uids[uid] = ("node", nid)

    def _put_edge(self, rec: EdgeRecord | None, eid: int) -> None:
        self._edge_writes[eid] = rec
        if rec is not None:
            for label in rec.labels:
                self._ov_edge_labels[label].add(eid)
            uid = rec.props.get(UID_KEY)
            if uid is not None:
                self._ov_uids[uid] = ("edge", eid)

    def create_node(self, labels: Iterable[str] = (), properties: Mapping[str, Any] | None = None, *,
                    allow_reserved: bool = False, node_id: int | None = None) -> int:
        self._require_open()
        labels = frozenset(labels)
        _check_labels(labels, allow_reserved or self._replay)
        props = normalize_properties(properties)
        nid = node_id if node_id is not None else self.db.store.allocate_id()
        rec = NodeRecord(nid, labels, props)
        self._stage(walmod.OP_CREATE_NODE, {"id": nid, "labels": sorted(labels), "props": props})
        self._put_node(rec, nid)
        self.write_keys |= _record_keys("N", rec)
        return nid

    def create_edge(self, src: int, dst: int, labels: Iterable[str] = (),
                    properties: Mapping[str, Any] | None = None, *,
                    allow_reserved: bool = False, edge_id: int | None = None) -> int:
        self._require_open()
        labels = frozenset(labels)
        _check_labels(labels, allow_reserved or self._replay)
        props = normalize_properties(properties)
        for end in (src, dst):
            if not self.has_node(end):
                raise UnknownNode(f"node {end} does not exist")
        eid = edge_id if edge_id is not None else self.db.store.allocate_id()
        rec = EdgeRecord(eid, src, dst, labels, props)
        self._stage(walmod.OP_CREATE_EDGE, {"id": eid, "src": src, "dst": dst,
                                            "labels": sorted(labels), "props": props})
        self._put_edge(rec, eid)
        self._new_incident[src].add(eid)
        self._new_incident[dst].add(eid)
        self.write_keys |= _record_keys("E", rec)
        self.write_keys.add(("NA", src))
        self.write_keys.add(("NA", dst))
        return eid

    def remove_edge(self, edge_id: int) -> None:
        self._require_open()
        rec = self.edge(edge_id)
        if rec is None:
            raise UnknownEdge(f"edge {edge_id} does not exist")
        self._stage(walmod.OP_REMOVE_EDGE, {"id": edge_id})
        self._put_edge(None, edge_id)
        self.write_keys |= _record_keys("E", rec)
        self.write_keys.add(("NA", rec.src))
        self.write_keys.add(("NA", rec.dst))

    def remove_node(self, node_id: int) -> int:
        """Remove a node and every incident edge; returns the edge count removed."""
        self._require_open()
        rec = self.node(node_id)
        if rec is None:
            raise UnknownNode(f"node {node_id} does not exist")
        incident = self.incident(node_id)
        for edge in incident:
            self.remove_edge(edge.id)
        self._stage(walmod.OP_REMOVE_NODE, {"id": node_id})
        self._put_node(None, node_id)
        self.write_keys |= _record_keys("N", rec)
        self.write_keys.add(("NA", node_id))
        return len(incident)

    def set_properties(self, target: int, updates: Mapping[str, Any] | None = None,
                       remove: Iterable[str] = ()) -> None:
        self._require_open()
        updates = normalize_properties(updates)
        remove = set(remove)
        rec = self.node(target)
        space = "N"
        if rec is None:
            rec = self.edge(target)
            space = "E"
            if rec is None:
                raise UnknownNode(f"no node or edge with id {target}")
        props = dict(rec.props)
        changed = set()
        for key in remove:
            if key in props:
                del props[key]
                changed.add(key)
        for key, value in updates.items():
            props[key] = value
            changed.add(key)
        self._stage(walmod.OP_SET_PROPERTIES, {"id": target, "target": "node" if space == "N" else "edge",
                                               "updates": updates, "remove": sorted(remove)})
        if space == "N":
            new = NodeRecord(rec.id, rec.labels, props)
            self._put_node(new, rec.id)
        else:
            new = EdgeRecord(rec.id, rec.src, rec.dst, rec.labels, props)
            self._put_edge(new, rec.id)
        self.write_keys |= _record_keys(space, rec, changed)
        if UID_KEY in changed:
            for r in (rec, new):
                if UID_KEY in r.props:
                    self.write_keys.add((space + "U", r.props[UID_KEY]))

    def apply_op(self, op: int, payload: dict) -> None:
        """Re-stage one logged mutation (used by recovery)."""
        if op == walmod.OP_CREATE_NODE:
            self.create_node(payload["labels"], payload["props"], node_id=payload["id"])
        elif op == walmod.OP_CREATE_EDGE:
            self.create_edge(payload["src"], payload["dst"], payload["labels"], payload["props"],
                             edge_id=payload["id"])
        elif op == walmod.OP_REMOVE_EDGE:
            self.remove_edge(payload["id"])
        elif op == walmod.OP_REMOVE_NODE:
            # incident edges were logged as explicit removals before this record
            self.remove_node(payload["id"])
        elif op == walmod.OP_SET_PROPERTIES:
            self.set_properties(payload["id"], payload["updates"], payload["remove"])
        else:
            raise ValueError(f"op {op} cannot be replayed inside a transaction")

    # lifecycle ----------------------------------------------------------
    @property
    def is_empty(self) -> bool:
        return not self.pending

    def commit(self) -> int:
        return self.db.commit(self)

    def rollback(self) -> None:
        self.db.rollback(self)


class Database:
    """Embedded graph database: committed store, commit gate and optional WAL."""

    def __init__(self, wal_path: str | os.PathLike | None = None, fsync_policy: str = "always", *,
                 fsync_interval: float = 1.0) -> None:
        self.store = LpgStore()
        self._commit_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._txn_ids = itertools.count(1)
        self._commit_log: list[tuple[int, frozenset]] = []
        self._open_bases: dict[int, int] = {}
        self.wal_path = os.fspath(wal_path) if wal_path is not None else None
        self.fsync_policy = fsync_policy
        self._wal: walmod.WalWriter | None = None
        # test hook copied onto every new transaction, see Transaction.fault_hook
        self.fault_hook: Callable[[int], None] | None = None
        if fsync_policy not in walmod.FSYNC_POLICIES:
            raise ValueError(f"fsync policy must be one of {walmod.FSYNC_POLICIES}")
        if self.wal_path is not None:
            valid_end = self._replay(self.wal_path)
            self._wal = walmod.WalWriter(self.wal_path, fsync_policy, fsync_interval, truncate_to=valid_end)

    # recovery -----------------------------------------------------------
    def _replay(self, path: str) -> int:
        committed, valid_end, max_txn = walmod.read_wal(path)
        max_id = 0
        for txn_id, records in committed:
            txn = Transaction(self, txn_id, self.store.version, replay=True)
            ddl = []
            for rec in records:
                payload = rec.payload
                if rec.op in (walmod.OP_CREATE_INDEX, walmod.OP_DROP_INDEX):
                    ddl.append(rec)
                    continue
                max_id = max(max_id, payload.get("id", 0))
                txn.apply_op(rec.op, payload)
            self.store.reserve_ids_through(max_id)
            self.store.apply(self.store.version + 1, txn._node_writes, txn._edge_writes)
            for rec in ddl:
                if rec.op == walmod.OP_CREATE_INDEX:
                    self.store.create_index(rec.payload["label"], rec.payload["key"])
                else:
                    self.store.drop_index(rec.payload["label"], rec.payload["key"])
        self._txn_ids = itertools.count(max_txn + 1)
        if committed:
            log.info("recovered %d committed transactions from %s", len(committed), path)
        return valid_end

    # transactions -------------------------------------------------------
    @property
    def wal(self) -> walmod.WalWriter | None:
        return self._wal

    @property
    def version(self) -> int:
        return self.store.version

    def begin(self) -> Transaction:
        with self._state_lock:
            txn_id = next(self._txn_ids)
            base = self.store.pin_current()
            self._open_bases[txn_id] = base
        txn = Transaction(self, txn_id, base)
        txn.fault_hook = self.fault_hook
        return txn

    def transaction(self) -> Transaction:
        """Alias of :meth:`begin`, reads better in ``with`` blocks."""
        return self.begin()

    def snapshot(self) -> StoreView:
        return self.store.snapshot()

    def _finish(self, txn: Transaction, state: str) -> None:
        txn.state = state
        with self._state_lock:
            base = self._open_bases.pop(txn.id, None)
        if base is not None:
            self.store.unpin(base)

    def rollback(self, txn: Transaction) -> None:
        if txn.state == ABORTED:
            return
        if txn.state != OPEN:
            raise TxnClosed(f"transaction {txn.id} is {txn.state}")
        self._finish(txn, ABORTED)

    def commit(self, txn: Transaction) -> int:
        if txn.state != OPEN:
            raise TxnClosed(f"transaction {txn.id} is {txn.state}")
        try:
            with self._commit_lock:
                if txn.pending:
                    self._validate(txn)
                version = self.store.version + 1
                if txn.pending:
                    if self._wal is not None:
                        self._wal.append_transaction(txn.id, txn.pending)
                    self.store.apply(version, txn._node_writes, txn._edge_writes)
                    self._commit_log.append((version, frozenset(txn.write_keys)))
                else:
                    self.store.bump_version(version)
        except BaseException:
            self._finish(txn, ABORTED)
            raise
        self._finish(txn, COMMITTED)
        self._trim_commit_log()
        return version

    def _validate(self, txn: Transaction) -> None:
        # Label, label/key and adjacency write keys exist so that readers of
        # those predicates see the change; between two writers they would
        # only produce false conflicts, since every write that depends on
        # prior state has read that state first.
        touched = txn.read_keys | {k for k in txn.write_keys if k[0] not in _PREDICATE_KEYS}
        for version, keys in reversed(self._commit_log):
            if version <= txn.base_version:
                break
            if not keys.isdisjoint(touched):
                raise Conflict(f"transaction {txn.id} conflicts with the commit of version {version}")

    def _trim_commit_log(self) -> None:
        with self._state_lock:
            oldest = min(self._open_bases.values(), default=self.store.version)
        with self._commit_lock:
            drop = 0
            for version, _ in self._commit_log:
                if version > oldest:
                    break
                drop += 1
            if drop:
                del self._commit_log[:drop]

    # DDL ----------------------------------------------------------------
    def _log_ddl(self, op: int, label: str, key: str) -> None:
        if self._wal is not None:
            self._wal.append_transaction(next(self._txn_ids), [(op, {"label": label, "key": key})])

    def create_index(self, label: str, key: str) -> None:
        with self._commit_lock:
            self.store.create_index(label, key)
            self._log_ddl(walmod.OP_CREATE_INDEX, label, key)

    def drop_index(self, label: str, key: str) -> None:
        with self._commit_lock:
            self.store.drop_index(label, key)
            self._log_ddl(walmod.OP_DROP_INDEX, label, key)

    def indexes(self) -> list[tuple[str, str]]:
        return self.store.indexes()

    # misc ---------------------------------------------------------------
    def stats(self):
        with self.snapshot() as view:
            return view.stats()

    def close(self) -> None:
        if self._wal is not None:
            self._wal.close()
            self._wal = None

    def __enter__(self) -> "Database":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def recover(wal_path: str | os.PathLike, fsync_policy: str = "always") -> Database:
    """Rebuild a database from its write-ahead log (torn tails are ignored)."""
    return Database(wal_path, fsync_policy)
