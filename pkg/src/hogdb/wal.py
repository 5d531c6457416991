"""Write-ahead log.

Record layout (little-endian)::

    txn_id u64 | seq u32 | op u8 | payload_len u32 | payload | crc32c u32

The payload is canonical JSON (sorted keys, no whitespace, UTF-8). The CRC
covers header and payload. Op tag 0 is the COMMIT marker with an empty
payload; a transaction without one is discarded at replay.
"""

from __future__ import annotations

import json
import os
import struct
import time
from dataclasses import dataclass
from typing import Any, BinaryIO

from .errors import CorruptWal

HEADER = struct.Struct("<QIBI")
CRC = struct.Struct("<I")

OP_COMMIT = 0
OP_CREATE_NODE = 1
OP_CREATE_EDGE = 2
OP_REMOVE_NODE = 3
OP_REMOVE_EDGE = 4
OP_SET_PROPERTIES = 5
OP_CREATE_INDEX = 6
OP_DROP_INDEX = 7

OP_NAMES = {
    OP_COMMIT: "commit",
    OP_CREATE_NODE: "create_node",
    OP_CREATE_EDGE: "create_edge",
    OP_REMOVE_NODE: "remove_node",
    OP_REMOVE_EDGE: "remove_edge",
    OP_SET_PROPERTIES: "set_properties",
    OP_CREATE_INDEX: "create_index",
    OP_DROP_INDEX: "drop_index",
}

FSYNC_POLICIES = ("always", "interval", "never")


def _make_table() -> list[int]:
    poly = 0x82F63B78  # Castagnoli, reflected
    table = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ poly if crc & 1 else crc >> 1
        table.append(crc)
    return table


_TABLE = _make_table()


def crc32c(data: bytes, crc: int = 0) -> int:
    """CRC-32C (Castagnoli) of ``data``, optionally continuing from ``crc``."""
    crc ^= 0xFFFFFFFF
    table = _TABLE
    for byte in data:
        crc = table[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


def canonical_json(payload: Any) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def encode_record(txn_id: int, seq: int, op: int, payload: Any = None) -> bytes:
    body = b"" if op == OP_COMMIT else canonical_json(payload)
    head = HEADER.pack(txn_id, seq, op, len(body))
    return head + body + CRC.pack(crc32c(head + body))


@dataclass(frozen=True)
class WalRecord:
    txn_id: int
    seq: int
    op: int
    payload: Any
    offset: int
    valid: bool = True


def scan(data: bytes) -> tuple[list[WalRecord], int, bool]:
    """Parse raw log bytes.

    Returns ``(records, end_of_last_complete_record, torn_tail)``. Records
    whose checksum fails are returned with ``valid=False``; interpretation is
    left to :func:`committed_transactions`.
    """
    records = []
    pos = 0
    n = len(data)
    while pos < n:
        if n - pos < HEADER.size:
            return records, pos, True
        txn_id, seq, op, length = HEADER.unpack_from(data, pos)
        end = pos + HEADER.size + length + CRC.size
        if end > n:
            return records, pos, True
        head_body = data[pos : pos + HEADER.size + length]
        (stored,) = CRC.unpack_from(data, end - CRC.size)
        valid = crc32c(head_body) == stored
        payload = None
        if valid and op != OP_COMMIT:
            try:
                payload = json.loads(head_body[HEADER.size :].decode("utf-8"))
            except (UnicodeDecodeError, ValueError):
                valid = False
        records.append(WalRecord(txn_id, seq, op, payload, pos, valid))
        pos = end
    return records, pos, False


def committed_transactions(records: list[WalRecord]) -> list[tuple[int, list[WalRecord]]]:
    """Group records by transaction and keep committed ones, in commit order.

    A bad checksum on a record belonging to a committed transaction, or on a
    COMMIT marker that is followed by further intact records, is
    unrecoverable. A bad record anywhere else belongs to work that never
    committed (or is a torn tail) and is dropped with its transaction.
    """
    pending: dict[int, list[WalRecord]] = {}
    poisoned: set[int] = set()
    out = []
    for i, rec in enumerate(records):
        if not rec.valid:
            if rec.op == OP_COMMIT and any(r.valid for r in records[i + 1 :]):
                raise CorruptWal(f"checksum mismatch on COMMIT of txn {rec.txn_id} at offset {rec.offset}")
            poisoned.add(rec.txn_id)
            continue
        if rec.op == OP_COMMIT:
            if rec.txn_id in poisoned:
                raise CorruptWal(f"checksum mismatch inside committed txn {rec.txn_id}")
            batch = sorted(pending.pop(rec.txn_id, []), key=lambda r: r.seq)
            out.append((rec.txn_id, batch))
        else:
            pending.setdefault(rec.txn_id, []).append(rec)
    return out


def read_wal(path: str | os.PathLike) -> tuple[list[tuple[int, list[WalRecord]]], int, int]:
    """Return ``(committed, valid_length, max_txn_id)`` for the log at ``path``."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        return [], 0, 0
    records, end, _ = scan(data)
    committed = committed_transactions(records)
    max_txn = max((r.txn_id for r in records), default=0)
    return committed, end, max_txn


class SimulatedCrash(RuntimeError):
    """Raised by the fault injector to emulate process death mid-write."""


class WalWriter:
    def __init__(self, path: str | os.PathLike, fsync_policy: str = "always", fsync_interval: float = 1.0,
                 truncate_to: int | None = None) -> None:
        if fsync_policy not in FSYNC_POLICIES:
            raise ValueError(f"fsync policy must be one of {FSYNC_POLICIES}, got {fsync_policy!r}")
        self.path = os.fspath(path)
        self.fsync_policy = fsync_policy
        self.fsync_interval = fsync_interval
        self._fh: BinaryIO = open(self.path, "ab")
        if truncate_to is not None and self._fh.tell() != truncate_to:
            self._fh.truncate(truncate_to)
            self._fh.seek(truncate_to)
        self._last_sync = time.monotonic()
        # test hook: crash after this many records of the next write
        self.fail_after_records: int | None = None

    def append_transaction(self, txn_id: int, ops: list[tuple[int, Any]]) -> None:
        chunks = [encode_record(txn_id, seq, op, payload) for seq, (op, payload) in enumerate(ops)]
        chunks.append(encode_record(txn_id, len(ops), OP_COMMIT))
        start = self._fh.tell()
        if self.fail_after_records is not None:
            limit = self.fail_after_records
            self.fail_after_records = None
            self._fh.write(b"".join(chunks[:limit]))
            self._fh.flush()
            raise SimulatedCrash(f"injected crash after {limit} WAL records")
        try:
            self._fh.write(b"".join(chunks))
            self._fh.flush()
            self._sync()
        except OSError:
            self._fh.truncate(start)
            self._fh.seek(start)
            raise

    def _sync(self) -> None:
        if self.fsync_policy == "always":
            os.fsync(self._fh.fileno())
        elif self.fsync_policy == "interval":
            now = time.monotonic()
            if now - self._last_sync >= self.fsync_interval:
                os.fsync(self._fh.fileno())
                self._last_sync = now

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            if self.fsync_policy != "never":
                os.fsync(self._fh.fileno())
            self._fh.close()
