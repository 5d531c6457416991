"""Synthetic dataset generation and the JSON Lines dataset format.

Every line is one record with the fields ``kind``, ``uid``, ``labels``,
``properties`` plus the structural references of its kind (``members`` and
``positions`` for tuples, ``members`` for hyperedges and simplices, ``src``
and ``dst`` for edges and subgraph-edges, ``nodes`` and ``edges`` for
subgraphs). A record only references uids defined on earlier lines.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from ..api import HigherOrderDB
from ..errors import BadParams, DanglingReference, HogdbError, ParseError
from ..model import (
    Edge,
    HigherOrderGraph,
    HyperEdge,
    Node,
    NodeTuple,
    Simplex,
    Subgraph,
    SubgraphEdge,
)
from ..txn import Database
from ..wal import canonical_json

FAMILIES = ("hypergraph", "simplicial", "tuple", "subgraph")
RECORD_KINDS = ("node", "edge", "hyperedge", "simplex", "tuple", "subgraph", "subgraph_edge")


# ---------------------------------------------------------------------------
# size and membership distributions
# ---------------------------------------------------------------------------

def _power_mean(alpha: float, ks: np.ndarray) -> float:
    w = ks ** -alpha
    return float((ks * w).sum() / w.sum())


def power_law_exponent(lo: int, hi: int, mean: float) -> float:
    """Exponent of the truncated law P(k) ~ k^-alpha on [lo, hi] with the given mean."""
    if not lo <= mean <= hi:
        raise BadParams(f"mean size {mean} is outside [{lo}, {hi}]")
    ks = np.arange(lo, hi + 1, dtype=np.float64)
    a, b = -10.0, 20.0  # mean is decreasing in alpha
    for _ in range(200):
        mid = (a + b) / 2
        if _power_mean(mid, ks) > mean:
            a = mid
        else:
            b = mid
    return (a + b) / 2


def draw_sizes(rng: np.random.Generator, count: int, lo: int, hi: int, *, mean: float | None = None,
               total: int | None = None, alpha: float = 2.5) -> np.ndarray:
    """Tail-heavy sizes in [lo, hi]; ``total`` pins the exact sum."""
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    if total is not None:
        if not count * lo <= total <= count * hi:
            raise BadParams(f"total size {total} cannot be split into {count} sizes in [{lo}, {hi}]")
        mean = total / count
    if lo == hi:
        return np.full(count, lo, dtype=np.int64)
    if mean is not None:
        alpha = power_law_exponent(lo, hi, mean)
    ks = np.arange(lo, hi + 1)
    p = ks.astype(np.float64) ** -alpha
    p /= p.sum()
    # stratified inverse-CDF draws: one uniform per equal-probability stratum
    # keeps the sample mean close to the target even for very heavy tails
    u = (np.arange(count) + rng.random(count)) / count
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    sizes = ks[np.minimum(np.searchsorted(cdf, u, side="right"), len(ks) - 1)].astype(np.int64)
    rng.shuffle(sizes)
    if total is not None:
        diff = int(total - sizes.sum())
        while diff != 0:
            step = 1 if diff > 0 else -1
            ok = np.flatnonzero(sizes < hi) if step > 0 else np.flatnonzero(sizes > lo)
            pick = rng.choice(ok, size=min(abs(diff), len(ok)), replace=False)
            sizes[pick] += step
            diff -= step * len(pick)
    return sizes


class ZipfSampler:
    """Draws node indices with probability proportional to rank^-s.

    Ranks are assigned by a random permutation so that popularity does not
    follow node numbering.
    """

    def __init__(self, rng: np.random.Generator, n: int, s: float = 1.5) -> None:
        self.rng = rng
        self.order = rng.permutation(n)
        w = np.arange(1, n + 1, dtype=np.float64) ** -s
        self.cdf = np.cumsum(w / w.sum())
        self.cdf[-1] = 1.0

    def draw(self, k: int) -> np.ndarray:
        idx = np.searchsorted(self.cdf, self.rng.random(k), side="right")
        return self.order[np.minimum(idx, len(self.order) - 1)]

    def distinct(self, k: int) -> list[int]:
        if k > len(self.order):
            raise BadParams(f"cannot draw {k} distinct nodes out of {len(self.order)}")
        chosen: dict[int, None] = {}
        batch = k
        while len(chosen) < k:
            for v in self.draw(batch).tolist():
                chosen.setdefault(v)
                if len(chosen) == k:
                    break
            batch = max(2 * batch, 16)
            if batch > 64 * len(self.order):  # extremely skewed tail: fill uniformly
                for v in self.rng.permutation(len(self.order)).tolist():
                    if len(chosen) == k:
                        break
                    chosen.setdefault(v)
        return list(chosen)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

@dataclass
class GenParams:
    family: str
    n: int
    m: int = 0
    count: int = 0
    links: int = 0
    seed: int = 0
    zipf: float = 1.5
    min_size: int = 2
    max_size: int | None = None
    mean_size: float | None = None
    total_size: int | None = None
    features: int = 2

    def check(self) -> None:
        if self.family not in FAMILIES:
            raise BadParams(f"family must be one of {FAMILIES}, got {self.family!r}")
        for name in ("n", "m", "count", "links", "features"):
            if getattr(self, name) < 0:
                raise BadParams(f"{name} must be non-negative")
        if self.zipf <= 0:
            raise BadParams("zipf exponent must be positive")
        if self.min_size < 2:
            raise BadParams("entities need at least 2 members")
        if self.max_size is not None and self.max_size < self.min_size:
            raise BadParams("max size is below min size")
        if (self.m or self.count) and self.n < 2:
            raise BadParams("at least 2 nodes are needed to connect anything")
        if self.family in ("hypergraph", "simplicial") and self.m:
            raise BadParams(f"{self.family} datasets take no pairwise edges")
        # multi-edges are allowed, but not beyond 64 parallel edges per node pair on average
        if self.m > 64 * self.n * (self.n - 1) // 2:
            raise BadParams(f"{self.m} edges exceed the multi-edge budget for {self.n} nodes")
        if self.family == "subgraph" and self.count and not self.m:
            raise BadParams("subgraphs are grown from edges; m must be positive")
        if self.links and (self.family != "subgraph" or self.count < 2):
            raise BadParams("subgraph-edges need a subgraph dataset with at least 2 subgraphs")


def _node(i: int, rng: np.random.Generator, features: int) -> Node:
    feat = tuple(round(float(v), 6) for v in rng.random(features))
    props = {"id": i, "feat": feat} if features else {"id": i}
    return Node(f"n{i}", {"Node"}, props)


def _edges(rng: np.random.Generator, sampler: ZipfSampler, m: int, n: int) -> list[tuple[int, int]]:
    src = sampler.draw(m)
    dst = rng.integers(0, n, size=m)
    clash = src == dst
    dst[clash] = (dst[clash] + 1 + rng.integers(0, n - 1, size=int(clash.sum()))) % n
    return list(zip(src.tolist(), dst.tolist()))


def generate(params: GenParams) -> HigherOrderGraph:
    """Build a seeded random higher-order graph of the requested family."""
    params.check()
    rng = np.random.default_rng(params.seed)
    g = HigherOrderGraph()
    n = params.n
    for i in range(n):
        g.add(_node(i, rng, params.features))
    if n < 2:
        return g
    sampler = ZipfSampler(rng, n, params.zipf)
    fam = params.family

    if fam in ("tuple", "subgraph"):
        for j, (s, d) in enumerate(_edges(rng, sampler, params.m, n)):
            g.add(Edge(f"n{s}", f"n{d}", {"Edge"}, {"id": j, "w": round(float(rng.random()), 6)}, f"e{j}"))

    if fam == "hypergraph":
        hi = min(params.max_size or 10, n)
        sizes = draw_sizes(rng, params.count, params.min_size, hi, mean=params.mean_size, total=params.total_size)
        for j, k in enumerate(sizes.tolist()):
            members = [f"n{v}" for v in sampler.distinct(k)]
            g.add(HyperEdge(members, {"HyperEdge"}, {"id": j, "w": round(float(rng.random()), 6)}, f"h{j}"))

    elif fam == "simplicial":
        hi = min(params.max_size or 4, n)
        sizes = draw_sizes(rng, params.count, params.min_size, hi, mean=params.mean_size)
        tops = []
        for k in sizes.tolist():
            tops.append(frozenset(sampler.distinct(k)))
        faces = set()
        for top in tops:
            verts = sorted(top)
            for size in range(2, len(verts) + 1):
                for face in _combinations(verts, size):
                    faces.add(face)
        for j, face in enumerate(sorted(faces, key=lambda f: (len(f), sorted(f)))):
            g.add(Simplex([f"n{v}" for v in face], {"Simplex"}, {"id": j}, f"x{j}"))

    elif fam == "tuple":
        hi = params.max_size or 984
        sizes = draw_sizes(rng, params.count, params.min_size, hi, mean=params.mean_size, total=params.total_size)
        for j, k in enumerate(sizes.tolist()):
            members = [f"n{v}" for v in sampler.draw(k).tolist()]
            g.add(NodeTuple(members, {"NodeTuple"}, {"id": j}, f"t{j}"))

    elif fam == "subgraph":
        _grow_subgraphs(g, rng, params)

    return g


def _combinations(verts, size):
    for combo in itertools.combinations(verts, size):
        yield frozenset(combo)


def _grow_subgraphs(g: HigherOrderGraph, rng: np.random.Generator, params: GenParams) -> None:
    """Subgraphs grown by a short random walk over edges (junction-tree like clusters)."""
    edges = list(g.edges.values())
    adj: dict[str, list] = {}
    for e in edges:
        adj.setdefault(e.src, []).append(e)
        adj.setdefault(e.dst, []).append(e)
    hi = params.max_size or 6
    sizes = draw_sizes(rng, params.count, 1, max(1, hi - 1), mean=params.mean_size) if params.count else []
    for j, k in enumerate(list(sizes)):
        seed_edge = edges[int(rng.integers(len(edges)))]
        chosen = {seed_edge.uid: seed_edge}
        frontier = [seed_edge.src, seed_edge.dst]
        while len(chosen) < k and frontier:
            v = frontier[int(rng.integers(len(frontier)))]
            options = [e for e in adj.get(v, ()) if e.uid not in chosen]
            if not options:
                frontier.remove(v)
                continue
            e = options[int(rng.integers(len(options)))]
            chosen[e.uid] = e
            frontier.extend(x for x in (e.src, e.dst) if x not in frontier)
        nodes = {x for e in chosen.values() for x in (e.src, e.dst)}
        g.add(Subgraph(nodes, set(chosen), {"Subgraph"}, {"id": j}, f"s{j}"))
    subs = sorted(g.subgraphs, key=lambda u: int(u[1:]))
    for j in range(params.links):
        a, b = rng.choice(len(subs), size=2, replace=False).tolist()
        g.add(SubgraphEdge(subs[a], subs[b], {"SubgraphEdge"}, {"id": j}, f"f{j}"))


# ---------------------------------------------------------------------------
# JSON Lines I/O
# ---------------------------------------------------------------------------

def _record(entity) -> dict:
    rec = {"uid": entity.uid, "labels": sorted(entity.labels), "properties": dict(entity.properties)}
    if isinstance(entity, Node):
        rec["kind"] = "node"
    elif isinstance(entity, Edge):
        rec.update(kind="edge", src=entity.src, dst=entity.dst)
    elif isinstance(entity, HyperEdge):
        rec.update(kind="hyperedge", members=sorted(entity.members))
    elif isinstance(entity, Simplex):
        rec.update(kind="simplex", members=sorted(entity.vertices))
    elif isinstance(entity, NodeTuple):
        rec.update(kind="tuple", members=list(entity.members), positions=list(entity.positions))
    elif isinstance(entity, Subgraph):
        rec.update(kind="subgraph", nodes=sorted(entity.subgraph_nodes), edges=sorted(entity.subgraph_edges))
    elif isinstance(entity, SubgraphEdge):
        rec.update(kind="subgraph_edge", src=entity.src, dst=entity.dst)
    return rec


def _ordered(graph: HigherOrderGraph) -> Iterator:
    def by_uid(coll: dict):
        return (coll[u] for u in sorted(coll, key=_uid_order))

    yield from by_uid(graph.nodes)
    yield from by_uid(graph.edges)
    yield from by_uid(graph.hyperedges)
    yield from sorted(graph.simplices.values(), key=lambda s: (len(s.vertices), _uid_order(s.uid)))
    yield from by_uid(graph.tuples)
    yield from by_uid(graph.subgraphs)
    yield from by_uid(graph.subgraph_edges)


def _uid_order(uid: str):
    head = uid.rstrip("0123456789")
    tail = uid[len(head):]
    return (head, int(tail) if tail else -1, uid)


def write_dataset(graph: HigherOrderGraph, path) -> int:
    """Write ``graph`` as JSON Lines; returns the record count. Output is byte-stable."""
    count = 0
    with open(path, "wb") as fh:
        for entity in _ordered(graph):
            fh.write(canonical_json(_record(entity)) + b"\n")
            count += 1
    return count


def _fields(rec: dict, line: int, *names: str):
    out = []
    for name in names:
        if name not in rec:
            raise ParseError(f"{rec.get('kind')} record lacks {name!r}", line)
        out.append(rec[name])
    return out


def parse_record(rec: dict, line: int):
    if not isinstance(rec, dict):
        raise ParseError("a record must be a JSON object", line)
    kind = rec.get("kind")
    if kind not in RECORD_KINDS:
        raise ParseError(f"unknown record kind {kind!r}", line)
    uid, labels, props = _fields(rec, line, "uid", "labels", "properties")
    if not isinstance(uid, str) or not uid:
        raise ParseError("uid must be a non-empty string", line)
    try:
        if kind == "node":
            return Node(uid, labels, props)
        if kind == "edge":
            src, dst = _fields(rec, line, "src", "dst")
            return Edge(src, dst, labels, props, uid)
        if kind == "hyperedge":
            return HyperEdge(_fields(rec, line, "members")[0], labels, props, uid)
        if kind == "simplex":
            return Simplex(_fields(rec, line, "members")[0], labels, props, uid)
        if kind == "tuple":
            members, positions = _fields(rec, line, "members", "positions")
            if len(members) != len(positions):
                raise ParseError("members and positions differ in length", line)
            return NodeTuple(tuple(zip(positions, members)), labels, props, uid)
        if kind == "subgraph":
            nodes, edges = _fields(rec, line, "nodes", "edges")
            return Subgraph(nodes, edges, labels, props, uid)
        src, dst = _fields(rec, line, "src", "dst")
        return SubgraphEdge(src, dst, labels, props, uid)
    except ParseError:
        raise
    except (HogdbError, TypeError, ValueError) as exc:
        raise ParseError(f"{exc}", line) from exc


def _references(entity) -> list[tuple[str, str]]:
    if isinstance(entity, (Edge,)):
        return [("node", entity.src), ("node", entity.dst)]
    if isinstance(entity, HyperEdge):
        return [("node", m) for m in sorted(entity.members)]
    if isinstance(entity, Simplex):
        return [("node", m) for m in sorted(entity.vertices)]
    if isinstance(entity, NodeTuple):
        return [("node", m) for m in entity.members]
    if isinstance(entity, Subgraph):
        return [("node", m) for m in sorted(entity.subgraph_nodes)] + [("edge", e) for e in sorted(entity.subgraph_edges)]
    if isinstance(entity, SubgraphEdge):
        return [("subgraph", entity.src), ("subgraph", entity.dst)]
    return []


def iter_dataset(lines: Iterable[str | bytes]) -> Iterator[tuple[int, object]]:
    """Parse records in one forward pass, checking every reference."""
    kinds: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if not text.strip():
            continue
        try:
            rec = json.loads(text)
        except ValueError as exc:
            raise ParseError(f"invalid JSON ({exc})", lineno) from exc
        entity = parse_record(rec, lineno)
        for want, ref in _references(entity):
            if kinds.get(ref) != want:
                raise DanglingReference(f"reference to undefined {want} {ref!r}", lineno)
        if entity.uid in kinds:
            raise ParseError(f"uid {entity.uid!r} defined twice", lineno)
        kinds[entity.uid] = "node" if isinstance(entity, Node) else (
            "edge" if isinstance(entity, Edge) else "subgraph" if isinstance(entity, Subgraph) else "other")
        yield lineno, entity


def read_dataset(path) -> HigherOrderGraph:
    g = HigherOrderGraph()
    with open(path, "rb") as fh:
        for _, entity in iter_dataset(fh):
            g.add(entity)
    return g


@dataclass
class LoadReport:
    records: int
    batches: int
    seconds: float
    family: str
    nodes: int
    edges: int


def load(path, hdb: HigherOrderDB | None = None, *, family: str | None = None, batch_size: int = 1000,
         wal_path=None, fsync_policy: str = "always") -> tuple[HigherOrderDB, LoadReport]:
    """Parse ``path`` and insert it through the CRUD API in batch transactions."""
    start = time.perf_counter()
    entities = []
    with open(path, "rb") as fh:
        for lineno, entity in iter_dataset(fh):
            entities.append(entity)
    graph = HigherOrderGraph()
    for e in entities:
        graph.add(e)
    fam = family or graph.family()
    if hdb is None:
        db = Database(wal_path, fsync_policy) if wal_path is not None else Database()
        hdb = HigherOrderDB(db, family=fam)
    batches = 0
    for i in range(0, len(entities), max(1, batch_size)):
        with hdb.begin() as txn:
            for entity in entities[i : i + batch_size]:
                hdb.add(entity, txn=txn)
        batches += 1
    stats = hdb.stats()
    report = LoadReport(len(entities), batches, time.perf_counter() - start, hdb.family, stats.nodes, stats.edges)
    return hdb, report
