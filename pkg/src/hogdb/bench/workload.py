"""OLTP workload planning, execution and reporting.

A workload is planned up front from the seed: the exact number of queries of
each type is apportioned from the mix percentages, the sequence is shuffled
and every query receives its targets. Execution then only replays the plan,
so two runs with the same seed issue identical operations.
"""

from __future__ import annotations

import math
import multiprocessing
import threading
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from ..api import HigherOrderDB
from ..errors import BadParams, Conflict

# query mixes in percent, per family and profile
MIXES = {
    "tuple": {
        "mostly-reads": {"retrieve_node": 31.67, "retrieve_edge": 31.67, "retrieve_tuple": 31.67,
                         "add_edge": 4.16, "add_tuple": 0.84},
        "mixed": {"retrieve_node": 16.67, "retrieve_edge": 16.67, "retrieve_tuple": 16.66,
                  "add_edge": 41.67, "add_tuple": 8.33},
        "write-heavy": {"retrieve_node": 8.33, "retrieve_edge": 8.33, "retrieve_tuple": 8.33,
                        "add_edge": 62.5, "add_tuple": 12.5},
    },
    "hypergraph": {
        "mostly-reads": {"retrieve_node": 46.87, "retrieve_hyperedge": 46.88,
                         "update_node": 3.13, "add_hyperedge": 3.12},
        "mixed": {"retrieve_node": 25.0, "retrieve_hyperedge": 25.0,
                  "update_node": 42.19, "add_hyperedge": 7.81},
        "write-heavy": {"retrieve_node": 12.5, "retrieve_hyperedge": 12.5,
                        "update_node": 57.81, "add_hyperedge": 17.19},
    },
}

READ_TYPES = {"retrieve_node", "retrieve_edge", "retrieve_tuple", "retrieve_hyperedge"}
DEFAULT_QUERIES = {"tuple": 12288, "hypergraph": 8096}
MAX_RETRIES = 5


@dataclass
class WorkloadSpec:
    name: str
    family: str
    mix: dict
    queries: int = 1000
    workers: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        total = sum(self.mix.values())
        if abs(total - 100.0) > 0.01 + 1e-9:
            raise BadParams(f"mix percentages sum to {total}, not 100")
        if self.queries < 0 or self.workers < 1:
            raise BadParams("queries must be >= 0 and workers >= 1")
        unknown = set(self.mix) - set(QUERY_TYPES)
        if unknown:
            raise BadParams(f"unknown query types {sorted(unknown)}")

    @classmethod
    def named(cls, family: str, name: str, **kw) -> "WorkloadSpec":
        if family not in MIXES:
            raise BadParams(f"no standard mixes for family {family!r}")
        if name == "read-only":
            reads = [q for q in MIXES[family]["mixed"] if q in READ_TYPES]
            mix = {q: 100.0 / len(reads) for q in reads}
        elif name in MIXES[family]:
            mix = dict(MIXES[family][name])
        else:
            raise BadParams(f"unknown mix {name!r}; expected one of {sorted(MIXES[family])} or read-only")
        kw.setdefault("queries", DEFAULT_QUERIES[family])
        return cls(name, family, mix, **kw)

    @property
    def read_only(self) -> bool:
        return all(q in READ_TYPES for q, pct in self.mix.items() if pct > 0)


def apportion(mix: dict, total: int) -> dict:
    """Largest-remainder split of ``total`` queries by percentage.

    Shares are normalized by their sum, since published mixes are rounded
    and may add up to 99.99 or 100.01.
    """
    weight = sum(mix.values())
    quotas = {q: total * pct / weight for q, pct in mix.items()}
    counts = {q: math.floor(v) for q, v in quotas.items()}
    short = total - sum(counts.values())
    for q in sorted(quotas, key=lambda q: (-(quotas[q] - counts[q]), q))[:short]:
        counts[q] += 1
    return counts


@dataclass(frozen=True)
class Query:
    index: int
    kind: str
    args: tuple


@dataclass
class Targets:
    nodes: list
    edges: list
    tuples: list
    hyperedges: list
    version: int = 0  # store version at scan time; keeps inserted uids fresh across runs

    @classmethod
    def scan(cls, hdb: HigherOrderDB) -> "Targets":
        from ..store import UID_KEY

        def uids(tag: str) -> list:
            with hdb.snapshot() as view:
                return sorted(view.node(i).props[UID_KEY] for i in view.match_nodes({tag}))

        edges = uids("_edge")
        if not edges:
            with hdb.snapshot() as view:
                edges = sorted(r.props[UID_KEY] for r in view.edges() if r.tag is None and UID_KEY in r.props)
        return cls(uids("_node"), edges, uids("_node_tuple"), uids("_hyperedge"), hdb.db.version)


def plan(spec: WorkloadSpec, targets: Targets) -> list[Query]:
    rng = np.random.default_rng(spec.seed)
    counts = apportion(spec.mix, spec.queries)
    kinds = [q for q in sorted(counts) for _ in range(counts[q])]
    order = rng.permutation(len(kinds)).tolist()
    kinds = [kinds[i] for i in order]
    pools = {"retrieve_node": targets.nodes, "retrieve_edge": targets.edges,
             "retrieve_tuple": targets.tuples, "retrieve_hyperedge": targets.hyperedges,
             "update_node": targets.nodes}
    nodes = targets.nodes
    prefix = f"w{spec.seed}v{targets.version}"
    out = []
    for i, kind in enumerate(kinds):
        if kind in pools:
            pool = pools[kind]
            if not pool:
                raise BadParams(f"store has no targets for {kind}")
            target = pool[int(rng.integers(len(pool)))]
            args = (target, round(float(rng.random()), 6)) if kind == "update_node" else (target,)
        elif kind == "add_edge":
            a, b = rng.choice(len(nodes), size=2, replace=False).tolist()
            args = (f"{prefix}.{i}", nodes[a], nodes[b])
        elif kind == "add_tuple":
            k = int(rng.integers(2, 9))
            args = (f"{prefix}.{i}", tuple(nodes[j] for j in rng.integers(len(nodes), size=k).tolist()))
        else:  # add_hyperedge
            k = int(rng.integers(2, min(6, len(nodes)) + 1))
            members = rng.choice(len(nodes), size=k, replace=False).tolist()
            args = (f"{prefix}.{i}", tuple(nodes[j] for j in members))
        out.append(Query(i, kind, args))
    return out


def execute(hdb: HigherOrderDB, q: Query):
    kind, args = q.kind, q.args
    if kind == "retrieve_node":
        return hdb.get_entity(kind="node", uid=args[0])
    if kind == "retrieve_edge":
        return hdb.get_entity(kind="edge", uid=args[0])
    if kind == "retrieve_tuple":
        return hdb.get_entity(kind="node_tuple", uid=args[0])
    if kind == "retrieve_hyperedge":
        return hdb.get_entity(kind="hyperedge", uid=args[0])
    if kind == "update_node":
        return hdb.update_entity(kind="node", uid=args[0], updates={"score": args[1]})
    if kind == "add_edge":
        return hdb.add_edge(args[1], args[2], {"Edge"}, {"id": args[0], "w": 1.0}, uid=args[0])
    if kind == "add_tuple":
        return hdb.add_node_tuple(args[1], {"NodeTuple"}, {"id": args[0]}, uid=args[0])
    if kind == "add_hyperedge":
        return hdb.add_hyperedge(args[1], {"HyperEdge"}, {"id": args[0]}, uid=args[0])
    raise BadParams(f"unknown query type {kind!r}")


QUERY_TYPES = ("retrieve_node", "retrieve_edge", "retrieve_tuple", "retrieve_hyperedge",
               "update_node", "add_edge", "add_tuple", "add_hyperedge")


@dataclass
class WorkerLog:
    latencies: dict = field(default_factory=lambda: defaultdict(list))
    completed: int = 0
    aborted: int = 0
    retries: int = 0


def run_queries(hdb: HigherOrderDB, queries: list[Query]) -> WorkerLog:
    log = WorkerLog()
    for q in queries:
        start = time.perf_counter()
        for attempt in range(MAX_RETRIES + 1):
            try:
                execute(hdb, q)
            except Conflict:
                if attempt == MAX_RETRIES:
                    log.aborted += 1
                else:
                    log.retries += 1
                continue
            log.completed += 1
            break
        log.latencies[q.kind].append(time.perf_counter() - start)
    return log


def nearest_rank(values: list[float], pct: float) -> float:
    """Nearest-rank percentile: the smallest value with at least pct% at or below it."""
    if not values:
        return math.nan
    ordered = sorted(values)
    rank = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return ordered[rank - 1]


@dataclass
class RunReport:
    name: str
    family: str
    workers: int
    queries: int
    executor: str
    wall_time: float
    completed: int
    aborted_final: int
    retries: int
    counts: dict
    latency: dict
    stats_before: dict
    stats_after: dict

    @property
    def throughput(self) -> float:
        return self.completed / self.wall_time if self.wall_time > 0 else 0.0

    def as_dict(self) -> dict:
        out = asdict(self)
        out["throughput"] = self.throughput
        return out

    def fractions(self) -> dict:
        return {q: 100.0 * c / self.queries for q, c in self.counts.items()} if self.queries else {}

    def csv_rows(self) -> tuple[list[str], list[tuple]]:
        header = ["mix", "workers", "query", "count", "p50_ms", "p95_ms", "p99_ms"]
        rows = []
        for q in sorted(self.latency):
            lat = self.latency[q]
            rows.append((self.name, self.workers, q, self.counts.get(q, 0),
                         lat["p50"] * 1e3, lat["p95"] * 1e3, lat["p99"] * 1e3))
        return header, rows

    def summary(self) -> str:
        lines = [
            f"{self.name} ({self.family}) W={self.workers} Q={self.queries} via {self.executor}",
            f"  wall {self.wall_time:.3f}s, throughput {self.throughput:.1f} q/s, "
            f"completed {self.completed}, aborted {self.aborted_final}, retries {self.retries}",
        ]
        for q in sorted(self.latency):
            lat = self.latency[q]
            lines.append(f"  {q:<20} n={self.counts.get(q, 0):<6} p50 {lat['p50'] * 1e3:.3f}ms "
                         f"p95 {lat['p95'] * 1e3:.3f}ms p99 {lat['p99'] * 1e3:.3f}ms")
        return "\n".join(lines)


# state inherited by forked read workers
_FORK_STATE: dict = {}


def _fork_worker(chunk_index: int) -> WorkerLog:
    hdb = _FORK_STATE["hdb"]
    log = run_queries(hdb, _FORK_STATE["chunks"][chunk_index])
    log.latencies = dict(log.latencies)
    return log


def _split(queries: list[Query], workers: int) -> list[list[Query]]:
    return [queries[w::workers] for w in range(workers)]


def _choose_executor(spec: WorkloadSpec, executor: str) -> str:
    if executor == "auto":
        can_fork = "fork" in multiprocessing.get_all_start_methods()
        return "process" if spec.read_only and spec.workers > 1 and can_fork else "thread"
    if executor not in ("thread", "process"):
        raise BadParams(f"executor must be auto, thread or process, got {executor!r}")
    if executor == "process" and not spec.read_only:
        raise BadParams("the process executor only runs read-only mixes (workers would not share writes)")
    return executor


def run_workload(hdb: HigherOrderDB, spec: WorkloadSpec, *, executor: str = "auto",
                 queries: list[Query] | None = None) -> RunReport:
    """Run ``spec`` against ``hdb`` with ``spec.workers`` concurrent workers.

    Write mixes run on threads sharing the store. Read-only mixes with more
    than one worker run in forked processes by default, each reading its
    copy-on-write view of the same committed state, because threads would
    serialize on the interpreter lock.
    """
    mode = _choose_executor(spec, executor)
    if queries is None:
        queries = plan(spec, Targets.scan(hdb))
    before = hdb.stats().as_dict()
    chunks = _split(queries, spec.workers)
    start = time.perf_counter()
    if mode == "process":
        _FORK_STATE.update(hdb=hdb, chunks=chunks)
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(spec.workers) as pool:
                logs = pool.map(_fork_worker, range(spec.workers))
        finally:
            _FORK_STATE.clear()
    elif spec.workers == 1:
        logs = [run_queries(hdb, chunks[0])]
    else:
        logs = [None] * spec.workers

        def target(w: int) -> None:
            logs[w] = run_queries(hdb, chunks[w])

        threads = [threading.Thread(target=target, args=(w,)) for w in range(spec.workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    wall = time.perf_counter() - start

    merged = defaultdict(list)
    for log in logs:
        for q, values in log.latencies.items():
            merged[q].extend(values)
    counts = defaultdict(int)
    for q in queries:
        counts[q.kind] += 1
    latency = {q: {p: nearest_rank(v, pct) for p, pct in (("p50", 50), ("p95", 95), ("p99", 99))}
               for q, v in merged.items()}
    return RunReport(
        name=spec.name, family=spec.family, workers=spec.workers, queries=len(queries), executor=mode,
        wall_time=wall, completed=sum(log.completed for log in logs),
        aborted_final=sum(log.aborted for log in logs), retries=sum(log.retries for log in logs),
        counts=dict(counts), latency=latency, stats_before=before, stats_after=hdb.stats().as_dict(),
    )
