"""Dataset generation and loading, workload planning, scaling sweeps and the CLI."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hogdb import BadParams, DanglingReference, HigherOrderDB, ParseError, fingerprint, lift, lower
from hogdb.bench.dataset import GenParams, draw_sizes, generate, load, read_dataset, write_dataset
from hogdb.bench.scaling import HEADER, scaling_run
from hogdb.bench.workload import MIXES, Targets, WorkloadSpec, apportion, nearest_rank, plan, run_workload
from hogdb.cli import main

SMALL = {
    "hypergraph": GenParams("hypergraph", n=60, count=40, seed=1),
    "simplicial": GenParams("simplicial", n=40, count=15, seed=1),
    "tuple": GenParams("tuple", n=50, m=80, count=20, max_size=8, seed=1),
    "subgraph": GenParams("subgraph", n=50, m=120, count=10, links=6, max_size=6, seed=1),
}


@pytest.mark.parametrize("family", sorted(SMALL))
def test_generate_is_byte_deterministic(family, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_dataset(generate(SMALL[family]), a)
    write_dataset(generate(SMALL[family]), b)
    assert a.read_bytes() == b.read_bytes()


def test_different_seeds_differ():
    p1, p2 = GenParams("hypergraph", n=60, count=40, seed=1), GenParams("hypergraph", n=60, count=40, seed=2)
    assert generate(p1) != generate(p2)


def test_hypergraph_lowering_counts():
    g = generate(GenParams("hypergraph", n=600, count=570, seed=3))
    db = lower(g)
    assert db.stats().nodes == 600 + 570


@pytest.mark.parametrize("seed", range(4))
def test_mean_tuple_size_target(seed):
    g = generate(GenParams("tuple", n=500, m=0, count=400, mean_size=69, seed=seed))
    mean = np.mean([len(t.elements) for t in g.tuples.values()])
    assert abs(mean - 69) <= 6.9


def test_total_size_is_exact():
    sizes = draw_sizes(np.random.default_rng(0), 100, 2, 40, total=1234)
    assert sizes.sum() == 1234 and sizes.min() >= 2 and sizes.max() <= 40


@pytest.mark.parametrize("params", [
    GenParams("graph", n=10),
    GenParams("hypergraph", n=10, m=5),
    GenParams("tuple", n=1, count=3),
    GenParams("hypergraph", n=10, count=2, min_size=1),
    GenParams("subgraph", n=10, m=5, count=1, links=2),
])
def test_bad_params(params):
    with pytest.raises(BadParams):
        generate(params)


@pytest.mark.parametrize("family", sorted(SMALL))
def test_load_round_trip(family, tmp_path):
    g = generate(SMALL[family])
    path = tmp_path / "d.jsonl"
    write_dataset(g, path)
    assert read_dataset(path) == g
    hdb, report = load(path, batch_size=7)
    assert report.records == sum(1 for _ in g.entities())
    assert lift(hdb.db, simplicial=family == "simplicial") == g
    assert fingerprint(hdb.db) == fingerprint(lower(g))


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    hdb, report = load(path)
    assert report.records == 0 and hdb.stats().nodes == 0


def _lines(*records) -> str:
    return "".join(json.dumps(r) + "\n" for r in records)


def test_dangling_reference_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(_lines(
        {"kind": "node", "uid": "a", "labels": [], "properties": {}},
        {"kind": "hyperedge", "uid": "h", "labels": [], "properties": {}, "members": ["a", "zz"]},
    ))
    with pytest.raises(DanglingReference) as info:
        load(path)
    assert info.value.line == 2


@pytest.mark.parametrize("text", [
    "{not json}\n",
    _lines({"kind": "widget", "uid": "a", "labels": [], "properties": {}}),
    _lines({"kind": "node", "labels": [], "properties": {}}),
    _lines({"kind": "node", "uid": "a", "labels": [], "properties": {}},
           {"kind": "node", "uid": "a", "labels": [], "properties": {}}),
])
def test_parse_errors(text, tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(text)
    with pytest.raises(ParseError):
        read_dataset(path)


# --- workloads -----------------------------------------------------------------

def test_standard_mixes():
    mixed = MIXES["tuple"]["mixed"]
    assert (mixed["retrieve_node"], mixed["retrieve_edge"], mixed["retrieve_tuple"]) == (16.67, 16.67, 16.66)
    assert (mixed["add_edge"], mixed["add_tuple"]) == (41.67, 8.33)
    reads = MIXES["hypergraph"]["mostly-reads"]
    assert reads == {"retrieve_node": 46.87, "retrieve_hyperedge": 46.88, "update_node": 3.13, "add_hyperedge": 3.12}
    for family in MIXES:
        for mix in MIXES[family].values():
            assert abs(sum(mix.values()) - 100.0) <= 0.01 + 1e-9  # published percentages are rounded


@given(total=st.integers(0, 20000), family=st.sampled_from(sorted(MIXES)),
       name=st.sampled_from(["mostly-reads", "mixed", "write-heavy"]))
def test_apportion_is_exact(total, family, name):
    mix = MIXES[family][name]
    counts = apportion(mix, total)
    assert sum(counts.values()) == total
    weight = sum(mix.values())
    for q, pct in mix.items():
        assert abs(counts[q] - total * pct / weight) < 1


def test_bad_mix():
    with pytest.raises(BadParams):
        WorkloadSpec("x", "tuple", {"retrieve_node": 50.0})
    with pytest.raises(BadParams):
        WorkloadSpec("x", "tuple", {"teleport": 100.0})
    with pytest.raises(BadParams):
        WorkloadSpec.named("tuple", "chaotic")


@pytest.mark.parametrize("pct, expected", [(0, 1), (50, 2), (51, 3), (95, 4), (100, 4)])
def test_nearest_rank(pct, expected):
    assert nearest_rank([4, 1, 3, 2], pct) == expected


def test_nearest_rank_empty():
    assert np.isnan(nearest_rank([], 50))


def _tuple_store():
    hdb = HigherOrderDB(family="tuple")
    lower(generate(SMALL["tuple"]), hdb.db)
    return hdb


def test_plan_is_deterministic():
    hdb = _tuple_store()
    spec = WorkloadSpec.named("tuple", "read-only", queries=100, seed=4)
    targets = Targets.scan(hdb)
    assert plan(spec, targets) == plan(spec, targets)


def test_run_workload_read_only():
    hdb = _tuple_store()
    before = fingerprint(hdb.db)
    spec = WorkloadSpec.named("tuple", "read-only", queries=100, workers=1, seed=4)
    report = run_workload(hdb, spec)
    assert report.completed == 100 and report.aborted_final == 0
    assert report.throughput > 0
    assert sum(report.counts.values()) == 100
    assert fingerprint(hdb.db) == before
    assert set(report.latency) == set(report.counts)


@pytest.mark.parametrize("family, name", [("tuple", "write-heavy"), ("hypergraph", "mixed")])
def test_write_mix_with_threads_stays_valid(family, name):
    hdb = HigherOrderDB(family=family)
    lower(generate(SMALL[family]), hdb.db)
    spec = WorkloadSpec.named(family, name, queries=200, workers=3, seed=2)
    report = run_workload(hdb, spec)
    assert report.completed + report.aborted_final == 200
    assert report.executor == "thread"
    hdb.lift()  # still a well-formed lowering


def test_repeated_write_runs_and_export():
    hdb = HigherOrderDB(family="hypergraph")
    lower(generate(SMALL["hypergraph"]), hdb.db)
    spec = WorkloadSpec.named("hypergraph", "write-heavy", queries=150, seed=9)
    first, second = run_workload(hdb, spec), run_workload(hdb, spec)
    assert first.completed == second.completed == 150
    incidences = hdb.export_edge_index(kind="hyperedge")
    memberships = sum(len(h.members) for h in hdb.lift().hyperedges.values())
    assert len(incidences) == memberships


def test_process_executor_refuses_writes():
    hdb = _tuple_store()
    with pytest.raises(BadParams):
        run_workload(hdb, WorkloadSpec.named("tuple", "mixed", queries=10), executor="process")


def test_scaling_single_worker_csv(tmp_path):
    out = tmp_path / "scale.csv"
    spec = WorkloadSpec.named("tuple", "read-only", queries=50)
    rows = scaling_run("strong", spec, [1], lambda scale: _tuple_store(), out=out)
    assert len(rows) == 1
    lines = out.read_text().splitlines()
    assert lines[0].split(",") == HEADER
    assert len(lines) == 2


def test_weak_scaling_grows_queries():
    spec = WorkloadSpec.named("tuple", "read-only", queries=20)
    rows = scaling_run("weak", spec, [1, 2], lambda scale: _tuple_store(), executor="thread")
    assert [r.report.queries for r in rows] == [20, 40]


def test_scaling_bad_mode():
    with pytest.raises(BadParams):
        scaling_run("diagonal", WorkloadSpec.named("tuple", "mixed"), [1], lambda s: _tuple_store())


# --- CLI ----------------------------------------------------------------------------

def test_cli_generate_load_run_export(tmp_path, capsys):
    data = tmp_path / "d.jsonl"
    assert main(["generate", "--family", "tuple", "--n", "40", "--m", "60", "--count", "10",
                 "--max-size", "5", "--out", str(data)]) == 0
    assert main(["load", str(data)]) == 0
    report = tmp_path / "run.csv"
    assert main(["run", str(data), "--mix", "mixed", "--queries", "60", "--out", str(report)]) == 0
    assert report.read_text().startswith("mix,workers,query")
    feats = tmp_path / "x.csv"
    assert main(["export", str(data), "--what", "nodes", "--out", str(feats)]) == 0
    assert len(feats.read_text().splitlines()) == 41
    assert main(["stats", str(data)]) == 0
    assert '"family": "tuple"' in capsys.readouterr().out


def test_cli_wal_store_persists(tmp_path, capsys):
    data, wal = tmp_path / "d.jsonl", tmp_path / "store.wal"
    main(["generate", "--family", "hypergraph", "--n", "30", "--count", "10", "--out", str(data)])
    assert main(["load", str(data), "--wal", str(wal), "--fsync", "never"]) == 0
    capsys.readouterr()
    assert main(["stats", "--wal", str(wal)]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["nodes"] == 40 and stats["family"] == "hypergraph"


def test_cli_exit_codes(tmp_path):
    assert main(["load", str(tmp_path / "missing.jsonl")]) == 3
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{oops\n")
    assert main(["load", str(bad)]) == 2
    assert main(["generate", "--family", "tuple", "--n", "1", "--count", "3", "--out", str(tmp_path / "x")]) == 2
    assert main(["stats"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["run", "--mix", "sideways"])
    assert info.value.code == 2
