"""``hogdb`` command line: generate, load, run, scale, export, stats.

Exit codes: 0 success, 2 invalid input or parameters, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .api import HigherOrderDB
from .bench.dataset import FAMILIES, GenParams, generate, load, read_dataset, write_dataset
from .bench.scaling import scaling_run
from .bench.workload import WorkloadSpec, run_workload
from .errors import HogdbError
from .query import export_edge_index, export_node_features, write_csv
from .transform import lower

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3


def _gen_params(args) -> GenParams:
    return GenParams(
        family=args.family, n=args.n, m=args.m, count=args.count, links=args.links, seed=args.seed,
        zipf=args.zipf, min_size=args.min_size, max_size=args.max_size, mean_size=args.mean_size,
        total_size=args.total_size,
    )


def _open_store(args) -> HigherOrderDB:
    """Store from ``--wal`` (recovered) or from a dataset file, loaded in memory."""
    if getattr(args, "dataset", None):
        hdb, _ = load(args.dataset, family=args.family, wal_path=args.wal, fsync_policy=args.fsync)
        return hdb
    if args.wal:
        return HigherOrderDB.open(args.wal, family=args.family, fsync_policy=args.fsync)
    raise HogdbError("give a dataset file or --wal PATH")


def cmd_generate(args) -> int:
    graph = generate(_gen_params(args))
    count = write_dataset(graph, args.out)
    print(f"wrote {count} records to {args.out}")
    return EXIT_OK


def cmd_load(args) -> int:
    hdb, report = load(args.dataset, family=args.family, batch_size=args.batch, wal_path=args.wal,
                       fsync_policy=args.fsync)
    print(f"loaded {report.records} records in {report.batches} batches ({report.seconds:.2f}s): "
          f"{report.nodes} nodes, {report.edges} edges, family {report.family}")
    hdb.close()
    return EXIT_OK


def _spec(args, family: str) -> WorkloadSpec:
    kw = {"workers": args.workers, "seed": args.seed}
    if args.queries is not None:
        kw["queries"] = args.queries
    fam = "tuple" if family in ("tuple", "subgraph") else "hypergraph"
    return WorkloadSpec.named(fam, args.mix, **kw)


def cmd_run(args) -> int:
    hdb = _open_store(args)
    report = run_workload(hdb, _spec(args, hdb.family), executor=args.executor)
    print(report.summary())
    if args.out:
        header, rows = report.csv_rows()
        write_csv(args.out, header, rows)
    hdb.close()
    return EXIT_OK


def cmd_scale(args) -> int:
    workers = [int(w) for w in args.workers_list.split(",")]
    if args.dataset:
        family = args.family or read_dataset(args.dataset).family()

        def build(scale: int) -> HigherOrderDB:
            return load(args.dataset, family=family)[0]
    elif args.family:
        family = args.family

        def build(scale: int) -> HigherOrderDB:
            params = _gen_params(args)
            params.n *= scale
            params.m *= scale
            params.count *= scale
            params.links *= scale
            if params.total_size is not None:
                params.total_size *= scale
            hdb = HigherOrderDB(family=family)
            lower(generate(params), hdb.db)
            return hdb
    else:
        raise HogdbError("scale needs a dataset or --family with generator sizes")
    args.workers = 1
    rows = scaling_run(args.mode, _spec(args, family), workers, build, out=args.out, executor=args.executor)
    for row in rows:
        r = row.report
        print(f"{row.mode} W={row.workers}: {r.throughput:.1f} q/s over {r.wall_time:.3f}s "
              f"({r.completed} done, {r.aborted_final} aborted)")
    return EXIT_OK


def cmd_export(args) -> int:
    hdb = _open_store(args)
    labels = set(args.labels or ())
    if args.what == "nodes":
        result = export_node_features(hdb.db, labels, None, args.feature_key, args.id_key)
        print(f"exported node features {result.shape[0]}x{result.shape[1]}")
    else:
        result = export_edge_index(hdb.db, labels, None, args.id_key, args.attr_key, kind=args.kind,
                                   directed=args.directed)
        print(f"exported {len(result)} pairs")
    result.to_csv(args.out if args.out else sys.stdout)
    hdb.close()
    return EXIT_OK


def cmd_stats(args) -> int:
    hdb = _open_store(args)
    stats = hdb.stats().as_dict()
    stats["family"] = hdb.family
    print(json.dumps(stats, indent=2, sort_keys=True))
    hdb.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hogdb", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def gen_flags(p, required: bool) -> None:
        p.add_argument("--family", choices=FAMILIES, required=required)
        p.add_argument("--n", type=int, default=1000, help="base node count")
        p.add_argument("--m", type=int, default=0, help="pairwise edge count")
        p.add_argument("--count", type=int, default=0, help="hyperedges / simplices / tuples / subgraphs")
        p.add_argument("--links", type=int, default=0, help="subgraph-edge count")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--zipf", type=float, default=1.5, help="membership skew exponent")
        p.add_argument("--min-size", type=int, default=2)
        p.add_argument("--max-size", type=int)
        p.add_argument("--mean-size", type=float)
        p.add_argument("--total-size", type=int, help="exact total membership count")

    def store_flags(p) -> None:
        p.add_argument("dataset", nargs="?", help="JSON Lines dataset to load in memory")
        p.add_argument("--family", choices=("lpg",) + FAMILIES)
        p.add_argument("--wal", help="write-ahead log path (created or recovered)")
        p.add_argument("--fsync", choices=("always", "interval", "never"), default="always")

    def run_flags(p) -> None:
        p.add_argument("--mix", default="mixed", choices=("mostly-reads", "mixed", "write-heavy", "read-only"))
        p.add_argument("--queries", type=int)
        p.add_argument("--executor", default="auto", choices=("auto", "thread", "process"))
        p.add_argument("--out", help="CSV report path")

    p = sub.add_parser("generate", help="write a synthetic dataset")
    gen_flags(p, True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("load", help="load a dataset through the CRUD API")
    store_flags(p)
    p.add_argument("--batch", type=int, default=1000, help="entities per transaction")
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("run", help="run one OLTP workload")
    store_flags(p)
    run_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("scale", help="strong or weak scaling sweep")
    p.add_argument("dataset", nargs="?")
    gen_flags(p, False)
    run_flags(p)
    p.add_argument("--mode", choices=("strong", "weak"), default="strong")
    p.add_argument("--workers", dest="workers_list", default="1,2,4,8", help="comma-separated worker counts")
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("export", help="export node features or an edge index as CSV")
    store_flags(p)
    p.add_argument("--what", choices=("nodes", "edges"), default="nodes")
    p.add_argument("--labels", nargs="*")
    p.add_argument("--kind", default="edge", choices=("edge", "hyperedge", "node_tuple", "subgraph"))
    p.add_argument("--feature-key", default="feat")
    p.add_argument("--id-key", default="id")
    p.add_argument("--attr-key")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("stats", help="print store statistics")
    store_flags(p)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"hogdb: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (HogdbError, ValueError, KeyError) as exc:
        print(f"hogdb: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
