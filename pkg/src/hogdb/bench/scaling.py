"""Strong and weak scaling sweeps over worker counts."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

from ..api import HigherOrderDB
from ..errors import BadParams
from ..query import write_csv
from .workload import RunReport, WorkloadSpec, run_workload

HEADER = ["mode", "workers", "queries", "throughput", "total_time", "completed", "aborted", "retries"]


@dataclass
class ScalingRow:
    mode: str
    workers: int
    report: RunReport

    def as_tuple(self) -> tuple:
        r = self.report
        return (self.mode, self.workers, r.queries, r.throughput, r.wall_time, r.completed,
                r.aborted_final, r.retries)


def scaling_run(mode: str, spec: WorkloadSpec, workers: Sequence[int],
                build_store: Callable[[int], HigherOrderDB], *, out=None,
                executor: str = "auto") -> list[ScalingRow]:
    """Run ``spec`` once per worker count.

    ``build_store(scale)`` returns a freshly populated store; strong scaling
    always asks for scale 1, weak scaling for scale ``W`` and multiplies the
    query count by ``W`` so per-worker work stays fixed. A fresh store per run
    keeps write mixes from inflating later runs.
    """
    if mode not in ("strong", "weak"):
        raise BadParams(f"mode must be strong or weak, got {mode!r}")
    if not workers or any(w < 1 for w in workers):
        raise BadParams("worker counts must be positive")
    rows = []
    for w in workers:
        scale = 1 if mode == "strong" else w
        hdb = build_store(scale)
        run_spec = replace(spec, workers=w, queries=spec.queries * scale)
        rows.append(ScalingRow(mode, w, run_workload(hdb, run_spec, executor=executor)))
        hdb.close()
    if out is not None:
        write_csv(out, HEADER, [row.as_tuple() for row in rows])
    return rows
