"""Benchmark harness: synthetic datasets, OLTP workloads and scaling sweeps."""

from .dataset import GenParams, LoadReport, generate, iter_dataset, load, read_dataset, write_dataset
from .scaling import ScalingRow, scaling_run
from .workload import MIXES, Query, RunReport, WorkloadSpec, apportion, nearest_rank, plan, run_workload

__all__ = [
    "GenParams", "LoadReport", "MIXES", "Query", "RunReport", "ScalingRow", "WorkloadSpec", "apportion",
    "generate", "iter_dataset", "load", "nearest_rank", "plan", "read_dataset", "run_workload",
    "scaling_run", "write_dataset",
]
