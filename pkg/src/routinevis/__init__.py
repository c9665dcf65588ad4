"""Visibility models for concurrent smart-home routines: a discrete-event
engine, lineage-table lock manager, schedulers, fault injection, workloads
and metrics."""

from .batch import BatchConfig, BatchResult, run_batch
from .engine import (
    Decision,
    Engine,
    Model,
    Outcome,
    RunResult,
    TraceEvent,
    apply_must_best_effort,
    classify_failure,
    run,
)
from .fabric import DetectorConfig, Fabric, FailureDetector, Fault
from .kernels import BACKEND
from .lineage import EngineConfig, LineageTable
from .metrics import MetricsReport, compute_metrics
from .model import Command, Kind, Necessity, Routine, RoutineFormatError, SimClock, parse_routine
from .oracle import final_incongruence_oracle, serial_execute
from .scheduler import make_scheduler
from .workload import (
    MicrobenchParams,
    Workload,
    all_on_all_off,
    fig2_workload,
    generate_factory,
    generate_microbenchmark,
    load_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BatchConfig", "BatchResult", "Command", "Decision", "DetectorConfig", "Engine",
    "EngineConfig", "Fabric", "FailureDetector", "Fault", "Kind", "LineageTable", "MetricsReport",
    "MicrobenchParams", "Model", "Necessity", "Outcome", "Routine", "RoutineFormatError", "RunResult",
    "SimClock", "TraceEvent", "Workload", "all_on_all_off", "apply_must_best_effort",
    "classify_failure", "compute_metrics", "fig2_workload", "final_incongruence_oracle",
    "generate_factory", "generate_microbenchmark", "load_scenario", "make_scheduler",
    "parse_routine", "run", "run_batch", "serial_execute",
]
