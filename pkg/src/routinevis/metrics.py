"""Metrics computed from a finished run's trace."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .engine import RunResult, TraceEvent
from .workload import Workload


def _times(trace: Iterable[TraceEvent], kind: str) -> dict[int, int]:
    return {e.routine: e.time for e in trace if e.kind == kind and e.routine is not None}


def latency(trace: Sequence[TraceEvent]) -> dict[int, int]:
    """Submission-to-commit time of every committed routine."""
    sub = _times(trace, "RoutineSubmit")
    return {rid: t - sub[rid] for rid, t in sorted(_times(trace, "Commit").items())}


def normalized_latency(trace: Sequence[TraceEvent], w: Workload) -> dict[int, float]:
    """Latency divided by the routine's ideal (uncontended) runtime."""
    return {rid: v / w.routines[rid].ideal_duration for rid, v in latency(trace).items()}


def percentiles(values: Iterable[float], qs: Sequence[float] = (50, 90, 95)) -> dict[str, float]:
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return {f"p{int(q)}": 0.0 for q in qs}
    return {f"p{int(q)}": float(np.percentile(arr, q)) for q in qs}


def makespan(trace: Sequence[TraceEvent]) -> int:
    ends = [e.time for e in trace if e.kind in ("Commit", "Abort")]
    subs = [e.time for e in trace if e.kind == "RoutineSubmit"]
    return max(ends) - min(subs) if ends else 0


def stretch_factor(trace: Sequence[TraceEvent], w: Workload) -> dict[int, float]:
    """(commit - first command start) / ideal runtime, per committed routine."""
    first: dict[int, int] = {}
    for e in trace:
        if e.kind == "CmdStart":
            first.setdefault(e.routine, e.time)
    return {
        rid: (t - first[rid]) / w.routines[rid].ideal_duration
        for rid, t in sorted(_times(trace, "Commit").items())
    }


def parallelism_level(trace: Sequence[TraceEvent]) -> float:
    """Mean number of running routines, sampled after every start/end."""
    running = 0
    samples = []
    for e in trace:
        if e.kind == "RoutineStart":
            running += 1
        elif e.kind in ("Commit", "Abort"):
            running -= 1
        else:
            continue
        samples.append(running)
    return float(np.mean(samples)) if samples else 0.0


def temporary_incongruence_set(trace: Sequence[TraceEvent]) -> set[int]:
    finish = {**_times(trace, "Commit"), **_times(trace, "Abort")}
    writes: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
    for i, e in enumerate(trace):
        if e.kind == "CmdEnd" and e.ok:
            writes[e.device].append((i, e.time, e.routine))
    hit: set[int] = set()
    for dev, ws in writes.items():
        first_write: dict[int, int] = {}
        for i, _, rid in ws:
            first_write.setdefault(rid, i)
        for rid, i0 in first_write.items():
            end = finish.get(rid)
            if end is None:
                continue
            # worst case: a write landing at the finish instant still counts
            if any(j > i0 and t <= end and other != rid for j, t, other in ws):
                hit.add(rid)
    return hit


def temporary_incongruence(trace: Sequence[TraceEvent]) -> float:
    n = len(_times(trace, "RoutineSubmit"))
    return len(temporary_incongruence_set(trace)) / n if n else 0.0


def rollback_overhead(trace: Sequence[TraceEvent], w: Workload) -> float:
    """Mean, over aborted routines, of the fraction of their commands whose
    effect was undone by a rollback write."""
    aborted = sorted(_times(trace, "Abort"))
    if not aborted:
        return 0.0
    restored: dict[int, set[int]] = defaultdict(set)
    for e in trace:
        if e.kind == "RollbackCmd" and e.routine is not None:
            restored[e.routine].add(e.device)
    undone: dict[int, int] = defaultdict(int)
    for e in trace:
        if e.kind == "CmdEnd" and e.ok and e.device in restored.get(e.routine, ()):
            undone[e.routine] += 1
    return float(np.mean([undone[r] / len(w.routines[r].commands) for r in aborted]))


def order_mismatch(final_order: Sequence[int], submission_order: Sequence[int]) -> float:
    """Kendall-tau distance between two orders of the same routines, as a
    percentage of the maximum n(n-1)/2 swaps."""
    common = set(final_order) & set(submission_order)
    rank = {r: i for i, r in enumerate(x for x in submission_order if x in common)}
    seq = [rank[r] for r in final_order if r in common]
    n = len(seq)
    if n < 2:
        return 0.0
    return 100.0 * kernels.count_inversions(seq) / (n * (n - 1) / 2)


@dataclass
class MetricsReport:
    latency_p50: float
    latency_p90: float
    latency_p95: float
    latency_mean: float
    latency_norm_mean: float
    temporary_incongruence: float
    final_incongruent: bool | None
    parallelism_level: float
    order_mismatch_pct: float
    abort_rate: float
    rollback_overhead: float
    stretch_p50: float
    stretch_p95: float
    makespan: int
    committed: int = 0
    extra: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        row = asdict(self)
        row.pop("extra")
        return row


def compute_metrics(res: RunResult, w: Workload, final_incongruent: bool | None = None) -> MetricsReport:
    lat = latency(res.trace)
    norm = normalized_latency(res.trace, w)
    pct = percentiles(lat.values())
    st = percentiles(stretch_factor(res.trace, w).values(), (50, 95))
    if res.order is not None:
        final = [i[1] for i in res.order if i[0] == "R"]
        submitted = sorted(final)
        mismatch = order_mismatch(final, submitted)
    else:
        mismatch = 0.0
    total = len(w.routines)
    return MetricsReport(
        latency_p50=pct["p50"], latency_p90=pct["p90"], latency_p95=pct["p95"],
        latency_mean=float(np.mean(list(lat.values()))) if lat else 0.0,
        latency_norm_mean=float(np.mean(list(norm.values()))) if norm else 0.0,
        temporary_incongruence=temporary_incongruence(res.trace),
        final_incongruent=final_incongruent,
        parallelism_level=parallelism_level(res.trace),
        order_mismatch_pct=mismatch,
        abort_rate=len(res.aborted) / total if total else 0.0,
        rollback_overhead=rollback_overhead(res.trace, w),
        stretch_p50=st["p50"], stretch_p95=st["p95"],
        makespan=makespan(res.trace),
        committed=len(res.committed),
    )
