import pytest

from routinevis.engine import TraceEvent, run
from routinevis.metrics import (
    compute_metrics,
    latency,
    makespan,
    normalized_latency,
    order_mismatch,
    parallelism_level,
    percentiles,
    rollback_overhead,
    stretch_factor,
    temporary_incongruence,
    temporary_incongruence_set,
)
from routinevis.model import Command, Routine
from routinevis.workload import MicrobenchParams, Workload, fig2_workload, generate_microbenchmark

U = 1000


def single(d=300):
    return Workload({0: "lamp"}, [Routine(0, (Command(0, 1, d),))])


def test_latency_uncontended_equals_duration():
    res = run("EV", single(300))
    assert latency(res.trace) == {0: 300}
    assert normalized_latency(res.trace, single(300)) == {0: 1.0}


def test_gsv_two_conflicting_unit_routines():
    w = Workload({0: "lamp"}, [Routine(0, (Command(0, 1, U),)), Routine(1, (Command(0, 0, U),))])
    assert latency(run("GSV", w).trace) == {0: U, 1: 2 * U}


def test_fig2_gsv_max_latency():
    assert max(latency(run("GSV", fig2_workload(U)).trace).values()) == 8 * U


def test_percentiles_empty_and_values():
    assert percentiles([]) == {"p50": 0.0, "p90": 0.0, "p95": 0.0}
    assert percentiles(range(101))["p90"] == pytest.approx(90.0)


def test_makespan_from_trace():
    tr = [TraceEvent(5, "RoutineSubmit", 0), TraceEvent(40, "Commit", 0)]
    assert makespan(tr) == 35 and makespan([]) == 0


@pytest.mark.parametrize("model", ["GSV", "PSV", "SGSV"])
def test_strict_models_have_no_temporary_incongruence(model):
    assert temporary_incongruence(run(model, fig2_workload()).trace) == 0.0
    w = generate_microbenchmark(MicrobenchParams(R=30), 8, 1)
    assert temporary_incongruence(run(model, w).trace) == 0.0


def test_temporary_incongruence_single_and_ev():
    assert temporary_incongruence(run("EV", single()).trace) == 0.0
    assert temporary_incongruence(run("EV", fig2_workload()).trace) > 0.0


def test_temporary_incongruence_worst_case_same_instant():
    tr = [
        TraceEvent(0, "RoutineSubmit", 0), TraceEvent(0, "RoutineSubmit", 1),
        TraceEvent(10, "CmdEnd", 0, 0, 1, 0, True),
        TraceEvent(20, "CmdEnd", 1, 0, 2, 0, True),
        TraceEvent(20, "Commit", 0), TraceEvent(20, "Commit", 1),
    ]
    assert temporary_incongruence_set(tr) == {0}
    late = tr[:3] + [TraceEvent(20, "Commit", 0), TraceEvent(25, "CmdEnd", 1, 0, 2, 0, True),
                     TraceEvent(25, "Commit", 1)]
    assert temporary_incongruence_set(late) == set()


def test_parallelism():
    assert parallelism_level(run("GSV", fig2_workload()).trace) <= 1.0
    assert parallelism_level(run("EV", fig2_workload()).trace) > 1.0
    assert parallelism_level(run("EV", single()).trace) == pytest.approx(0.5)


def test_order_mismatch_examples():
    assert order_mismatch([1, 2, 3, 4], [1, 2, 3, 4]) == 0.0
    assert order_mismatch([4, 3, 2, 1], [1, 2, 3, 4]) == 100.0
    assert order_mismatch([2, 1, 3, 4], [1, 2, 3, 4]) == pytest.approx(100 / 6)
    assert order_mismatch([7], [7]) == 0.0


def test_rollback_overhead_one_of_four():
    cmds = tuple(Command(d, 1, 10) for d in range(4))
    w = Workload({d: f"d{d}" for d in range(4)}, [Routine(0, cmds)])
    tr = [
        TraceEvent(0, "RoutineSubmit", 0),
        TraceEvent(10, "CmdEnd", 0, 0, 1, 0, True),
        TraceEvent(15, "Abort", 0),
        TraceEvent(15, "RollbackCmd", 0, 0, 0),
    ]
    assert rollback_overhead(tr, w) == 0.25
    assert rollback_overhead(tr[:2], w) == 0.0  # no aborts


def test_stretch_factor():
    assert stretch_factor(run("EV", single()).trace, single()) == {0: 1.0}
    w = Workload({0: "a", 1: "b"}, [Routine(0, (Command(0, 1, U), Command(1, 1, U)))])
    tr = [
        TraceEvent(0, "RoutineSubmit", 0), TraceEvent(0, "CmdStart", 0, 0),
        TraceEvent(U, "CmdEnd", 0, 0, 1, 0, True), TraceEvent(2 * U, "CmdStart", 0, 1),
        TraceEvent(3 * U, "CmdEnd", 0, 1, 1, 1, True), TraceEvent(3 * U, "Commit", 0),
    ]
    assert stretch_factor(tr, w) == {0: 1.5}


def test_compute_metrics_row():
    w = generate_microbenchmark(MicrobenchParams(R=20, F_pct=0.2), 10, 0)
    res = run("EV", w)
    m = compute_metrics(res, w)
    row = m.as_row()
    assert "extra" not in row
    assert m.committed == len(res.committed)
    assert m.abort_rate == pytest.approx(len(res.aborted) / 20)
    assert 0.0 <= m.order_mismatch_pct <= 100.0
    assert m.latency_norm_mean >= 1.0


def test_compute_metrics_wv_has_no_order():
    w = fig2_workload()
    m = compute_metrics(run("WV", w), w)
    assert m.order_mismatch_pct == 0.0
