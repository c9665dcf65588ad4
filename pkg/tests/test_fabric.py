import pytest

from routinevis.engine import run
from routinevis.fabric import DetectorConfig, Fabric, FailureDetector, Fault, Health
from routinevis.model import Command, FailureEvent, RestartEvent, Routine
from routinevis.workload import Workload


def fabric(faults=(), **det):
    return Fabric({0: 0, 1: 0}, list(faults), DetectorConfig(**det) if det else None)


def test_command_on_healthy_device_completes():
    out = fabric().execute_command(0, 250, 1000)
    assert out.ok and out.time == 1250


def test_command_on_failed_device_times_out():
    f = fabric([Fault(0, 100)])
    out = f.execute_command(0, 250, 500)
    assert not out.ok and out.time == 600  # one ack timeout


def test_failure_mid_command_reported_at_failure():
    f = fabric([Fault(0, 300, 900)])
    out = f.execute_command(0, 250, 100)
    assert not out.ok and out.time == 300


def test_failure_exactly_at_completion_counts():
    f = fabric([Fault(0, 350)])
    assert not f.execute_command(0, 250, 100).ok


def test_fail_recover_health_window():
    dev = fabric([Fault(0, 100, 200)]).devices[0]
    assert dev.health(99) is Health.UP
    assert dev.health(100) is Health.FAILED
    assert dev.health(199) is Health.FAILED
    assert dev.health(200) is Health.UP


def test_fail_stop_never_recovers():
    dev = fabric([Fault(0, 100)]).devices[0]
    assert dev.health(10**9) is Health.FAILED


def test_complete_updates_state_and_ack():
    f = fabric()
    f.complete(1, 7, 40)
    assert f.devices[1].state == 7 and f.devices[1].last_ack == 40


def test_fault_validation():
    with pytest.raises(ValueError):
        Fault(0, 100, 100)
    with pytest.raises(ValueError):
        fabric([Fault(0, 100, 500), Fault(0, 400, 800)])
    with pytest.raises(ValueError):
        fabric([Fault(0, 100), Fault(0, 400, 800)])  # fail-stop followed by another


def test_add_fault_checks_overlap():
    f = fabric([Fault(0, 100, 200)])
    f.add_fault(Fault(0, 300, 400))
    assert [x.fail_at for x in f.devices[0].faults] == [100, 300]
    with pytest.raises(ValueError):
        f.add_fault(Fault(0, 350))


def test_anchored_faults_are_not_installed_up_front():
    f = fabric([Fault(0, 10, None, at_submission=3)])
    assert f.devices[0].faults == []


def test_detector_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(ping_interval=100, ack_timeout=100)
    with pytest.raises(ValueError):
        DetectorConfig(ack_timeout=0)


def test_detection_times_follow_ping_grid():
    f = fabric([Fault(0, 1500, 3200)])
    assert f.detection_times(0) == [(2100, "fail"), (4000, "restart")]


def test_implicit_ack_delays_first_miss():
    f = fabric([Fault(0, 1500)])
    f.complete(0, 1, 1400)
    # the completion at 1400 covers the ping at 2000, so the first miss is at 3000
    assert f.detection_times(0) == [(3100, "fail")]
    g = fabric([Fault(0, 1500)], implicit_ack=False)
    g.devices[0].last_ack = 1400
    assert g.detection_times(0) == [(2100, "fail")]


def test_detector_step_reports_fail_then_restart():
    f = fabric([Fault(1, 1500, 2500)])
    det = FailureDetector(f)
    assert det.detector_step(1000) == []
    assert det.detector_step(2000) == [FailureEvent(2100, 1)]
    assert det.detector_step(2000) == []  # reported once
    assert det.detector_step(3000) == [RestartEvent(3000, 1)]


def test_detector_step_skips_recently_heard():
    f = fabric([Fault(0, 1500)])
    det = FailureDetector(f)
    det.heard(0, 1900)
    assert det.detector_step(2000) == []
    assert det.detector_step(3000) == [FailureEvent(3100, 0)]


def test_short_outage_between_pings_goes_unnoticed():
    r = Routine(0, (Command(0, 1, 5000),))
    w = Workload({0: "lamp", 1: "fan"}, [r], faults=[Fault(1, 1200, 1800)])
    res = run("EV", w)
    assert not any(e.kind == "DeviceFail" for e in res.trace)
    assert res.order == [("R", 0)]


def test_fail_and_restart_appear_in_trace_and_order():
    r = Routine(0, (Command(0, 1, 5000),))
    w = Workload({0: "lamp", 1: "fan"}, [r], faults=[Fault(1, 1200, 2500)])
    res = run("EV", w)
    kinds = [(e.kind, e.time) for e in res.trace if e.device == 1]
    assert kinds == [("DeviceFail", 2100), ("DeviceRestart", 3000)]
    # the routine never touches the fan, so the events may sit anywhere;
    # they keep their own relative order
    kinds = [i[0] for i in res.order]
    assert sorted(kinds) == ["F", "R", "S"] and kinds.index("F") < kinds.index("S")


def test_anchored_fault_fires_relative_to_submission():
    rs = [Routine(0, (Command(0, 1, 100),), 0), Routine(1, (Command(1, 1, 100),), 10_000)]
    w = Workload({0: "lamp", 1: "fan"}, rs, faults=[Fault(1, 0, None, at_submission=1)])
    res = run("EV", w)
    fail = [e for e in res.trace if e.kind == "DeviceFail"]
    assert fail and fail[0].time >= 10_000
    assert res.committed == [0] and res.aborted == [1]
