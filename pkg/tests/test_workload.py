import json

import numpy as np
import pytest

from routinevis.fabric import Fault
from routinevis.model import Kind, RoutineFormatError
from routinevis.workload import (
    FACTORY_CLASS_PROBS,
    MicrobenchParams,
    Workload,
    all_on_all_off,
    factory_layout,
    fig2_workload,
    generate_factory,
    generate_microbenchmark,
    load_scenario,
    zipf_weights,
)


def test_microbench_defaults_shape():
    longs = []
    for seed in range(20):
        w = generate_microbenchmark(MicrobenchParams(), 25, seed)
        assert len(w.routines) == 100 and len(w.devices) == 25
        assert w.concurrency == 4
        longs.append(sum(any(c.kind is Kind.LONG for c in r.commands) for r in w.routines))
    assert 8 <= np.mean(longs) <= 12  # 10% of 100


def test_microbench_mean_commands_near_C():
    w = generate_microbenchmark(MicrobenchParams(R=2000, C=3.0), 25, 1)
    assert abs(np.mean([len(r.commands) for r in w.routines]) - 3.0) < 0.1


def test_alpha_zero_is_uniform():
    assert np.allclose(zipf_weights(25, 0.0), 1 / 25)
    w = generate_microbenchmark(MicrobenchParams(R=3000, alpha=0.0), 10, 2)
    counts = np.bincount([c.device for r in w.routines for c in r.commands], minlength=10)
    freq = counts / counts.sum()
    assert np.all(np.abs(freq - 0.1) < 0.015)


def test_zipf_skew():
    w = zipf_weights(25, 1.0)
    assert w[0] > w[1] > w[24]


def test_seed_determinism_bytes():
    p = MicrobenchParams(F_pct=0.2)
    assert generate_microbenchmark(p, 25, 7).dumps() == generate_microbenchmark(p, 25, 7).dumps()
    assert generate_microbenchmark(p, 25, 7).dumps() != generate_microbenchmark(p, 25, 8).dumps()


def test_fault_count_and_timing_modes():
    p = MicrobenchParams(F_pct=0.2)
    prog = generate_microbenchmark(p, 25, 0)
    assert len(prog.faults) == 5 and all(f.at_submission is not None for f in prog.faults)
    absolute = generate_microbenchmark(p, 25, 0, fault_timing="absolute")
    assert len(absolute.faults) == 5 and all(f.at_submission is None for f in absolute.faults)
    with pytest.raises(ValueError):
        generate_microbenchmark(p, 25, 0, fault_timing="sometimes")


def test_must_percentage():
    w = generate_microbenchmark(MicrobenchParams(R=500, M_pct=0.0), 25, 0)
    assert not any(c.must for r in w.routines for c in r.commands)


@pytest.mark.parametrize("bad", [dict(L_pct=1.5), dict(F_pct=-0.1), dict(R=0), dict(alpha=-1), dict(C=0)])
def test_param_validation(bad):
    with pytest.raises(ValueError):
        MicrobenchParams(**bad)


def test_save_load_round_trip(tmp_path):
    w = generate_microbenchmark(MicrobenchParams(R=20, F_pct=0.2, M_pct=0.5), 10, 3)
    w.faults.append(Fault(9, 100, 900))
    w.save(tmp_path / "w.json")
    back = Workload.load(tmp_path / "w.json")
    assert back == w
    assert back.faults == w.faults and back.routines == w.routines


def test_load_rejects_bad_ids():
    doc = fig2_workload().to_doc()
    doc["routines"][0]["id"] = 5
    with pytest.raises(RoutineFormatError):
        Workload.from_doc(doc)
    with pytest.raises(RoutineFormatError):
        Workload.from_doc({"routines": []})


# ---------------------------------------------------------------- factory

def test_factory_layout():
    lay = factory_layout()
    assert len(lay["local"]) == 50 and len(lay["global"]) == 5
    # stage 0 only shares the boundary device it has with stage 1
    assert lay["neighbor"][0] == lay["neighbor"][1][:1]
    assert len(lay["neighbor"][0]) == 1 and len(lay["neighbor"][25]) == 2


def test_factory_class_frequencies():
    lay = factory_layout()
    counts = np.zeros(3)
    for seed in range(17):
        w = generate_factory(seed)
        for r in w.routines:
            s = int(r.name[len("stage"):])
            for c in r.commands:
                if c.device in lay["local"][s]:
                    counts[0] += 1
                elif c.device in lay["neighbor"][s]:
                    counts[1] += 1
                else:
                    assert c.device in lay["global"]
                    counts[2] += 1
    assert counts.sum() >= 10_000
    assert np.allclose(counts / counts.sum(), FACTORY_CLASS_PROBS, atol=0.02)


def test_factory_worker_back_to_back():
    w = generate_factory(0)
    assert len(w.routines) == 200
    stage0 = sorted((r for r in w.routines if r.name == "stage0"), key=lambda r: r.submit_time)
    for a, b in zip(stage0, stage0[1:]):
        assert b.submit_time == a.submit_time + a.ideal_duration


# -------------------------------------------------------------- scenarios

def test_morning_scenario_shape():
    w = load_scenario("morning", 0)
    assert len(w.routines) == 29 and len(w.devices) == 31
    assert max(r.submit_time for r in w.routines) <= 25 * 60_000


def test_party_scenario_one_long_routine():
    w = load_scenario("party", 0)
    assert len(w.routines) == 12
    last = max(r.submit_time for r in w.routines)
    spanning = [r for r in w.routines if r.submit_time == 0 and r.ideal_duration >= last]
    assert len(spanning) == 1


def _names(w):
    return {r.name: r.submit_time for r in w.routines}


@pytest.mark.parametrize("seed", range(20))
def test_scenario_constraints_hold(seed):
    from routinevis.workload import scenario_text

    doc = json.loads(scenario_text("morning"))
    times = _names(load_scenario(doc, seed))
    assert doc["before"]
    for a, b in doc["before"]:
        assert times[a] < times[b]


def _tiny(before, mode="fixed_once", prob=1.0):
    return {
        "devices": ["lamp", "fan"],
        "span_ms": 10_000,
        "mode": mode,
        "before": before,
        "routines": [
            {"name": "a", "commands": [{"device": "lamp", "target": "ON", "duration_ms": 10}]},
            {"name": "b", "probability": prob,
             "commands": [{"device": "fan", "target": "ON", "duration_ms": 10}]},
        ],
    }


def test_cyclic_constraints_rejected():
    with pytest.raises(RoutineFormatError):
        load_scenario(_tiny([["a", "b"], ["b", "a"]]))


def test_unknown_constraint_name_rejected():
    with pytest.raises(RoutineFormatError):
        load_scenario(_tiny([["a", "zzz"]]))


def test_probabilistic_mode_drops_templates():
    kept = [len(load_scenario(_tiny([["a", "b"]], "probabilistic", 0.5), s).routines) for s in range(40)]
    assert set(kept) == {1, 2}
    assert len(load_scenario(_tiny([], "probabilistic", 0.0), 0).routines) == 1


def test_unknown_scenario_name():
    with pytest.raises(RoutineFormatError):
        load_scenario("brunch")


def test_all_on_all_off():
    w = all_on_all_off(4, 10, seed=1)
    on, off = w.routines
    assert {c.target for c in on.commands} == {1} and {c.target for c in off.commands} == {0}
    assert off.submit_time == 10 and len(on.commands) == 4
    with pytest.raises(ValueError):
        all_on_all_off(0, 0)


def test_jit_starvation_workload_shape():
    from routinevis.workload import jit_starvation_workload

    w = jit_starvation_workload(rounds=3, duration=100)
    names = [r.name for r in w.routines]
    assert names.count("R_AB") == 1 and names.count("R_A") == 3 and names.count("R_B") == 3
    ab = w.routines[names.index("R_AB")]
    assert ab.devices == {0, 1} and ab.submit_time == 1
    # each R_A arrives only after the previous one has finished with A
    a_times = [r.submit_time for r in w.routines if r.name == "R_A"]
    assert all(b - a > 100 for a, b in zip(a_times, a_times[1:]))
    with pytest.raises(ValueError):
        jit_starvation_workload(0)
