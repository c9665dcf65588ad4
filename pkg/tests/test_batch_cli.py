import json

import pytest

from routinevis.batch import CSV_COLUMNS, BatchConfig, run_batch, run_trial, trial_seed
from routinevis.cli import main
from routinevis.lineage import EngineConfig
from routinevis.workload import MicrobenchParams

SMALL = MicrobenchParams(R=12, F_pct=0.1)


def test_single_trial_equals_run():
    cfg = BatchConfig(params=SMALL, device_count=10)
    res = run_batch(cfg, 1, base_seed=5)
    direct = run_trial(cfg, trial_seed(5, 0)).as_row()
    assert res.rows[0] == {"trial": 0, "seed": 5, **direct}


def test_csv_header_and_determinism():
    cfg = BatchConfig(params=SMALL, device_count=10)
    a = run_batch(cfg, 4, base_seed=3).to_csv()
    b = run_batch(cfg, 4, base_seed=3).to_csv()
    assert a == b
    assert a.splitlines()[0].split(",") == CSV_COLUMNS
    assert len(a.splitlines()) == 5


def test_csv_identical_across_worker_counts():
    cfg = BatchConfig(params=SMALL, device_count=10, scheduler="jit")
    assert run_batch(cfg, 6, 1, workers=1).to_csv() == run_batch(cfg, 6, 1, workers=3).to_csv()


def test_batch_summary_and_validation():
    res = run_batch(BatchConfig(params=SMALL, device_count=10), 3)
    assert res.summary["trials"] == 3.0
    assert "latency_mean_mean" in res.summary and "latency_p50_p90" in res.summary
    with pytest.raises(ValueError):
        run_batch(BatchConfig(), 0)
    with pytest.raises(ValueError):
        BatchConfig(workload="office")


def test_batch_other_workloads():
    assert run_batch(BatchConfig(workload="scenario", scenario="party"), 1).rows[0]["committed"] == 12
    cfg = BatchConfig(model="GSV", engine=EngineConfig(post_lease=False), params=SMALL, device_count=10)
    assert run_batch(cfg, 1).rows[0]["temporary_incongruence"] == 0.0


RUN_ARGS = ["--R", "15", "--devices", "8", "--F-pct", "0.25", "--seed", "4"]


def test_cli_run_is_byte_identical(tmp_path, capsys):
    for d in ("a", "b"):
        assert main(["run", *RUN_ARGS, "--out", str(tmp_path / d)]) == 0
    for name in ("workload.json", "trace.jsonl", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report["seed"] == 4 and report["model"] == "EV"


def test_cli_verify_ok_and_tampered(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", *RUN_ARGS, "--model", "psv", "--out", str(out)]) == 0
    assert main(["verify", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    dev = next(iter(report["end_states"]))
    report["end_states"][dev] = 12345
    (out / "report.json").write_text(json.dumps(report))
    assert main(["verify", str(out)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_cli_verify_detects_trace_edit(tmp_path, capsys):
    out = tmp_path / "run"
    main(["run", *RUN_ARGS, "--out", str(out)])
    lines = (out / "trace.jsonl").read_text().splitlines()
    (out / "trace.jsonl").write_text("\n".join(lines[:-1]) + "\n")
    assert main(["verify", str(out)]) == 1


def test_cli_bench_workers_identical(tmp_path, capsys):
    args = ["bench", "--R", "10", "--devices", "6", "--trials", "4", "--seed", "2"]
    assert main([*args, "--out", str(tmp_path / "one.csv")]) == 0
    assert main([*args, "--workers", "2", "--out", str(tmp_path / "two.csv")]) == 0
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()


def test_cli_replay(tmp_path, capsys):
    main(["run", *RUN_ARGS, "--out", str(tmp_path / "a")])
    assert main(["replay", str(tmp_path / "a" / "workload.json"), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "trace.jsonl").read_bytes() == (tmp_path / "b" / "trace.jsonl").read_bytes()


def test_cli_errors(tmp_path, capsys):
    assert main(["run", "--workload", "nowhere", "--out", str(tmp_path / "x")]) == 2
    assert main(["verify", str(tmp_path / "missing")]) == 2
    with pytest.raises(SystemExit):
        main(["run", "--model", "XV"])
    with pytest.raises(SystemExit):
        main(["run", "--scheduler", "lottery"])
