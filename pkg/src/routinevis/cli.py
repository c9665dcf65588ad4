"""Command-line entry point: ``routinevis run|bench|verify|replay``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from .batch import BatchConfig, run_batch
from .engine import Model, order_from_doc, run
from .lineage import EngineConfig
from .metrics import compute_metrics
from .oracle import MAX_ORACLE_ROUTINES, final_incongruence_oracle, serial_execute
from .scheduler import SCHEDULERS
from .workload import FAULT_TIMINGS, MicrobenchParams, Workload, generate_factory, generate_microbenchmark, load_scenario


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _add_workload_flags(p: argparse.ArgumentParser) -> None:
    d = MicrobenchParams()
    g = p.add_argument_group("microbenchmark parameters")
    g.add_argument("--R", type=int, default=d.R, help="routines")
    g.add_argument("--rho", type=int, default=d.rho, help="routines kept in flight")
    g.add_argument("--C", type=float, default=d.C, help="mean commands per routine")
    g.add_argument("--alpha", type=float, default=d.alpha, help="Zipf coefficient")
    g.add_argument("--L-pct", type=float, default=d.L_pct, dest="L_pct",
                   help="probability that a routine holds one long command")
    g.add_argument("--L-mean", type=int, default=d.L_mean, dest="L_mean", help="ms")
    g.add_argument("--S-mean", type=int, default=d.S_mean, dest="S_mean", help="ms")
    g.add_argument("--M-pct", type=float, default=d.M_pct, dest="M_pct",
                   help="fraction of must (vs best-effort) commands")
    g.add_argument("--F-pct", type=float, default=d.F_pct, dest="F_pct",
                   help="fraction of devices that fail during the run")
    g.add_argument("--devices", type=int, default=25, help="device count")
    g.add_argument("--fault-timing", choices=FAULT_TIMINGS, default="progress",
                   help="anchor failures to routine submissions, or draw wall times")
    p.add_argument("--workload", default="micro",
                   help="micro, factory, or a shipped scenario name / scenario file")


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="EV", type=lambda s: Model.parse(s).value,
                   help="WV, GSV, SGSV, PSV or EV")
    p.add_argument("--scheduler", default="timeline", choices=sorted(SCHEDULERS))
    p.add_argument("--no-pre-lease", action="store_true", help="disable pre-leasing")
    p.add_argument("--no-post-lease", action="store_true", help="disable post-leasing")
    p.add_argument("--fixed-short-estimate", action="store_true",
                   help="estimate every short command as 100 ms in the lineage table")
    p.add_argument("--stretch-threshold", type=float, default=EngineConfig.stretch_threshold,
                   help="timeline scheduler defers arrivals that stretch a routine beyond this factor")
    p.add_argument("--ttl", type=int, default=EngineConfig.ttl_init,
                   help="JiT bypasses a waiting routine tolerates before it gets priority")


def _params(a: argparse.Namespace) -> MicrobenchParams:
    return MicrobenchParams(a.R, a.rho, a.C, a.alpha, a.L_pct, a.L_mean, a.S_mean, a.M_pct, a.F_pct)


def _engine_config(a: argparse.Namespace) -> EngineConfig:
    return EngineConfig(
        pre_lease=not a.no_pre_lease, post_lease=not a.no_post_lease,
        fixed_short_estimate=a.fixed_short_estimate,
        stretch_threshold=a.stretch_threshold, ttl_init=a.ttl,
    )


def _workload(a: argparse.Namespace, seed: int) -> Workload:
    if a.workload == "micro":
        return generate_microbenchmark(_params(a), a.devices, seed, a.fault_timing)
    if a.workload == "factory":
        return generate_factory(seed)
    return load_scenario(a.workload, seed)


def _execute(w: Workload, a: argparse.Namespace, out: Path, extra: dict[str, Any]) -> int:
    cfg = _engine_config(a)
    res = run(a.model, w, scheduler=a.scheduler, config=cfg)
    metrics = compute_metrics(res, w)
    out.mkdir(parents=True, exist_ok=True)
    w.save(out / "workload.json")
    res.write_trace(out / "trace.jsonl")
    report = {
        **res.report(),
        "metrics": metrics.as_row(),
        "engine_config": asdict(cfg),
        **extra,
    }
    (out / "report.json").write_text(_dump(report))
    m = metrics
    print(f"{a.model}/{res.scheduler or '-'}: committed {len(res.committed)}/{len(w.routines)}, "
          f"p50 latency {m.latency_p50 / 1000:.1f}s, parallelism {m.parallelism_level:.2f}, "
          f"temporary incongruence {m.temporary_incongruence:.3f} -> {out}")
    return 0


def cmd_run(a: argparse.Namespace) -> int:
    w = _workload(a, a.seed)
    return _execute(w, a, Path(a.out), {"seed": a.seed, "workload_kind": a.workload})


def cmd_replay(a: argparse.Namespace) -> int:
    w = Workload.load(a.workload_file)
    return _execute(w, a, Path(a.out), {"replayed_from": str(a.workload_file)})


def cmd_bench(a: argparse.Namespace) -> int:
    cfg = BatchConfig(
        model=a.model, scheduler=a.scheduler,
        workload=a.workload if a.workload in ("micro", "factory") else "scenario",
        params=_params(a), device_count=a.devices, fault_timing=a.fault_timing,
        scenario=a.workload, engine=_engine_config(a),
    )
    res = run_batch(cfg, a.trials, a.seed, a.workers)
    text = res.to_csv()
    if a.out == "-":
        sys.stdout.write(text)
    else:
        Path(a.out).parent.mkdir(parents=True, exist_ok=True)
        Path(a.out).write_text(text)
        s = res.summary
        print(f"{a.trials} trials -> {a.out}; mean latency {s['latency_mean_mean'] / 1000:.1f}s, "
              f"abort rate {s['abort_rate_mean']:.3f}")
    return 0


def cmd_verify(a: argparse.Namespace) -> int:
    d = Path(a.dir)
    w = Workload.load(d / "workload.json")
    report = json.loads((d / "report.json").read_text())
    trace_text = (d / "trace.jsonl").read_text()
    cfg = EngineConfig(**report["engine_config"])
    res = run(report["model"], w, scheduler=report["scheduler"] or "timeline", config=cfg,
              check_invariants=True)
    problems: list[str] = []
    if res.trace_jsonl() != trace_text:
        problems.append("re-execution trace differs from the recorded trace")
    problems += [f"invariant: {v.message}" for v in res.violations]
    end = {int(k): v for k, v in report["end_states"].items()}
    if report["serialization_order"] is not None:
        order = order_from_doc(report["serialization_order"])
        if serial_execute(w, order) != end:
            problems.append("end states differ from serial execution of the emitted order")
        events = [i for i in order if i[0] != "R"]
        committed = report["committed"]
        if len(committed) <= MAX_ORACLE_ROUTINES:
            if final_incongruence_oracle(w, end, committed, events):
                problems.append("oracle: end states match no serial order")
        else:
            print(f"oracle skipped: {len(committed)} committed routines exceed the bound of "
                  f"{MAX_ORACLE_ROUTINES}")
    for p in problems:
        print("FAIL", p)
    if not problems:
        print(f"OK {d}: trace reproduced, invariants hold, emitted order consistent")
    return 1 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="routinevis", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one trial; writes workload, trace and report")
    _add_workload_flags(p)
    _add_engine_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out/run")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="many trials; writes one CSV row per trial")
    _add_workload_flags(p)
    _add_engine_flags(p)
    p.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed ^ i")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="out/bench.csv", help="CSV path, or - for stdout")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="re-check a run directory (exit 1 on any violation)")
    p.add_argument("dir")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("replay", help="execute a saved workload file")
    p.add_argument("workload_file")
    _add_engine_flags(p)
    p.add_argument("--out", default="out/replay")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
