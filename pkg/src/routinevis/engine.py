"""Discrete-event execution of a workload under one visibility model.

The engine owns the event loop, device beliefs (what the failure detector
has reported), atomicity handling and the serialization order that the
run is equivalent to.  Lock planning for eventual visibility is delegated
to :mod:`routinevis.lineage` and :mod:`routinevis.scheduler`.
"""

from __future__ import annotations

import enum
import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .fabric import DetectorConfig, Fabric, Fault, Health
from .lineage import EngineConfig, InvariantViolation, LineageTable, Violation
from .model import (
    Command,
    DeviceState,
    FailureEvent,
    RestartEvent,
    Routine,
    SimClock,
    SimulationEnd,
)
from .scheduler import make_scheduler
from .workload import Workload


class Model(str, enum.Enum):
    WV = "WV"
    GSV = "GSV"
    SGSV = "SGSV"
    PSV = "PSV"
    EV = "EV"

    @classmethod
    def parse(cls, text: str | "Model") -> "Model":
        if isinstance(text, Model):
            return text
        key = text.upper().replace("-", "").replace("_", "")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown model {text!r}; choose from {[m.value for m in cls]}") from None


class Decision(str, enum.Enum):
    SERIALIZE_BEFORE = "serialize_before"
    SERIALIZE_AFTER = "serialize_after"
    ARBITRARY = "arbitrary"
    ABORT = "abort"


class Outcome(str, enum.Enum):
    CONTINUE = "continue_with_feedback"
    ABORT = "abort"


class SerializationError(RuntimeError):
    pass


TRACE_KINDS = (
    "RoutineSubmit", "RoutineStart", "CmdStart", "CmdEnd", "LeaseGrant", "LeaseRevoke",
    "Abort", "Commit", "DeviceFail", "DeviceRestart", "RollbackCmd",
)


@dataclass(frozen=True)
class TraceEvent:
    time: int
    kind: str
    routine: int | None = None
    device: int | None = None
    value: DeviceState | None = None
    index: int | None = None
    ok: bool | None = None
    info: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TraceEvent":
        return cls(**d)


# --------------------------------------------------------------------------
# pure decision rules


@dataclass(frozen=True)
class ExecutionRecord:
    """What :func:`classify_failure` needs to know about one routine run."""

    start: int
    finish: int
    # device -> (first command start, last command end) on that device
    touches: dict[int, tuple[int, int]]


def classify_failure(model: Model | str, r: ExecutionRecord, ev: FailureEvent,
                     restart: RestartEvent | None = None) -> Decision:
    """Decision for one routine against one failure (and its restart, if
    detected).  All times are detection times."""
    model = Model.parse(model)
    f = ev.detect_time
    rs = restart.detect_time if restart is not None else None
    during = r.start <= f <= r.finish or (rs is not None and r.start <= rs <= r.finish)
    touch = r.touches.get(ev.device)
    if model is Model.WV:
        return Decision.ARBITRARY
    if model is Model.SGSV and during:
        return Decision.ABORT
    if touch is None:
        if model is Model.SGSV or model is Model.GSV or not during:
            if f > r.finish:
                return Decision.SERIALIZE_AFTER
            if rs is not None and rs < r.start:
                return Decision.SERIALIZE_BEFORE
        return Decision.ARBITRARY
    first, last = touch
    down_at_first = f <= first and (rs is None or rs > first)
    if model is Model.GSV:
        if during or down_at_first:
            return Decision.ABORT
        return Decision.SERIALIZE_AFTER if f > r.finish else Decision.SERIALIZE_BEFORE
    if model is Model.SGSV:
        if down_at_first:
            return Decision.ABORT
        return Decision.SERIALIZE_AFTER if f > r.finish else Decision.SERIALIZE_BEFORE
    # EV and PSV
    if rs is not None and rs <= first:
        return Decision.SERIALIZE_BEFORE
    if f >= last:
        if model is Model.PSV and f <= r.finish and (rs is None or rs > r.finish):
            return Decision.ABORT
        return Decision.SERIALIZE_AFTER
    return Decision.ABORT


def apply_must_best_effort(cmd: Command, wrote_device_before: bool = False) -> Outcome:
    """A failed command aborts its routine if it is a must command, or if a
    best-effort failure would leave the device with a partial effect of
    this routine (it already wrote the device earlier)."""
    if cmd.must or wrote_device_before:
        return Outcome.ABORT
    return Outcome.CONTINUE


# --------------------------------------------------------------------------
# run state


@dataclass
class RunState:
    routine: Routine
    submit: int | None = None
    status: str = "pending"  # pending, waiting, active, committed, aborted
    pc: int = 0
    in_flight: int | None = None
    token: int = 0
    started: int | None = None
    first_cmd: int | None = None
    finish: int | None = None
    executed_ok: int = 0
    pre_values: dict[int, DeviceState] = field(default_factory=dict)
    wrote: set[int] = field(default_factory=set)
    need_recovery: set[int] = field(default_factory=set)
    feedback: list[int] = field(default_factory=list)

    @property
    def id(self) -> int:
        return self.routine.id

    def done_on(self, device: int) -> bool:
        idx = [i for i, c in enumerate(self.routine.commands) if c.device == device]
        return self.pc > idx[-1]

    def started_on(self, device: int) -> bool:
        idx = [i for i, c in enumerate(self.routine.commands) if c.device == device]
        return self.pc > idx[0] or self.in_flight == idx[0]


FAST_FAIL_MS = 1

OrderItem = tuple  # ("R", rid) | ("F", device, time, seq) | ("S", device, time, seq)


@dataclass
class RunResult:
    model: Model
    scheduler: str | None
    trace: list[TraceEvent]
    end_states: dict[int, DeviceState | None]
    order: list[OrderItem] | None
    committed: list[int]
    aborted: list[int]
    violations: list[Violation] = field(default_factory=list)
    decisions: list[tuple[int, int, int, str]] = field(default_factory=list)
    bypasses: dict[int, int] = field(default_factory=dict)

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in self.trace)

    def write_trace(self, path: str | Path) -> None:
        Path(path).write_text(self.trace_jsonl())

    def report(self) -> dict[str, Any]:
        return {
            "model": self.model.value,
            "scheduler": self.scheduler,
            "end_states": {str(d): s for d, s in sorted(self.end_states.items())},
            "serialization_order": None if self.order is None else [order_item_doc(i) for i in self.order],
            "committed": sorted(self.committed),
            "aborted": sorted(self.aborted),
            "violations": [v.message for v in self.violations],
        }


def order_item_doc(item: OrderItem) -> dict[str, int]:
    if item[0] == "R":
        return {"routine": item[1]}
    kind = "fail" if item[0] == "F" else "restart"
    return {kind: item[1], "time": item[2]}


def order_from_doc(docs: Iterable[dict[str, int]]) -> list[OrderItem]:
    """Inverse of :func:`order_item_doc` (event sequence numbers are
    renumbered by position)."""
    out: list[OrderItem] = []
    for i, d in enumerate(docs):
        if "routine" in d:
            out.append(("R", int(d["routine"])))
        elif "fail" in d:
            out.append(("F", int(d["fail"]), int(d["time"]), i))
        else:
            out.append(("S", int(d["restart"]), int(d["time"]), i))
    return out


def load_trace(path: str | Path) -> list[TraceEvent]:
    lines = Path(path).read_text().splitlines()
    return [TraceEvent.from_dict(json.loads(l)) for l in lines if l.strip()]


# --------------------------------------------------------------------------
# engine


class Engine:
    def __init__(
        self,
        model: Model | str,
        workload: Workload,
        *,
        scheduler: str = "timeline",
        config: EngineConfig | None = None,
        detector: DetectorConfig | None = None,
        check_invariants: bool = False,
        strict: bool = False,
    ) -> None:
        self.model = Model.parse(model)
        self.w = workload
        self.config = config or EngineConfig()
        self.fabric = Fabric(dict(workload.initial), workload.faults, detector)
        self.clock = SimClock()
        self.trace: list[TraceEvent] = []
        self.runs = [RunState(r) for r in workload.routines]
        self.believed_down: set[int] = set()
        self.pending_rollback: dict[int, tuple[int, DeviceState]] = {}
        self.chains: dict[int, list[OrderItem]] = {d: [] for d in workload.devices}
        self.events: list[OrderItem] = []
        self.decisions: list[tuple[int, int, int, str]] = []
        self.violations: list[Violation] = []
        self.check = check_invariants
        self.strict = strict
        self.queue: list[int] = []  # GSV/PSV admission queue
        self.finished = 0
        self.to_inject: list[int] = []
        self.table: LineageTable | None = None
        self.scheduler = None
        self._lease_seen = 0
        self._revoke_at: int | None = None
        self._probes: set[int] = set()
        if self.model is Model.EV:
            self.table = LineageTable(dict(workload.initial), self.config)
            self.scheduler = make_scheduler(scheduler, self.table)
        self.scheduler_name = scheduler if self.model is Model.EV else None

    # ------------------------------------------------------------- helpers
    def emit(self, kind: str, **kw: Any) -> None:
        self.trace.append(TraceEvent(self.clock.now, kind, **kw))

    def active(self) -> list[RunState]:
        return [r for r in self.runs if r.status == "active"]

    # --------------------------------------------------------------- setup
    def _bootstrap(self) -> None:
        order = sorted(self.runs, key=lambda r: r.id)
        rho = self.w.concurrency
        if rho:
            first, rest = order[:rho], order[rho:]
            self.to_inject = [r.id for r in rest]
        else:
            first = order
        for run in first:
            self.clock.schedule(run.routine.submit_time, ("submit", run.id))
        self._anchored: dict[int, list[Fault]] = {}
        for f in self.w.faults:
            if f.at_submission is None:
                self._schedule_fault(f)
            else:
                self._anchored.setdefault(f.at_submission, []).append(f)

    def _schedule_fault(self, f: Fault) -> None:
        self.clock.schedule(f.fail_at, ("phys_fail", f.device, f.fail_at, f.restart_at))
        if f.restart_at is not None:
            self.clock.schedule(f.restart_at, ("phys_restart", f.device))

    def _inject_next(self) -> None:
        if self.to_inject:
            rid = self.to_inject.pop(0)
            t = max(self.clock.now, self.runs[rid].routine.submit_time)
            self.clock.schedule(t, ("submit", rid))

    # ---------------------------------------------------------------- loop
    def run(self) -> RunResult:
        self._bootstrap()
        total = len(self.runs)
        while self.finished < total or self._probes:
            try:
                _, ev = self.clock.advance_to_next_event()
            except SimulationEnd:
                raise RuntimeError("simulation stalled with unfinished routines") from None
            self._handle(ev)
            self._after_event()
        return self._result()

    def _handle(self, ev: tuple) -> None:
        kind = ev[0]
        if kind == "submit":
            self._on_submit(self.runs[ev[1]])
        elif kind == "cmd_end":
            self._on_cmd_end(*ev[1:])
        elif kind == "phys_fail":
            self._on_phys_fail(*ev[1:])
        elif kind == "phys_restart":
            self.clock.schedule(self.fabric._next_ping(self.clock.now), ("detect_restart", ev[1]))
        elif kind == "detect_fail":
            self._on_detect_fail(ev[1])
        elif kind == "detect_restart":
            self._on_detect_restart(ev[1])
        elif kind == "revoke":
            self._on_revoke()
        elif kind == "rollback_probe":
            self._on_rollback_probe(ev[1])

    def _after_event(self) -> None:
        now = self.clock.now
        self._dispatch_all()
        if self.table is not None:
            self.table.tick(now)
            self._emit_new_leases()
            nxt = self.table.next_revocation()
            if nxt is not None and nxt != self._revoke_at:
                self._revoke_at = nxt
                self.clock.schedule(max(now, nxt), ("revoke",))
            if self.check:
                self.table.retime(now)
                found = self.table.check_invariants()
                if found:
                    if self.strict:
                        raise InvariantViolation(found[0].message)
                    self.violations.extend(found)

    def _emit_new_leases(self) -> None:
        leases = self.table.lease_log
        for lease in leases[self._lease_seen:]:
            self.emit("LeaseGrant", routine=lease.dst, device=lease.device,
                      info=f"{lease.kind.value} from {lease.src}")
        self._lease_seen = len(leases)

    # ----------------------------------------------------------- admission
    def _on_submit(self, run: RunState) -> None:
        run.submit = now = self.clock.now
        run.status = "waiting"
        self.emit("RoutineSubmit", routine=run.id)
        for f in self._anchored.pop(run.id, ()):
            fixed = Fault(f.device, now + f.fail_at,
                          None if f.restart_at is None else now + f.restart_at)
            self.fabric.add_fault(fixed)
            self._schedule_fault(fixed)
        if self.model is Model.WV:
            self._start(run)
        elif self.model is Model.EV:
            for rid in self.scheduler.on_arrival(run.routine, self.clock.now):
                self._start(self.runs[rid])
        else:
            self.queue.append(run.id)
            self._admit()

    def _start(self, run: RunState) -> None:
        run.status = "active"
        run.started = self.clock.now
        self.emit("RoutineStart", routine=run.id)

    def _admit(self) -> None:
        if self.model in (Model.GSV, Model.SGSV):
            if not self.active() and self.queue:
                self._start(self.runs[self.queue.pop(0)])
            return
        busy: set[int] = set()
        for r in self.active():
            busy |= r.routine.devices
        for rid in list(self.queue):
            devs = self.runs[rid].routine.devices
            if not devs & busy:
                self.queue.remove(rid)
                self._start(self.runs[rid])
            # earlier waiters keep their claim over later conflicting ones
            busy |= devs

    def _on_placed(self, rids: Iterable[int]) -> None:
        for rid in rids:
            self._start(self.runs[rid])

    # ------------------------------------------------------------ dispatch
    def _dispatch_all(self) -> None:
        # fast-failed commands finish synchronously, so sweep to a fixpoint
        progress = True
        while progress:
            progress = False
            for run in self.runs:
                if run.status == "active" and run.in_flight is None and run.pc < len(run.routine.commands):
                    progress |= self._dispatch(run)

    def _dispatch(self, run: RunState) -> bool:
        idx = run.pc
        cmd = run.routine.commands[idx]
        now = self.clock.now
        if self.table is not None and not self.table.may_access(run.id, cmd.device):
            return False
        run.in_flight = idx
        run.token += 1
        if run.first_cmd is None:
            run.first_cmd = now
        if cmd.device not in run.pre_values:
            run.pre_values[cmd.device] = self.fabric.devices[cmd.device].state
        self.emit("CmdStart", routine=run.id, device=cmd.device, value=cmd.target, index=idx)
        if self.table is not None:
            self.table.on_command_start(run.id, idx, now)
        if cmd.device in self.believed_down:
            # known-down device: rejected locally after one tick.  The lost
            # write is ordered now, before any restart detected meanwhile.
            self.chains[cmd.device].append(("L", run.id))
            self.clock.schedule(now + FAST_FAIL_MS, ("cmd_end", run.id, idx, run.token, False, True))
            return False
        out = self.fabric.execute_command(cmd.device, cmd.duration, now)
        self.clock.schedule(out.time, ("cmd_end", run.id, idx, run.token, out.ok))
        return False

    def _on_cmd_end(self, rid: int, idx: int, token: int, ok: bool, local: bool = False) -> None:
        run = self.runs[rid]
        if run.status != "active" or run.token != token or run.in_flight != idx:
            return  # cancelled by an abort
        cmd = run.routine.commands[idx]
        now = self.clock.now
        if ok:
            self.fabric.complete(cmd.device, cmd.target, now)
            run.executed_ok += 1
            self.chains[cmd.device].append(("W", rid))
            self.emit("CmdEnd", routine=rid, device=cmd.device, value=cmd.target, index=idx, ok=True)
        else:
            if not local and cmd.device not in self.believed_down:
                # a missing ack is itself a failure detection
                self._on_detect_fail(cmd.device, culprit=rid)
                if self.fabric.devices[cmd.device].health(now) is Health.UP:
                    # recovered while the ack was outstanding; next ping notices
                    self.clock.schedule(self.fabric._next_ping(now), ("detect_restart", cmd.device))
            if run.status != "active":
                return
            if not local:
                self.chains[cmd.device].append(("L", rid))
            self.emit("CmdEnd", routine=rid, device=cmd.device, value=cmd.target, index=idx, ok=False,
                      info="feedback" if not cmd.must else None)
        run.in_flight = None
        run.pc = idx + 1
        if self.table is not None:
            released = self.table.on_command_end(rid, idx, now, ok)
            if released is not None:
                self._on_placed(self.scheduler.on_release(released, now))
        if not ok:
            if self.model is Model.WV:
                run.feedback.append(idx)
            else:
                wrote_before = cmd.device in run.wrote
                if apply_must_best_effort(cmd, wrote_before) is Outcome.ABORT:
                    self._abort(run, "command failed")
                    return
                run.feedback.append(idx)
        else:
            run.wrote.add(cmd.device)
        if run.pc == len(run.routine.commands):
            self._finish(run)

    # ------------------------------------------------------ commit / abort
    def _finish(self, run: RunState) -> None:
        if self.model is Model.PSV:
            still_down = run.need_recovery & self.believed_down
            if still_down:
                self._abort(run, f"device {min(still_down)} not recovered by finish")
                return
        run.status = "committed"
        run.finish = self.clock.now
        self.emit("Commit", routine=run.id)
        if self.table is not None:
            self.table.commit_with_compaction(run.id)
            self._on_placed(self.scheduler.on_finish(run.routine.devices, self.clock.now))
        self._wrap_up()

    def _abort(self, run: RunState, reason: str) -> None:
        now = self.clock.now
        run.status = "aborted"
        run.finish = now
        run.token += 1  # cancel any in-flight command
        run.in_flight = None
        if self.table is not None:
            fixes = self.table.abort_rollback(run.id)
        else:
            fixes = [
                (d, run.pre_values[d]) for d in sorted(run.wrote)
                if self.fabric.devices[d].state != run.pre_values[d]
            ]
        self.emit("Abort", routine=run.id, info=reason)
        for dev, target in fixes:
            self._rollback(run.id, dev, target)
        if self.table is not None:
            self._on_placed(self.scheduler.on_finish(run.routine.devices, now))
        self._wrap_up()

    def _rollback(self, rid: int, dev: int, target: DeviceState) -> None:
        if self.fabric.devices[dev].health(self.clock.now) is Health.UP:
            self.fabric.force_state(dev, target)
            self.emit("RollbackCmd", routine=rid, device=dev, value=target)
        else:
            self.pending_rollback[dev] = (rid, target)
            if dev not in self.believed_down and dev not in self._probes:
                # the unanswered rollback is what reveals the failure
                self._probes.add(dev)
                self.clock.schedule(self.clock.now + self.fabric.detector.ack_timeout,
                                    ("rollback_probe", dev))

    def _on_rollback_probe(self, dev: int) -> None:
        self._probes.discard(dev)
        if dev not in self.pending_rollback or dev in self.believed_down:
            return
        if self.fabric.devices[dev].health(self.clock.now) is Health.UP:
            rid, target = self.pending_rollback.pop(dev)
            self.fabric.force_state(dev, target)
            self.emit("RollbackCmd", routine=rid, device=dev, value=target, info="retried")
        else:
            self._on_detect_fail(dev)

    def _wrap_up(self) -> None:
        self.finished += 1
        if self.model is not Model.EV and self.model is not Model.WV:
            self._admit()
        self._inject_next()

    # ------------------------------------------------------------ failures
    def _on_phys_fail(self, dev: int, fail_at: int, restart_at: int | None) -> None:
        vd = self.fabric.devices[dev]
        ping = self.fabric._first_miss(vd, fail_at)
        if restart_at is not None and restart_at <= ping:
            return  # back before anyone noticed
        self.clock.schedule(ping + self.fabric.detector.ack_timeout, ("detect_fail", dev))

    def _on_detect_fail(self, dev: int, culprit: int | None = None) -> None:
        if dev in self.believed_down:
            return
        now = self.clock.now
        self.believed_down.add(dev)
        item = ("F", dev, now, len(self.events))
        self.events.append(item)
        self.chains[dev].append(item)
        self.emit("DeviceFail", device=dev)
        self._classify_online(dev, "fail", culprit)

    def _on_detect_restart(self, dev: int) -> None:
        if dev not in self.believed_down:
            return
        now = self.clock.now
        self.believed_down.discard(dev)
        item = ("S", dev, now, len(self.events))
        self.events.append(item)
        self.chains[dev].append(item)
        self.emit("DeviceRestart", device=dev)
        if dev in self.pending_rollback:
            rid, target = self.pending_rollback.pop(dev)
            self.fabric.force_state(dev, target)
            self.emit("RollbackCmd", routine=rid, device=dev, value=target, info="deferred")
        self._classify_online(dev, "restart", None)

    def _classify_online(self, dev: int, kind: str, culprit: int | None) -> None:
        m = self.model
        if m is Model.WV:
            return
        for run in self.active():
            if run.id == culprit:
                continue
            touches = dev in run.routine.devices
            if m is Model.SGSV or (m is Model.GSV and touches):
                self._decide(run, dev, Decision.ABORT)
                self._abort(run, f"device {dev} {kind} during routine")
                continue
            if m is Model.GSV or not touches:
                continue
            if kind == "restart":
                run.need_recovery.discard(dev)
                continue
            if run.started_on(dev) and not run.done_on(dev):
                self._decide(run, dev, Decision.ABORT)
                self._abort(run, f"device {dev} failed while in use")
            elif run.done_on(dev):
                self._decide(run, dev, Decision.SERIALIZE_AFTER)
                if m is Model.PSV:
                    run.need_recovery.add(dev)

    def _decide(self, run: RunState, dev: int, d: Decision) -> None:
        self.decisions.append((self.clock.now, run.id, dev, d.value))

    def _on_revoke(self) -> None:
        self._revoke_at = None
        now = self.clock.now
        for rid in self.table.revoke_expired_leases(now):
            run = self.runs[rid]
            if run.status != "active":
                continue
            self.emit("LeaseRevoke", routine=rid)
            self._abort(run, "lease revoked")

    # -------------------------------------------------------------- result
    def _result(self) -> RunResult:
        committed = [r.id for r in self.runs if r.status == "committed"]
        aborted = [r.id for r in self.runs if r.status == "aborted"]
        ends = {
            d: (None if d in self.believed_down else v.state)
            for d, v in sorted(self.fabric.devices.items())
        }
        order = None if self.model is Model.WV else self.emit_serialization_order()
        return RunResult(
            self.model, self.scheduler_name, self.trace, ends, order, committed, aborted,
            self.violations, self.decisions,
            dict(getattr(self.scheduler, "bypasses", {}) or {}),
        )

    def emit_serialization_order(self) -> list[OrderItem]:
        committed = {r.id for r in self.runs if r.status == "committed"}
        nodes: list[OrderItem] = [("R", rid) for rid in sorted(committed)] + list(self.events)
        succ: dict[OrderItem, set[OrderItem]] = {n: set() for n in nodes}

        def edge(a: OrderItem, b: OrderItem) -> None:
            if a != b:
                succ[a].add(b)

        for chain in self.chains.values():
            items: list[OrderItem] = []
            for it in chain:
                if it[0] in ("W", "L"):
                    if it[1] not in committed:
                        continue
                    it = ("R", it[1])
                if items and items[-1] == it:
                    continue
                items.append(it)
            for a, b in zip(items, items[1:]):
                edge(a, b)
        if self.table is not None:
            for a, b in self.table.edge_log:
                if a in committed and b in committed:
                    edge(("R", a), ("R", b))

        def key(n: OrderItem) -> tuple:
            if n[0] == "R":
                run = self.runs[n[1]]
                t = run.first_cmd if run.first_cmd is not None else run.started
                return (t, 0, n[1])
            return (n[2], 1, n[3])

        indeg = {n: 0 for n in nodes}
        for a in nodes:
            for b in succ[a]:
                indeg[b] += 1
        heap = [(key(n), n) for n in nodes if indeg[n] == 0]
        heapq.heapify(heap)
        out: list[OrderItem] = []
        while heap:
            _, n = heapq.heappop(heap)
            out.append(n)
            for m in succ[n]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    heapq.heappush(heap, (key(m), m))
        if len(out) != len(nodes):
            raise SerializationError("serialization constraints are cyclic")
        return out


def run(
    model: Model | str,
    workload: Workload,
    *,
    scheduler: str = "timeline",
    config: EngineConfig | None = None,
    detector: DetectorConfig | None = None,
    seed: int = 0,
    check_invariants: bool = False,
) -> RunResult:
    """Execute ``workload`` under ``model``.  The engine is deterministic;
    ``seed`` is accepted for interface symmetry and recorded nowhere."""
    del seed
    return Engine(model, workload, scheduler=scheduler, config=config, detector=detector,
                  check_invariants=check_invariants).run()
