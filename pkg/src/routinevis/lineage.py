"""Per-device lock lineages with leasing, rollback and commit compaction.

A lineage is the planned order in which routines hold one device's virtual
lock.  Execution is gated by that order: a routine may touch a device only
once every entry to its left has finished its last access there.  Entry
start/duration fields are estimates refreshed by :meth:`LineageTable.retime`
and are what the timeline scheduler searches for gaps.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .model import Command, DeviceState, Kind, Routine


class Status(str, enum.Enum):
    RELEASED = "R"
    ACQUIRED = "A"
    SCHEDULED = "S"
    LEASED = "L"


_RANK = {Status.RELEASED: 0, Status.ACQUIRED: 1, Status.SCHEDULED: 2, Status.LEASED: 2}


class Order(str, enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    UNORDERED = "unordered"


class LeaseKind(str, enum.Enum):
    PRE = "pre"
    POST = "post"


class InvariantViolation(RuntimeError):
    pass


@dataclass
class EngineConfig:
    tau_timeout: int = 100
    leniency: float = 1.1
    short_bound: int = 60_000
    stretch_threshold: float = 2.0
    ttl_init: int = 5
    pre_lease: bool = True
    post_lease: bool = True
    # estimate every short command as tau_timeout instead of its declared duration
    fixed_short_estimate: bool = False

    def __post_init__(self) -> None:
        if self.leniency < 1:
            raise ValueError("leniency must be >= 1")
        if min(self.tau_timeout, self.short_bound, self.ttl_init) <= 0 or self.stretch_threshold <= 0:
            raise ValueError("config values must be positive")

    def estimate(self, cmd: Command) -> int:
        if self.fixed_short_estimate and cmd.kind is Kind.SHORT:
            return self.tau_timeout
        return cmd.duration


@dataclass
class LockAccess:
    routine: int
    desired: DeviceState
    start: int
    duration: int
    status: Status = Status.SCHEDULED
    leased_to: int | None = None
    granted: bool = False
    accessed: bool = False
    done: bool = False
    written: DeviceState | None = None

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass
class Lineage:
    device: int
    committed: DeviceState
    entries: list[LockAccess] = field(default_factory=list)
    # routines whose entries were compacted away; anything placed later on
    # this device still serializes after them
    anchors: set[int] = field(default_factory=set)

    def index_of(self, rid: int) -> int | None:
        for i, e in enumerate(self.entries):
            if e.routine == rid:
                return i
        return None

    def routines(self) -> list[int]:
        return [e.routine for e in self.entries]


@dataclass
class LeaseRecord:
    device: int
    src: int
    dst: int
    kind: LeaseKind
    granted_at: int
    revoke_at: int | None = None
    open: bool = True


@dataclass(frozen=True)
class Granted:
    lease: LeaseRecord


@dataclass(frozen=True)
class Denied:
    reason: str


@dataclass(frozen=True)
class Violation:
    invariant: int
    devices: tuple[int, ...]
    routines: tuple[int, ...]
    message: str


@dataclass
class RoutinePlan:
    """Execution progress of a routine that owns lineage entries."""

    routine: Routine
    placed_at: int
    estimates: list[int]
    first_idx: dict[int, int]
    last_idx: dict[int, int]
    next_cmd: int = 0
    in_flight: int | None = None
    starts: dict[int, int] = field(default_factory=dict)
    ends: dict[int, int] = field(default_factory=dict)
    est_finish: int = 0

    @classmethod
    def build(cls, routine: Routine, now: int, config: EngineConfig) -> "RoutinePlan":
        first: dict[int, int] = {}
        last: dict[int, int] = {}
        for i, c in enumerate(routine.commands):
            first.setdefault(c.device, i)
            last[c.device] = i
        return cls(routine, now, [config.estimate(c) for c in routine.commands], first, last)

    def span_estimate(self, device: int) -> int:
        return sum(self.estimates[self.first_idx[device] : self.last_idx[device] + 1])


class LineageTable:
    def __init__(
        self,
        initial_states: dict[int, DeviceState],
        config: EngineConfig | None = None,
    ) -> None:
        self.config = config or EngineConfig()
        self.lineages = {d: Lineage(d, s) for d, s in initial_states.items()}
        self.plans: dict[int, RoutinePlan] = {}
        self.leases: list[LeaseRecord] = []
        self.lease_log: list[LeaseRecord] = []  # append-only, for tracing
        self.last_writer: dict[int, int | None] = {d: None for d in initial_states}
        self.finalized: list[int] = []
        self.edge_log: set[tuple[int, int]] = set()
        self._succ: dict[int, set[int]] = {}
        self._pred: dict[int, set[int]] = {}
        self._committed: set[int] = set()
        self.now = 0

    # ------------------------------------------------------------------ graph
    def _add_node(self, rid: int) -> None:
        self._succ.setdefault(rid, set())
        self._pred.setdefault(rid, set())

    def _add_edge(self, a: int, b: int) -> None:
        if a == b:
            return
        self._add_node(a)
        self._add_node(b)
        self._succ[a].add(b)
        self._pred[b].add(a)
        self.edge_log.add((a, b))

    def _drop_node(self, rid: int) -> None:
        for s in self._succ.pop(rid, ()):
            self._pred[s].discard(rid)
        for p in self._pred.pop(rid, ()):
            self._succ[p].discard(rid)

    def _prune(self) -> None:
        # committed nodes no active routine can reach are irrelevant to cycles
        todo = [n for n in self._committed if not self._pred.get(n)]
        while todo:
            n = todo.pop()
            if n not in self._succ or self._pred.get(n):
                continue
            succs = list(self._succ[n])
            self._drop_node(n)
            self._committed.discard(n)
            todo.extend(s for s in succs if s in self._committed)

    def _walk(self, start: Iterable[int], nbrs: dict[int, set[int]]) -> set[int]:
        seen = set(start)
        queue = deque(seen)
        while queue:
            n = queue.popleft()
            for m in nbrs.get(n, ()):
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
        return seen

    def closure_valid(self, pre: set[int], post: set[int]) -> bool:
        """True iff placing a routine after ``pre`` and before ``post`` keeps
        serialize-before acyclic."""
        if not pre or not post:
            return True
        if pre & post:
            return False
        return not (self._walk(pre, self._pred) & self._walk(post, self._succ))

    def has_path(self, a: int, b: int) -> bool:
        return b in self._walk([a], self._succ)

    # -------------------------------------------------------------- placement
    def add_routine(self, routine: Routine, now: int) -> RoutinePlan:
        if routine.id in self.plans:
            return self.plans[routine.id]
        plan = RoutinePlan.build(routine, now, self.config)
        self.plans[routine.id] = plan
        self._add_node(routine.id)
        return plan

    def _min_index(self, device: int) -> int:
        lo = 0
        for i, e in enumerate(self.lineages[device].entries):
            if e.accessed:
                lo = i + 1
        return lo

    def insertable_from(self, device: int) -> int:
        """Lowest index a new entry may take: never ahead of an entry in use,
        and only at the tail when pre-leasing is off."""
        if not self.config.pre_lease:
            return len(self.lineages[device].entries)
        return self._min_index(device)

    def _anchors(self, device: int) -> set[int]:
        lin = self.lineages[device]
        lin.anchors = {a for a in lin.anchors if a in self._succ}
        return lin.anchors

    def pre_post_sets(self, device: int, pos: int) -> tuple[set[int], set[int]]:
        entries = self.lineages[device].entries
        pre = {e.routine for e in entries[:pos]} | self._anchors(device)
        return pre, {e.routine for e in entries[pos:]}

    def insert_entry(self, rid: int, device: int, pos: int, now: int) -> LeaseRecord | None:
        """Insert ``rid``'s lock-access at ``pos`` and record implied leases."""
        plan = self.plans[rid]
        lin = self.lineages[device]
        if lin.index_of(rid) is not None:
            raise ValueError(f"routine {rid} already in lineage of device {device}")
        if pos < self._min_index(device):
            raise ValueError("cannot insert ahead of an entry already in use")
        desired = plan.routine.commands[plan.last_idx[device]].target
        est_start = max(now, plan.placed_at)
        entry = LockAccess(rid, desired, est_start, max(1, plan.span_estimate(device)))
        entries = lin.entries
        left = entries[:pos]
        right = entries[pos:]
        for a in self._anchors(device):
            self._add_edge(a, rid)
        for e in left:
            self._add_edge(e.routine, rid)
        for e in right:
            self._add_edge(rid, e.routine)
        lease = None
        head = next((i for i, e in enumerate(entries) if not e.done), len(entries))
        if right and pos == head and right[0].granted:
            holder = right[0]
            holder.leased_to = rid
            lease = LeaseRecord(device, holder.routine, rid, LeaseKind.PRE, now)
        elif (self.config.post_lease and left and pos == head and left[-1].done
              and left[-1].routine in self.plans):
            lease = LeaseRecord(device, left[-1].routine, rid, LeaseKind.POST, now)
        if pos == head:
            entry.granted = True
        entries.insert(pos, entry)
        if lease is not None:
            self.leases.append(lease)
            self.lease_log.append(lease)
        self._refresh(device)
        return lease

    def place(self, routine: Routine, positions: dict[int, int], now: int) -> list[LeaseRecord]:
        self.add_routine(routine, now)
        leases = []
        for dev in routine.device_order():
            lease = self.insert_entry(routine.id, dev, positions[dev], now)
            if lease is not None:
                leases.append(lease)
        self.retime(now)
        return leases

    def unplace(self, rid: int) -> None:
        """Withdraw a routine that never executed (scheduler deferral)."""
        plan = self.plans.pop(rid)
        assert plan.next_cmd == 0
        for dev in plan.routine.devices:
            lin = self.lineages[dev]
            i = lin.index_of(rid)
            if i is not None:
                lin.entries.pop(i)
            for e in lin.entries:
                if e.leased_to == rid:
                    e.leased_to = None
        self.leases = [l for l in self.leases if l.dst != rid and l.src != rid]
        self._drop_node(rid)
        self.edge_log = {(a, b) for a, b in self.edge_log if rid not in (a, b)}
        for dev in plan.routine.devices:
            self._refresh(dev)
        self.retime(self.now)

    # ----------------------------------------------------------- eligibility
    def eligibility(self, routine: Routine) -> dict[int, str] | None:
        """Immediate-acquisition plan per device, or None if any device waits.

        Values are ``"free"``, ``"post"`` or ``"pre"``; post-lease is preferred
        because it keeps existing order.
        """
        plan: dict[int, str] = {}
        pre: set[int] = set()
        post: set[int] = set()
        for c_dev in routine.device_order():
            lin = self.lineages[c_dev]
            entries = lin.entries
            head = next((i for i, e in enumerate(entries) if not e.done), len(entries))
            reads = any(c.reads for c in routine.commands if c.device == c_dev)
            if head > 0 and (not self.config.post_lease or reads):
                return None
            if head < len(entries):
                if entries[head].accessed or not self.config.pre_lease:
                    return None
                mech = "pre"
            else:
                mech = "post" if head > 0 else "free"
            p, q = self.pre_post_sets(c_dev, head)
            pre |= p
            post |= q
            if not self.closure_valid(pre, post):
                return None
            plan[c_dev] = mech
        return plan

    def acquire_all_or_none(self, routine: Routine, now: int) -> bool:
        """Place ``routine`` with every lock usable now, or change nothing."""
        if self.eligibility(routine) is None:
            return False
        positions = {}
        for dev in routine.device_order():
            entries = self.lineages[dev].entries
            positions[dev] = next((i for i, e in enumerate(entries) if not e.done), len(entries))
        self.place(routine, positions, now)
        return True

    def try_pre_lease(self, src: int, dst: Routine, device: int, now: int) -> Granted | Denied:
        lin = self.lineages[device]
        j = lin.index_of(src)
        if j is None:
            return Denied("source holds no lock on device")
        entry = lin.entries[j]
        if not self.config.pre_lease:
            return Denied("pre-leasing disabled")
        if entry.accessed:
            return Denied("source already accessed device")
        if not entry.granted:
            return Denied("source does not hold the lock")
        if dst.id in self.plans and self.has_path(src, dst.id):
            return Denied("source already serialized before destination")
        self.add_routine(dst, now)
        pre, post = self.pre_post_sets(device, j)
        if not self.closure_valid(pre, post):
            return Denied("lease would contradict serialization order")
        lease = self.insert_entry(dst.id, device, j, now)
        self.retime(now)
        assert lease is not None and lease.kind is LeaseKind.PRE
        return Granted(lease)

    def try_post_lease(self, src: int, dst: Routine, device: int, now: int) -> Granted | Denied:
        lin = self.lineages[device]
        j = lin.index_of(src)
        if j is None:
            return Denied("source holds no lock on device")
        if not self.config.post_lease:
            return Denied("post-leasing disabled")
        if not lin.entries[j].done:
            return Denied("source has not finished its last access")
        if any(c.reads for c in dst.commands if c.device == device):
            return Denied("dirty read: destination reads a value the source wrote")
        if any(not e.done for e in lin.entries[:j]) or j + 1 < len(lin.entries):
            return Denied("lock is not free after the source")
        if dst.id in self.plans and self.has_path(dst.id, src):
            return Denied("destination already serialized before source")
        self.add_routine(dst, now)
        pre, post = self.pre_post_sets(device, j + 1)
        if not self.closure_valid(pre, post):
            return Denied("lease would contradict serialization order")
        lease = self.insert_entry(dst.id, device, j + 1, now)
        self.retime(now)
        assert lease is not None and lease.kind is LeaseKind.POST
        return Granted(lease)

    # -------------------------------------------------------------- execution
    def may_access(self, rid: int, device: int) -> bool:
        lin = self.lineages[device]
        j = lin.index_of(rid)
        if j is None:
            raise KeyError(f"routine {rid} holds no entry on device {device}")
        if any(not e.done for e in lin.entries[:j]):
            return False
        if j > 0:
            plan = self.plans[rid]
            reads = any(
                c.reads for c in plan.routine.commands if c.device == device
            )
            if not self.config.post_lease or reads:
                return False
        return True

    def on_command_start(self, rid: int, idx: int, now: int) -> None:
        plan = self.plans[rid]
        cmd = plan.routine.commands[idx]
        plan.in_flight = idx
        plan.starts[idx] = now
        lin = self.lineages[cmd.device]
        e = lin.entries[lin.index_of(rid)]
        if not e.accessed:
            e.accessed = True
            e.granted = True
            for lease in self.leases:
                if lease.open and lease.dst == rid and lease.device == cmd.device and lease.revoke_at is None:
                    span = plan.span_estimate(cmd.device) * self.config.leniency
                    lease.revoke_at = now + math.ceil(span - 1e-9)
        self._refresh(cmd.device)

    def on_command_end(self, rid: int, idx: int, now: int, ok: bool) -> int | None:
        """Record a command outcome; returns the device if this was the
        routine's last access to it."""
        plan = self.plans[rid]
        cmd = plan.routine.commands[idx]
        plan.in_flight = None
        plan.ends[idx] = now
        plan.next_cmd = idx + 1
        lin = self.lineages[cmd.device]
        j = lin.index_of(rid)
        if j is None:
            # entry compacted away by a later committer; nothing to track
            return None
        e = lin.entries[j]
        if ok:
            e.written = cmd.target
            self.last_writer[cmd.device] = rid
        if idx == plan.last_idx[cmd.device]:
            self.transition_on_release(cmd.device, now, rid)
            return cmd.device
        return None

    def transition_on_release(self, device: int, now: int, rid: int | None = None) -> int | None:
        """Mark the holder's entry Released; return the routine now holding
        the lock, if it is acquired immediately."""
        lin = self.lineages[device]
        if rid is None:
            rid = next((e.routine for e in lin.entries if e.status is Status.ACQUIRED), None)
            if rid is None:
                return None
        j = lin.index_of(rid)
        e = lin.entries[j]
        e.done = True
        e.granted = True
        for lease in self.leases:
            if lease.open and lease.dst == rid and lease.device == device:
                lease.open = False
        for other in lin.entries:
            if other.leased_to == rid:
                other.leased_to = None
        self.now = max(self.now, now)
        self.retime(now)
        nxt = next((x for x in lin.entries if not x.done), None)
        if nxt is not None and not nxt.granted:
            # contiguous hand-over; a gap defers acquisition to the entry start
            if nxt.start <= now:
                nxt.granted = True
        self._refresh(device)
        if nxt is not None and nxt.status is Status.ACQUIRED:
            return nxt.routine
        return None

    def tick(self, now: int) -> None:
        self.now = max(self.now, now)
        for dev, lin in self.lineages.items():
            head = next((x for x in lin.entries if not x.done), None)
            if head is not None and not head.granted and head.start <= now:
                head.granted = True
                self._refresh(dev)

    def _refresh(self, device: int) -> None:
        entries = self.lineages[device].entries
        present = {e.routine: e for e in entries}
        head_seen = False
        for e in entries:
            if e.done:
                e.status = Status.RELEASED
            elif not head_seen:
                head_seen = True
                e.status = Status.ACQUIRED if e.granted else Status.SCHEDULED
            else:
                dst = present.get(e.leased_to) if e.leased_to is not None else None
                if dst is not None and not dst.done:
                    e.status = Status.LEASED
                else:
                    e.leased_to = None
                    e.status = Status.SCHEDULED

    def revoke_expired_leases(self, now: int) -> list[int]:
        aborted = []
        for lease in self.leases:
            if not lease.open or lease.revoke_at is None or lease.revoke_at > now:
                continue
            lease.open = False
            lin = self.lineages[lease.device]
            j = lin.index_of(lease.dst)
            if j is not None and not lin.entries[j].done and lease.dst not in aborted:
                aborted.append(lease.dst)
        return aborted

    def next_revocation(self) -> int | None:
        times = [l.revoke_at for l in self.leases if l.open and l.revoke_at is not None]
        return min(times) if times else None

    # ------------------------------------------------------ abort and commit
    def abort_rollback(self, rid: int) -> list[tuple[int, DeviceState]]:
        """Remove an aborting routine; return (device, state) corrective writes."""
        plan = self.plans.pop(rid)
        fixes: list[tuple[int, DeviceState]] = []
        for dev in plan.routine.device_order():
            lin = self.lineages[dev]
            j = lin.index_of(rid)
            if j is None:
                continue
            entry = lin.entries.pop(j)
            if self.last_writer.get(dev) == rid:
                target, writer = lin.committed, None
                for e in reversed(lin.entries[:j]):
                    if e.written is not None:
                        target, writer = e.written, e.routine
                        break
                self.last_writer[dev] = writer
                if entry.written != target:
                    fixes.append((dev, target))
            for e in lin.entries:
                if e.leased_to == rid:
                    e.leased_to = None
            self._refresh(dev)
        for lease in self.leases:
            if rid in (lease.src, lease.dst):
                lease.open = False
        self.leases = [l for l in self.leases if l.open]
        self._drop_node(rid)
        self.edge_log = {(a, b) for a, b in self.edge_log if rid not in (a, b)}
        self._prune()
        self.retime(self.now)
        return fixes

    def commit_with_compaction(self, rid: int) -> None:
        plan = self.plans.pop(rid)
        for dev in plan.routine.device_order():
            lin = self.lineages[dev]
            j = lin.index_of(rid)
            if j is None:
                # a later routine already committed over this device
                continue
            own = lin.entries[j]
            for e in lin.entries[:j]:
                if not e.done:
                    raise InvariantViolation(
                        f"compaction of device {dev} would drop active entry of routine {e.routine}"
                    )
            if own.written is not None:
                lin.committed = own.written
            else:
                for e in reversed(lin.entries[:j]):
                    if e.written is not None:
                        lin.committed = e.written
                        break
            lin.anchors |= {e.routine for e in lin.entries[: j + 1]}
            del lin.entries[: j + 1]
            self._refresh(dev)
        for lease in self.leases:
            if lease.src == rid and lease.kind is LeaseKind.POST:
                lease.open = False  # ownership moves to the destination for good
            if lease.dst == rid:
                lease.open = False
        self.leases = [l for l in self.leases if l.open]
        self.finalized.append(rid)
        self._committed.add(rid)
        self._prune()
        self.retime(self.now)

    # ----------------------------------------------------------------- query
    def current_status(self, device: int) -> DeviceState:
        lin = self.lineages[device]
        for e in lin.entries:
            if e.status is Status.ACQUIRED:
                return e.desired
        released = [e for e in lin.entries if e.status is Status.RELEASED]
        if released:
            return released[-1].desired
        return lin.committed

    def serialize_before(self, a: int, b: int) -> Order:
        seen: set[Order] = set()
        for lin in self.lineages.values():
            ia, ib = lin.index_of(a), lin.index_of(b)
            if ia is None or ib is None:
                continue
            seen.add(Order.BEFORE if ia < ib else Order.AFTER)
        if len(seen) > 1:
            raise InvariantViolation(f"routines {a} and {b} ordered inconsistently")
        return seen.pop() if seen else Order.UNORDERED

    def check_invariants(self) -> list[Violation]:
        out: list[Violation] = []
        pos: dict[int, dict[int, int]] = {}
        for dev, lin in self.lineages.items():
            entries = lin.entries
            for a, b in zip(entries, entries[1:]):
                if a.end > b.start:
                    out.append(Violation(1, (dev,), (a.routine, b.routine),
                                         f"intervals overlap on device {dev}"))
            acquired = [e.routine for e in entries if e.status is Status.ACQUIRED]
            if len(acquired) > 1:
                out.append(Violation(2, (dev,), tuple(acquired),
                                     f"{len(acquired)} acquired entries on device {dev}"))
            ranks = [_RANK[e.status] for e in entries]
            if ranks != sorted(ranks):
                out.append(Violation(3, (dev,), tuple(e.routine for e in entries),
                                     f"status order broken on device {dev}"))
            for i, e in enumerate(entries):
                pos.setdefault(e.routine, {})[dev] = i
        rids = sorted(pos)
        for x in range(len(rids)):
            for y in range(x + 1, len(rids)):
                a, b = rids[x], rids[y]
                common = pos[a].keys() & pos[b].keys()
                signs = {pos[a][d] < pos[b][d] for d in common}
                if len(signs) > 1:
                    out.append(Violation(4, tuple(sorted(common)), (a, b),
                                         f"routines {a},{b} serialized inconsistently"))
        if self._has_cycle():
            out.append(Violation(4, (), (), "serialize-before relation has a cycle"))
        return out

    def _has_cycle(self) -> bool:
        indeg = {n: len(p) for n, p in self._pred.items()}
        queue = deque(n for n, k in indeg.items() if k == 0)
        seen = 0
        while queue:
            n = queue.popleft()
            seen += 1
            for m in self._succ[n]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    queue.append(m)
        return seen != len(indeg)

    # --------------------------------------------------------------- timing
    def retime(self, now: int) -> None:
        """Refresh estimated start/duration of every entry from progress."""
        self.now = max(self.now, now)
        now = self.now
        starts: dict[tuple[int, int], int] = {}
        ends: dict[tuple[int, int], int] = {}
        cfg = self.config

        def cmd_end(rid: int, k: int) -> int:
            key = (rid, k)
            if key in ends:
                return ends[key]
            plan = self.plans[rid]
            if k in plan.ends:
                val = plan.ends[k]
            else:
                val = max(now, cmd_start(rid, k) + plan.estimates[k])
            ends[key] = val
            return val

        def cmd_start(rid: int, k: int) -> int:
            key = (rid, k)
            if key in starts:
                return starts[key]
            plan = self.plans[rid]
            if k in plan.starts:
                val = plan.starts[k]
            else:
                val = max(now, plan.placed_at)
                if k > 0:
                    val = max(val, cmd_end(rid, k - 1))
                dev = plan.routine.commands[k].device
                if plan.first_idx[dev] == k:
                    lin = self.lineages[dev]
                    j = lin.index_of(rid)
                    strict = not cfg.post_lease or any(
                        c.reads for c in plan.routine.commands if c.device == dev
                    )
                    for e in lin.entries[: j or 0]:
                        other = self.plans.get(e.routine)
                        if other is None:
                            continue
                        if strict:
                            val = max(val, cmd_end(e.routine, len(other.routine.commands) - 1))
                        elif not e.done:
                            val = max(val, cmd_end(e.routine, other.last_idx[dev]))
            starts[key] = val
            return val

        for lin in self.lineages.values():
            for e in lin.entries:
                plan = self.plans.get(e.routine)
                if plan is None:
                    continue
                dev = lin.device
                s = cmd_start(e.routine, plan.first_idx[dev])
                f = cmd_end(e.routine, plan.last_idx[dev])
                e.start = s
                e.duration = max(1, f - s)
        for rid, plan in self.plans.items():
            plan.est_finish = cmd_end(rid, len(plan.routine.commands) - 1)

    def estimated_finish(self, rid: int) -> int:
        """Estimated completion time of an active routine (as of the last retime)."""
        return self.plans[rid].est_finish

    def ideal_remaining(self, rid: int) -> int:
        plan = self.plans[rid]
        return sum(
            est for k, est in enumerate(plan.estimates) if k not in plan.ends
        )

    # ----------------------------------------------------------------- dump
    def dump(self) -> dict:
        """Debug view: per-device rows of (routine, status, desired, start, duration)."""
        return {
            str(dev): {
                "committed": lin.committed,
                "entries": [
                    [e.routine, e.status.value, e.desired, e.start, e.duration]
                    for e in lin.entries
                ],
            }
            for dev, lin in sorted(self.lineages.items())
        }

    def dump_text(self) -> str:
        lines = []
        for dev, lin in sorted(self.lineages.items()):
            cells = " ".join(
                f"R{e.routine}[{e.status.value}] D={e.desired} @{e.start}+{e.duration}"
                for e in lin.entries
            )
            lines.append(f"{dev}: C={lin.committed} | {cells}".rstrip())
        return "\n".join(lines)
