"""Placement policies for eventual visibility: FCFS, JiT and timeline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .lineage import LineageTable
from .model import Routine


@dataclass
class WaitQueueEntry:
    routine: Routine
    ttl: int


@dataclass(frozen=True)
class Gap:
    device: int
    id: int  # insertion index in the lineage
    start: int
    length: float  # math.inf for the tail gap

    @property
    def end(self) -> float:
        return self.start + self.length


@dataclass
class Placement:
    positions: dict[int, int]
    starts: dict[int, int]
    pre: set[int] = field(default_factory=set)
    post: set[int] = field(default_factory=set)


@dataclass(frozen=True)
class Placed:
    placement: Placement


@dataclass(frozen=True)
class Deferred:
    reason: str


def pre_post_sets(table: LineageTable, gap: Gap) -> tuple[set[int], set[int]]:
    return table.pre_post_sets(gap.device, gap.id)


def gaps(table: LineageTable, device: int, now: int) -> list[Gap]:
    """Maximal free intervals of a lineage, earliest first, from ``now``."""
    entries = table.lineages[device].entries
    lo = table.insertable_from(device)
    out = []
    for p in range(lo, len(entries) + 1):
        start = max(now, entries[p - 1].end) if p > 0 else now
        if p < len(entries):
            out.append(Gap(device, p, start, max(0, entries[p].start - start)))
        else:
            out.append(Gap(device, p, start, math.inf))
    return out


def get_gap(table: LineageTable, device: int, start_time: int, duration: int, now: int,
            after: int = -1) -> Gap | None:
    """First gap with id > ``after`` that fits ``duration`` at or after ``start_time``."""
    for g in gaps(table, device, now):
        if g.id <= after:
            continue
        s = max(g.start, start_time)
        if s + duration <= g.end:
            return Gap(device, g.id, s, g.end - s)
    return None


def fcfs_on_arrival(table: LineageTable, r: Routine, now: int) -> Placement:
    positions = {d: len(table.lineages[d].entries) for d in r.device_order()}
    pre: set[int] = set()
    for d in positions:
        pre |= {e.routine for e in table.lineages[d].entries}
    table.place(r, positions, now)
    return Placement(positions, {d: table.lineages[d].entries[-1].start for d in positions}, pre)


def jit_eligibility_test(table: LineageTable, r: Routine, now: int) -> dict[int, str] | None:
    return table.eligibility(r)


def _first_use_offsets(table: LineageTable, r: Routine) -> dict[int, int]:
    cfg = table.config
    offs: dict[int, int] = {}
    t = 0
    for c in r.commands:
        offs.setdefault(c.device, t)
        t += cfg.estimate(c)
    return offs


def _span(table: LineageTable, r: Routine, device: int) -> int:
    cfg = table.config
    idx = [i for i, c in enumerate(r.commands) if c.device == device]
    return max(1, sum(cfg.estimate(c) for c in r.commands[idx[0] : idx[-1] + 1]))


def tl_search(table: LineageTable, r: Routine, now: int) -> Placement:
    """Backtracking gap search: first placement whose pre/post sets stay
    disjoint.  Always succeeds because tail gaps are unbounded."""
    devs = r.device_order()
    offs = _first_use_offsets(table, r)
    spans = {d: _span(table, r, d) for d in devs}

    def schedule(i: int, start_time: int, pre: set[int], post: set[int]) -> Placement | None:
        if i == len(devs):
            return Placement({}, {}, pre, post)
        dev = devs[i]
        after = -1
        while True:
            gap = get_gap(table, dev, start_time, spans[dev], now, after)
            if gap is None:
                return None
            p, q = table.pre_post_sets(dev, gap.id)
            cur_pre, cur_post = pre | p, post | q
            if table.closure_valid(cur_pre, cur_post):
                nxt = gap.start + (offs[devs[i + 1]] - offs[dev]) if i + 1 < len(devs) else gap.start
                res = schedule(i + 1, nxt, cur_pre, cur_post)
                if res is not None:
                    res.positions[dev] = gap.id
                    res.starts[dev] = gap.start
                    return res
            after = gap.id  # backtrack: try next gap

    result = schedule(0, now, set(), set())
    assert result is not None, "tail placement is always valid"
    return result


def tl_schedule(table: LineageTable, r: Routine, now: int, *, force: bool = False) -> Placed | Deferred:
    # bring estimates up to ``now`` first, otherwise plain elapsed time would
    # be mistaken for stretch caused by ``r``
    table.retime(now)
    placement = tl_search(table, r, now)
    before = {rid: table.estimated_finish(rid) for rid in table.plans}
    table.place(r, placement.positions, now)
    if force:
        return Placed(placement)
    limit = table.config.stretch_threshold
    for rid, f0 in before.items():
        f1 = table.estimated_finish(rid)
        if f1 <= f0:
            continue
        ideal = table.ideal_remaining(rid)
        if ideal > 0 and (f1 - now) > limit * ideal:
            table.unplace(r.id)
            return Deferred(f"would stretch routine {rid} beyond {limit}x")
    return Placed(placement)


class Scheduler:
    """Wait queue plus policy; returns routines placed by each trigger."""

    name = ""

    def __init__(self, table: LineageTable) -> None:
        self.table = table
        self.waiting: list[WaitQueueEntry] = []

    def on_arrival(self, r: Routine, now: int) -> list[int]:
        raise NotImplementedError

    def on_release(self, device: int, now: int) -> list[int]:
        return []

    def on_finish(self, devices: Iterable[int], now: int) -> list[int]:
        placed: list[int] = []
        for d in sorted(set(devices)):
            placed += self.on_release(d, now)
        return placed

    def waiting_ids(self) -> list[int]:
        return [w.routine.id for w in self.waiting]


class FCFSScheduler(Scheduler):
    name = "fcfs"

    def on_arrival(self, r: Routine, now: int) -> list[int]:
        fcfs_on_arrival(self.table, r, now)
        return [r.id]


class JiTScheduler(Scheduler):
    name = "jit"

    def __init__(self, table: LineageTable) -> None:
        super().__init__(table)
        self.bypasses: dict[int, int] = {}

    def _blocked(self, entry: WaitQueueEntry) -> bool:
        # an expired lower-id sharer must go first
        for w in self.waiting:
            if w is entry:
                break
            if w.ttl == 0 and w.routine.devices & entry.routine.devices:
                return True
        return False

    def _try(self, entry: WaitQueueEntry, now: int) -> bool:
        if self._blocked(entry):
            return False
        if not self.table.acquire_all_or_none(entry.routine, now):
            return False
        self.waiting.remove(entry)
        self.ttl_decrement(entry.routine)
        return True

    def ttl_decrement(self, scheduled: Routine) -> None:
        for w in self.waiting:
            if w.routine.id < scheduled.id and w.routine.devices & scheduled.devices:
                if w.ttl > 0:
                    w.ttl -= 1
                self.bypasses[w.routine.id] = self.bypasses.get(w.routine.id, 0) + 1

    def on_arrival(self, r: Routine, now: int) -> list[int]:
        entry = WaitQueueEntry(r, self.table.config.ttl_init)
        self.waiting.append(entry)
        return [r.id] if self._try(entry, now) else []

    def on_release(self, device: int, now: int) -> list[int]:
        placed = []
        progress = True
        while progress:
            progress = False
            cands = [w for w in self.waiting if device in w.routine.devices]
            cands.sort(key=lambda w: (w.ttl != 0, w.routine.id))
            for w in cands:
                if self._try(w, now):
                    placed.append(w.routine.id)
                    progress = True
                    break
        return placed


class TimelineScheduler(Scheduler):
    name = "timeline"

    def _attempt(self, r: Routine, now: int) -> bool:
        return isinstance(tl_schedule(self.table, r, now), Placed)

    def on_arrival(self, r: Routine, now: int) -> list[int]:
        if self._attempt(r, now):
            return [r.id]
        self.waiting.append(WaitQueueEntry(r, self.table.config.ttl_init))
        return []

    def _retry(self, now: int) -> list[int]:
        placed = []
        for w in list(self.waiting):
            if self._attempt(w.routine, now):
                self.waiting.remove(w)
                placed.append(w.routine.id)
        return placed

    def on_release(self, device: int, now: int) -> list[int]:
        return self._retry(now) if self.waiting else []

    def on_finish(self, devices: Iterable[int], now: int) -> list[int]:
        return self._retry(now) if self.waiting else []


SCHEDULERS = {
    "fcfs": FCFSScheduler,
    "jit": JiTScheduler,
    "timeline": TimelineScheduler,
}


def make_scheduler(name: str, table: LineageTable) -> Scheduler:
    try:
        return SCHEDULERS[name](table)
    except KeyError:
        raise ValueError(f"unknown scheduler {name!r}; choose from {sorted(SCHEDULERS)}") from None
