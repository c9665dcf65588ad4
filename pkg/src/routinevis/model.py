"""Domain vocabulary shared by the engine, scheduler, fabric and harness."""

from __future__ import annotations

import enum
import heapq
import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

DEFAULT_SHORT_BOUND_MS = 60_000

# Symbolic device states accepted in routine documents.
STATE_TOKENS = {
    "OFF": 0,
    "ON": 1,
    "OPEN": 1,
    "CLOSE": 0,
    "CLOSED": 0,
    "LOCK": 1,
    "UNLOCK": 0,
    "LOCKED": 1,
    "UNLOCKED": 0,
}

DeviceState = int


class RoutineFormatError(ValueError):
    """Raised for malformed routine or workload documents."""


class Kind(str, enum.Enum):
    SHORT = "short"
    LONG = "long"


class Necessity(str, enum.Enum):
    MUST = "must"
    BEST_EFFORT = "best_effort"


@dataclass(frozen=True)
class Device:
    id: int
    name: str


@dataclass(frozen=True)
class Command:
    device: int
    target: DeviceState
    duration: int
    kind: Kind = Kind.SHORT
    necessity: Necessity = Necessity.MUST
    # a conditional read of the device before writing it; blocks post-leases
    reads: bool = False

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise RoutineFormatError(f"non-positive duration {self.duration}")

    @property
    def must(self) -> bool:
        return self.necessity is Necessity.MUST


@dataclass(frozen=True)
class Routine:
    id: int
    commands: tuple[Command, ...]
    submit_time: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        if not self.commands:
            raise RoutineFormatError(f"routine {self.id} has no commands")

    @property
    def devices(self) -> frozenset[int]:
        return frozenset(c.device for c in self.commands)

    def device_order(self) -> list[int]:
        """Distinct devices in order of first use."""
        seen: dict[int, None] = {}
        for c in self.commands:
            seen.setdefault(c.device)
        return list(seen)

    @property
    def ideal_duration(self) -> int:
        return sum(c.duration for c in self.commands)

    def last_writes(self) -> dict[int, DeviceState]:
        out: dict[int, DeviceState] = {}
        for c in self.commands:
            out[c.device] = c.target
        return out


@dataclass(frozen=True, order=True)
class FailureEvent:
    detect_time: int
    device: int


@dataclass(frozen=True, order=True)
class RestartEvent:
    detect_time: int
    device: int


def conflict_set(a: Routine, b: Routine) -> frozenset[int]:
    return a.devices & b.devices


def classify_kind(duration: int, short_bound: int = DEFAULT_SHORT_BOUND_MS) -> Kind:
    return Kind.LONG if duration > short_bound else Kind.SHORT


def parse_state(value: Any) -> DeviceState:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        token = value.strip().upper()
        if token in STATE_TOKENS:
            return STATE_TOKENS[token]
        try:
            return int(token)
        except ValueError:
            pass
    raise RoutineFormatError(f"unrecognised device state {value!r}")


def _command_from_doc(
    doc: Mapping[str, Any],
    devices: Mapping[str, int],
    short_bound: int,
) -> Command:
    if not isinstance(doc, Mapping):
        raise RoutineFormatError("command must be an object")
    try:
        dev_ref = doc["device"]
        duration = int(doc["duration_ms"])
        target = parse_state(doc["target"])
    except KeyError as exc:
        raise RoutineFormatError(f"command missing field {exc}") from None
    if isinstance(dev_ref, str):
        if dev_ref not in devices:
            raise RoutineFormatError(f"unknown device {dev_ref!r}")
        dev = devices[dev_ref]
    elif isinstance(dev_ref, int) and dev_ref in devices.values():
        dev = dev_ref
    else:
        raise RoutineFormatError(f"unknown device {dev_ref!r}")
    if duration <= 0:
        raise RoutineFormatError(f"non-positive duration {duration}")
    kind = Kind(doc["kind"]) if "kind" in doc else classify_kind(duration, short_bound)
    necessity = Necessity(doc.get("necessity", Necessity.MUST.value))
    return Command(dev, target, duration, kind, necessity, bool(doc.get("reads", False)))


def parse_routine(
    text: str | Mapping[str, Any],
    devices: Mapping[str, int],
    *,
    routine_id: int = 0,
    submit_time: int = 0,
    short_bound: int = DEFAULT_SHORT_BOUND_MS,
) -> Routine:
    """Build a :class:`Routine` from a JSON routine document.

    ``devices`` maps device names to ids. Missing ``necessity`` defaults to
    must, missing ``kind`` is inferred from ``short_bound``.
    """
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RoutineFormatError(f"invalid JSON: {exc}") from None
    else:
        doc = text
    if not isinstance(doc, Mapping) or not isinstance(doc.get("commands"), list):
        raise RoutineFormatError("routine document needs a 'commands' list")
    cmds = tuple(_command_from_doc(c, devices, short_bound) for c in doc["commands"])
    if not cmds:
        raise RoutineFormatError("routine has no commands")
    return Routine(routine_id, cmds, submit_time, str(doc.get("name", "")))


def routine_to_doc(r: Routine, names: Mapping[int, str] | None = None) -> dict[str, Any]:
    def dev(d: int) -> Any:
        return names[d] if names else d

    return {
        "name": r.name,
        "commands": [
            {
                "device": dev(c.device),
                "target": c.target,
                "duration_ms": c.duration,
                "kind": c.kind.value,
                "necessity": c.necessity.value,
                **({"reads": True} if c.reads else {}),
            }
            for c in r.commands
        ],
    }


def assign_ids(routines: Iterable[Routine]) -> list[Routine]:
    """Renumber routines 0..n-1 by submit time, stable on input order."""
    ordered = sorted(enumerate(routines), key=lambda p: (p[1].submit_time, p[0]))
    return [
        Routine(i, r.commands, r.submit_time, r.name) for i, (_, r) in enumerate(ordered)
    ]


class SimulationEnd(Exception):
    pass


@dataclass
class SimClock:
    """Integer-millisecond clock over a heap keyed by (time, insertion seq)."""

    now: int = 0
    _queue: list = field(default_factory=list)
    _seq: itertools.count = field(default_factory=itertools.count)

    def schedule(self, time: int, event: Any, seq: int | None = None) -> None:
        """Queue ``event`` at ``time``; ties go to the lower ``seq``, which
        defaults to insertion order."""
        if time < self.now:
            raise ValueError(f"cannot schedule in the past ({time} < {self.now})")
        heapq.heappush(self._queue, (time, next(self._seq) if seq is None else seq, event))

    def advance_to_next_event(self) -> tuple[int, Any]:
        if not self._queue:
            raise SimulationEnd
        time, _, event = heapq.heappop(self._queue)
        self.now = time
        return time, event

    def __len__(self) -> int:
        return len(self._queue)

    def peek_time(self) -> int | None:
        return self._queue[0][0] if self._queue else None


def advance_to_next_event(clock: SimClock) -> tuple[int, Any]:
    return clock.advance_to_next_event()
