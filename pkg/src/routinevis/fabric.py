"""Emulated devices with injectable fail-stop/fail-recover faults and a
ping-based failure detector."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .model import DeviceState, FailureEvent, RestartEvent


class Health(str, enum.Enum):
    UP = "up"
    FAILED = "failed"


@dataclass(frozen=True)
class Fault:
    device: int
    fail_at: int
    restart_at: int | None = None
    # when set, the fault is anchored to this routine's submission and the
    # two times above are offsets from it
    at_submission: int | None = None

    def __post_init__(self) -> None:
        if self.restart_at is not None and self.restart_at <= self.fail_at:
            raise ValueError("restart must follow failure")


@dataclass
class DetectorConfig:
    ping_interval: int = 1000
    ack_timeout: int = 100
    implicit_ack: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.ack_timeout < self.ping_interval:
            raise ValueError("need 0 < ack_timeout < ping_interval")


@dataclass
class VirtualDevice:
    id: int
    state: DeviceState
    faults: list[Fault] = field(default_factory=list)
    last_ack: int | None = None

    def health(self, t: int) -> Health:
        for f in self.faults:
            if f.fail_at <= t and (f.restart_at is None or t < f.restart_at):
                return Health.FAILED
        return Health.UP

    def next_failure(self, t0: int, t1: int) -> int | None:
        """First failure instant in (t0, t1), if any."""
        times = [f.fail_at for f in self.faults if t0 < f.fail_at < t1]
        return min(times) if times else None


@dataclass(frozen=True)
class CommandOutcome:
    ok: bool
    time: int  # completion or failure report time


class Fabric:
    """The in-process device fabric.  State changes land at command completion."""

    def __init__(self, states: dict[int, DeviceState], faults: list[Fault] = (),
                 detector: DetectorConfig | None = None) -> None:
        self.devices = {d: VirtualDevice(d, s) for d, s in states.items()}
        for f in faults:
            if f.at_submission is None:
                self.devices[f.device].faults.append(f)
        for dev in self.devices.values():
            self._check(dev)
        self.detector = detector or DetectorConfig()

    @staticmethod
    def _check(dev: VirtualDevice) -> None:
        dev.faults.sort(key=lambda f: f.fail_at)
        for a, b in zip(dev.faults, dev.faults[1:]):
            if a.restart_at is None or a.restart_at > b.fail_at:
                raise ValueError(f"faults on device {dev.id} overlap")

    def add_fault(self, fault: Fault) -> None:
        """Register an absolute fault discovered during the run."""
        dev = self.devices[fault.device]
        dev.faults.append(fault)
        self._check(dev)

    def execute_command(self, device: int, duration: int, now: int) -> CommandOutcome:
        """Predict the outcome of a command dispatched at ``now``."""
        dev = self.devices[device]
        if dev.health(now) is Health.FAILED:
            return CommandOutcome(False, now + self.detector.ack_timeout)
        fail = dev.next_failure(now, now + duration + 1)
        if fail is not None:
            return CommandOutcome(False, fail)
        return CommandOutcome(True, now + duration)

    def complete(self, device: int, target: DeviceState, now: int) -> None:
        dev = self.devices[device]
        dev.state = target
        dev.last_ack = now

    def force_state(self, device: int, target: DeviceState) -> None:
        self.devices[device].state = target

    def detection_times(self, device: int) -> list[tuple[int, str]]:
        """Detector timeline for one device: (detect_time, "fail"/"restart")."""
        dev = self.devices[device]
        out = []
        for f in dev.faults:
            out.append((self._first_miss(dev, f.fail_at) + self.detector.ack_timeout, "fail"))
            if f.restart_at is not None:
                out.append((self._next_ping(f.restart_at), "restart"))
        return out

    def _next_ping(self, t: int) -> int:
        iv = self.detector.ping_interval
        return -(-t // iv) * iv

    def _first_miss(self, dev: VirtualDevice, fail_at: int) -> int:
        p = self._next_ping(fail_at)
        if self.detector.implicit_ack and dev.last_ack is not None:
            # a completion heard within the last interval stands in for the ping
            p = max(p, self._next_ping(dev.last_ack + self.detector.ping_interval))
        return p


class FailureDetector:
    """Explicit ping loop, stepped once per ping interval."""

    def __init__(self, fabric: Fabric) -> None:
        self.fabric = fabric
        self.cfg = fabric.detector
        self.believed: dict[int, Health] = {d: Health.UP for d in fabric.devices}
        self.last_heard: dict[int, int | None] = {d: None for d in fabric.devices}

    def heard(self, device: int, t: int) -> None:
        self.last_heard[device] = t

    def detector_step(self, now: int) -> list[FailureEvent | RestartEvent]:
        events: list[FailureEvent | RestartEvent] = []
        for d, dev in sorted(self.fabric.devices.items()):
            heard = self.last_heard[d]
            if (
                self.cfg.implicit_ack
                and self.believed[d] is Health.UP
                and heard is not None
                and now - self.cfg.ping_interval < heard <= now
            ):
                continue
            up = dev.health(now) is Health.UP
            if up:
                self.last_heard[d] = now
                if self.believed[d] is Health.FAILED:
                    self.believed[d] = Health.UP
                    events.append(RestartEvent(now, d))
            elif self.believed[d] is Health.UP:
                self.believed[d] = Health.FAILED
                events.append(FailureEvent(now + self.cfg.ack_timeout, d))
        return events
