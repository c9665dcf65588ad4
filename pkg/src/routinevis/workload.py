"""Workload container, file format, and synthetic workload generators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .fabric import Fault
from .model import (
    Command,
    Kind,
    Necessity,
    Routine,
    RoutineFormatError,
    assign_ids,
    classify_kind,
    parse_routine,
    routine_to_doc,
)


@dataclass
class Workload:
    devices: dict[int, str]
    routines: list[Routine]
    initial: dict[int, int] = field(default_factory=dict)
    faults: list[Fault] = field(default_factory=list)
    # closed-loop injection: keep this many routines in flight
    concurrency: int | None = None
    name: str = ""

    def __post_init__(self) -> None:
        for d in self.devices:
            self.initial.setdefault(d, 0)

    @property
    def device_ids(self) -> list[int]:
        return sorted(self.devices)

    def routine(self, rid: int) -> Routine:
        return self.routines[rid]

    def to_doc(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "devices": [
                {"id": d, "name": self.devices[d], "initial": self.initial[d]}
                for d in sorted(self.devices)
            ],
            "concurrency": self.concurrency,
            "routines": [
                {"id": r.id, "submit_time_ms": r.submit_time, **routine_to_doc(r)}
                for r in self.routines
            ],
            "faults": [_fault_doc(f) for f in self.faults],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True, separators=(",", ":"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Workload":
        try:
            devs = doc["devices"]
            devices = {int(d["id"]): str(d["name"]) for d in devs}
            initial = {int(d["id"]): int(d.get("initial", 0)) for d in devs}
            names = {v: k for k, v in devices.items()}
            routines = []
            for i, rd in enumerate(doc["routines"]):
                r = parse_routine(rd, names, routine_id=int(rd.get("id", i)),
                                  submit_time=int(rd.get("submit_time_ms", 0)))
                routines.append(r)
            faults = [
                Fault(int(f["device"]), int(f["fail_at_ms"]),
                      None if f.get("restart_at_ms") is None else int(f["restart_at_ms"]),
                      None if f.get("at_submission") is None else int(f["at_submission"]))
                for f in doc.get("faults", [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, RoutineFormatError):
                raise
            raise RoutineFormatError(f"malformed workload: {exc}") from None
        if [r.id for r in routines] != list(range(len(routines))):
            raise RoutineFormatError("routine ids must be 0..n-1 in order")
        return cls(devices, routines, initial, faults, doc.get("concurrency"), doc.get("name", ""))

    @classmethod
    def loads(cls, text: str) -> "Workload":
        return cls.from_doc(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "Workload":
        return cls.loads(Path(path).read_text())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Workload) and self.to_doc() == other.to_doc()


def _fault_doc(f: Fault) -> dict[str, Any]:
    doc = {"device": f.device, "fail_at_ms": f.fail_at, "restart_at_ms": f.restart_at}
    if f.at_submission is not None:
        doc["at_submission"] = f.at_submission
    return doc


@dataclass
class MicrobenchParams:
    R: int = 100
    rho: int = 4
    C: float = 3.0
    alpha: float = 0.05
    L_pct: float = 0.10
    L_mean: int = 20 * 60_000
    S_mean: int = 10_000
    M_pct: float = 1.0
    F_pct: float = 0.0

    def __post_init__(self) -> None:
        for name in ("L_pct", "M_pct", "F_pct"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if min(self.C, self.L_mean, self.S_mean) <= 0 or self.R < 1 or self.rho < 1:
            raise ValueError("counts and means must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")


def zipf_weights(n: int, alpha: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** alpha
    return w / w.sum()


def _normal_int(rng: np.random.Generator, mean: float, sd: float, lo: int = 1) -> int:
    return max(lo, int(round(rng.normal(mean, sd))))


FAULT_TIMINGS = ("progress", "absolute")


def generate_microbenchmark(p: MicrobenchParams, device_count: int = 25, seed: int = 0,
                            fault_timing: str = "progress") -> Workload:
    """Seeded synthetic workload.

    ``fault_timing="progress"`` anchors each failure to the submission of a
    uniformly chosen routine, so every model sees it at the same point of
    workload progress.  ``"absolute"`` draws a wall time instead, from
    [0, total ideal runtime / rho).
    """
    if device_count < 1:
        raise ValueError("device_count must be >= 1")
    if fault_timing not in FAULT_TIMINGS:
        raise ValueError(f"fault_timing must be one of {FAULT_TIMINGS}")
    rng = np.random.default_rng(seed)
    weights = zipf_weights(device_count, p.alpha)
    routines = []
    for rid in range(p.R):
        k = min(device_count, _normal_int(rng, p.C, p.C / 3))
        devs = rng.choice(device_count, size=k, replace=False, p=weights)
        is_long = rng.random() < p.L_pct
        long_slot = int(rng.integers(k)) if is_long else -1
        cmds = []
        for i, d in enumerate(devs):
            mean = p.L_mean if i == long_slot else p.S_mean
            dur = _normal_int(rng, mean, 0.1 * mean)
            must = rng.random() < p.M_pct
            cmds.append(Command(
                int(d), int(rng.integers(1, 100)), dur, classify_kind(dur),
                Necessity.MUST if must else Necessity.BEST_EFFORT,
            ))
        routines.append(Routine(rid, tuple(cmds), 0))
    faults = []
    n_fail = int(round(p.F_pct * device_count))
    if n_fail:
        horizon = max(1, sum(r.ideal_duration for r in routines) // p.rho)
        for d in sorted(rng.choice(device_count, size=n_fail, replace=False).tolist()):
            if fault_timing == "progress":
                faults.append(Fault(int(d), 0, None, int(rng.integers(0, p.R))))
            else:
                faults.append(Fault(int(d), int(rng.integers(0, horizon))))
    devices = {d: f"dev{d}" for d in range(device_count)}
    return Workload(devices, routines, {}, faults, p.rho, f"micro-seed{seed}")


FACTORY_CLASS_PROBS = (0.6, 0.3, 0.1)


def factory_layout(stages: int = 50, local_per_stage: int = 2, shared_per_boundary: int = 1,
                   globals_: int = 5) -> dict[str, Any]:
    """Device ids per class: stage-local, boundary-shared, global."""
    next_id = 0
    local: list[list[int]] = []
    for _ in range(stages):
        local.append(list(range(next_id, next_id + local_per_stage)))
        next_id += local_per_stage
    boundary: list[list[int]] = []
    for _ in range(stages - 1):
        boundary.append(list(range(next_id, next_id + shared_per_boundary)))
        next_id += shared_per_boundary
    glob = list(range(next_id, next_id + globals_))
    next_id += globals_
    neighbor = []
    for s in range(stages):
        nb: list[int] = []
        if s > 0:
            nb += boundary[s - 1]
        if s < stages - 1:
            nb += boundary[s]
        neighbor.append(nb)
    return {"local": local, "neighbor": neighbor, "global": glob, "count": next_id}


def generate_factory(seed: int = 0, stages: int = 50, routines_per_stage: int = 4,
                     commands: int = 3, cmd_mean: int = 10_000) -> Workload:
    rng = np.random.default_rng(seed)
    lay = factory_layout(stages)
    items: list[tuple[int, int, tuple[Command, ...]]] = []
    for s in range(stages):
        t = 0
        for j in range(routines_per_stage):
            cmds = []
            for _ in range(commands):
                cls = rng.choice(3, p=FACTORY_CLASS_PROBS)
                pool = [lay["local"][s], lay["neighbor"][s], lay["global"]][int(cls)]
                dev = int(rng.choice(pool))
                cmds.append(Command(dev, int(rng.integers(1, 100)),
                                    _normal_int(rng, cmd_mean, 0.1 * cmd_mean)))
            cmds_t = tuple(cmds)
            items.append((t, s * routines_per_stage + j, cmds_t))
            # back-to-back so the worker never idles
            t += sum(c.duration for c in cmds_t)
    items.sort(key=lambda x: (x[0], x[1]))
    routines = [Routine(i, cmds, t, f"stage{key // routines_per_stage}") for i, (t, key, cmds) in enumerate(items)]
    devices = {d: f"dev{d}" for d in range(lay["count"])}
    return Workload(devices, routines, {}, [], None, f"factory-seed{seed}")


# ----------------------------------------------------------------- scenarios

def _topo_order(names: list[str], before: list[tuple[str, str]]) -> list[str]:
    preds: dict[str, set[str]] = {n: set() for n in names}
    for a, b in before:
        if a not in preds or b not in preds:
            raise RoutineFormatError(f"constraint names unknown routine: {a!r} < {b!r}")
        preds[b].add(a)
    out: list[str] = []
    ready = [n for n in names if not preds[n]]
    while ready:
        n = ready.pop(0)
        out.append(n)
        for m in names:
            if n in preds[m]:
                preds[m].discard(n)
                if not preds[m] and m not in out and m not in ready:
                    ready.append(m)
    if len(out) != len(names):
        raise RoutineFormatError("scenario constraints are cyclic")
    return out


SCENARIO_MODES = ("fixed_once", "probabilistic")


def load_scenario(source: str | Path | dict[str, Any], seed: int = 0) -> Workload:
    """Instantiate a scenario document with random trigger times that respect
    its ``before`` constraints.

    ``source`` is a path, the name of a shipped scenario (``"morning"``,
    ``"party"``) or an already parsed document.  In ``fixed_once`` mode every
    template runs exactly once; in ``probabilistic`` mode a template runs
    with its ``probability`` (default 1) and constraints on skipped
    templates are dropped.
    """
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        text = path.read_text() if path.is_file() else scenario_text(str(source))
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RoutineFormatError(f"invalid scenario JSON: {exc}") from None
    try:
        dev_names = list(doc["devices"])
        templates = list(doc["routines"])
        span = int(doc["span_ms"])
        before = [(str(a), str(b)) for a, b in doc.get("before", [])]
        mode = doc.get("mode", "fixed_once")
    except (KeyError, TypeError, ValueError) as exc:
        raise RoutineFormatError(f"malformed scenario: {exc}") from None
    if mode not in SCENARIO_MODES:
        raise RoutineFormatError(f"unknown scenario mode {mode!r}")
    names = {n: i for i, n in enumerate(dev_names)}
    by_name = {t["name"]: t for t in templates}
    # validate against the full template set so cycles are always reported
    _topo_order(list(by_name), before)
    rng = np.random.default_rng(seed)
    if mode == "probabilistic":
        keep = [n for n in by_name if rng.random() < float(by_name[n].get("probability", 1.0))]
        by_name = {n: by_name[n] for n in keep}
        before = [(a, b) for a, b in before if a in by_name and b in by_name]
    order = _topo_order(list(by_name), before)
    preds = {n: [a for a, b in before if b == n] for n in by_name}
    trigger: dict[str, int] = {}
    for n in order:
        t = by_name[n]
        if "trigger_ms" in t:
            trigger[n] = int(t["trigger_ms"])
            continue
        lo = max((trigger[a] + 1 for a in preds[n]), default=0)
        hi = max(lo, span)
        # leave room for whatever must still follow this routine
        trigger[n] = int(rng.integers(lo, lo + max(1, (hi - lo) // 2) + 1))
    routines = [
        parse_routine(by_name[n], names, routine_id=0, submit_time=trigger[n])
        for n in by_name
    ]
    devices = {i: n for n, i in names.items()}
    return Workload(devices, assign_ids(routines), {}, [], None, doc.get("name", ""))


def scenario_text(name: str) -> str:
    try:
        return resources.files("routinevis.scenarios").joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise RoutineFormatError(f"no shipped scenario named {name!r}") from None


# ------------------------------------------------------- small fixed examples

def fig2_workload(unit: int = 1000) -> Workload:
    """Breakfast and cleaning example: five unit-duration routines over
    coffee maker, pancake maker, robot vacuum and mop, all submitted at 0."""
    devices = {0: "coffee", 1: "pancake", 2: "roomba", 3: "mop"}

    def on(d: int) -> Command:
        return Command(d, 1, unit)

    routines = [
        Routine(0, (on(0), on(1)), 0, "breakfast_1"),
        Routine(1, (on(0), on(1)), 0, "breakfast_2"),
        Routine(2, (on(1),), 0, "pancakes"),
        Routine(3, (on(2), on(3)), 0, "cleaning"),
        Routine(4, (on(3),), 0, "mop"),
    ]
    return Workload(devices, routines, name="fig2")


def all_on_all_off(k: int, offset_ms: int, seed: int = 0, mean: int = 100, sd: int = 30) -> Workload:
    """Two routines over the same ``k`` devices: one switches all of them on,
    the other all off, submitted ``offset_ms`` apart.  Per-command durations
    are N(mean, sd) ms, drawn independently for each routine, so the two
    write sequences drift against each other."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    on = tuple(Command(d, 1, _normal_int(rng, mean, sd)) for d in range(k))
    off = tuple(Command(d, 0, _normal_int(rng, mean, sd)) for d in range(k))
    routines = [Routine(0, on, 0, "all_on"), Routine(1, off, offset_ms, "all_off")]
    devices = {d: f"light{d}" for d in range(k)}
    return Workload(devices, routines, {d: 0 for d in range(k)}, name=f"onoff-k{k}-o{offset_ms}")


def jit_starvation_workload(rounds: int = 20, duration: int = 1000) -> Workload:
    """Adversarial stream for the JiT wait queue.

    ``R_AB`` (A on, B to 5) arrives while ``R_A`` holds A.  From then on a
    one-command ``R_A`` (A off) and ``R_B`` (B to 10) arrive alternately,
    each just after its predecessor on the same device is done, so A and B
    are never free at the same time.  Without an aging rule ``R_AB`` waits
    for the whole stream.
    """
    if rounds < 1 or duration < 4:
        raise ValueError("need rounds >= 1 and duration >= 4")
    half = duration // 2
    rs = [Routine(0, (Command(0, 1, duration), Command(1, 5, duration)), 1, "R_AB")]
    for k in range(rounds):
        rs.append(Routine(0, (Command(0, 0, duration),), k * (duration + 1), "R_A"))
        rs.append(Routine(0, (Command(1, 10, duration),), half + k * (duration + 1), "R_B"))
    return Workload({0: "A", 1: "B"}, assign_ids(rs), name=f"jit-starvation-{rounds}")
