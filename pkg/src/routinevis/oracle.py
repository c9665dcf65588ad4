"""Serial-execution replay and the brute-force final-incongruence oracle."""

from __future__ import annotations

from typing import Iterable, Sequence

from . import kernels
from .kernels import FAIL, RESTART, WRITE
from .model import DeviceState
from .workload import Workload

MAX_ORACLE_ROUTINES = 9


def _encode(w: Workload, items: Sequence) -> tuple[list[int], list[int], list[list[tuple[int, int, int]]]]:
    devs = w.device_ids
    index = {d: i for i, d in enumerate(devs)}
    init = [w.initial[d] for d in devs]
    ops: list[list[tuple[int, int, int]]] = []
    for it in items:
        if isinstance(it, int):
            it = ("R", it)
        if it[0] == "R":
            r = w.routines[it[1]]
            ops.append([(index[c.device], WRITE, c.target) for c in r.commands])
        else:
            ops.append([(index[it[1]], FAIL if it[0] == "F" else RESTART, 0)])
    return devs, init, ops


def serial_execute(w: Workload, order: Iterable) -> dict[int, DeviceState | None]:
    """End states of running ``order`` (routine ids and/or failure/restart
    items) one after another on an ideal fabric.  Writes to a device that is
    down in the replay are lost."""
    items = list(order)
    devs, init, ops = _encode(w, items)
    out = kernels.replay(init, ops, list(range(len(items))))
    return dict(zip(devs, out))


def find_equivalent_order(
    w: Workload,
    end_states: dict[int, DeviceState | None],
    committed: Sequence[int],
    events: Sequence[tuple] = (),
    max_routines: int = MAX_ORACLE_ROUTINES,
) -> list | None:
    """First serial order (over committed routines and failure/restart
    items) whose replay reproduces ``end_states``, or None."""
    if len(committed) > max_routines:
        raise ValueError(f"oracle bound is {max_routines} routines, got {len(committed)}")
    items: list = [("R", rid) for rid in committed] + list(events)
    devs, init, ops = _encode(w, items)
    after = [-1] * len(items)
    # events on one device keep their detected order
    prev: dict[int, int] = {}
    for i, it in enumerate(items):
        if it[0] in ("F", "S"):
            after[i] = prev.get(it[1], -1)
            prev[it[1]] = i
    target = [end_states[d] for d in devs]
    found = kernels.find_serial_order(init, ops, target, after)
    return None if found is None else [items[i] for i in found]


def final_incongruence_oracle(
    w: Workload,
    end_states: dict[int, DeviceState | None],
    committed: Sequence[int],
    events: Sequence[tuple] = (),
) -> bool:
    """True iff no serial order of the committed routines (and events)
    yields ``end_states``."""
    return find_equivalent_order(w, end_states, committed, events) is None
