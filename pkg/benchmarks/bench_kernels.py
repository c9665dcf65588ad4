"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--quick]

Each case runs both implementations on identical inputs, checks that the
answers agree, and reports the best-of-N wall time and the speed-up.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from routinevis import _pykernels

try:
    from routinevis import _ckernels
except ImportError:
    sys.exit("compiled kernels are not built; run: python3 setup.py build_ext --inplace")

WRITE = _pykernels.WRITE


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def search_case(n_routines: int, n_devices: int, seed: int):
    """Routines that all share device 0 (so no pruning applies) and whose
    target is unreachable: the search must exhaust every order."""
    rng = np.random.default_rng(seed)
    init = [0] * n_devices
    items = []
    for r in range(n_routines):
        devs = [0] + sorted(rng.choice(np.arange(1, n_devices), size=2, replace=False).tolist())
        items.append([(int(d), WRITE, r + 1) for d in devs])
    target = [-1] * n_devices
    return init, items, target, [-1] * n_routines


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()
    repeat = 3 if args.quick else 5
    k = 7 if args.quick else 8

    rows = []

    init, items, target, after = search_case(k, 12, 0)
    py = _pykernels.find_serial_order(init, items, target, after)
    cy = _ckernels.find_serial_order(init, items, target, after)
    assert py == cy
    rows.append((f"find_serial_order, {k} routines, exhaustive",
                 best_of(lambda: _pykernels.find_serial_order(init, items, target, after), repeat),
                 best_of(lambda: _ckernels.find_serial_order(init, items, target, after), repeat)))

    rng = np.random.default_rng(1)
    n_items, n_dev = (2_000, 50) if args.quick else (20_000, 200)
    ritems = [[(int(rng.integers(n_dev)), WRITE, int(rng.integers(100))) for _ in range(3)]
              for _ in range(n_items)]
    order = rng.permutation(n_items).tolist()
    rinit = [0] * n_dev
    assert _pykernels.replay(rinit, ritems, order) == _ckernels.replay(rinit, ritems, order)
    rows.append((f"replay, {n_items} items",
                 best_of(lambda: _pykernels.replay(rinit, ritems, order), repeat),
                 best_of(lambda: _ckernels.replay(rinit, ritems, order), repeat)))

    n = 1_000 if args.quick else 3_000
    seq = rng.permutation(n).tolist()
    assert _pykernels.count_inversions(seq) == _ckernels.count_inversions(seq)
    rows.append((f"count_inversions, n={n}",
                 best_of(lambda: _pykernels.count_inversions(seq), repeat),
                 best_of(lambda: _ckernels.count_inversions(seq), repeat)))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'python ms':>10}  {'cython ms':>10}  {'speed-up':>8}")
    for name, tp, tc in rows:
        print(f"{name:<{width}}  {tp * 1e3:>10.2f}  {tc * 1e3:>10.2f}  {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
