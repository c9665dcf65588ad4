"""Reference implementations of the hot loops.

Items are lists of ``(device, op, value)`` triples over dense device
indices; ``op`` is WRITE, FAIL or RESTART.  A device that ends down is
reported as ``None``.
"""

from __future__ import annotations

WRITE, FAIL, RESTART = 0, 1, 2


def replay(init, items, order):
    val = list(init)
    down = [False] * len(val)
    for i in order:
        for d, op, v in items[i]:
            if op == WRITE:
                if not down[d]:
                    val[d] = v
            elif op == FAIL:
                down[d] = True
            else:
                down[d] = False
    return [None if down[d] else val[d] for d in range(len(val))]


def find_serial_order(init, items, target, after):
    """Depth-first search for an order of all items whose replay ends in
    ``target``.  ``after[i]`` is an item that must precede item ``i`` (or
    -1).  Returns the first matching order or None."""
    n = len(items)
    nd = len(init)
    val = list(init)
    down = [False] * nd
    used = [False] * n
    order: list[int] = []
    devsets = [{d for d, _, _ in it} for it in items]
    # adjacent items over disjoint devices commute: explore only the
    # ascending arrangement of such a pair
    indep = [[not (devsets[i] & devsets[j]) for j in range(n)] for i in range(n)]

    def matches() -> bool:
        for d in range(nd):
            t = target[d]
            if down[d]:
                if t is not None:
                    return False
            elif t is None or val[d] != t:
                return False
        return True

    def dfs() -> bool:
        if len(order) == n:
            return matches()
        for i in range(n):
            if used[i]:
                continue
            a = after[i]
            if a >= 0 and not used[a]:
                continue
            if order and i < order[-1] and indep[i][order[-1]]:
                continue
            saved = [(d, val[d], down[d]) for d, _, _ in items[i]]
            for d, op, v in items[i]:
                if op == WRITE:
                    if not down[d]:
                        val[d] = v
                elif op == FAIL:
                    down[d] = True
                else:
                    down[d] = False
            used[i] = True
            order.append(i)
            if dfs():
                return True
            order.pop()
            used[i] = False
            for d, v0, dn in reversed(saved):
                val[d] = v0
                down[d] = dn
        return False

    return list(order) if dfs() else None


def count_inversions(seq):
    """Number of pairs i < j with seq[i] > seq[j] (merge sort)."""
    a = list(seq)
    if len(a) < 2:
        return 0
    mid = len(a) // 2
    left, right = a[:mid], a[mid:]
    inv = count_inversions(left) + count_inversions(right)
    left.sort()
    right.sort()
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            i += 1
        else:
            inv += len(left) - i
            j += 1
    return inv
