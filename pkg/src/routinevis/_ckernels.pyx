# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``; same contracts."""

from libc.stdlib cimport malloc, free

cdef enum:
    WRITE = 0
    FAIL = 1
    RESTART = 2


cdef struct Op:
    int dev
    int op
    long long val


cdef struct Ctx:
    int n
    int nd
    Op* ops
    int* start      # ops of item i are ops[start[i]:start[i+1]]
    int* after
    long long* val
    char* down
    long long* target
    char* target_none
    char* used
    int* order
    int depth
    long long* saved_val
    char* saved_down
    char* indep     # n*n, 1 if items touch disjoint devices


cdef inline void apply_item(Ctx* c, int i) noexcept nogil:
    cdef int k, d
    for k in range(c.start[i], c.start[i + 1]):
        d = c.ops[k].dev
        if c.ops[k].op == WRITE:
            if not c.down[d]:
                c.val[d] = c.ops[k].val
        elif c.ops[k].op == FAIL:
            c.down[d] = 1
        else:
            c.down[d] = 0


cdef inline bint matches(Ctx* c) noexcept nogil:
    cdef int d
    for d in range(c.nd):
        if c.down[d]:
            if not c.target_none[d]:
                return 0
        elif c.target_none[d] or c.val[d] != c.target[d]:
            return 0
    return 1


cdef bint dfs(Ctx* c) noexcept nogil:
    cdef int i, k, d, a, base
    if c.depth == c.n:
        return matches(c)
    for i in range(c.n):
        if c.used[i]:
            continue
        a = c.after[i]
        if a >= 0 and not c.used[a]:
            continue
        if c.depth > 0 and i < c.order[c.depth - 1] and c.indep[i * c.n + c.order[c.depth - 1]]:
            continue
        base = c.start[i]
        for k in range(c.start[i], c.start[i + 1]):
            d = c.ops[k].dev
            c.saved_val[k] = c.val[d]
            c.saved_down[k] = c.down[d]
        apply_item(c, i)
        c.used[i] = 1
        c.order[c.depth] = i
        c.depth += 1
        if dfs(c):
            return 1
        c.depth -= 1
        c.used[i] = 0
        for k in range(c.start[i + 1] - 1, base - 1, -1):
            d = c.ops[k].dev
            c.val[d] = c.saved_val[k]
            c.down[d] = c.saved_down[k]
    return 0


def replay(init, items, order):
    cdef int nd = len(init)
    val = list(init)
    down = [False] * nd
    for i in order:
        for d, op, v in items[i]:
            if op == WRITE:
                if not down[d]:
                    val[d] = v
            elif op == FAIL:
                down[d] = True
            else:
                down[d] = False
    return [None if down[d] else val[d] for d in range(nd)]


def find_serial_order(init, items, target, after):
    cdef Ctx c
    cdef int i, k, total = 0
    cdef bint found
    c.n = len(items)
    c.nd = len(init)
    for it in items:
        total += len(it)
    c.ops = <Op*> malloc(max(1, total) * sizeof(Op))
    c.start = <int*> malloc((c.n + 1) * sizeof(int))
    c.after = <int*> malloc(max(1, c.n) * sizeof(int))
    c.used = <char*> malloc(max(1, c.n))
    c.order = <int*> malloc(max(1, c.n) * sizeof(int))
    c.val = <long long*> malloc(max(1, c.nd) * sizeof(long long))
    c.down = <char*> malloc(max(1, c.nd))
    c.target = <long long*> malloc(max(1, c.nd) * sizeof(long long))
    c.target_none = <char*> malloc(max(1, c.nd))
    c.saved_val = <long long*> malloc(max(1, total) * sizeof(long long))
    c.saved_down = <char*> malloc(max(1, total))
    c.indep = <char*> malloc(max(1, c.n * c.n))
    try:
        devsets = [{op[0] for op in it} for it in items]
        for i in range(c.n):
            for k in range(c.n):
                c.indep[i * c.n + k] = not (devsets[i] & devsets[k])
        k = 0
        for i in range(c.n):
            c.start[i] = k
            c.after[i] = after[i]
            c.used[i] = 0
            for d, op, v in items[i]:
                c.ops[k].dev = d
                c.ops[k].op = op
                c.ops[k].val = v
                k += 1
        c.start[c.n] = k
        for i in range(c.nd):
            c.val[i] = init[i]
            c.down[i] = 0
            t = target[i]
            c.target_none[i] = t is None
            c.target[i] = 0 if t is None else t
        c.depth = 0
        with nogil:
            found = dfs(&c)
        if not found:
            return None
        return [c.order[i] for i in range(c.n)]
    finally:
        free(c.ops); free(c.start); free(c.after); free(c.used); free(c.order)
        free(c.val); free(c.down); free(c.target); free(c.target_none)
        free(c.saved_val); free(c.saved_down); free(c.indep)


def count_inversions(seq):
    cdef int n = len(seq)
    cdef long long inv = 0
    cdef int i, j
    cdef long long* a = <long long*> malloc(max(1, n) * sizeof(long long))
    try:
        for i in range(n):
            a[i] = seq[i]
        with nogil:
            for i in range(n):
                for j in range(i + 1, n):
                    if a[i] > a[j]:
                        inv += 1
        return inv
    finally:
        free(a)
