"""Pure-Python/numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_ext.pyx``.
Graphs are passed as CSR arrays (``ptr``/``idx`` pairs, int64) over node
indices ``0..n-1``; the out-CSR lists successors, the in-CSR predecessors.
"""

from __future__ import annotations

import heapq
from collections import deque

import numpy as np


def _ci_one(optr, oidx, kout, alive, ell, i, mark, stamp):
    ki = kout[i]
    if ki <= 1:
        return 0
    mark[i] = stamp
    frontier = [i]
    for _ in range(ell):
        nxt = []
        for v in frontier:
            for e in range(optr[v], optr[v + 1]):
                w = oidx[e]
                if alive[w] and mark[w] != stamp:
                    mark[w] = stamp
                    nxt.append(w)
        frontier = nxt
        if not frontier:
            return 0
    total = 0
    for j in frontier:
        kj = kout[j]
        if kj > 0:
            total += kj - 1
    return (ki - 1) * total


def ci_values(out_ptr, out_idx, kout, alive, ell, nodes):
    """CI_out of each node in ``nodes`` on the sub-graph of alive nodes."""
    optr = out_ptr.tolist()
    oidx = out_idx.tolist()
    ko = kout.tolist()
    al = alive.tolist()
    mark = [-1] * len(ko)
    res = np.zeros(len(nodes), dtype=np.int64)
    for s, i in enumerate(np.asarray(nodes).tolist()):
        res[s] = _ci_one(optr, oidx, ko, al, int(ell), i, mark, s)
    return res


def _largest_alive_component(optr, oidx, iptr, iidx, alive):
    n = len(alive)
    seen = [False] * n
    best = 0
    for s in range(n):
        if not alive[s] or seen[s]:
            continue
        seen[s] = True
        size = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            size += 1
            for ptr, idx in ((optr, oidx), (iptr, iidx)):
                for e in range(ptr[v], ptr[v + 1]):
                    w = idx[e]
                    if alive[w] and not seen[w]:
                        seen[w] = True
                        queue.append(w)
        if size > best:
            best = size
    return best


def largest_component(out_ptr, out_idx, in_ptr, in_idx, alive):
    return _largest_alive_component(
        out_ptr.tolist(), out_idx.tolist(), in_ptr.tolist(), in_idx.tolist(),
        [bool(a) for a in alive.tolist()],
    )


def ci_removal(out_ptr, out_idx, in_ptr, in_idx, ell, gc_limit, check_every):
    """Greedy max-CI removal with lazy heap invalidation.

    Returns ``(order, values)``. Removal stops at the first periodic check
    (every ``check_every`` removals) where the largest weakly connected
    component has at most ``gc_limit`` nodes, so the caller must truncate to
    the exact stopping step.
    """
    optr = out_ptr.tolist()
    oidx = out_idx.tolist()
    iptr = in_ptr.tolist()
    iidx = in_idx.tolist()
    n = len(optr) - 1
    ell = int(ell)
    kout = [optr[v + 1] - optr[v] for v in range(n)]
    alive = [True] * n
    mark = [-1] * n
    stamp = 0
    version = [0] * n
    ci = [0] * n
    heap = []
    for v in range(n):
        ci[v] = _ci_one(optr, oidx, kout, alive, ell, v, mark, stamp)
        stamp += 1
        heap.append((-ci[v], -kout[v], v, 0))
    heapq.heapify(heap)

    order = []
    values = []
    if _largest_alive_component(optr, oidx, iptr, iidx, alive) <= gc_limit:
        return np.array(order, dtype=np.int64), np.array(values, dtype=np.int64)

    rmark = [-1] * n
    rstamp = 0
    since_check = 0
    while heap:
        _, _, r, ver = heapq.heappop(heap)
        if not alive[r] or ver != version[r]:
            continue
        # nodes within ell+1 reverse hops of r, found before r disappears
        rmark[r] = rstamp
        affected = []
        frontier = [r]
        for _ in range(ell + 1):
            nxt = []
            for v in frontier:
                for e in range(iptr[v], iptr[v + 1]):
                    w = iidx[e]
                    if alive[w] and rmark[w] != rstamp:
                        rmark[w] = rstamp
                        nxt.append(w)
            affected.extend(nxt)
            frontier = nxt
        rstamp += 1

        alive[r] = False
        for e in range(iptr[r], iptr[r + 1]):
            p = iidx[e]
            if alive[p]:
                kout[p] -= 1
        order.append(r)
        values.append(ci[r])

        for j in affected:
            c = _ci_one(optr, oidx, kout, alive, ell, j, mark, stamp)
            stamp += 1
            ci[j] = c
            version[j] += 1
            heapq.heappush(heap, (-c, -kout[j], j, version[j]))

        since_check += 1
        if since_check >= check_every:
            since_check = 0
            if _largest_alive_component(optr, oidx, iptr, iidx, alive) <= gc_limit:
                break
    return np.array(order, dtype=np.int64), np.array(values, dtype=np.int64)


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def gc_trajectory(out_ptr, out_idx, in_ptr, in_idx, order):
    """Largest WCC size after 0, 1, ..., len(order) removals.

    Computed backwards: start from the residual graph and re-insert the
    removed nodes in reverse order with a union-find.
    """
    optr = out_ptr.tolist()
    oidx = out_idx.tolist()
    iptr = in_ptr.tolist()
    iidx = in_idx.tolist()
    n = len(optr) - 1
    order = np.asarray(order).tolist()
    present = [False] * n
    parent = list(range(n))
    size = [1] * n
    best = 0

    def add(v):
        nonlocal best
        present[v] = True
        if best < 1:
            best = 1
        for ptr, idx in ((optr, oidx), (iptr, iidx)):
            for e in range(ptr[v], ptr[v + 1]):
                w = idx[e]
                if not present[w]:
                    continue
                a = _find(parent, v)
                b = _find(parent, w)
                if a == b:
                    continue
                if size[a] < size[b]:
                    a, b = b, a
                parent[b] = a
                size[a] += size[b]
                if size[a] > best:
                    best = size[a]

    removed = set(order)
    for v in range(n):
        if v not in removed:
            add(v)
    traj = [0] * (len(order) + 1)
    traj[len(order)] = best
    for s in range(len(order) - 1, -1, -1):
        add(order[s])
        traj[s] = best
    return np.array(traj, dtype=np.int64)


def wcc_labels(n, out_ptr, out_idx):
    """Weakly connected component label per node, numbered by first node."""
    optr = out_ptr.tolist()
    oidx = out_idx.tolist()
    parent = list(range(n))
    size = [1] * n
    for v in range(n):
        for e in range(optr[v], optr[v + 1]):
            a = _find(parent, v)
            b = _find(parent, oidx[e])
            if a != b:
                if size[a] < size[b]:
                    a, b = b, a
                parent[b] = a
                size[a] += size[b]
    labels = np.empty(n, dtype=np.int64)
    names = {}
    for v in range(n):
        labels[v] = names.setdefault(_find(parent, v), len(names))
    return labels


def loess(y, rw, use_rw, span, degree, xs, nleft, nright):
    """Tricube-weighted local constant/linear fit at positions ``xs``.

    Positions are 1-based like the classic STL code; point ``k`` uses the
    observations ``nleft[k]..nright[k]``. Returns ``(values, ok)``; ``ok`` is
    false where every weight vanished.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    xs = np.asarray(xs, dtype=np.float64)
    nleft = np.asarray(nleft, dtype=np.int64)
    nright = np.asarray(nright, dtype=np.int64)
    m = xs.shape[0]
    if m == 0:
        return np.zeros(0), np.zeros(0, dtype=bool)
    width = int((nright - nleft).max()) + 1
    j = nleft[:, None] + np.arange(width)[None, :]
    inside = j <= nright[:, None]
    jc = np.where(inside, j, nleft[:, None])
    jf = jc.astype(np.float64)

    h = np.maximum(xs - nleft, nright - xs)
    if span > n:
        h = h + (span - n) // 2
    h9 = 0.999 * h
    h1 = 0.001 * h
    r = np.abs(jf - xs[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        tri = (1.0 - (r / h[:, None]) ** 3) ** 3
    w = np.where(r <= h1[:, None], 1.0, tri)
    w = np.where((r <= h9[:, None]) & inside, w, 0.0)
    if use_rw:
        w = w * np.asarray(rw, dtype=np.float64)[jc - 1]
    a = w.sum(axis=1)
    ok = a > 0.0
    safe = np.where(ok, a, 1.0)
    w = w / safe[:, None]
    if degree > 0:
        centre = (w * jf).sum(axis=1)
        c = (w * (jf - centre[:, None]) ** 2).sum(axis=1)
        fit = (h > 0) & (np.sqrt(c) > 0.001 * (n - 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(fit, (xs - centre) / np.where(fit, c, 1.0), 0.0)
        w = np.where(fit[:, None], w * (slope[:, None] * (jf - centre[:, None]) + 1.0), w)
    ys = (w * y[jc - 1]).sum(axis=1)
    ys = np.where(ok, ys, 0.0)
    return ys, ok
