# distutils: language = c++
"""Compiled kernels; same signatures and results as ``_pure``."""

import numpy as np

from libc.math cimport fabs, sqrt
from libc.stdint cimport int64_t, uint8_t
from libcpp.pair cimport pair
from libcpp.queue cimport priority_queue
from libcpp.vector cimport vector

ctypedef pair[int64_t, int64_t] pii
ctypedef pair[pii, pii] entry_t


cdef int64_t _ci_one(const int64_t[::1] optr, const int64_t[::1] oidx,
                     int64_t[::1] kout, uint8_t[::1] alive, int ell, int64_t i,
                     int64_t[::1] mark, int64_t stamp, int64_t[::1] queue) noexcept nogil:
    cdef int64_t ki = kout[i]
    if ki <= 1:
        return 0
    cdef int64_t head = 0, lo = 0, tail = 1, depth, v, w, e, total = 0
    mark[i] = stamp
    queue[0] = i
    for depth in range(ell):
        lo = tail
        while head < lo:
            v = queue[head]
            head += 1
            for e in range(optr[v], optr[v + 1]):
                w = oidx[e]
                if alive[w] and mark[w] != stamp:
                    mark[w] = stamp
                    queue[tail] = w
                    tail += 1
        if tail == lo:
            return 0
    for e in range(lo, tail):
        w = kout[queue[e]]
        if w > 0:
            total += w - 1
    return (ki - 1) * total


cdef int64_t _largest(const int64_t[::1] optr, const int64_t[::1] oidx,
                      const int64_t[::1] iptr, const int64_t[::1] iidx,
                      uint8_t[::1] alive, int64_t[::1] seen, int64_t stamp,
                      int64_t[::1] queue) noexcept nogil:
    cdef int64_t n = alive.shape[0]
    cdef int64_t s, v, w, e, head, tail, best = 0
    for s in range(n):
        if not alive[s] or seen[s] == stamp:
            continue
        seen[s] = stamp
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(optr[v], optr[v + 1]):
                w = oidx[e]
                if alive[w] and seen[w] != stamp:
                    seen[w] = stamp
                    queue[tail] = w
                    tail += 1
            for e in range(iptr[v], iptr[v + 1]):
                w = iidx[e]
                if alive[w] and seen[w] != stamp:
                    seen[w] = stamp
                    queue[tail] = w
                    tail += 1
        if tail > best:
            best = tail
    return best


def ci_values(const int64_t[::1] out_ptr, const int64_t[::1] out_idx,
              kout, alive, int ell, nodes):
    cdef int64_t[::1] ko = np.ascontiguousarray(kout, dtype=np.int64)
    cdef uint8_t[::1] al = np.ascontiguousarray(alive, dtype=np.uint8)
    cdef int64_t[::1] nd = np.ascontiguousarray(nodes, dtype=np.int64)
    cdef int64_t n = ko.shape[0]
    cdef int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    res = np.zeros(nd.shape[0], dtype=np.int64)
    cdef int64_t[::1] out = res
    cdef int64_t s
    with nogil:
        for s in range(nd.shape[0]):
            out[s] = _ci_one(out_ptr, out_idx, ko, al, ell, nd[s], mark, s, queue)
    return res


def largest_component(const int64_t[::1] out_ptr, const int64_t[::1] out_idx,
                      const int64_t[::1] in_ptr, const int64_t[::1] in_idx, alive):
    cdef uint8_t[::1] al = np.ascontiguousarray(alive, dtype=np.uint8)
    cdef int64_t n = al.shape[0]
    cdef int64_t[::1] seen = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    return _largest(out_ptr, out_idx, in_ptr, in_idx, al, seen, 0, queue)


def ci_removal(const int64_t[::1] out_ptr, const int64_t[::1] out_idx,
               const int64_t[::1] in_ptr, const int64_t[::1] in_idx,
               int ell, int64_t gc_limit, int64_t check_every):
    cdef int64_t n = out_ptr.shape[0] - 1
    cdef int64_t[::1] kout = np.diff(np.asarray(out_ptr)).astype(np.int64)
    cdef uint8_t[::1] alive = np.ones(n, dtype=np.uint8)
    cdef int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] rmark = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] seen = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] version = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] ci = np.zeros(n, dtype=np.int64)
    cdef vector[int64_t] order
    cdef vector[int64_t] values
    cdef vector[int64_t] affected
    cdef priority_queue[entry_t] heap
    cdef entry_t top
    cdef int64_t v, r, w, e, j, depth, head, lo, tail, c
    cdef int64_t stamp = 0, rstamp = 0, sstamp = 0, since = 0

    with nogil:
        for v in range(n):
            ci[v] = _ci_one(out_ptr, out_idx, kout, alive, ell, v, mark, stamp, queue)
            stamp += 1
            heap.push(entry_t(pii(ci[v], kout[v]), pii(-v, 0)))

        if _largest(out_ptr, out_idx, in_ptr, in_idx, alive, seen, sstamp, queue) > gc_limit:
            sstamp += 1
            while not heap.empty():
                top = heap.top()
                heap.pop()
                r = -top.second.first
                if not alive[r] or top.second.second != version[r]:
                    continue
                # reverse BFS to depth ell+1 before r is removed
                affected.clear()
                rmark[r] = rstamp
                queue[0] = r
                head = 0
                tail = 1
                for depth in range(ell + 1):
                    lo = tail
                    while head < lo:
                        v = queue[head]
                        head += 1
                        for e in range(in_ptr[v], in_ptr[v + 1]):
                            w = in_idx[e]
                            if alive[w] and rmark[w] != rstamp:
                                rmark[w] = rstamp
                                queue[tail] = w
                                tail += 1
                                affected.push_back(w)
                    if tail == lo:
                        break
                rstamp += 1

                alive[r] = 0
                for e in range(in_ptr[r], in_ptr[r + 1]):
                    w = in_idx[e]
                    if alive[w]:
                        kout[w] -= 1
                order.push_back(r)
                values.push_back(ci[r])

                for j in range(<int64_t>affected.size()):
                    w = affected[j]
                    c = _ci_one(out_ptr, out_idx, kout, alive, ell, w, mark, stamp, queue)
                    stamp += 1
                    ci[w] = c
                    version[w] += 1
                    heap.push(entry_t(pii(c, kout[w]), pii(-w, version[w])))

                since += 1
                if since >= check_every:
                    since = 0
                    c = _largest(out_ptr, out_idx, in_ptr, in_idx, alive, seen, sstamp, queue)
                    sstamp += 1
                    if c <= gc_limit:
                        break

    res_order = np.empty(order.size(), dtype=np.int64)
    res_values = np.empty(values.size(), dtype=np.int64)
    for j in range(<int64_t>order.size()):
        res_order[j] = order[j]
        res_values[j] = values[j]
    return res_order, res_values


cdef int64_t _find(int64_t[::1] parent, int64_t x) noexcept nogil:
    cdef int64_t root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


cdef int64_t _union(int64_t[::1] parent, int64_t[::1] size, int64_t a, int64_t b) noexcept nogil:
    a = _find(parent, a)
    b = _find(parent, b)
    if a == b:
        return size[a]
    if size[a] < size[b]:
        a, b = b, a
    parent[b] = a
    size[a] += size[b]
    return size[a]


def gc_trajectory(const int64_t[::1] out_ptr, const int64_t[::1] out_idx,
                  const int64_t[::1] in_ptr, const int64_t[::1] in_idx, order):
    cdef int64_t n = out_ptr.shape[0] - 1
    cdef int64_t[::1] od = np.ascontiguousarray(order, dtype=np.int64)
    cdef int64_t m = od.shape[0]
    cdef uint8_t[::1] present = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] removed = np.zeros(n, dtype=np.uint8)
    cdef int64_t[::1] parent = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] size = np.ones(n, dtype=np.int64)
    traj = np.zeros(m + 1, dtype=np.int64)
    cdef int64_t[::1] tr = traj
    cdef int64_t v, s, e, w, c, best = 0
    with nogil:
        for s in range(m):
            removed[od[s]] = 1
        for s in range(n + m):
            if s < n:
                v = s
                if removed[v]:
                    continue
            else:
                v = od[m - 1 - (s - n)]
                tr[m - (s - n)] = best
            present[v] = 1
            if best < 1:
                best = 1
            for e in range(out_ptr[v], out_ptr[v + 1]):
                w = out_idx[e]
                if present[w]:
                    c = _union(parent, size, v, w)
                    if c > best:
                        best = c
            for e in range(in_ptr[v], in_ptr[v + 1]):
                w = in_idx[e]
                if present[w]:
                    c = _union(parent, size, v, w)
                    if c > best:
                        best = c
        tr[0] = best
    return traj


def wcc_labels(int64_t n, const int64_t[::1] out_ptr, const int64_t[::1] out_idx):
    cdef int64_t[::1] parent = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] size = np.ones(n, dtype=np.int64)
    cdef int64_t[::1] name = np.full(n, -1, dtype=np.int64)
    labels = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] lab = labels
    cdef int64_t v, e, root, k = 0
    with nogil:
        for v in range(n):
            for e in range(out_ptr[v], out_ptr[v + 1]):
                _union(parent, size, v, out_idx[e])
        for v in range(n):
            root = _find(parent, v)
            if name[root] < 0:
                name[root] = k
                k += 1
            lab[v] = name[root]
    return labels


def loess(const double[::1] y, rw, bint use_rw, int64_t span, int degree,
          const double[::1] xs, const int64_t[::1] nleft, const int64_t[::1] nright):
    cdef int64_t n = y.shape[0]
    cdef int64_t m = xs.shape[0]
    cdef const double[::1] rwv = np.ascontiguousarray(rw if use_rw else np.ones(n), dtype=np.float64)
    ys_arr = np.zeros(m, dtype=np.float64)
    ok_arr = np.zeros(m, dtype=bool)
    cdef double[::1] ys = ys_arr
    cdef uint8_t[::1] ok = ok_arr.view(np.uint8)
    cdef double[::1] w = np.zeros(max(n, 1) + 1, dtype=np.float64)
    cdef int64_t k, j, nl, nr
    cdef double x, h, h9, h1, r, a, b, c, q, rng = <double>(n - 1), out
    with nogil:
        for k in range(m):
            x = xs[k]
            nl = nleft[k]
            nr = nright[k]
            h = x - nl
            if nr - x > h:
                h = nr - x
            if span > n:
                h += <double>((span - n) // 2)
            h9 = 0.999 * h
            h1 = 0.001 * h
            a = 0.0
            for j in range(nl, nr + 1):
                w[j - nl] = 0.0
                r = fabs(<double>j - x)
                if r <= h9:
                    if r <= h1:
                        w[j - nl] = 1.0
                    else:
                        q = r / h
                        q = 1.0 - q * q * q
                        w[j - nl] = q * q * q
                    if use_rw:
                        w[j - nl] *= rwv[j - 1]
                    a += w[j - nl]
            if a <= 0.0:
                continue
            ok[k] = 1
            for j in range(nl, nr + 1):
                w[j - nl] /= a
            if h > 0.0 and degree > 0:
                a = 0.0
                for j in range(nl, nr + 1):
                    a += w[j - nl] * j
                b = x - a
                c = 0.0
                for j in range(nl, nr + 1):
                    c += w[j - nl] * (j - a) * (j - a)
                if sqrt(c) > 0.001 * rng:
                    b /= c
                    for j in range(nl, nr + 1):
                        w[j - nl] *= b * (j - a) + 1.0
            out = 0.0
            for j in range(nl, nr + 1):
                out += w[j - nl] * y[j - 1]
            ys[k] = out
    return ys_arr, ok_arr
