# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Bitsets are uint64, so callers route wider data to the
pure-Python module."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int32_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

cnp.import_array()

WIDTH = 64


def ultrafilters(int n_pairs, list conflict):
    cdef int n_el = 2 * n_pairs + 2
    cdef vector[uint64_t] conf
    cdef vector[uint64_t] chosen
    cdef vector[int] side
    cdef int i, e
    cdef list out = []
    conf.resize(n_el)
    for e in range(n_el):
        conf[e] = <uint64_t>conflict[e]
    chosen.resize(n_pairs + 1)
    side.resize(n_pairs + 1)
    chosen[n_pairs] = 2
    if n_pairs == 0:
        return [2]
    i = n_pairs - 1
    side[i] = 0
    while i < n_pairs:
        if side[i] > 1:
            i += 1
            if i < n_pairs:
                side[i] += 1
            continue
        e = 2 * i + 2 + side[i]
        if chosen[i + 1] & conf[e]:
            side[i] += 1
            continue
        chosen[i] = chosen[i + 1] | (<uint64_t>1 << e)
        if i == 0:
            out.append(int(chosen[0]))
            side[i] += 1
        else:
            i -= 1
            side[i] = 0
    return out


def median_closure(list gens, Py_ssize_t limit):
    cdef vector[uint64_t] elems
    cdef unordered_map[uint64_t, Py_ssize_t] seen
    cdef list parents = []
    cdef Py_ssize_t i, j, k
    cdef uint64_t a, b, c, m, band, bor
    for g in gens:
        a = <uint64_t>g
        if seen.count(a) == 0:
            seen[a] = elems.size()
            elems.push_back(a)
            parents.append(None)
    k = 0
    while k < <Py_ssize_t>elems.size():
        c = elems[k]
        for j in range(k):
            b = elems[j]
            band = b & c
            bor = b | c
            for i in range(j):
                m = band | (elems[i] & bor)
                if seen.count(m) == 0:
                    if <Py_ssize_t>elems.size() >= limit:
                        raise OverflowError(limit)
                    seen[m] = elems.size()
                    elems.push_back(m)
                    parents.append((i, j, k))
        k += 1
    return [int(x) for x in elems], parents


def check_median_table(cnp.ndarray t_in):
    cdef cnp.ndarray[int32_t, ndim=3] t = np.ascontiguousarray(t_in, dtype=np.int32)
    cdef int n = t.shape[0]
    cdef int x, y, z, u, v, a
    cdef list out = []
    if n == 0:
        return out
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if t[x, y, z] < 0 or t[x, y, z] >= n:
                    return [("range", (x, y, z))]
    done = False
    for x in range(n):
        for y in range(n):
            for z in range(n):
                a = t[x, y, z]
                if a != t[x, z, y] or a != t[y, x, z] or a != t[z, y, x]:
                    out.append(("Med 1", (x, y, z)))
                    done = True
                    break
            if done:
                break
        if done:
            break
    done = False
    for x in range(n):
        for y in range(n):
            if t[x, x, y] != x:
                out.append(("Med 2", (x, x, y)))
                done = True
                break
        if done:
            break
    for x in range(n):
        for y in range(n):
            for z in range(n):
                a = t[x, y, z]
                for u in range(n):
                    for v in range(n):
                        if t[a, u, v] != t[x, t[y, u, v], t[z, u, v]]:
                            out.append(("Med 3", (x, y, z, u, v)))
                            return out
    return out


def triple_medians(cnp.ndarray dist_in):
    cdef cnp.ndarray[int32_t, ndim=2] d = np.ascontiguousarray(dist_in, dtype=np.int32)
    cdef int n = d.shape[0]
    cdef int x, y, z, w, size
    cdef vector[uint64_t] iv
    cdef uint64_t m, common
    if n > 64:
        raise ValueError("compiled kernel handles at most 64 vertices")
    iv.resize(n * n)
    for x in range(n):
        for y in range(x, n):
            m = 0
            for w in range(n):
                if d[x, w] + d[y, w] == d[x, y]:
                    m |= <uint64_t>1 << w
            iv[x * n + y] = m
            iv[y * n + x] = m
    table = np.empty((n, n, n), dtype=np.int32)
    cdef int32_t[:, :, :] tv = table
    for x in range(n):
        for y in range(n):
            tv[x, x, y] = x
            tv[x, y, x] = x
            tv[y, x, x] = x
    for x in range(n):
        for y in range(x + 1, n):
            for z in range(y + 1, n):
                common = iv[x * n + y] & iv[y * n + z] & iv[z * n + x]
                size = 0
                m = common
                while m:
                    m &= m - 1
                    size += 1
                if size != 1:
                    return None, (x, y, z, size)
                w = 0
                while not (common >> w) & 1:
                    w += 1
                tv[x, y, z] = w
                tv[x, z, y] = w
                tv[y, x, z] = w
                tv[y, z, x] = w
                tv[z, x, y] = w
                tv[z, y, x] = w
    return table, None
