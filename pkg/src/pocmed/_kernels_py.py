"""Pure-Python kernels. Same signatures as the compiled module ``_ckernels``."""

from __future__ import annotations

import numpy as np


def ultrafilters(n_pairs: int, conflict: list[int]) -> list[int]:
    """Orientations of the proper pairs with no pairwise conflict.

    Element ``2i+2`` is the representative of pair i and ``2i+3`` its star.
    ``conflict[e]`` is the bitset of elements that may not coexist with e.
    Results carry bit 1 (the top element) and come out in increasing
    orientation code, where pair i contributes bit i.
    """
    out: list[int] = []
    chosen = [0] * (n_pairs + 1)
    chosen[n_pairs] = 2

    # iterative DFS from the highest pair down to pair 0
    stack = [(n_pairs - 1, 0)]
    while stack:
        i, side = stack.pop()
        if i < 0:
            out.append(chosen[0])
            continue
        if side > 1:
            continue
        stack.append((i, side + 1))
        e = 2 * i + 2 + side
        base = chosen[i + 1]
        if base & conflict[e]:
            continue
        chosen[i] = base | 1 << e
        stack.append((i - 1, 0))
    return out


def median_closure(gens: list[int], limit: int) -> tuple[list[int], list[tuple[int, int, int] | None]]:
    """Close bitsets under the Boolean median.

    Returns the closure (generators first, deduplicated, then new elements in
    discovery order) and, per element, the index triple it was produced from.
    """
    elems: list[int] = []
    parents: list[tuple[int, int, int] | None] = []
    seen: dict[int, int] = {}
    for g in gens:
        if g not in seen:
            seen[g] = len(elems)
            elems.append(g)
            parents.append(None)
    k = 0
    while k < len(elems):
        c = elems[k]
        for j in range(k):
            b = elems[j]
            bc_and = b & c
            bc_or = b | c
            for i in range(j):
                a = elems[i]
                m = bc_and | (a & bc_or)
                if m not in seen:
                    if len(elems) >= limit:
                        raise OverflowError(limit)
                    seen[m] = len(elems)
                    elems.append(m)
                    parents.append((i, j, k))
        k += 1
    return elems, parents


def check_median_table(t: np.ndarray) -> list[tuple[str, tuple[int, ...]]]:
    """First witness per violated axiom of a median table ``t[x, y, z]``."""
    n = t.shape[0]
    out: list[tuple[str, tuple[int, ...]]] = []
    if n == 0:
        return out
    if t.min() < 0 or t.max() >= n:
        bad = np.argwhere((t < 0) | (t >= n))[0]
        return [("range", tuple(int(i) for i in bad))]
    diff = (t != t.transpose(0, 2, 1)) | (t != t.transpose(1, 0, 2)) | (t != t.transpose(2, 1, 0))
    if diff.any():
        out.append(("Med 1", tuple(int(i) for i in np.argwhere(diff)[0])))
    idx = np.arange(n)
    med2 = t[idx[:, None], idx[:, None], idx[None, :]] != idx[:, None]
    if med2.any():
        x, y = np.argwhere(med2)[0]
        out.append(("Med 2", (int(x), int(x), int(y))))
    for x in range(n):
        tx = t[x]
        for y in range(n):
            lhs = t[t[x, y]]  # (z, u, v) -> m(m(x,y,z), u, v)
            rhs = tx[t[y][None, :, :], t]  # m(x, m(y,u,v), m(z,u,v))
            diff = lhs != rhs
            if diff.any():
                z, u, v = np.argwhere(diff)[0]
                out.append(("Med 3", (x, y, int(z), int(u), int(v))))
                return out
    return out


def triple_medians(dist: np.ndarray) -> tuple[np.ndarray | None, tuple[int, int, int, int] | None]:
    """Median table from a graph metric, or the first bad triple.

    The witness is ``(x, y, z, size)`` with ``x < y < z`` lexicographically
    first such that the three distance intervals do not meet in one point.
    """
    n = dist.shape[0]
    d = dist.tolist()
    iv = [[0] * n for _ in range(n)]
    for x in range(n):
        dx = d[x]
        for y in range(x, n):
            dy = d[y]
            dxy = dx[y]
            m = 0
            for z in range(n):
                if dx[z] + dy[z] == dxy:
                    m |= 1 << z
            iv[x][y] = iv[y][x] = m
    table = np.empty((n, n, n), dtype=np.int32)
    for x in range(n):
        for y in range(n):
            table[x, x, y] = table[x, y, x] = table[y, x, x] = x
    for x in range(n):
        for y in range(x + 1, n):
            ixy = iv[x][y]
            for z in range(y + 1, n):
                common = ixy & iv[y][z] & iv[z][x]
                size = common.bit_count()
                if size != 1:
                    return None, (x, y, z, size)
                m = common.bit_length() - 1
                table[x, y, z] = table[x, z, y] = table[y, x, z] = m
                table[y, z, x] = table[z, x, y] = table[z, y, x] = m
    return table, None
