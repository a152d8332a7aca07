"""Compiled inner loops for tree growth and likelihood replay.

All kernels consume pre-drawn uniforms (one per attachment step) and pick the
parent by inverse CDF over a fixed ordering, so a run is reproducible from the
uniform stream alone.  Kernels return ``0`` on success or the 0-based index of
the first arriving vertex whose total attachment weight was zero.

Degree weights are described by ``(table, gamma, beta, power)``::

    w(k, b, x) = table[min(k, K), b, x] * f(k, b, x) ** power,  power in {-1, 0, 1}

with ``K = table.shape[0] - 1`` and cells where ``f == 0`` given weight 0
when ``power == -1``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def weight(k, b, x, table, gamma, beta, power):
    kmax = table.shape[0] - 1
    t = table[k if k < kmax else kmax, b, x]
    if power == 0:
        return t
    fv = gamma[b, x] * k + beta[b, x]
    if power == 1:
        return t * fv
    if fv <= 0.0:
        return 0.0
    return t / fv


@njit(**_OPTS)
def _class_offsets(colors, size):
    counts = np.zeros(size, np.int64)
    for c in colors:
        counts[c] += 1
    start = np.zeros(size, np.int64)
    for b in range(1, size):
        start[b] = start[b - 1] + counts[b - 1]
    return counts, start


@njit(**_OPTS)
def grow_linear(colors, u, gamma, beta, parents, attach):
    """Affine weights gamma*k + beta, O(|X|) per step.

    A colour class ``b`` carries mass ``gamma*D_b + beta*S_b``; the first part
    is spread over its endpoint list (one entry per child), the second
    uniformly over its vertices.
    """
    n = colors.shape[0]
    size = gamma.shape[0]
    counts, start = _class_offsets(colors, size)
    members = np.empty(n, np.int32)
    endpoints = np.empty((size, max(n - 1, 1)), np.int32)
    S = np.zeros(size, np.int64)
    D = np.zeros(size, np.int64)
    deg = np.zeros(n, np.int64)
    parents[0] = -1
    attach[0] = 0
    c0 = colors[0]
    members[start[c0]] = 0
    S[c0] = 1
    for m in range(1, n):
        x = colors[m]
        total = 0.0
        for b in range(size):
            total += gamma[b, x] * D[b] + beta[b, x] * S[b]
        if total <= 0.0:
            return m
        r = u[m - 1] * total
        chosen = -1
        for b in range(size):
            wb = gamma[b, x] * D[b] + beta[b, x] * S[b]
            if wb <= 0.0:
                continue
            chosen = b
            if r < wb:
                break
            r -= wb
        b = chosen
        gd = gamma[b, x] * D[b]
        if r < gd or beta[b, x] <= 0.0:
            idx = np.int64(r / gamma[b, x])
            if idx >= D[b]:
                idx = D[b] - 1
            v = endpoints[b, idx]
        else:
            idx = np.int64((r - gd) / beta[b, x])
            if idx >= S[b]:
                idx = S[b] - 1
            v = members[start[b] + idx]
        parents[m] = v
        attach[m] = deg[v]
        deg[v] += 1
        cb = colors[v]
        endpoints[cb, D[cb]] = v
        D[cb] += 1
        members[start[x] + S[x]] = m
        S[x] += 1
    return 0


@njit(**_OPTS)
def fen_add(fw, base, size, i, delta):
    while i <= size:
        fw[base + i] += delta
        i += i & (-i)


@njit(**_OPTS)
def fen_prefix(fw, base, i):
    s = 0.0
    while i > 0:
        s += fw[base + i]
        i -= i & (-i)
    return s


@njit(**_OPTS)
def fen_search(fw, base, size, r):
    """Smallest 1-based position whose prefix sum exceeds ``r``."""
    pos = 0
    step = 1
    while step * 2 <= size:
        step *= 2
    while step > 0:
        t = pos + step
        if t <= size and fw[base + t] <= r:
            pos = t
            r -= fw[base + t]
        step >>= 1
    return pos + 1


@njit(**_OPTS)
def grow_fenwick(colors, u, table, gamma, beta, power, parents, attach):
    """General degree weights, one Fenwick tree per (vertex colour, newcomer colour)."""
    n = colors.shape[0]
    size = gamma.shape[0]
    counts, start = _class_offsets(colors, size)
    base = np.zeros((size, size), np.int64)
    off = 0
    for b in range(size):
        for x in range(size):
            base[b, x] = off
            off += counts[b] + 1
    fw = np.zeros(off, np.float64)
    members = np.empty(n, np.int32)
    posv = np.empty(n, np.int64)
    S = np.zeros(size, np.int64)
    deg = np.zeros(n, np.int64)
    totals = np.zeros(size, np.float64)

    parents[0] = -1
    attach[0] = 0
    c0 = colors[0]
    members[start[c0]] = 0
    posv[0] = 1
    S[c0] = 1
    for x2 in range(size):
        fen_add(fw, base[c0, x2], counts[c0], 1, weight(0, c0, x2, table, gamma, beta, power))

    for m in range(1, n):
        x = colors[m]
        total = 0.0
        for b in range(size):
            if S[b] > 0:
                totals[b] = fen_prefix(fw, base[b, x], counts[b])
            else:
                totals[b] = 0.0
            if totals[b] > 0.0:
                total += totals[b]
        if total <= 0.0:
            return m
        r = u[m - 1] * total
        chosen = -1
        for b in range(size):
            if totals[b] <= 0.0:
                continue
            chosen = b
            if r < totals[b]:
                break
            r -= totals[b]
        b = chosen
        if r >= totals[b]:
            r = totals[b] * (1.0 - 1e-15)
        pos = fen_search(fw, base[b, x], counts[b], r)
        if pos > S[b]:
            pos = S[b]
        v = members[start[b] + pos - 1]
        old = deg[v]
        parents[m] = v
        attach[m] = old
        deg[v] = old + 1
        for x2 in range(size):
            delta = weight(old + 1, b, x2, table, gamma, beta, power) - weight(
                old, b, x2, table, gamma, beta, power
            )
            if delta != 0.0:
                fen_add(fw, base[b, x2], counts[b], posv[v], delta)
        S[x] += 1
        members[start[x] + S[x] - 1] = m
        posv[m] = S[x]
        for x2 in range(size):
            fen_add(fw, base[x, x2], counts[x], S[x], weight(0, x, x2, table, gamma, beta, power))
    return 0


@njit(**_OPTS)
def grow_naive(colors, u, table, gamma, beta, power, parents, attach):
    """O(m) per step reference: scan every existing vertex."""
    n = colors.shape[0]
    deg = np.zeros(n, np.int64)
    parents[0] = -1
    attach[0] = 0
    for m in range(1, n):
        x = colors[m]
        total = 0.0
        for i in range(m):
            total += weight(deg[i], colors[i], x, table, gamma, beta, power)
        if total <= 0.0:
            return m
        r = u[m - 1] * total
        v = -1
        for i in range(m):
            w = weight(deg[i], colors[i], x, table, gamma, beta, power)
            if w <= 0.0:
                continue
            v = i
            if r < w:
                break
            r -= w
        parents[m] = v
        attach[m] = deg[v]
        deg[v] += 1
    return 0


@njit(**_OPTS)
def grow_batch(kind, colors, u, table, gamma, beta, power, parents, attach, status):
    """Grow one tree per row; ``kind`` 0 = naive, 1 = linear, 2 = fenwick."""
    for r in range(colors.shape[0]):
        if kind == 0:
            status[r] = grow_naive(colors[r], u[r], table, gamma, beta, power, parents[r], attach[r])
        elif kind == 1:
            status[r] = grow_linear(colors[r], u[r], gamma, beta, parents[r], attach[r])
        else:
            status[r] = grow_fenwick(colors[r], u[r], table, gamma, beta, power, parents[r], attach[r])


@njit(**_OPTS)
def replay_log_attach(colors, parents, table, gamma, beta, power):
    """Sum of log chosen weights and of log normalisers along a realised tree.

    Returns ``(numerator, normaliser, status)`` with ``status`` the first
    impossible step (0 when the tree has positive probability).
    """
    n = colors.shape[0]
    size = gamma.shape[0]
    totals = np.zeros((size, size), np.float64)
    deg = np.zeros(n, np.int64)
    c0 = colors[0]
    for x2 in range(size):
        totals[c0, x2] += weight(0, c0, x2, table, gamma, beta, power)
    num = 0.0
    den = 0.0
    for m in range(1, n):
        x = colors[m]
        v = parents[m]
        cb = colors[v]
        k = deg[v]
        w = weight(k, cb, x, table, gamma, beta, power)
        total = 0.0
        for b in range(size):
            total += totals[b, x]
        if w <= 0.0 or total <= 0.0:
            return num, den, m
        num += np.log(w)
        den += np.log(total)
        deg[v] = k + 1
        for x2 in range(size):
            totals[cb, x2] += weight(k + 1, cb, x2, table, gamma, beta, power) - weight(
                k, cb, x2, table, gamma, beta, power
            )
        for x2 in range(size):
            totals[x, x2] += weight(0, x, x2, table, gamma, beta, power)
    return num, den, 0


@njit(**_OPTS)
def replay_batch(colors, parents, table, gamma, beta, power, out_num, out_den, status):
    for r in range(colors.shape[0]):
        a, b, s = replay_log_attach(colors[r], parents[r], table, gamma, beta, power)
        out_num[r] = a
        out_den[r] = b
        status[r] = s
