"""Compiled batch kernels for the cell probe.

These mirror the pure-Python code in ``grid``, ``hashing`` and ``probe``
operation for operation, so the results are bit-identical; the tests check
that. All integer arithmetic is done in ``uint64``.
"""

from __future__ import annotations

import numba as nb
import numpy as np

_P = np.uint64((1 << 61) - 1)
_LO32 = np.uint64(0xFFFFFFFF)
_LO29 = np.uint64((1 << 29) - 1)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MIX_INIT = np.uint64(0x243F6A8885A308D3)


@nb.njit(cache=True)
def _reduce(r):
    r = (r & _P) + (r >> np.uint64(61))
    if r >= _P:
        r -= _P
    return r


@nb.njit(cache=True)
def mulmod61(a, b):
    # a, b < 2**61; split into 32-bit halves so nothing overflows 64 bits
    a_lo = a & _LO32
    a_hi = a >> np.uint64(32)
    b_lo = b & _LO32
    b_hi = b >> np.uint64(32)
    lo = a_lo * b_lo
    mid = a_hi * b_lo + a_lo * b_hi
    hi = a_hi * b_hi
    r = ((hi << np.uint64(3)) + (mid >> np.uint64(29)) + ((mid & _LO29) << np.uint64(32))
         + (lo & _P) + (lo >> np.uint64(61)))
    return _reduce(r)


@nb.njit(cache=True)
def mix_words(cell):
    acc = _MIX_INIT
    for i in range(cell.shape[0]):
        z = (acc ^ np.uint64(cell[i])) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        acc = z ^ (z >> np.uint64(31))
    return acc % _P


@nb.njit(cache=True)
def poly_tz(x, coeffs, mask, cap):
    acc = np.uint64(0)
    for j in range(coeffs.shape[0]):
        acc = _reduce(mulmod61(acc, x) + coeffs[j])
    v = acc & mask
    if v == np.uint64(0):
        return cap
    t = 0
    while (v & np.uint64(1)) == np.uint64(0):
        v >>= np.uint64(1)
        t += 1
    return min(t, cap)


@nb.njit(cache=True)
def probe_batch(coords, offset, side, a2, coeffs, mask, cap):
    """Keys of ``adj(p)`` for every row of ``coords`` plus own/adjacent trailing zeros.

    Returns ``(keys, ptr, own, adj)``: the keys of point ``i`` are
    ``keys[ptr[i]:ptr[i+1]]`` with its own cell first.
    """
    m, d = coords.shape
    far = a2 > side * side
    reach = int(np.floor(np.sqrt(a2) / side)) + 2
    width = 2 * reach + 1
    cap_keys = max(16, 4 * m)
    keys = np.empty(cap_keys, dtype=np.uint64)
    ptr = np.empty(m + 1, dtype=np.int64)
    own = np.empty(m, dtype=np.int64)
    adj = np.empty(m, dtype=np.int64)
    base = np.empty(d, dtype=np.int64)
    cell = np.empty(d, dtype=np.int64)
    axes = np.empty(d, dtype=np.int64)
    n_moves = np.zeros(d, dtype=np.int64)
    mv_cell = np.empty((d, width), dtype=np.int64)
    mv_g2 = np.empty((d, width), dtype=np.float64)
    # depth-first search state over branching axes
    choice = np.empty(d + 1, dtype=np.int64)
    partial = np.empty(d + 1, dtype=np.float64)
    n = 0
    for r in range(m):
        ptr[r] = n
        nb_axes = 0
        for i in range(d):
            x = coords[r, i]
            o = offset[i]
            b = int(np.floor((x - o) / side))
            base[i] = b
            cnt = 0
            if far:
                k = b - 1
                while True:
                    g = x - (o + (k + 1) * side)
                    g2 = g * g
                    if g2 > a2:
                        break
                    mv_cell[nb_axes, cnt] = k
                    mv_g2[nb_axes, cnt] = g2
                    cnt += 1
                    k -= 1
                k = b + 1
                while True:
                    g = (o + k * side) - x
                    g2 = g * g
                    if g2 > a2:
                        break
                    mv_cell[nb_axes, cnt] = k
                    mv_g2[nb_axes, cnt] = g2
                    cnt += 1
                    k += 1
            else:
                g = x - (o + b * side)
                if g * g <= a2:
                    mv_cell[nb_axes, cnt] = b - 1
                    mv_g2[nb_axes, cnt] = g * g
                    cnt += 1
                g = (o + (b + 1) * side) - x
                if g * g <= a2:
                    mv_cell[nb_axes, cnt] = b + 1
                    mv_g2[nb_axes, cnt] = g * g
                    cnt += 1
            if cnt > 0:
                axes[nb_axes] = i
                n_moves[nb_axes] = cnt
                nb_axes += 1
        # choice[j] = -1 keeps the base coordinate on branching axis j
        for i in range(d):
            cell[i] = base[i]
        best = -1
        depth = 0
        choice[0] = -2
        partial[0] = 0.0
        while depth >= 0:
            if depth == nb_axes:
                if n >= keys.shape[0]:
                    grown = np.empty(2 * keys.shape[0], dtype=np.uint64)
                    grown[:n] = keys[:n]
                    keys = grown
                key = mix_words(cell)
                t = poly_tz(key, coeffs, mask, cap)
                if n == ptr[r]:
                    own[r] = t
                if t > best:
                    best = t
                keys[n] = key
                n += 1
                depth -= 1
                continue
            c = choice[depth] + 1
            ax = axes[depth]
            if c >= 0:
                while c < n_moves[depth] and partial[depth] + mv_g2[depth, c] > a2:
                    c += 1
            if c >= n_moves[depth]:
                cell[ax] = base[ax]
                depth -= 1
                continue
            choice[depth] = c
            if c == -1:
                cell[ax] = base[ax]
                partial[depth + 1] = partial[depth]
            else:
                cell[ax] = mv_cell[depth, c]
                partial[depth + 1] = partial[depth] + mv_g2[depth, c]
            depth += 1
            choice[depth] = -2
        adj[r] = best
    ptr[m] = n
    return keys[:n], ptr, own, adj
