"""Numba-accelerated kernels; semantics identical to ``_kernels_numpy``.

Both twins key the priority heap on (cumulative cost << 26 | node index) so
equal-cost pops happen in the same order and the produced trees match
bit-for-bit, including the anisotropic (direction / deviation) penalties.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.int64(1) << 62
_IDX_BITS = 26
_SQRT2 = np.sqrt(2.0)

_DX = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)
_DY = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)
_DIAG = np.array([False, True, False, True, False, True, False, True])


@njit(cache=True)
def _heap_push(keys, size, key):
    i = size
    keys[i] = key
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] <= keys[i]:
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        i = parent
    return size + 1


@njit(cache=True)
def _heap_pop(keys, size):
    top = keys[0]
    size -= 1
    keys[0] = keys[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        small = l
        r = l + 1
        if r < size and keys[r] < keys[l]:
            small = r
        if keys[i] <= keys[small]:
            break
        keys[i], keys[small] = keys[small], keys[i]
        i = small
    return top, size


@njit(cache=True)
def dijkstra_grid(base, gbin, mask, heated, heat_factor, w_d, turn_pen, w_s,
                  seed_x, seed_y, stop_x, stop_y):
    h, w = base.shape
    cum = np.full((h, w), INF, dtype=np.int64)
    pred = np.full((h, w), -1, dtype=np.int8)
    final = np.zeros((h, w), dtype=np.bool_)
    cnt = np.zeros((h, w), dtype=np.int32)
    mean = np.zeros((h, w), dtype=np.float64)
    m2 = np.zeros((h, w), dtype=np.float64)

    cum[seed_y, seed_x] = 0
    cnt[seed_y, seed_x] = 1
    mean[seed_y, seed_x] = float(gbin[seed_y, seed_x])

    keys = np.empty(8 * h * w + 16, dtype=np.int64)
    size = _heap_push(keys, 0, np.int64(seed_y * w + seed_x))
    n_final = 0
    use_dir = w_d > 0.0
    use_dev = w_s > 0.0

    while size > 0:
        key, size = _heap_pop(keys, size)
        idx = key & ((np.int64(1) << _IDX_BITS) - 1)
        uy = idx // w
        ux = idx - uy * w
        if final[uy, ux]:
            continue
        if (key >> _IDX_BITS) != cum[uy, ux]:
            continue
        final[uy, ux] = True
        n_final += 1
        if ux == stop_x and uy == stop_y:
            break
        cu = cum[uy, ux]
        din = pred[uy, ux]
        for d in range(8):
            vx = ux + _DX[d]
            vy = uy + _DY[d]
            if vx < 0 or vx >= w or vy < 0 or vy >= h:
                continue
            if not mask[vy, vx] or final[vy, vx]:
                continue
            total = float(base[vy, vx])
            if _DIAG[d]:
                total *= _SQRT2
            if use_dir and din >= 0:
                t = abs(din - d)
                if t > 4:
                    t = 8 - t
                total += w_d * turn_pen[t]
            if use_dev and cnt[uy, ux] >= 2:
                sd = np.sqrt(m2[uy, ux] / cnt[uy, ux])
                norm = 255.0 * abs(float(gbin[vy, vx]) - mean[uy, ux]) / (sd + 1.0)
                if norm > 255.0:
                    norm = 255.0
                total += w_s * norm
            if heated[vy, vx]:
                total *= heat_factor
            ec = np.int64(np.floor(total + 0.5))
            if ec > 65535:
                ec = 65535
            nc = cu + ec
            if nc < cum[vy, vx]:
                cum[vy, vx] = nc
                pred[vy, vx] = d
                if use_dev:
                    c1 = cnt[uy, ux] + 1
                    delta = float(gbin[vy, vx]) - mean[uy, ux]
                    mnew = mean[uy, ux] + delta / c1
                    cnt[vy, vx] = c1
                    mean[vy, vx] = mnew
                    m2[vy, vx] = m2[uy, ux] + delta * (float(gbin[vy, vx]) - mnew)
                size = _heap_push(keys, size, (nc << _IDX_BITS) | (vy * w + vx))
    return cum, pred, final, n_final


@njit(cache=True)
def chamfer_passes(dist):
    d = dist.astype(np.int64)
    h, w = d.shape
    for y in range(h):
        for x in range(w):
            best = d[y, x]
            if x > 0 and d[y, x - 1] + 10 < best:
                best = d[y, x - 1] + 10
            if y > 0:
                if d[y - 1, x] + 10 < best:
                    best = d[y - 1, x] + 10
                if x > 0 and d[y - 1, x - 1] + 14 < best:
                    best = d[y - 1, x - 1] + 14
                if x < w - 1 and d[y - 1, x + 1] + 14 < best:
                    best = d[y - 1, x + 1] + 14
            d[y, x] = best
    for y in range(h - 1, -1, -1):
        for x in range(w - 1, -1, -1):
            best = d[y, x]
            if x < w - 1 and d[y, x + 1] + 10 < best:
                best = d[y, x + 1] + 10
            if y < h - 1:
                if d[y + 1, x] + 10 < best:
                    best = d[y + 1, x] + 10
                if x < w - 1 and d[y + 1, x + 1] + 14 < best:
                    best = d[y + 1, x + 1] + 14
                if x > 0 and d[y + 1, x - 1] + 14 < best:
                    best = d[y + 1, x - 1] + 14
            d[y, x] = best
    return d
