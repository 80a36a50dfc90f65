"""Pure-numpy kernel implementations.

Reference semantics for the accelerated twins in ``_kernels_numba``; selected
at import time by ``LIVEWIRE_NUMBA=0`` (see ``kernels``).  The grid Dijkstra
uses a lazy binary heap keyed on (cumulative cost, node index) so tie-breaking
matches the accelerated kernel exactly.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

INF = np.int64(1) << 62
_IDX_BITS = 26

# neighbor order must match cost_model.DIR_DX/DIR_DY
_DX = (1, 1, 0, -1, -1, -1, 0, 1)
_DY = (0, 1, 1, 1, 0, -1, -1, -1)
_DIAG = tuple(dx != 0 and dy != 0 for dx, dy in zip(_DX, _DY))
_SQRT2 = math.sqrt(2.0)


def dijkstra_grid(base, gbin, mask, heated, heat_factor, w_d, turn_pen, w_s,
                  seed_x, seed_y, stop_x, stop_y):
    """Single-source shortest paths over the 8-connected pixel grid.

    Returns (cum_cost int64, pred_dir int8 with -1 for none, finalized bool,
    finalized count).  ``stop_x < 0`` searches the whole mask; otherwise the
    search may stop once the stop pixel is finalized.
    """
    h, w = base.shape
    if h * w >= (1 << _IDX_BITS):
        raise ValueError("image too large for packed heap keys")
    cum = np.full((h, w), INF, dtype=np.int64)
    pred = np.full((h, w), -1, dtype=np.int8)
    final = np.zeros((h, w), dtype=bool)
    cnt = np.zeros((h, w), dtype=np.int32)
    mean = np.zeros((h, w), dtype=np.float64)
    m2 = np.zeros((h, w), dtype=np.float64)

    if not mask[seed_y, seed_x]:
        raise ValueError("seed outside the search mask")
    cum[seed_y, seed_x] = 0
    cnt[seed_y, seed_x] = 1
    mean[seed_y, seed_x] = float(gbin[seed_y, seed_x])

    heap = [np.int64(seed_y * w + seed_x)]  # key = cum << IDX_BITS | idx, cum(seed)=0
    n_final = 0
    use_dir = w_d > 0.0
    use_dev = w_s > 0.0

    while heap:
        key = heapq.heappop(heap)
        idx = int(key) & ((1 << _IDX_BITS) - 1)
        uy, ux = divmod(idx, w)
        if final[uy, ux]:
            continue
        if (int(key) >> _IDX_BITS) != cum[uy, ux]:
            continue  # stale entry
        final[uy, ux] = True
        n_final += 1
        if ux == stop_x and uy == stop_y:
            break
        cu = int(cum[uy, ux])
        din = int(pred[uy, ux])
        for d in range(8):
            vx = ux + _DX[d]
            vy = uy + _DY[d]
            if not (0 <= vx < w and 0 <= vy < h):
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
                sd = math.sqrt(m2[uy, ux] / cnt[uy, ux])
                norm = 255.0 * abs(float(gbin[vy, vx]) - mean[uy, ux]) / (sd + 1.0)
                total += w_s * min(255.0, norm)
            if heated[vy, vx]:
                total *= heat_factor
            ec = int(math.floor(total + 0.5))
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
                heapq.heappush(heap, np.int64((nc << _IDX_BITS) | (vy * w + vx)))
    return cum, pred, final, n_final


def chamfer_passes(dist):
    """Two-pass (10, 14) chamfer sweep over a pre-initialized distance grid.

    Forward pass scans top-down/left-right against the W/NW/N/NE half mask,
    backward pass mirrors it.  Row scans use the min-plus identity
    ``out[x] = 10*x + cummin(m[x] - 10*x)`` to stay vectorized.
    """
    d = dist.astype(np.int64)
    h, w = d.shape
    ar = 10 * np.arange(w, dtype=np.int64)

    for y in range(h):
        m = d[y]
        if y > 0:
            up = d[y - 1]
            m = np.minimum(m, up + 10)
            m[1:] = np.minimum(m[1:], up[:-1] + 14)   # NW
            m[:-1] = np.minimum(m[:-1], up[1:] + 14)  # NE
        d[y] = np.minimum.accumulate(m - ar) + ar

    # backward pass: bottom row gets only the right-to-left axial sweep
    d[h - 1] = _rl(d[h - 1], ar)
    for y in range(h - 2, -1, -1):
        m = d[y].copy()
        down = d[y + 1]
        m = np.minimum(m, down + 10)
        m[:-1] = np.minimum(m[:-1], down[1:] + 14)  # SE
        m[1:] = np.minimum(m[1:], down[:-1] + 14)   # SW
        d[y] = _rl(m, ar)
    return d


def _rl(m, ar):
    # right-to-left min-plus scan: out[x] = min_{k >= x} m[k] + 10*(k - x)
    n = (m + ar)[::-1]
    return (np.minimum.accumulate(n)[::-1] - ar)
