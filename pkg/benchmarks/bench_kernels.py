"""Benchmark the numba kernels against the pure-numpy fallbacks.

The env flag LIVEWIRE_NUMBA only switches the import in livewire.kernels;
here both implementations are imported directly so one process can time the
A/B pair on identical inputs and verify they agree.

Usage: python benchmarks/bench_kernels.py [--size 256] [--repeats 5]
"""

import argparse
import time

import numpy as np

from livewire import _kernels_numpy as numpy_impl
from livewire.cost_model import DEFAULT_TURN_PENALTIES

try:
    from livewire import _kernels_numba as numba_impl
except ImportError:
    numba_impl = None

PEN = np.asarray(DEFAULT_TURN_PENALTIES)


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_dijkstra(size, repeats):
    rng = np.random.default_rng(0)
    base = rng.integers(0, 256, (size, size)).astype(np.int32)
    gbin = rng.integers(0, 256, (size, size)).astype(np.uint8)
    mask = np.ones((size, size), dtype=bool)
    heated = np.zeros((size, size), dtype=bool)
    args = (base, gbin, mask, heated, 1.0, 0.0, PEN, 0.0,
            size // 2, size // 2, -1, -1)

    print(f"\ndijkstra_grid, {size}x{size} full tree ({size * size:,} nodes)")
    t_np, out_np = _time(lambda: numpy_impl.dijkstra_grid(*args), repeats)
    print(f"  numpy fallback: {t_np * 1000:9.1f} ms")
    if numba_impl is not None:
        numba_impl.dijkstra_grid(*args)  # compile
        t_nb, out_nb = _time(lambda: numba_impl.dijkstra_grid(*args), repeats)
        same = np.array_equal(out_np[0], out_nb[0])
        print(f"  numba:          {t_nb * 1000:9.1f} ms   "
              f"speedup {t_np / t_nb:6.1f}x   results equal: {same}")


def bench_chamfer(size, repeats):
    rng = np.random.default_rng(1)
    mask = rng.random((size, size)) < 0.002
    mask[size // 2, size // 2] = True
    far = 10 * 3 * size
    init = np.where(mask, 0, far).astype(np.int64)

    print(f"\nchamfer_passes, {size}x{size}")
    t_np, out_np = _time(lambda: numpy_impl.chamfer_passes(init.copy()), repeats)
    print(f"  numpy fallback: {t_np * 1000:9.1f} ms")
    if numba_impl is not None:
        numba_impl.chamfer_passes(init.copy())  # compile
        t_nb, out_nb = _time(lambda: numba_impl.chamfer_passes(init.copy()), repeats)
        same = np.array_equal(out_np, out_nb)
        print(f"  numba:          {t_nb * 1000:9.1f} ms   "
              f"speedup {t_np / t_nb:6.1f}x   results equal: {same}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    if numba_impl is None:
        print("numba not importable: timing the numpy path only")
    bench_dijkstra(args.size, args.repeats)
    bench_chamfer(args.size, args.repeats)


if __name__ == "__main__":
    main()
