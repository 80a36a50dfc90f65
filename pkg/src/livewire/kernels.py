"""Kernel dispatch: numba-accelerated hot loops with a pure-numpy fallback.

Set ``LIVEWIRE_NUMBA=0`` in the environment to force the numpy path (useful
where numba is unavailable or for A/B timing; see ``benchmarks/``).  The two
implementations produce identical integer results.
"""

from __future__ import annotations

import os

_flag = os.environ.get("LIVEWIRE_NUMBA", "1").strip().lower()

USING_NUMBA = False
if _flag not in ("0", "false", "off", "no"):
    try:
        from ._kernels_numba import INF, chamfer_passes, dijkstra_grid  # noqa: F401
        USING_NUMBA = True
    except ImportError:
        pass
if not USING_NUMBA:
    from ._kernels_numpy import INF, chamfer_passes, dijkstra_grid  # noqa: F401


def warmup() -> None:
    """Trigger JIT compilation on tiny inputs so first real calls run hot."""
    import numpy as np

    base = np.zeros((3, 3), dtype=np.int32)
    gbin = np.zeros((3, 3), dtype=np.uint8)
    yes = np.ones((3, 3), dtype=bool)
    no = np.zeros((3, 3), dtype=bool)
    pen = np.asarray((0.0, 8.0, 24.0, 64.0, 128.0))
    dijkstra_grid(base, gbin, yes, no, 1.0, 0.0, pen, 0.0, 1, 1, -1, -1)
    dijkstra_grid(base, gbin, yes, no, 1.25, 1.0, pen, 1.0, 1, 1, 0, 0)
    chamfer_passes(np.full((3, 3), 90, dtype=np.int64))
