"""Scripted-user replay: a reproducible stand-in for a human operator.

Intended seed points go on the analytic phantom boundary, perturbed by
Gaussian jitter; whenever a wire segment strays beyond tolerance the script
inserts a corrective seed at the worst point, like an operator would, and the
correction count becomes the effort metric.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cost_model import CostWeights, TrainedMapping, static_cost
from .engine import compute_path_tree, reconstruct
from .phantoms import Phantom


@dataclass
class SeedStrategy:
    """Intended seed placement and the correction policy."""

    seeds: int = 8
    jitter_sigma: float = 0.0
    tolerance: float = 2.0
    seed_budget: int = 32


@dataclass
class RunResult:
    run_id: str
    contours: object
    slice_timings: list = field(default_factory=list)
    seed_count: int = 0
    corrections: int = 0
    converged: bool = True


def _dense_boundary(phantom: Phantom, k: int) -> np.ndarray:
    n = max(int(16 * phantom.params.get("radius", 16)), 256)
    return phantom.boundary_points(k, n=n)


def _distance_to_curve(points, curve) -> np.ndarray:
    """Min distance of each point to a densely sampled curve."""
    pts = np.asarray(points, dtype=np.float64)
    d = pts[:, None, :] - curve[None, :, :]
    return np.sqrt((d * d).sum(axis=2)).min(axis=1)


def _intended_seeds(phantom: Phantom, k: int, n: int) -> np.ndarray:
    if phantom.closed_boundary:
        return phantom.boundary_points(k, n=n)
    line = phantom.boundary_points(k, n=max(n, 2))
    idx = np.linspace(0, len(line) - 1, max(n, 2)).round().astype(int)
    return line[idx]


def scripted_user(phantom: Phantom, strategy: SeedStrategy, rng_seed: int,
                  weights: CostWeights | None = None,
                  mapping: TrainedMapping | None = None,
                  run_id: str | None = None) -> RunResult:
    """Replay one segmentation; deterministic for a given (phantom, strategy, seed)."""
    rng = np.random.default_rng(rng_seed)
    weights = weights or CostWeights()
    volume = phantom.make_volume()
    h, w = phantom.height, phantom.width
    result = RunResult(run_id or f"replay-{rng_seed}", None)
    slices = []

    for k in range(phantom.depth):
        t0 = time.perf_counter()
        field_k = static_cost(volume.voxels[k], weights, mapping)
        gt = _dense_boundary(phantom, k)
        seeds = _intended_seeds(phantom, k, strategy.seeds)
        if strategy.jitter_sigma > 0:
            seeds = seeds + rng.normal(0.0, strategy.jitter_sigma, seeds.shape)
        px = [(int(np.clip(round(x), 0, w - 1)), int(np.clip(round(y), 0, h - 1)))
              for x, y in seeds]
        result.seed_count += len(px)

        pairs = list(zip(px, px[1:] + px[:1])) if phantom.closed_boundary \
            else list(zip(px[:-1], px[1:]))
        contour = []
        stack = list(reversed(pairs))
        while stack:
            a, b = stack.pop()
            if a == b:
                continue
            tree = compute_path_tree(field_k, a, stop_at=b)
            wire = reconstruct(tree, b)
            dev = _distance_to_curve(wire, gt)
            worst = int(np.argmax(dev))
            if dev[worst] > strategy.tolerance and result.corrections < strategy.seed_budget:
                near = gt[int(np.argmin(np.hypot(*(gt - wire[worst]).T)))]
                c = (int(np.clip(round(near[0]), 0, w - 1)),
                     int(np.clip(round(near[1]), 0, h - 1)))
                if c != a and c != b:
                    result.corrections += 1
                    result.seed_count += 1
                    stack.append((c, b))
                    stack.append((a, c))
                    continue
            if dev[worst] > strategy.tolerance:
                result.converged = False
            contour.extend(map(tuple, wire[:-1]))
        if not phantom.closed_boundary:
            contour.append(px[-1])
        slices.append((k, np.asarray(contour, dtype=np.int64)))
        result.slice_timings.append(time.perf_counter() - t0)

    from .volume_io import ContourSet

    result.contours = ContourSet(slices=slices, segments=[(0, phantom.depth - 1)],
                                 spacing=1.0)
    return result


def paint_training_samples(field, mask) -> np.ndarray:
    """Gradient-feature bins under a painted mask, ready for train_mapping."""
    return field.grad_bin[np.asarray(mask, dtype=bool)].ravel()
