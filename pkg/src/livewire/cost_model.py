"""Graph edge costs for the boundary search.

Two base per-pixel features feed the cost: an inverted, range-scaled gradient
magnitude and a Laplacian zero-crossing indicator.  On-the-fly training
replaces the gradient term with a painted-sample mapping; optional direction
and path-deviation penalties plus a heat overlay are folded in per edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import image_ops
from .image_ops import round_half_up

COST_MAX = 65535
SQRT2 = math.sqrt(2.0)

#: Extra cost per turn sharpness (0, 45, 90, 135, 180 degrees).  Small against
#: the 0..255 base range so smoothing never overrides a strong edge.
DEFAULT_TURN_PENALTIES = (0.0, 8.0, 24.0, 64.0, 128.0)

# 8-neighborhood, counterclockwise from +x in screen coords (y down)
DIR_DX = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)
DIR_DY = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)
DIR_DIAGONAL = (DIR_DX != 0) & (DIR_DY != 0)


@dataclass
class CostWeights:
    w_g: float = 0.5
    w_l: float = 0.5
    w_d: float = 0.0
    w_s: float = 0.0
    use_training: bool = False
    turn_penalties: tuple = DEFAULT_TURN_PENALTIES

    def __post_init__(self):
        for name in ("w_g", "w_l", "w_d", "w_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if len(self.turn_penalties) != 5:
            raise ValueError("turn_penalties needs one entry per 45-degree step")


def gradient_feature(grad: float, grad_max: float) -> int:
    """255 * (1 - grad / grad_max), rounded half-up; 255 when grad_max is 0."""
    if grad_max <= 0:
        return 255
    if grad > grad_max:
        raise ValueError(f"gradient {grad} exceeds maximum {grad_max}")
    return int(round_half_up(255.0 * (1.0 - grad / grad_max)))


def laplacian_feature(is_crossing: bool) -> int:
    """1 on a zero crossing, 255 elsewhere."""
    return 1 if is_crossing else 255


@dataclass
class TrainedMapping:
    """256-entry table from gradient-feature bin to favor value in 0..255.

    High table values mark feature bins typical of the painted boundary; the
    static cost uses 255 - table[g].
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.shape != (256,):
            raise ValueError("mapping table must have 256 entries")
        if t.min() < 0 or t.max() > 255:
            raise ValueError("mapping entries must lie in [0, 255]")
        self.table = t

    def to_text(self) -> str:
        return "\n".join(f"{g} {int(v)}" for g, v in enumerate(self.table)) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TrainedMapping":
        table = np.zeros(256, dtype=np.int64)
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            g, v = line.split()
            table[int(g)] = int(v)
        return cls(table)


class TrainingError(ValueError):
    pass


def train_mapping(samples) -> TrainedMapping:
    """Build the painted-boundary mapping from gradient-feature samples.

    Histogram over 256 bins, 3-bin box smoothing, then bin value
    g^3 * frequency^2 normalized so the best bin maps to 255.
    """
    samples = np.asarray(samples, dtype=np.int64).ravel()
    if samples.size < 16:
        raise TrainingError(f"need at least 16 painted samples, got {samples.size}")
    if samples.min() < 0 or samples.max() > 255:
        raise ValueError("samples must be gradient-feature bins in [0, 255]")
    if samples.max() == 0:
        raise TrainingError("all painted samples have zero gradient; nothing to favor")
    freq = np.bincount(samples, minlength=256).astype(np.float64)
    smooth = np.zeros(256)
    smooth += freq
    smooth[1:] += freq[:-1]
    smooth[:-1] += freq[1:]
    smooth /= 3.0
    g = np.arange(256, dtype=np.float64)
    raw = g**3 * smooth**2
    table = round_half_up(255.0 * raw / raw.max())
    return TrainedMapping(np.clip(table, 0, 255))


@dataclass
class StaticCostField:
    """Per-pixel base cost in [0, 255] plus the raw gradient-feature bin."""

    cost: np.ndarray
    grad_bin: np.ndarray

    @property
    def shape(self):
        return self.cost.shape


def static_cost(img: np.ndarray, weights: CostWeights | None = None,
                mapping: TrainedMapping | None = None) -> StaticCostField:
    """Combine the base features (or the trained mapping) into pixel costs.

    Untrained: cost = w_g * f_G + w_l * f_L.  Trained: the mapping output
    replaces f_G (cost contribution 255 - table[g]); the Laplacian term keeps
    its weight and the two active weights are renormalized to sum to 1.
    """
    weights = weights or CostWeights()
    grad = image_ops.gradient_magnitude(img)
    zc = image_ops.laplacian_zero_crossings(img)
    if grad.max_value > 0:
        ratio = grad.values / grad.max_value
        f_g = round_half_up(255.0 * (1.0 - ratio))
        g_bin = round_half_up(255.0 * ratio)
    else:
        f_g = np.full(grad.shape, 255, dtype=np.int64)
        g_bin = np.zeros(grad.shape, dtype=np.int64)
    f_l = np.where(zc, 1, 255).astype(np.float64)

    w_g, w_l = weights.w_g, weights.w_l
    if mapping is not None:
        total = w_g + w_l
        if total <= 0:
            raise ValueError("trained cost needs a positive weight")
        gterm = (255 - mapping.table)[g_bin].astype(np.float64)
        cost = round_half_up((w_g / total) * gterm + (w_l / total) * f_l)
    else:
        cost = round_half_up(w_g * f_g + w_l * f_l)
    cost = np.clip(cost, 0, 255)
    return StaticCostField(cost.astype(np.int32), g_bin.astype(np.uint8))


@dataclass
class PathStats:
    """Running mean/variance of gradient-feature values along a path."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, g: float) -> "PathStats":
        # Welford: one division and one multiply-add per new sample
        count = self.count + 1
        delta = g - self.mean
        mean = self.mean + delta / count
        m2 = self.m2 + delta * (g - mean)
        return PathStats(count, mean, m2)

    @property
    def stddev(self) -> float:
        return math.sqrt(self.m2 / self.count) if self.count > 0 else 0.0


def deviation_penalty(stats: PathStats, g_candidate: float, w_s: float):
    """Penalty for a candidate pixel deviating from the path's feature statistics.

    Returns (penalty, stats-with-candidate-included).  No penalty until the
    path carries at least two samples.
    """
    if stats.count < 2:
        penalty = 0.0
    else:
        norm = 255.0 * abs(g_candidate - stats.mean) / (stats.stddev + 1.0)
        penalty = w_s * min(255.0, norm)
    return penalty, stats.push(g_candidate)


def direction_penalty(dir_in: int, dir_out: int, w_d: float,
                      turn_penalties=DEFAULT_TURN_PENALTIES) -> float:
    """Curvature penalty between two 8-neighborhood step directions."""
    if not (0 <= dir_in < 8 and 0 <= dir_out < 8):
        raise ValueError("directions must be 0..7 compass steps")
    d = abs(dir_in - dir_out)
    turn = min(d, 8 - d)
    return w_d * turn_penalties[turn]


@dataclass
class HeatOverlay:
    """Cost inflation of the pixels the wire has sat on.

    Each heat step raises ``level`` and adds the wire's pixels to the heated
    set; heated pixels cost (1 + 0.25 * level) times more.  The set
    accumulates across steps so a path cannot dodge back onto pixels heated a
    step earlier; a seed commit resets everything.
    """

    level: int = 0
    heated_pixels: set = field(default_factory=set)

    def step(self, wire_pixels) -> None:
        self.level += 1
        self.heated_pixels.update((int(x), int(y)) for x, y in wire_pixels)

    def reset(self) -> None:
        self.level = 0
        self.heated_pixels.clear()

    @property
    def factor(self) -> float:
        return 1.0 + 0.25 * self.level

    def mask(self, shape) -> np.ndarray:
        m = np.zeros(shape, dtype=bool)
        if self.level > 0:
            for x, y in self.heated_pixels:
                if 0 <= y < shape[0] and 0 <= x < shape[1]:
                    m[y, x] = True
        return m


def edge_cost(field: StaticCostField, frm, to, dir_in: int | None = None,
              stats: PathStats | None = None, heat: HeatOverlay | None = None,
              weights: CostWeights | None = None):
    """Cost of stepping onto ``to`` from the 8-neighbor ``frm``.

    Base cost of the destination pixel, sqrt(2)-scaled on diagonal steps,
    plus optional direction and deviation penalties, heat-multiplied and
    clamped to [0, 65535].  Returns (cost, updated stats or None).
    """
    weights = weights or CostWeights()
    fx, fy = int(frm[0]), int(frm[1])
    tx, ty = int(to[0]), int(to[1])
    dx, dy = tx - fx, ty - fy
    if max(abs(dx), abs(dy)) != 1:
        raise ValueError(f"{to} is not an 8-neighbor of {frm}")
    dir_out = _dir_index(dx, dy)
    total = float(field.cost[ty, tx])
    if DIR_DIAGONAL[dir_out]:
        total *= SQRT2
    if dir_in is not None:
        total += direction_penalty(dir_in, dir_out, weights.w_d, weights.turn_penalties)
    new_stats = None
    if stats is not None:
        pen, new_stats = deviation_penalty(stats, float(field.grad_bin[ty, tx]), weights.w_s)
        total += pen
    if heat is not None and heat.level > 0 and (tx, ty) in heat.heated_pixels:
        total *= heat.factor
    cost = int(round_half_up(total))
    return max(0, min(cost, COST_MAX)), new_stats


def _dir_index(dx: int, dy: int) -> int:
    for i in range(8):
        if DIR_DX[i] == dx and DIR_DY[i] == dy:
            return i
    raise ValueError(f"({dx}, {dy}) is not a unit 8-neighborhood step")

