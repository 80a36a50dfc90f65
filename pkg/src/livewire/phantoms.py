"""Synthetic volumes with analytic ground truth.

Stand-ins for scanner data in tests and evaluation: a straight cylinder, a
cone, an ellipsoid, and the two-parallel-edges plate used to study
interference from a stronger neighboring boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .image_ops import CutLine
from .pipeline3d import CutBoundary, TopologySegment
from .volume_io import Volume

PHANTOM_KINDS = ("cylinder", "cone", "two_edge_plate", "ellipsoid")


@dataclass
class Phantom:
    """Generator spec; ``make_volume`` and ``boundary_points`` are the contract.

    The two_edge_plate is a pair of vertical ramp edges ``separation`` pixels
    apart whose gradient magnitudes differ by exactly 2x; its ground truth is
    the weak line (the boundary of interest), with the strong line exposed as
    ``params['strong_x']`` for interference checks.
    """

    kind: str
    width: int = 64
    height: int = 64
    depth: int = 0  # 0 = kind default (8 for circular phantoms, 1 for the plate)
    contrast: int = 120
    noise_sigma: float = 0.0
    noise_seed: int = 7
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PHANTOM_KINDS:
            raise ValueError(f"unknown phantom kind {self.kind!r}")
        p = dict(self.params)
        if self.kind in ("cylinder", "cone", "ellipsoid"):
            if self.depth <= 0:
                self.depth = 8
            p.setdefault("cx", self.width / 2.0)
            p.setdefault("cy", self.height / 2.0)
            p.setdefault("radius", 12.0)
            p.setdefault("background", 50)
            if self.kind == "cone":
                p.setdefault("shrink", 1.0)  # radius loss per slice
            if self.kind == "ellipsoid":
                p.setdefault("ry_over_rx", 0.75)
        else:
            if self.depth <= 0:
                self.depth = 1
            p.setdefault("background", 40)
            p.setdefault("strong_x", 24)
            p.setdefault("separation", 6)
            p["weak_x"] = p["strong_x"] + p["separation"]
        self.params = p

    # -- geometry ----------------------------------------------------------

    def radius_at(self, k: int) -> float:
        r = float(self.params["radius"])
        if self.kind == "cone":
            return max(r - self.params["shrink"] * k, 2.0)
        if self.kind == "ellipsoid":
            zc = (self.depth - 1) / 2.0
            rz = zc + 1.0
            s = math.sqrt(max(1.0 - ((k - zc) / rz) ** 2, 0.0))
            return max(r * s, 2.0)
        return r

    def boundary_points(self, k: int, n: int = 256) -> np.ndarray:
        """Analytic boundary of slice ``k``: closed circle or the open weak line."""
        if self.kind == "two_edge_plate":
            xw = float(self.params["weak_x"])
            ys = np.linspace(0, self.height - 1, n)
            return np.column_stack([np.full(n, xw), ys])
        cx, cy = self.params["cx"], self.params["cy"]
        r = self.radius_at(k)
        th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        if self.kind == "ellipsoid":
            ry = r * self.params["ry_over_rx"]
            return np.column_stack([cx + r * np.cos(th), cy + ry * np.sin(th)])
        return np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])

    @property
    def closed_boundary(self) -> bool:
        return self.kind != "two_edge_plate"

    # -- voxels --------------------------------------------------------------

    def make_volume(self) -> Volume:
        vol = np.empty((self.depth, self.height, self.width), dtype=np.float64)
        for k in range(self.depth):
            vol[k] = self._slice_values(k)
        if self.noise_sigma > 0:
            rng = np.random.default_rng(self.noise_seed)
            vol += rng.normal(0.0, self.noise_sigma, vol.shape)
        return Volume(np.clip(np.rint(vol), 0, 255).astype(np.uint8))

    def _slice_values(self, k: int) -> np.ndarray:
        bg = float(self.params["background"])
        if self.kind == "two_edge_plate":
            jump = self.contrast  # strong edge total step; the weak one is half
            xs = int(self.params["strong_x"])
            xw = int(self.params["weak_x"])
            row = np.full(self.width, bg)
            row[xs] = bg + jump / 2.0
            row[xs + 1 : xw] = bg + jump
            row[xw] = bg + jump + jump / 4.0
            row[xw + 1 :] = bg + jump + jump / 2.0
            return np.tile(row, (self.height, 1))
        cx, cy = self.params["cx"], self.params["cy"]
        r = self.radius_at(k)
        y, x = np.mgrid[0 : self.height, 0 : self.width]
        if self.kind == "ellipsoid":
            ry = r * self.params["ry_over_rx"]
            inside = ((x - cx) / r) ** 2 + ((y - cy) / ry) ** 2 <= 1.0
        else:
            inside = (x - cx) ** 2 + (y - cy) ** 2 <= r * r
        return np.where(inside, bg + self.contrast, bg)

    # -- analytic cuts -------------------------------------------------------

    def analytic_cuts(self, margin: float = 4.0) -> TopologySegment:
        """Two perpendicular diameters with exact cut boundaries (circle kinds)."""
        if self.kind == "two_edge_plate":
            raise ValueError("analytic cuts are defined for the circular phantoms")
        cx, cy = self.params["cx"], self.params["cy"]
        r0 = max(self.radius_at(k) for k in range(self.depth))
        reach = r0 + margin
        if self.kind == "ellipsoid":
            ry_reach = r0 * self.params["ry_over_rx"] + margin
        else:
            ry_reach = reach
        horiz = CutLine((cx - reach, cy), (cx + reach, cy))
        vert = CutLine((cx, cy - ry_reach), (cx, cy + ry_reach))
        cbs = []
        for cut, vertical in ((horiz, False), (vert, True)):
            left, right = [], []
            for k in range(self.depth):
                r = self.radius_at(k)
                if vertical and self.kind == "ellipsoid":
                    r *= self.params["ry_over_rx"]
                half = cut.length / 2.0
                left.append((int(round(half - r)), k))
                right.append((int(round(half + r)), k))
            poly = _chain_loop(left, right)
            cbs.append(CutBoundary(cut, poly))
        return TopologySegment(0, self.depth - 1, cbs)


def _chain_points(a, b):
    """Chebyshev staircase from a to b, excluding a."""
    ax, ay = a
    bx, by = b
    steps = max(abs(bx - ax), abs(by - ay))
    out = []
    for i in range(1, steps + 1):
        # floor(x + .5): keep away from banker's rounding for reproducibility
        out.append((ax + int(math.floor((bx - ax) * i / steps + 0.5)),
                    ay + int(math.floor((by - ay) * i / steps + 0.5))))
    return out


def _chain_loop(left, right):
    """Closed 8-connected loop: down the left branch, across, up the right, across."""
    pts = [left[0]]
    for p in left[1:]:
        pts.extend(_chain_points(pts[-1], p))
    for p in (right[-1],) + tuple(reversed(right[:-1])):
        pts.extend(_chain_points(pts[-1], p))
    pts.extend(_chain_points(pts[-1], left[0]))
    return np.asarray(pts[:-1], dtype=np.int64)  # drop duplicated start
