"""Slice-by-slice 3D segmentation driven by orthogonal cuts.

The user segments a handful of planes orthogonal to the slice stack; each cut
boundary donates two seed points per slice, validated for consistent cyclic
ordering.  Between slices, a chamfer distance transform of the previous
contour bounds the next search to a thin strip, which both regularizes the
result and shrinks the graph dramatically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .cost_model import CostWeights, TrainedMapping, static_cost
from .engine import compute_path_tree, reconstruct
from .image_ops import CutLine
from .volume_io import ContourSet, Volume


class TopologyViolation(ValueError):
    """A slice row yields other than two seed points, or cut order is inconsistent."""

    def __init__(self, message, slice_index=None, cut_number=None):
        super().__init__(message)
        self.slice_index = slice_index
        self.cut_number = cut_number


class UnreachableSeedError(RuntimeError):
    """A seed could not be reached inside the search strip (strip too narrow)."""

    def __init__(self, message, slice_index=None):
        super().__init__(message)
        self.slice_index = slice_index


# ---------------------------------------------------------------------------
# Chamfer distance transform
# ---------------------------------------------------------------------------

@dataclass
class DTField:
    """Chamfer distances in tenths of a pixel (10 axial, 14 diagonal)."""

    dist: np.ndarray

    @property
    def shape(self):
        return self.dist.shape


def chamfer_dt(boundary_mask: np.ndarray) -> DTField:
    """Two-pass chamfer distance transform of a boundary pixel mask."""
    mask = np.asarray(boundary_mask, dtype=bool)
    if not mask.any():
        raise ValueError("boundary mask is empty")
    h, w = mask.shape
    far = 10 * 3 * max(w, h)  # beyond any in-plane chamfer distance
    dist = np.where(mask, 0, far).astype(np.int64)
    return DTField(kernels.chamfer_passes(dist))


def strip_mask(dt: DTField, width: int) -> np.ndarray:
    """Pixels within ``width`` pixels (chamfer) of the generating boundary."""
    if width < 1:
        raise ValueError("strip width must be >= 1")
    return dt.dist <= 10 * width


@dataclass
class StripParams:
    """Safety margin on the backward-difference strip width estimate."""

    safety_factor: float = 1.5

    def __post_init__(self):
        if not 1.1 <= self.safety_factor <= 2.0:
            raise ValueError("safety factor must lie in [1.1, 2.0]")


# ---------------------------------------------------------------------------
# Cut boundaries and seed derivation
# ---------------------------------------------------------------------------

@dataclass
class CutBoundary:
    """A segmented boundary in an orthogonal-cut image.

    ``polyline`` is (N, 2) of (column, row) in cut-plane coordinates: column
    is the arc position along the cut line, row is the slice index.  Closed
    boundaries may repeat the first point last or not; both are handled.
    """

    cut: CutLine
    polyline: np.ndarray
    closed: bool = field(init=False, default=False)

    def __post_init__(self):
        pts = np.asarray(self.polyline, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("cut boundary polyline must be (N, 2) with N >= 2")
        if len(pts) > 1 and tuple(pts[0]) == tuple(pts[-1]):
            pts = pts[:-1]
        steps = np.abs(np.diff(pts, axis=0))
        if steps.size and steps.max() > 1:
            raise ValueError("cut boundary polyline must be 8-connected")
        self.polyline = pts
        # closed loop iff the ends meet under 8-connectivity
        self.closed = len(pts) > 2 and np.abs(pts[0] - pts[-1]).max() <= 1


#: Crossings closer than this many columns merge into one seed (noise wiggle).
WIGGLE_RADIUS = 3


def _row_crossings(polyline: np.ndarray, row: int, closed: bool) -> list:
    """Columns where the polyline crosses a slice row.

    The row is probed as a horizontal ray a quarter pixel inside the
    polyline's row extent, so every crossing is a strict edge intersection:
    the cap rows of a closed boundary report their corner columns and
    vertices never sit exactly on the ray.
    """
    rows = polyline[:, 1]
    rmin, rmax = int(rows.min()), int(rows.max())
    if not rmin <= row <= rmax:
        return []
    if rmin == rmax:
        # degenerate one-row boundary: its extent gives the two crossings
        lo, hi = float(polyline[:, 0].min()), float(polyline[:, 0].max())
        return [lo, hi] if hi - lo > WIGGLE_RADIUS else [(lo + hi) / 2.0]
    y = row + 0.25 if row < rmax else row - 0.25
    n = len(polyline)
    cols = []
    last = n if closed else n - 1
    for i in range(last):
        c0, r0 = polyline[i]
        c1, r1 = polyline[(i + 1) % n]
        if (r0 - y) * (r1 - y) < 0:
            t = (y - r0) / (r1 - r0)
            cols.append(float(c0 + t * (c1 - c0)))
    return cols


def _cluster_columns(cols) -> list:
    """Merge crossings within the wiggle radius; a cluster's parity decides.

    An odd cluster is one boundary crossing at its median; an even cluster is
    a graze (the wire dipped to the row and back) and contributes nothing.
    """
    cols = sorted(cols)
    clusters = []
    cur = [cols[0]]
    for c in cols[1:]:
        if c - cur[-1] <= WIGGLE_RADIUS:
            cur.append(c)
        else:
            clusters.append(cur)
            cur = [c]
    clusters.append(cur)
    return [float(np.median(c)) for c in clusters if len(c) % 2 == 1]


def slice_seeds(cb: CutBoundary, slice_index: int):
    """The cut boundary's two seed points in a slice plane.

    Crossing columns are clustered within :data:`WIGGLE_RADIUS` and each
    cluster keeps its median; exactly two clusters must survive.  Returns the
    (start-side, end-side) points in slice-plane (x, y) coordinates.
    """
    cols = _row_crossings(cb.polyline, slice_index, cb.closed)
    if not cols:
        raise TopologyViolation(
            f"cut boundary does not intersect slice {slice_index}",
            slice_index=slice_index)
    centers = _cluster_columns(cols)
    if len(centers) != 2:
        raise TopologyViolation(
            f"slice {slice_index}: expected 2 boundary crossings, found {len(centers)}",
            slice_index=slice_index)
    lo, hi = sorted(centers)
    return cb.cut.point_at(lo), cb.cut.point_at(hi)


@dataclass
class TopologySegment:
    """A slice range where the boundary neither splits nor vanishes."""

    first_slice: int
    last_slice: int
    cut_boundaries: list = field(default_factory=list)

    def __post_init__(self):
        if self.last_slice < self.first_slice:
            raise ValueError("segment range reversed")


# ---------------------------------------------------------------------------
# Cut ordering
# ---------------------------------------------------------------------------

def derive_segment_seeds(segment: TopologySegment, slice_index: int) -> list:
    """All 2k seeds on one slice, creation-ordered: start sides then end sides."""
    starts, ends = [], []
    for i, cb in enumerate(segment.cut_boundaries):
        if not isinstance(cb, CutBoundary):
            raise TopologyViolation(
                f"cut {i + 1} has no segmented boundary yet", cut_number=i + 1)
        s, e = slice_seeds(cb, slice_index)
        starts.append(s)
        ends.append(e)
    return starts + ends


def _pattern_mismatch(points, k):
    """Cuts whose seeds sit outside the starts-then-ends rotational pattern.

    Labels the 2k points (label i = cut i's start, label k+i = its end), reads
    them in angular order around the centroid, and compares every rotation of
    the expected pattern in both directions.  Returns the per-cut mismatch
    set of the best assignment (empty = valid ordering).
    """
    pts = np.asarray(points, dtype=np.float64)
    c = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0])
    order = list(np.argsort(ang, kind="stable"))
    n = 2 * k
    best = None
    for seq in (order, order[::-1]):
        for rot in range(n):
            cuts_off = set()
            for pos in range(n):
                label = seq[(rot + pos) % n]
                if label != pos:
                    cuts_off.add(label % k)
                    cuts_off.add(pos % k)
            if best is None or len(cuts_off) < len(best) or (
                    len(cuts_off) == len(best) and max(cuts_off, default=-1)
                    > max(best, default=-1)):
                best = cuts_off
            if not cuts_off:
                return set()
    return best


def validate_cut_ordering(segment: TopologySegment) -> None:
    """Require the cuts to form a strictly clockwise or anticlockwise sequence.

    On the segment's first slice the 2k seed points, read cyclically around
    their centroid, must visit all start-side points in cut creation order
    followed by all end-side points in the same order (either rotational
    direction).  Raises naming the latest offending cut (1-based) otherwise.
    """
    k = len(segment.cut_boundaries)
    if k < 2:
        raise TopologyViolation("need at least 2 cuts per segment")
    pts = derive_segment_seeds(segment, segment.first_slice)
    if len(set(map(tuple, np.round(pts, 6)))) < 2 * k:
        raise TopologyViolation("cut seed points coincide; cuts degenerate")
    off = _pattern_mismatch(pts, k)
    if off:
        cut_number = max(off) + 1
        raise TopologyViolation(
            f"orthogonal cut {cut_number} breaks the cyclic seed ordering "
            f"(cuts must be created strictly clockwise or anticlockwise)",
            cut_number=cut_number)


def strip_width(segment: TopologySegment, params: StripParams) -> int:
    """Strip width from backward differences of cut-boundary columns per slice.

    The largest slice-to-slice column change over every cut and branch, floored
    at 1, scaled by the safety factor and rounded up.
    """
    max_diff = 0
    for cb in segment.cut_boundaries:
        rows = sorted(set(int(r) for r in cb.polyline[:, 1]))
        if len(rows) < 2:
            raise TopologyViolation("cut boundary confined to one slice row")
        per_row = {}
        for r in rows:
            cols = _row_crossings(cb.polyline, r, cb.closed)
            centers = _cluster_columns(cols)
            if len(centers) == 2:
                per_row[r] = sorted(centers)
        rs = sorted(per_row)
        for a, b in zip(rs, rs[1:]):
            if b - a != 1:
                continue
            for branch in (0, 1):
                d = abs(per_row[b][branch] - per_row[a][branch])
                max_diff = max(max_diff, int(math.ceil(d)))
    return int(math.ceil(params.safety_factor * max(max_diff, 1)))


# ---------------------------------------------------------------------------
# Rasterization (shared with the metrics module)
# ---------------------------------------------------------------------------

def raster_polyline(points, shape, close: bool = True) -> np.ndarray:
    """8-connected raster of a polyline/polygon as a boolean mask."""
    pts = np.asarray(points, dtype=np.float64)
    mask = np.zeros(shape, dtype=bool)
    if len(pts) == 0:
        return mask
    h, w = shape
    seq = np.vstack([pts, pts[:1]]) if close and len(pts) > 1 else pts
    for a, b in zip(seq[:-1], seq[1:]):
        n = int(max(abs(b[0] - a[0]), abs(b[1] - a[1]))) + 1
        for t in np.linspace(0.0, 1.0, max(n, 2)):
            x = int(round(a[0] + t * (b[0] - a[0])))
            y = int(round(a[1] + t * (b[1] - a[1])))
            if 0 <= x < w and 0 <= y < h:
                mask[y, x] = True
    if len(pts) == 1:
        x, y = int(round(pts[0][0])), int(round(pts[0][1]))
        if 0 <= x < w and 0 <= y < h:
            mask[y, x] = True
    return mask


# ---------------------------------------------------------------------------
# The sweep
# ---------------------------------------------------------------------------

def _segment_slice(field, seeds, mask):
    """Run the wire seed-to-seed around the cycle; returns the closed contour."""
    cycle = list(seeds) + [seeds[0]]
    contour = []
    for a, b in zip(cycle[:-1], cycle[1:]):
        tree = compute_path_tree(field, a, search_mask=mask, stop_at=b)
        if not tree.reached(int(b[0]), int(b[1])):
            raise UnreachableSeedError(
                f"seed {tuple(int(v) for v in b)} unreachable inside the search strip")
        leg = reconstruct(tree, b)
        contour.extend(map(tuple, leg[:-1]))
    return np.asarray(contour, dtype=np.int64)


def segment_volume(volume: Volume, segments, weights: CostWeights | None = None,
                   mapping: TrainedMapping | None = None,
                   params: StripParams | None = None,
                   progress=None, cancel=None) -> ContourSet:
    """Automatic slice sweep: seeds from the cut boundaries, strip-restricted search.

    The first slice of each segment searches the whole image; later slices
    restrict the graph to the thresholded distance transform of the previous
    contour (seeds force-included).  ``progress(done, total)`` is called per
    slice; ``cancel`` is an optional Event-like object checked between slices.
    """
    weights = weights or CostWeights()
    params = params or StripParams()
    h, w = volume.height, volume.width
    total = sum(s.last_slice - s.first_slice + 1 for s in segments)
    done = 0
    slices = []
    seg_ranges = []
    for segment in segments:
        validate_cut_ordering(segment)
        # a single-slice segment never restricts: no strips needed
        width = strip_width(segment, params) if segment.last_slice > segment.first_slice else 0
        prev_contour = None
        for k in range(segment.first_slice, segment.last_slice + 1):
            if cancel is not None and cancel.is_set():
                raise InterruptedError("segmentation cancelled")
            if not 0 <= k < volume.depth:
                raise IndexError(f"segment range touches missing slice {k}")
            try:
                seeds = derive_segment_seeds(segment, k)
            except TopologyViolation as e:
                e.slice_index = k
                raise
            seed_px = [(int(round(x)), int(round(y))) for x, y in seeds]
            for x, y in seed_px:
                if not (0 <= x < w and 0 <= y < h):
                    raise TopologyViolation(f"seed ({x}, {y}) outside slice bounds",
                                            slice_index=k)
            field = static_cost(volume.voxels[k], weights, mapping)
            if prev_contour is None:
                mask = None
            else:
                dt = chamfer_dt(raster_polyline(prev_contour, (h, w)))
                mask = strip_mask(dt, width)
                for x, y in seed_px:
                    mask[y, x] = True
            try:
                contour = _segment_slice(field, seed_px, mask)
            except UnreachableSeedError as e:
                e.slice_index = k
                raise
            slices.append((k, contour))
            prev_contour = contour
            done += 1
            if progress is not None:
                progress(done, total)
        seg_ranges.append((segment.first_slice, segment.last_slice))
    return ContourSet(slices=slices, segments=seg_ranges, spacing=volume.spacing)


# ---------------------------------------------------------------------------
# Cuts JSON
# ---------------------------------------------------------------------------

def segments_from_json(text: str) -> list:
    doc = json.loads(text)
    out = []
    for seg in doc["segments"]:
        cbs = []
        for c in seg["cuts"]:
            cut = CutLine(tuple(c["p0"]), tuple(c["p1"]))
            if "boundary" in c and c["boundary"]:
                cbs.append(CutBoundary(cut, np.asarray(c["boundary"])))
            else:
                cbs.append(cut)  # boundary to be segmented interactively
        out.append(TopologySegment(int(seg["first"]), int(seg["last"]), cbs))
    return out


def segments_to_json(segments) -> str:
    doc = {"segments": []}
    for seg in segments:
        cuts = []
        for cb in seg.cut_boundaries:
            if isinstance(cb, CutBoundary):
                cuts.append({
                    "p0": list(cb.cut.p0), "p1": list(cb.cut.p1),
                    "boundary": [[int(c), int(r)] for c, r in cb.polyline],
                })
            else:
                cuts.append({"p0": list(cb.p0), "p1": list(cb.p1)})
        doc["segments"].append({"first": seg.first_slice, "last": seg.last_slice,
                                "cuts": cuts})
    return json.dumps(doc, indent=1, sort_keys=True)


def load_segments(path) -> list:
    return segments_from_json(Path(path).read_text())
