"""Triangular surface meshing of a parallel-plane contour stack.

Each adjacent slice pair becomes a band: the upper ring is resampled (or
inherited from the previous band), the lower contour is scale/translate
normalized to it, corresponding points are found by a windowed
closest-point march along the lower contour, and every quad splits into two
triangles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .volume_io import ContourSet


class MeshError(ValueError):
    pass


@dataclass
class SampledContour:
    """Ring of M planar points with its circumference."""

    points: np.ndarray
    circumference: float


@dataclass
class ContourTransform:
    """Uniform scale about a center followed by a translation."""

    scale: float
    center: np.ndarray
    offset: np.ndarray

    def apply(self, pts: np.ndarray) -> np.ndarray:
        return (pts - self.center) * self.scale + self.center + self.offset

    def inverse(self) -> "ContourTransform":
        # (p - c) s + c + o  inverted about the moved center
        return ContourTransform(1.0 / self.scale, self.center + self.offset,
                                -self.offset)


@dataclass
class Mesh:
    vertices: np.ndarray   # (K, 3) with z = slice_index * spacing
    triangles: np.ndarray  # (T, 3) vertex indices, consistent winding
    bands: list            # (slice_a, slice_b, tri_start, tri_count) per band


def _as_ring(contour) -> np.ndarray:
    pts = np.asarray(contour, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise MeshError("contour must be (N, 2) with at least 3 points")
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 3:
        raise MeshError("contour degenerates after closing-point removal")
    return pts


def _edge_lengths(ring: np.ndarray) -> np.ndarray:
    nxt = np.roll(ring, -1, axis=0)
    return np.hypot(*(nxt - ring).T)


def perimeter(contour) -> float:
    return float(_edge_lengths(_as_ring(contour)).sum())


def _arc_point(ring: np.ndarray, lengths: np.ndarray, cum: np.ndarray, s: float):
    """Point at arc position s (mod circumference) along the ring."""
    total = cum[-1]
    s = s % total
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = max(0, min(i, len(ring) - 1))
    t = (s - cum[i]) / lengths[i] if lengths[i] > 0 else 0.0
    j = (i + 1) % len(ring)
    return ring[i] + t * (ring[j] - ring[i])


def _start_vertex(ring: np.ndarray) -> int:
    """Vertex of maximal convex turning angle; ties go to the lowest index."""
    n = len(ring)
    prv = np.roll(ring, 1, axis=0)
    nxt = np.roll(ring, -1, axis=0)
    e0 = ring - prv
    e1 = nxt - ring
    cross = e0[:, 0] * e1[:, 1] - e0[:, 1] * e1[:, 0]
    dot = (e0 * e1).sum(axis=1)
    turn = np.arctan2(cross, dot)
    x = ring[:, 0]
    y = ring[:, 1]
    area2 = float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    orient = 1.0 if area2 > 0 else -1.0
    signed = orient * turn
    best = int(np.argmax(signed))
    ties = np.nonzero(np.isclose(signed, signed[best], atol=1e-12))[0]
    return int(ties[0]) if ties.size else best


def resample(contour, m: int) -> SampledContour:
    """M points at equal arc spacing, starting at a convex vertex."""
    if m < 3:
        raise MeshError("need at least 3 samples")
    ring = _as_ring(contour)
    lengths = _edge_lengths(ring)
    total = float(lengths.sum())
    if total <= 0:
        raise MeshError("degenerate contour of zero length")
    start = _start_vertex(ring)
    ring = np.roll(ring, -start, axis=0)
    lengths = np.roll(lengths, -start)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    pts = np.array([_arc_point(ring, lengths, cum, i * total / m) for i in range(m)])
    return SampledContour(pts, total)


def _curve_centroid(ring: np.ndarray) -> np.ndarray:
    lengths = _edge_lengths(ring)
    mids = (ring + np.roll(ring, -1, axis=0)) / 2.0
    return (mids * lengths[:, None]).sum(axis=0) / lengths.sum()


def normalize_next(prev: SampledContour, next_contour):
    """Scale/translate the next contour to the previous ring's size and centroid.

    Returns (transformed ring, transform applied) so corresponded points can
    be mapped back with the inverse.
    """
    ring = _as_ring(next_contour)
    l_next = float(_edge_lengths(ring).sum())
    if l_next <= 0:
        raise MeshError("degenerate next contour")
    scale = prev.circumference / l_next
    c_next = _curve_centroid(ring)
    c_prev = _curve_centroid(np.asarray(prev.points, dtype=np.float64))
    scaled = (ring - c_next) * scale + c_next
    offset = c_prev - c_next
    return scaled + offset, ContourTransform(scale, c_next, offset)


def _closest_on_segment(p, a, b):
    ab = b - a
    den = float(ab @ ab)
    t = 0.0 if den == 0 else float(np.clip((p - a) @ ab / den, 0.0, 1.0))
    q = a + t * ab
    return q, t, float(np.hypot(*(p - q)))


def correspond(prev: SampledContour, next_ring, arc_window: float):
    """March M closest points along the next ring within an arc window.

    The first point is the global closest point; each later one is the
    closest within ``(s_prev, s_prev + arc_window]`` so arc positions advance
    strictly monotonically and the march wraps at most once.  A tiny minimum
    advance keeps the march moving when a jagged contour pulls the closest
    point back onto the window edge.
    """
    ring = _as_ring(next_ring)
    lengths = _edge_lengths(ring)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = float(cum[-1])
    if not 0 < arc_window <= total / 2 + 1e-9:
        raise MeshError("arc window must lie in (0, circumference/2]")
    min_advance = 1e-3 * arc_window
    n = len(ring)

    def global_closest(p):
        best = (math.inf, 0.0)
        for i in range(n):
            q, t, d = _closest_on_segment(p, ring[i], ring[(i + 1) % n])
            if d < best[0]:
                best = (d, cum[i] + t * lengths[i])
        return best[1]

    def window_closest(p, s0):
        # segments overlapping (s0, s0 + arc_window], unwrapped along the arc
        best_d = math.inf
        best_s = None
        lo, hi = s0, s0 + arc_window
        for i in range(n):
            if lengths[i] == 0:
                continue
            for base in (0.0, total):  # unwrap once past the seam
                a0 = cum[i] + base
                a1 = a0 + lengths[i]
                if a1 <= lo + 1e-12 or a0 >= hi:
                    continue
                t0 = max((lo - a0) / lengths[i], 0.0)
                t1 = min((hi - a0) / lengths[i], 1.0)
                if t1 <= t0:
                    continue
                a = ring[i]
                b = ring[(i + 1) % n]
                q, t, d = _closest_on_segment(p, a + t0 * (b - a), a + t1 * (b - a))
                s = a0 + (t0 + t * (t1 - t0)) * lengths[i]
                if d < best_d - 1e-12 or (abs(d - best_d) <= 1e-12 and best_s is not None
                                          and s < best_s):
                    best_d = d
                    best_s = s
        return best_s

    m = len(prev.points)
    arcs = np.empty(m)
    arcs[0] = global_closest(np.asarray(prev.points[0], dtype=np.float64))
    for i in range(1, m):
        lo = arcs[i - 1] + min_advance
        s = window_closest(np.asarray(prev.points[i], dtype=np.float64), lo)
        if s is None or s <= arcs[i - 1]:
            raise MeshError(f"correspondence stalled at sample {i}: arc window too small")
        arcs[i] = s
    if arcs[-1] - arcs[0] > total + arc_window:
        raise MeshError("correspondence lapped the contour")
    pts = np.array([_arc_point(ring, lengths, cum, s) for s in arcs])
    return pts, arcs


def build_band(prev_points, next_points, base_prev: int, base_next: int) -> np.ndarray:
    """Two triangles per quad between two same-cardinality rings.

    Vertex index triples reference ``base_prev + i`` / ``base_next + i``;
    winding is consistent around the band.
    """
    m = len(prev_points)
    if len(next_points) != m:
        raise MeshError("rings must have equal cardinality")
    tris = np.empty((2 * m, 3), dtype=np.int64)
    for i in range(m):
        j = (i + 1) % m
        tris[2 * i] = (base_prev + i, base_prev + j, base_next + i)
        tris[2 * i + 1] = (base_prev + j, base_next + j, base_next + i)
    return tris


def reconstruct(contours: ContourSet, m: int = 64,
                arc_window_frac: float | None = None) -> Mesh:
    """Mesh the whole contour stack, one band per adjacent slice pair.

    The top contour of each topology segment is resampled to M equal-arc
    points; every following slice reuses the corresponded points as its ring,
    per the windowed-march construction.  ``arc_window_frac`` is the window
    as a fraction of the circumference (default 2/M).
    """
    if arc_window_frac is None:
        arc_window_frac = 2.0 / m
    segments = contours.segments or _implied_segments(contours)
    vertices = []
    triangles = []
    bands = []
    for first, last in segments:
        idxs = [i for i, _ in contours.slices if first <= i <= last]
        if len(idxs) < 2:
            raise MeshError(f"topology segment {first}..{last} has fewer than 2 slices")
        top = resample(contours.contour(idxs[0]), m)
        base_prev = len(vertices)
        z = idxs[0] * contours.spacing
        vertices.extend([(p[0], p[1], z) for p in top.points])
        prev = top
        prev_idx = idxs[0]
        for k in idxs[1:]:
            try:
                ring_t, xf = normalize_next(prev, contours.contour(k))
                pts_t, _ = correspond(prev, ring_t, arc_window_frac * prev.circumference)
            except MeshError as e:
                raise MeshError(f"slice {k}: {e}") from e
            pts = xf.inverse().apply(pts_t)
            base_next = len(vertices)
            z = k * contours.spacing
            vertices.extend([(p[0], p[1], z) for p in pts])
            tri_start = len(triangles)
            triangles.extend(build_band(prev.points, pts, base_prev, base_next))
            bands.append((int(prev_idx), int(k), tri_start, 2 * m))
            prev = SampledContour(pts, perimeter(pts))
            base_prev = base_next
            prev_idx = k
    return Mesh(np.asarray(vertices, dtype=np.float64),
                np.asarray(triangles, dtype=np.int64), bands)


def _implied_segments(contours: ContourSet):
    idxs = [i for i, _ in contours.slices]
    if not idxs:
        raise MeshError("empty contour set")
    return [(idxs[0], idxs[-1])]


# ---------------------------------------------------------------------------
# Wavefront OBJ
# ---------------------------------------------------------------------------

def to_obj(mesh: Mesh, m: int | None = None, arc_window: float | None = None) -> str:
    lines = ["# band-triangulated contour stack"]
    if m is not None:
        lines.append(f"# samples {m}")
    if arc_window is not None:
        lines.append(f"# arc_window {arc_window:g}")
    for x, y, z in mesh.vertices:
        lines.append(f"v {x:.6f} {y:.6f} {z:.6f}")
    for a, b, c in mesh.triangles:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    return "\n".join(lines) + "\n"


def save_obj(mesh: Mesh, path, m: int | None = None,
             arc_window: float | None = None) -> None:
    from pathlib import Path

    Path(path).write_text(to_obj(mesh, m, arc_window))
