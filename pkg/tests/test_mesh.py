import math
from collections import Counter

import numpy as np
import pytest

from livewire.mesh import (
    MeshError,
    build_band,
    correspond,
    normalize_next,
    perimeter,
    reconstruct,
    resample,
    save_obj,
    to_obj,
)
from livewire.volume_io import ContourSet

from oracles import circle_points, parse_obj_reference


def _square(side=4.0, origin=(0.0, 0.0)):
    ox, oy = origin
    return np.array([[ox, oy], [ox + side, oy], [ox + side, oy + side], [ox, oy + side]])


def _edge_count(triangles):
    edges = Counter()
    for a, b, c in triangles:
        for e in ((a, b), (b, c), (c, a)):
            edges[tuple(sorted(e))] += 1
    return edges


# ---------------------------------------------------------------------------
# resample
# ---------------------------------------------------------------------------

def test_resample_square_corners():
    sc = resample(_square(1.0), 4)
    assert sc.circumference == pytest.approx(4.0)
    assert np.allclose(sc.points, _square(1.0))


def test_resample_equilateral_triangle_vertices():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    sc = resample(tri, 3)
    assert np.allclose(sorted(map(tuple, sc.points)), sorted(map(tuple, tri)))


def test_resample_circle_analytic_positions():
    ring = circle_points(0.0, 0.0, 10.0, n=720)
    sc = resample(ring, 8)
    # every sample within .5 px of a 45-degree-spaced analytic point
    ang = np.arctan2(sc.points[:, 1], sc.points[:, 0])
    ang = np.sort(np.mod(ang, 2 * math.pi))
    gaps = np.diff(ang)
    assert np.allclose(gaps, math.pi / 4, atol=0.02)
    assert np.allclose(np.hypot(*sc.points.T), 10.0, atol=0.5)


def test_resample_equal_arc_gaps():
    rng = np.random.default_rng(0)
    ring = circle_points(5, 5, 8, n=100) + rng.normal(0, 0.3, (100, 2))
    sc = resample(ring, 32)
    # consecutive samples should subtend equal arc lengths along the polyline;
    # verify via cumulative re-projection: spacing variance of chord lengths
    # stays well below the mean for a smooth ring
    L = sc.circumference
    assert L == pytest.approx(perimeter(ring))


def test_resample_rejects_degenerate():
    with pytest.raises(MeshError):
        resample(np.array([[0, 0], [1, 0]]), 4)
    with pytest.raises(MeshError):
        resample(_square(), 2)


def test_resample_closed_duplicate_tolerated():
    sq = np.vstack([_square(), _square()[:1]])
    sc = resample(sq, 4)
    assert np.allclose(sc.points, _square())


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def test_normalize_translation():
    prev = resample(_square(), 8)
    moved = _square(origin=(5.0, 0.0))
    ring, xf = normalize_next(prev, moved)
    assert xf.scale == pytest.approx(1.0)
    assert np.allclose(xf.offset, [-5.0, 0.0])
    assert np.allclose(xf.inverse().apply(ring), moved)


def test_normalize_double_scale():
    prev = resample(_square(4.0), 8)
    big = _square(8.0, origin=(-2.0, -2.0))  # x2 about the shared centroid
    ring, xf = normalize_next(prev, big)
    assert xf.scale == pytest.approx(0.5)
    assert perimeter(ring) == pytest.approx(prev.circumference, rel=1e-9)


def test_normalize_identity():
    prev = resample(_square(), 8)
    ring, xf = normalize_next(prev, _square())
    assert xf.scale == pytest.approx(1.0)
    assert np.allclose(xf.offset, 0.0)
    assert np.allclose(ring, _square())


def test_normalize_circumference_reproduced():
    rng = np.random.default_rng(1)
    prev = resample(circle_points(0, 0, 10, 64), 16)
    blob = circle_points(30, -4, 3.7, 50) + rng.normal(0, 0.05, (50, 2))
    ring, _ = normalize_next(prev, blob)
    assert perimeter(ring) == pytest.approx(prev.circumference, rel=1e-6)


# ---------------------------------------------------------------------------
# correspondence
# ---------------------------------------------------------------------------

def test_correspond_identity():
    prev = resample(circle_points(0, 0, 10, 256), 16)
    ring = circle_points(0, 0, 10, 256)
    pts, arcs = correspond(prev, ring, 2 * prev.circumference / 16)
    assert np.allclose(pts, prev.points, atol=1e-6)
    assert (np.diff(arcs) > 0).all()


def test_correspond_rotated_half_spacing():
    m = 16
    base = circle_points(0, 0, 10, 512)
    prev = resample(base, m)
    half = math.pi / m  # half a sample spacing in angle
    rot = np.array([[math.cos(half), -math.sin(half)], [math.sin(half), math.cos(half)]])
    ring = base @ rot.T
    pts, arcs = correspond(prev, ring, 2 * prev.circumference / m)
    spacing = prev.circumference / m
    for p, q in zip(prev.points, pts):
        d = np.hypot(*(p - q))
        assert d <= spacing / 2 + 0.05


def test_correspond_concentric_circles():
    prev = resample(circle_points(0, 0, 10, 512), 32)
    outer = circle_points(0, 0, 12, 512)
    ring, xf = normalize_next(prev, outer)
    pts, _ = correspond(prev, ring, 2 * prev.circumference / 32)
    # after normalization the circles coincide: radial correspondence
    assert np.allclose(np.hypot(*pts.T), 10.0, atol=0.05)
    for p, q in zip(prev.points, pts):
        assert np.hypot(*(p - q)) <= 1.0


def test_correspond_monotone_single_wrap():
    rng = np.random.default_rng(2)
    ring = circle_points(0, 0, 9, 128) + rng.normal(0, 0.15, (128, 2))
    prev = resample(circle_points(0, 0, 9, 128), 24)
    L = perimeter(ring)
    pts, arcs = correspond(prev, ring, 2 * prev.circumference / 24)
    assert (np.diff(arcs) > 0).all()
    assert arcs[-1] - arcs[0] <= L + 2 * prev.circumference / 24 + 1e-6


def test_correspond_window_validation():
    prev = resample(_square(), 8)
    with pytest.raises(MeshError):
        correspond(prev, _square(), 0.0)
    with pytest.raises(MeshError):
        correspond(prev, _square(), 100.0)


# ---------------------------------------------------------------------------
# bands
# ---------------------------------------------------------------------------

def test_build_band_counts():
    for m in (3, 4, 7):
        ring = circle_points(0, 0, 5, m)
        tris = build_band(ring, ring, 0, m)
        assert len(tris) == 2 * m


def test_build_band_manifold_on_random_stars():
    rng = np.random.default_rng(3)
    for _ in range(5):
        m = int(rng.integers(5, 20))
        radii = rng.uniform(5, 10, m)
        th = np.linspace(0, 2 * math.pi, m, endpoint=False)
        a = np.column_stack([radii * np.cos(th), radii * np.sin(th)])
        b = a * rng.uniform(0.8, 1.2) + rng.normal(0, 0.2, a.shape)
        tris = build_band(a, b, 0, m)
        edges = _edge_count(tris)
        ring_edges = sum(1 for e, c in edges.items() if c == 1)
        interior = sum(1 for e, c in edges.items() if c == 2)
        assert ring_edges == 2 * m          # top + bottom rings
        assert interior == 2 * m            # verticals + quad diagonals
        assert not any(c > 2 for c in edges.values())


def test_build_band_cardinality_mismatch():
    with pytest.raises(MeshError):
        build_band(circle_points(0, 0, 5, 6), circle_points(0, 0, 5, 7), 0, 6)


# ---------------------------------------------------------------------------
# full reconstruction
# ---------------------------------------------------------------------------

def _circle_stack(depth=8, r=12.0, spacing=1.0, shrink=0.0):
    slices = []
    for k in range(depth):
        slices.append((k, circle_points(32, 32, r - shrink * k, 256)))
    return ContourSet(slices=slices, segments=[(0, depth - 1)], spacing=spacing)


def test_reconstruct_cylinder():
    cs = _circle_stack()
    mesh = reconstruct(cs, 64)
    assert len(mesh.triangles) == 2 * 64 * 7
    d = np.abs(np.hypot(mesh.vertices[:, 0] - 32, mesh.vertices[:, 1] - 32) - 12.0)
    assert d.max() <= 1.0
    zs = np.unique(mesh.vertices[:, 2])
    assert np.allclose(zs, np.arange(8))


def test_reconstruct_two_slices_single_band():
    cs = _circle_stack(depth=2)
    mesh = reconstruct(cs, 16)
    assert len(mesh.bands) == 1
    assert len(mesh.triangles) == 32


def test_reconstruct_spacing_in_z():
    cs = _circle_stack(depth=3, spacing=2.5)
    mesh = reconstruct(cs, 8)
    assert np.allclose(np.unique(mesh.vertices[:, 2]), [0.0, 2.5, 5.0])


def test_reconstruct_cone_rings_shrink_monotonically():
    cs = _circle_stack(depth=6, r=12.0, shrink=1.0)
    mesh = reconstruct(cs, 32)
    radii = []
    for k in range(6):
        ring = mesh.vertices[32 * k : 32 * (k + 1)]
        radii.append(np.hypot(ring[:, 0] - 32, ring[:, 1] - 32).mean())
    assert all(a > b for a, b in zip(radii, radii[1:]))


def test_reconstruct_edge_manifold():
    mesh = reconstruct(_circle_stack(), 24)
    edges = _edge_count(mesh.triangles)
    boundary = [e for e, c in edges.items() if c == 1]
    assert len(boundary) == 2 * 24  # only the top and bottom rings
    assert all(c <= 2 for c in edges.values())


def test_reconstruct_no_degenerate_triangles():
    mesh = reconstruct(_circle_stack(), 32)
    v = mesh.vertices
    for a, b, c in mesh.triangles:
        area = 0.5 * np.linalg.norm(np.cross(v[b] - v[a], v[c] - v[a]))
        assert area > 0


def test_reconstruct_needs_two_slices():
    cs = ContourSet(slices=[(0, circle_points(10, 10, 5, 32))], segments=[(0, 0)])
    with pytest.raises(MeshError):
        reconstruct(cs, 16)


def test_reconstruct_per_segment_bands():
    slices = [(k, circle_points(32, 32, 12, 128)) for k in (0, 1, 4, 5)]
    cs = ContourSet(slices=slices, segments=[(0, 1), (4, 5)])
    mesh = reconstruct(cs, 16)
    assert len(mesh.bands) == 2
    assert len(mesh.triangles) == 2 * 2 * 16


# ---------------------------------------------------------------------------
# OBJ export
# ---------------------------------------------------------------------------

def test_obj_round_trips_through_reference_parser(tmp_path):
    mesh = reconstruct(_circle_stack(depth=3), 16)
    text = to_obj(mesh, m=16, arc_window=0.125)
    verts, faces = parse_obj_reference(text)
    assert np.allclose(verts, mesh.vertices)
    assert np.array_equal(faces, mesh.triangles)
    assert "# samples 16" in text
    assert "# arc_window 0.125" in text
    p = tmp_path / "out.obj"
    save_obj(mesh, p, m=16, arc_window=0.125)
    verts2, faces2 = parse_obj_reference(p.read_text())
    assert np.allclose(verts2, mesh.vertices)
    assert np.array_equal(faces2, mesh.triangles)


def test_obj_prism_exact():
    sq = _square()
    cs = ContourSet(slices=[(0, sq), (1, sq)], segments=[(0, 1)])
    mesh = reconstruct(cs, 4)
    verts, faces = parse_obj_reference(to_obj(mesh))
    assert len(verts) == 8 and len(faces) == 8
    assert set(map(tuple, verts[:, :2])) == set(map(tuple, sq))
