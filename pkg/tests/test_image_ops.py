import numpy as np
import pytest

from livewire.image_ops import (
    WHOLE_IMAGE,
    CutLine,
    FilterSpec,
    apply_filter,
    build_orthogonal_cut,
    dilate_mask,
    gradient_magnitude,
    laplacian,
    laplacian_zero_crossings,
    raster_line_mask,
    round_half_up,
    sample_line,
)
from livewire.volume_io import Volume

from oracles import sobel_magnitude_reference, zero_crossings_reference


# ---------------------------------------------------------------------------
# gradient
# ---------------------------------------------------------------------------

def test_gradient_constant_zero():
    g = gradient_magnitude(np.full((6, 7), 42, dtype=np.uint8))
    assert (g.values == 0).all()
    assert g.max_value == 0.0


def test_gradient_vertical_step_symmetry():
    img = np.zeros((8, 8), dtype=np.uint8)
    img[:, 4:] = 255
    g = gradient_magnitude(img)
    # rows identical by symmetry, max on the step columns
    assert np.allclose(g.values, g.values[0])
    cols = np.nonzero(g.values[0] == g.max_value)[0]
    assert set(cols) == {3, 4}


def test_gradient_ramp_interior_value():
    img = np.tile(np.arange(5) * 10, (5, 1)).astype(np.uint8)
    g = gradient_magnitude(img)
    assert g.values[2, 2] == pytest.approx(80.0)  # sobel weight 8 x slope 10
    assert np.allclose(g.values[1:-1, 1:-1], 80.0)


def test_gradient_matches_reference_convolution():
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, (9, 11)).astype(np.uint8)
    g = gradient_magnitude(img)
    ref = sobel_magnitude_reference(img)
    assert np.allclose(g.values, ref)
    assert g.max_value == pytest.approx(ref.max())


def test_gradient_rejects_small_image():
    with pytest.raises(ValueError):
        gradient_magnitude(np.zeros((2, 5), dtype=np.uint8))


# ---------------------------------------------------------------------------
# Laplacian zero crossings
# ---------------------------------------------------------------------------

def test_zero_crossings_constant_empty():
    assert not laplacian_zero_crossings(np.full((6, 6), 9, dtype=np.uint8)).any()


def test_zero_crossings_hard_step_band():
    # hard 0|255 step: laplacian [0, 0, 255, -255, 0, 0]; the posted rule
    # flags the opposite-sign pair and the exact zeros flanking it
    img = np.zeros((5, 6), dtype=np.uint8)
    img[:, 3:] = 255
    zc = laplacian_zero_crossings(img)
    assert np.array_equal(zc, zero_crossings_reference(img))
    assert set(np.nonzero(zc[2])[0]) == {1, 2, 3, 4}


def test_zero_crossings_quantized_ramp_single_column():
    # midpoint column has an exact zero laplacian: the crossing proper
    img = np.zeros((5, 7), dtype=np.uint8)
    img[:, 3] = 128
    img[:, 4:] = 255
    lap = laplacian(img)
    assert lap[2, 3] == pytest.approx(-1)  # 0+255-256
    zc = laplacian_zero_crossings(img)
    assert np.array_equal(zc, zero_crossings_reference(img))


def test_zero_crossings_bright_pixel_ring():
    img = np.zeros((7, 7), dtype=np.uint8)
    img[3, 3] = 255
    zc = laplacian_zero_crossings(img)
    ref = zero_crossings_reference(img)
    assert np.array_equal(zc, ref)
    assert not zc[3, 3]  # the peak itself has the largest |laplacian|
    assert zc[2, 3] and zc[4, 3] and zc[3, 2] and zc[3, 4]  # crossing ring


def test_zero_crossings_random_match_reference():
    rng = np.random.default_rng(11)
    for _ in range(5):
        img = rng.integers(0, 256, (8, 8)).astype(np.uint8)
        assert np.array_equal(laplacian_zero_crossings(img), zero_crossings_reference(img))


# ---------------------------------------------------------------------------
# line sampling
# ---------------------------------------------------------------------------

def test_sample_line_constant():
    img = np.full((9, 9), 9, dtype=np.uint8)
    prof = sample_line(img, CutLine((1.0, 4.0), (7.5, 4.0)))
    assert len(prof) == int(np.floor(6.5)) + 1
    assert np.allclose(prof, 9.0)


def test_sample_line_axis_aligned_exact_pixels():
    img = np.arange(64, dtype=np.uint8).reshape(8, 8)
    prof = sample_line(img, CutLine((1.0, 3.0), (6.0, 3.0)))
    assert np.allclose(prof, img[3, 1:7])


def test_sample_line_diagonal_ramp_affine():
    # bilinear reproduces affine fields exactly: I = 10x sampled along 45 deg
    img = np.tile(np.arange(10) * 10.0, (10, 1))
    cut = CutLine((1.0, 1.0), (8.0, 8.0))
    prof = sample_line(img, cut)
    ux = (8.0 - 1.0) / cut.length
    expect = [(1.0 + i * ux) * 10.0 for i in range(len(prof))]
    assert np.allclose(prof, expect)


def test_sample_line_out_of_bounds():
    img = np.zeros((5, 5), dtype=np.uint8)
    with pytest.raises(ValueError):
        sample_line(img, CutLine((0.0, 0.0), (6.0, 0.0)))


def test_cut_line_minimum_length():
    with pytest.raises(ValueError):
        CutLine((0.0, 0.0), (1.0, 0.0))


# ---------------------------------------------------------------------------
# orthogonal cuts
# ---------------------------------------------------------------------------

def test_orthogonal_cut_single_slice():
    v = Volume(np.tile(np.arange(8, dtype=np.uint8), (1, 8, 1)))
    cut = CutLine((0.0, 3.0), (7.0, 3.0))
    img = build_orthogonal_cut(v, cut)
    assert img.shape == (1, 8)
    assert np.array_equal(img[0], np.arange(8))


def test_orthogonal_cut_slice_index_rows():
    vox = np.stack([np.full((8, 8), k, dtype=np.uint8) for k in range(5)])
    v = Volume(vox)
    img = build_orthogonal_cut(v, CutLine((1.0, 1.0), (6.0, 6.0)))
    assert img.shape[0] == 5
    for k in range(5):
        assert (img[k] == k).all()


def test_orthogonal_cut_cylinder_bands():
    from livewire.phantoms import Phantom

    ph = Phantom("cylinder", noise_sigma=0.0)
    v = ph.make_volume()
    cut = CutLine((32.0 - 20.0, 32.0), (32.0 + 20.0, 32.0))
    img = build_orthogonal_cut(v, cut)
    inside = ph.params["background"] + ph.contrast
    row = img[4].astype(int)
    transitions = np.nonzero(np.abs(np.diff(row)) > ph.contrast / 2)[0]
    assert len(transitions) == 2  # two boundary bands
    assert row[len(row) // 2] == inside


# ---------------------------------------------------------------------------
# filters
# ---------------------------------------------------------------------------

def test_unsharp_amount_zero_identity():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (10, 10)).astype(np.uint8)
    out = apply_filter(img, FilterSpec("unsharp_mask", {"amount": 0.0, "sigma": 2.0}))
    assert np.array_equal(out, img)


def test_diffusion_zero_iterations_identity():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (10, 10)).astype(np.uint8)
    out = apply_filter(img, FilterSpec("anisotropic_diffusion", {"iterations": 0}))
    assert np.array_equal(out, img)


def test_diffusion_smooths_noise():
    rng = np.random.default_rng(2)
    img = np.clip(128 + rng.normal(0, 30, (16, 16)), 0, 255).astype(np.uint8)
    out = apply_filter(img, FilterSpec("anisotropic_diffusion",
                                       {"iterations": 20, "kappa": 50.0}))
    assert out.astype(float).std() < img.astype(float).std()


def test_histogram_eq_two_valued_unchanged():
    img = np.zeros((8, 8), dtype=np.uint8)
    img[:, 4:] = 255
    out = apply_filter(img, FilterSpec("histogram_eq"))
    assert np.array_equal(out, img)


def test_histogram_eq_matches_standard_formula():
    rng = np.random.default_rng(3)
    img = rng.integers(40, 90, (12, 12)).astype(np.uint8)
    out = apply_filter(img, FilterSpec("histogram_eq"))
    hist = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    cdf_min = cdf[np.nonzero(hist)[0][0]]
    lut = np.floor(255.0 * (cdf - cdf_min) / (img.size - cdf_min) + 0.5)
    assert np.array_equal(out, lut[img].astype(np.uint8))


def test_contrast_is_pointwise_and_monotone():
    rng = np.random.default_rng(4)
    img = rng.integers(0, 256, (8, 8)).astype(np.uint8)
    spec = FilterSpec("contrast", {"center": 100.0, "slope": 5.0})
    out = apply_filter(img, spec)
    img2 = img.copy()
    img2[0, 0] = (int(img2[0, 0]) + 97) % 256
    out2 = apply_filter(img2, spec)
    assert np.array_equal(out[1:], out2[1:])
    # the remap is a monotone intensity curve
    ramp = np.tile(np.arange(256, dtype=np.uint8), (3, 1))
    curve = apply_filter(ramp, spec)[1].astype(int)
    assert (np.diff(curve) >= 0).all()


def test_influence_radius_property():
    # changing a source pixel farther than the radius (chebyshev) never moves p
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, (17, 17)).astype(np.uint8)
    p = (8, 8)
    for spec in (
        FilterSpec("unsharp_mask", {"amount": 1.5, "sigma": 1.0}),
        FilterSpec("anisotropic_diffusion", {"iterations": 3, "kappa": 40.0}),
        FilterSpec("contrast", {"center": 120.0, "slope": 4.0}),
    ):
        r = spec.influence_radius
        before = apply_filter(img, spec)[p]
        far = img.copy()
        far[p[0] + r + 1, p[1]] = (int(far[p[0] + r + 1, p[1]]) + 111) % 256
        far[p[0], p[1] + r + 1] = (int(far[p[0], p[1] + r + 1]) + 77) % 256
        after = apply_filter(far, spec)[p]
        assert before == after, spec.kind


def test_region_restriction_copies_outside():
    rng = np.random.default_rng(6)
    img = rng.integers(0, 256, (14, 14)).astype(np.uint8)
    region = np.zeros((14, 14), dtype=bool)
    region[4:8, 4:8] = True
    spec = FilterSpec("unsharp_mask", {"amount": 2.0, "sigma": 1.0})
    out = apply_filter(img, spec, region)
    assert np.array_equal(out[~region], img[~region])
    full = apply_filter(img, spec)
    assert np.array_equal(out[region], full[region])


def test_region_restriction_rejects_whole_image_filter():
    img = np.zeros((8, 8), dtype=np.uint8)
    region = np.ones((8, 8), dtype=bool)
    spec = FilterSpec("histogram_eq")
    assert spec.influence_radius == WHOLE_IMAGE
    with pytest.raises(ValueError):
        apply_filter(img, spec, region)


def test_region_from_cut_line_strip():
    img = np.tile(np.arange(16, dtype=np.uint8) * 16, (16, 1))
    cut = CutLine((2.0, 8.0), (13.0, 8.0))
    spec = FilterSpec("unsharp_mask", {"amount": 1.0, "sigma": 1.0})
    region = dilate_mask(raster_line_mask(img.shape, cut), spec.influence_radius)
    out = apply_filter(img, spec, region)
    full = apply_filter(img, spec)
    line = raster_line_mask(img.shape, cut)
    assert np.array_equal(out[line], full[line])


def test_filter_parameter_validation():
    with pytest.raises(ValueError):
        FilterSpec("anisotropic_diffusion", {"iterations": 101})
    with pytest.raises(ValueError):
        FilterSpec("anisotropic_diffusion", {"kappa": 0.0})
    with pytest.raises(ValueError):
        FilterSpec("unsharp_mask", {"sigma": -1.0})
    with pytest.raises(ValueError):
        FilterSpec("nonsense")


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(-0.5) == 0
    assert np.array_equal(round_half_up([0.4, 2.5, 3.49]), [0, 3, 3])
