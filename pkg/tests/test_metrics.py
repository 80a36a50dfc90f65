import numpy as np
import pytest

from livewire.metrics import (
    build_report,
    contour_error,
    mutual_error,
    pair_errors,
    repeatability,
    save_report,
)
from livewire.volume_io import ContourSet

from oracles import circle_points


def _line(x0, y0, x1, y1, n=None):
    n = n or (max(abs(x1 - x0), abs(y1 - y0)) + 1)
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    return np.column_stack([xs, ys])


def _runs(*contour_lists, slices=(0,)):
    out = []
    for pts in contour_lists:
        out.append(ContourSet(slices=[(s, pts) for s in slices]))
    return out


def test_error_to_self_is_zero():
    c = circle_points(16, 16, 10, 64)
    assert contour_error(c, c, (32, 32)) == 0.0


def test_error_one_pixel_shift_line():
    a = _line(4, 10, 27, 10)
    b = _line(4, 11, 27, 11)
    e = contour_error(a, b, (32, 32), closed=False)
    assert e == pytest.approx(1.0, abs=0.05)


def test_error_concentric_circles():
    a = circle_points(32, 32, 10, 256)
    b = circle_points(32, 32, 12, 256)
    e = contour_error(a, b, (64, 64))
    # oracle: exact euclidean distances between the same rasterized rings
    from livewire.pipeline3d import raster_polyline

    ay, ax = np.nonzero(raster_polyline(a, (64, 64)))
    by, bx = np.nonzero(raster_polyline(b, (64, 64)))
    euclid = np.hypot(by[:, None] - ay[None, :], bx[:, None] - ax[None, :]).min(axis=1)
    oracle = float(euclid.mean())
    assert oracle == pytest.approx(2.0, abs=0.5)   # radial gap, less raster jitter
    assert 0.98 * oracle <= e <= 1.08 * oracle     # chamfer approximation band


def test_error_raw_sum_scales_with_length():
    a = _line(2, 8, 29, 8)
    b = _line(2, 9, 29, 9)
    raw = contour_error(a, b, (32, 32), closed=False, raw=True)
    n = 28  # rasterized pixels of b
    assert raw == pytest.approx(10 * n, abs=10)


def test_error_not_symmetric_in_general():
    a = circle_points(16, 16, 10, 128)
    b = np.vstack([circle_points(16, 16, 10, 128), [[28.0, 16.0]]])
    # directed errors may differ; only the definition is asserted here
    e_ab = contour_error(a, b, (40, 40))
    e_ba = contour_error(b, a, (40, 40))
    assert e_ab >= 0 and e_ba >= 0


def test_error_requires_matching_dimensions():
    a = circle_points(16, 16, 10, 64)
    with pytest.raises(ValueError):
        contour_error(a, a, (20, 20))  # contour exceeds stated image


def test_error_empty_contour_rejected():
    with pytest.raises(ValueError):
        contour_error(np.zeros((0, 2)), np.zeros((0, 2)), (16, 16))


def test_dilation_monotonicity():
    a = circle_points(32, 32, 8, 256)
    errs = [contour_error(a, circle_points(32, 32, 8 + r, 256), (64, 64))
            for r in (1, 2, 3, 4)]
    assert all(x <= y for x, y in zip(errs, errs[1:]))


def test_mutual_error_identical_runs_zero():
    c = circle_points(16, 16, 9, 64)
    runs = _runs(c, c, c)
    assert mutual_error(runs, 0, (32, 32)) == 0.0


def test_mutual_error_two_runs_is_mean_of_two_directed():
    a = circle_points(16, 16, 8, 128)
    b = circle_points(16, 16, 10, 128)
    runs = _runs(a, b)
    e_ab = contour_error(a, b, (32, 32))
    e_ba = contour_error(b, a, (32, 32))
    assert mutual_error(runs, 0, (32, 32)) == pytest.approx((e_ab + e_ba) / 2)


def test_mutual_error_four_runs_twelve_pairs():
    rng = np.random.default_rng(0)
    runs = _runs(*(circle_points(16, 16, 8 + rng.uniform(-1, 1), 128) for _ in range(4)))
    errs = pair_errors(runs, 0, (32, 32))
    assert len(errs) == 12
    assert mutual_error(runs, 0, (32, 32)) == pytest.approx(np.mean(errs))


def test_mutual_error_permutation_invariant():
    rng = np.random.default_rng(1)
    contours = [circle_points(16, 16, 8 + rng.uniform(-1, 1), 128) for _ in range(3)]
    runs = _runs(*contours)
    base = mutual_error(runs, 0, (32, 32))
    for perm in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
        shuffled = [runs[i] for i in perm]
        assert mutual_error(shuffled, 0, (32, 32)) == pytest.approx(base)


def test_repeatability_identical_zero():
    c = circle_points(16, 16, 9, 64)
    assert repeatability(_runs(c, c), 0, (32, 32)) == 0.0


def test_repeatability_population_std():
    # two runs with directed errors {e1, e2}: std = |e1 - e2| / 2
    a = _line(4, 10, 27, 10)
    b = _line(4, 12, 27, 12)
    runs = _runs(a, b)
    errs = pair_errors(runs, 0, (32, 32), closed=False)
    expect = float(np.std(errs))
    assert repeatability(runs, 0, (32, 32), closed=False) == pytest.approx(expect)
    assert np.std([0.0, 2.0]) == 1.0  # the arithmetic the definition relies on


def test_requires_two_runs():
    c = circle_points(16, 16, 9, 64)
    with pytest.raises(ValueError):
        mutual_error(_runs(c), 0, (32, 32))
    with pytest.raises(ValueError):
        repeatability(_runs(c), 0, (32, 32))


def test_report_csv_and_summary(tmp_path):
    rng = np.random.default_rng(2)
    contours = [circle_points(16, 16, 8 + rng.uniform(-1, 1), 128) for _ in range(3)]
    runs = _runs(*contours, slices=(0, 1))
    report = build_report(runs, (32, 32))
    assert len(report.rows) == 6 * 2  # 6 ordered pairs x 2 slices
    csv_path = tmp_path / "report.csv"
    js_path = tmp_path / "summary.json"
    save_report(report, csv_path, js_path)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "run_a,run_b,slice,error_px"
    assert len(lines) == 13
    import json

    summary = json.loads(js_path.read_text())
    assert set(summary["slices"]) == {"0", "1"}
    for v in summary["slices"].values():
        assert v["mean"] >= 0 and v["std"] >= 0
