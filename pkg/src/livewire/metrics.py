"""Distance-transform error and repeatability metrics.

A directed contour error is the mean chamfer distance from one boundary's
pixels to the other boundary; averaging it over all ordered run pairs (the
mean mutual error) proxies for the distance to the unknown true contour.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pipeline3d import chamfer_dt, raster_polyline


def contour_error(a, b, shape, closed: bool = True, raw: bool = False) -> float:
    """Directed error from contour ``b`` against the distance transform of ``a``.

    Rasterizes both over an image of ``shape`` (height, width); the result is
    the summed chamfer distance of b's pixels normalized to mean pixels, or
    the raw tenth-pixel sum with ``raw=True``.  Not symmetric in (a, b).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("contours must be non-empty")
    for pts in (a, b):
        if pts[:, 0].max() >= shape[1] or pts[:, 1].max() >= shape[0]:
            raise ValueError("contour exceeds the stated image dimensions")
    dt = chamfer_dt(raster_polyline(a, shape, close=closed))
    mask_b = raster_polyline(b, shape, close=closed)
    total = float(dt.dist[mask_b].sum())
    return total if raw else total / (10.0 * int(mask_b.sum()))


def _contour_of(run, slice_index: int):
    contours = getattr(run, "contours", run)
    return contours.contour(slice_index)


def pair_errors(runs, slice_index: int, shape, closed: bool = True) -> list:
    """Directed errors over all ordered pairs of distinct runs."""
    if len(runs) < 2:
        raise ValueError("need at least 2 runs")
    out = []
    for i, ra in enumerate(runs):
        for j, rb in enumerate(runs):
            if i == j:
                continue
            out.append(contour_error(_contour_of(ra, slice_index),
                                     _contour_of(rb, slice_index),
                                     shape, closed=closed))
    return out


def mutual_error(runs, slice_index: int, shape, closed: bool = True) -> float:
    """Mean of directed errors over all ordered run pairs."""
    errs = pair_errors(runs, slice_index, shape, closed=closed)
    return float(np.mean(errs))


def repeatability(runs, slice_index: int, shape, closed: bool = True) -> float:
    """Population standard deviation of the ordered-pair error set."""
    errs = pair_errors(runs, slice_index, shape, closed=closed)
    return float(np.std(errs))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class MetricsReport:
    rows: list = field(default_factory=list)  # (run_a, run_b, slice, error_px)
    per_slice: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["run_a,run_b,slice,error_px"]
        for ra, rb, s, e in self.rows:
            lines.append(f"{ra},{rb},{s},{e:.6f}")
        return "\n".join(lines) + "\n"

    def to_summary_json(self) -> str:
        doc = {
            "slices": {
                str(k): {"mean": v[0], "std": v[1]} for k, v in sorted(self.per_slice.items())
            }
        }
        return json.dumps(doc, indent=1, sort_keys=True)


def build_report(runs, shape, closed: bool = True) -> MetricsReport:
    """Pairwise errors for every slice all runs share."""
    if len(runs) < 2:
        raise ValueError("need at least 2 runs")
    names = [getattr(r, "run_id", f"run{i}") for i, r in enumerate(runs)]
    slice_sets = []
    for r in runs:
        contours = getattr(r, "contours", r)
        slice_sets.append({idx for idx, _ in contours.slices})
    shared = sorted(set.intersection(*slice_sets))
    report = MetricsReport()
    for s in shared:
        errs = []
        for i, ra in enumerate(runs):
            for j, rb in enumerate(runs):
                if i == j:
                    continue
                e = contour_error(_contour_of(ra, s), _contour_of(rb, s), shape,
                                  closed=closed)
                report.rows.append((names[i], names[j], s, e))
                errs.append(e)
        report.per_slice[s] = (float(np.mean(errs)), float(np.std(errs)))
    return report


def save_report(report: MetricsReport, csv_path, summary_path=None) -> None:
    Path(csv_path).write_text(report.to_csv())
    if summary_path is not None:
        Path(summary_path).write_text(report.to_summary_json() + "\n")
