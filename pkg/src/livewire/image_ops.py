"""Differential operators, line sampling, orthogonal cuts and pre-filters.

Images are 2D numpy arrays indexed ``[y, x]``; points and line endpoints are
(x, y) with x rightward and y downward, coordinates at pixel centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

WHOLE_IMAGE = -1

FILTER_KINDS = ("anisotropic_diffusion", "contrast", "histogram_eq", "unsharp_mask")


def round_half_up(a):
    """Round to nearest integer with .5 going up, elementwise."""
    return np.floor(np.asarray(a, dtype=np.float64) + 0.5).astype(np.int64)


def _require_domain(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3, got shape {img.shape}")
    return img


@dataclass
class ScalarField:
    """Real-valued per-pixel field with its maximum cached."""

    values: np.ndarray
    max_value: float

    @property
    def shape(self):
        return self.values.shape


@dataclass
class CutLine:
    """Line in a slice plane defining an orthogonal cut: endpoints in pixel units."""

    p0: tuple
    p1: tuple

    def __post_init__(self):
        self.p0 = (float(self.p0[0]), float(self.p0[1]))
        self.p1 = (float(self.p1[0]), float(self.p1[1]))
        if self.length < 2.0:
            raise ValueError("cut endpoints must be at least 2 pixels apart")

    @property
    def length(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    def point_at(self, arc: float) -> tuple:
        """Point at arc-length ``arc`` from p0 (unit spacing parametrization)."""
        ux = (self.p1[0] - self.p0[0]) / self.length
        uy = (self.p1[1] - self.p0[1]) / self.length
        return (self.p0[0] + arc * ux, self.p0[1] + arc * uy)


def gradient_magnitude(img: np.ndarray) -> ScalarField:
    """Per-pixel |gradient| via 3x3 Sobel with edge replication at borders."""
    img = _require_domain(img).astype(np.float64)
    p = np.pad(img, 1, mode="edge")
    # Sobel x: [[-1,0,1],[-2,0,2],[-1,0,1]], y transposed
    gx = (
        (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
    )
    mag = np.hypot(gx, gy)
    return ScalarField(mag, float(mag.max()))


def laplacian(img: np.ndarray) -> np.ndarray:
    """4-neighbor Laplacian (center -4, cross +1), edge replication."""
    img = _require_domain(img).astype(np.int64)
    p = np.pad(img, 1, mode="edge")
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4 * p[1:-1, 1:-1]


def laplacian_zero_crossings(img: np.ndarray) -> np.ndarray:
    """Boolean mask of Laplacian zero crossings.

    A pixel is flagged when some 4-neighbor has opposite Laplacian sign and
    this pixel's |Laplacian| is the smaller of the pair, or when its Laplacian
    is exactly zero next to a nonzero neighbor.  Flat (all-zero) regions are
    never flagged.
    """
    lap = laplacian(img)
    flags = np.zeros(lap.shape, dtype=bool)
    for shift in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        q = np.roll(lap, shift, axis=(0, 1))
        # roll wraps; mask out the wrapped border for this shift
        valid = np.ones(lap.shape, dtype=bool)
        if shift[0] == 1:
            valid[0, :] = False
        elif shift[0] == -1:
            valid[-1, :] = False
        if shift[1] == 1:
            valid[:, 0] = False
        elif shift[1] == -1:
            valid[:, -1] = False
        opposite = (lap.astype(np.float64) * q) < 0
        nearer = np.abs(lap) <= np.abs(q)
        zero_adj = (lap == 0) & (q != 0)
        flags |= valid & ((opposite & nearer) | zero_adj)
    return flags


def sample_line(img: np.ndarray, cut: CutLine):
    """Bilinear samples at unit arc spacing from p0 toward p1.

    Returns ``floor(|p1 - p0|) + 1`` real values; endpoints must lie inside
    the image bounds.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    for x, y in (cut.p0, cut.p1):
        if not (0 <= x <= w - 1 and 0 <= y <= h - 1):
            raise ValueError(f"cut endpoint ({x}, {y}) outside image bounds {w}x{h}")
    n = int(math.floor(cut.length)) + 1
    arcs = np.arange(n, dtype=np.float64)
    ux = (cut.p1[0] - cut.p0[0]) / cut.length
    uy = (cut.p1[1] - cut.p0[1]) / cut.length
    xs = cut.p0[0] + arcs * ux
    ys = cut.p0[1] + arcs * uy
    return _bilinear(img, xs, ys)


def _bilinear(img: np.ndarray, xs, ys):
    h, w = img.shape
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, w - 1)
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def build_orthogonal_cut(volume, cut: CutLine) -> np.ndarray:
    """Resampled plane through the stack: row k is ``sample_line`` on slice k.

    Output is uint8, width = profile length, height = volume depth; real
    samples are re-quantized round-half-up.
    """
    rows = [sample_line(volume.voxels[k], cut) for k in range(volume.depth)]
    out = round_half_up(np.stack(rows))
    return np.clip(out, 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# Pre-filters
# ---------------------------------------------------------------------------

@dataclass
class FilterSpec:
    """One of the four pre-filters with its parameters and influence radius.

    kinds and parameters:
      * ``anisotropic_diffusion``: iterations (<= 100), kappa in (0, 255],
        conductance g(s) = 1 / (1 + (s/kappa)^2), time step 0.2
      * ``contrast``: sigmoid remap with center and slope
      * ``histogram_eq``: global remap, whole-image influence
      * ``unsharp_mask``: I + amount * (I - gaussian(I, sigma))
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}")
        p = dict(self.params)
        if self.kind == "anisotropic_diffusion":
            p.setdefault("iterations", 10)
            p.setdefault("kappa", 30.0)
            if not 0 <= int(p["iterations"]) <= 100:
                raise ValueError("iterations must be 0..100")
            if not 0 < float(p["kappa"]) <= 255:
                raise ValueError("kappa must be in (0, 255]")
        elif self.kind == "contrast":
            p.setdefault("center", 128.0)
            p.setdefault("slope", 4.0)
            if float(p["slope"]) <= 0:
                raise ValueError("slope must be positive")
        elif self.kind == "unsharp_mask":
            p.setdefault("amount", 1.0)
            p.setdefault("sigma", 2.0)
            if float(p["sigma"]) <= 0:
                raise ValueError("sigma must be positive")
            if float(p["amount"]) < 0:
                raise ValueError("amount must be >= 0")
        self.params = p

    @property
    def influence_radius(self) -> int:
        """Max distance at which a source pixel can affect a filtered pixel."""
        if self.kind == "anisotropic_diffusion":
            return int(self.params["iterations"])
        if self.kind == "contrast":
            return 0
        if self.kind == "histogram_eq":
            return WHOLE_IMAGE
        return int(math.ceil(3.0 * float(self.params["sigma"])))


def _gaussian_kernel(sigma: float) -> np.ndarray:
    r = int(math.ceil(3.0 * sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _convolve_sep(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    r = (len(k) - 1) // 2
    p = np.pad(img, ((0, 0), (r, r)), mode="edge")
    out = np.zeros_like(img, dtype=np.float64)
    for i, kv in enumerate(k):
        out += kv * p[:, i : i + img.shape[1]]
    p = np.pad(out, ((r, r), (0, 0)), mode="edge")
    out2 = np.zeros_like(img, dtype=np.float64)
    for i, kv in enumerate(k):
        out2 += kv * p[i : i + img.shape[0], :]
    return out2


def _diffuse(img: np.ndarray, iterations: int, kappa: float) -> np.ndarray:
    # Perona-Malik on the 4-neighborhood, explicit step 0.2
    u = img.astype(np.float64)
    for _ in range(iterations):
        p = np.pad(u, 1, mode="edge")
        dn = p[:-2, 1:-1] - u
        ds = p[2:, 1:-1] - u
        dw = p[1:-1, :-2] - u
        de = p[1:-1, 2:] - u
        u = u + 0.2 * (
            dn / (1.0 + (dn / kappa) ** 2)
            + ds / (1.0 + (ds / kappa) ** 2)
            + dw / (1.0 + (dw / kappa) ** 2)
            + de / (1.0 + (de / kappa) ** 2)
        )
    return u


def _filter_values(img: np.ndarray, spec: FilterSpec) -> np.ndarray:
    f = img.astype(np.float64)
    if spec.kind == "anisotropic_diffusion":
        return _diffuse(f, int(spec.params["iterations"]), float(spec.params["kappa"]))
    if spec.kind == "contrast":
        c = float(spec.params["center"])
        s = float(spec.params["slope"])
        return 255.0 / (1.0 + np.exp(-s * (f - c) / 255.0 * 8.0))
    if spec.kind == "histogram_eq":
        return _equalize(img)
    amount = float(spec.params["amount"])
    if amount == 0.0:
        return f
    blur = _convolve_sep(f, _gaussian_kernel(float(spec.params["sigma"])))
    return f + amount * (f - blur)


def _equalize(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.int64)
    hist = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    cdf_min = cdf[np.nonzero(hist)[0][0]]
    denom = cdf[-1] - cdf_min
    if denom == 0:  # single-valued image
        return img.astype(np.float64)
    lut = 255.0 * (cdf - cdf_min) / denom
    return lut[img]


def apply_filter(img: np.ndarray, spec: FilterSpec, region: np.ndarray | None = None) -> np.ndarray:
    """Apply a pre-filter, optionally restricted to a boolean pixel mask.

    With ``region`` given, pixels inside the mask get filtered values computed
    from source pixels within the filter's influence radius; pixels outside
    are copied through unchanged.  Whole-image filters reject a region.
    """
    img = _require_domain(img)
    if region is None:
        vals = _filter_values(img, spec)
        return np.clip(round_half_up(vals), 0, 255).astype(np.uint8)

    region = np.asarray(region, dtype=bool)
    if region.shape != img.shape:
        raise ValueError("region mask dimensions must match the image")
    if spec.influence_radius == WHOLE_IMAGE:
        raise ValueError(f"{spec.kind} has whole-image influence; region restriction not allowed")
    if not region.any():
        return img.astype(np.uint8).copy()

    r = spec.influence_radius
    ys, xs = np.nonzero(region)
    y0 = max(int(ys.min()) - r, 0)
    y1 = min(int(ys.max()) + r + 1, img.shape[0])
    x0 = max(int(xs.min()) - r, 0)
    x1 = min(int(xs.max()) + r + 1, img.shape[1])
    # pad the window so in-window borders replicate true image content
    win = img[y0:y1, x0:x1]
    if win.shape[0] < 3 or win.shape[1] < 3:
        y1 = min(y0 + 3, img.shape[0])
        x1 = min(x0 + 3, img.shape[1])
        y0 = max(y1 - 3, 0)
        x0 = max(x1 - 3, 0)
        win = img[y0:y1, x0:x1]
    vals = _filter_values(win, spec)
    out = img.astype(np.uint8).copy()
    sub = region[y0:y1, x0:x1]
    quant = np.clip(round_half_up(vals), 0, 255).astype(np.uint8)
    out[y0:y1, x0:x1][sub] = quant[sub]
    return out


def dilate_mask(mask: np.ndarray, radius: int) -> np.ndarray:
    """Chebyshev (square) dilation; used to turn a cut-line raster into a filter region."""
    out = mask.astype(bool).copy()
    for _ in range(radius):
        p = np.pad(out, 1, mode="constant")
        out = (
            p[1:-1, 1:-1] | p[:-2, 1:-1] | p[2:, 1:-1] | p[1:-1, :-2] | p[1:-1, 2:]
            | p[:-2, :-2] | p[:-2, 2:] | p[2:, :-2] | p[2:, 2:]
        )
    return out


def raster_line_mask(shape, cut: CutLine) -> np.ndarray:
    """Pixels under a cut line (rounded unit-arc samples) as a boolean mask."""
    mask = np.zeros(shape, dtype=bool)
    n = int(math.floor(cut.length)) + 1
    for i in range(n):
        x, y = cut.point_at(float(i))
        xi = min(max(int(round(x)), 0), shape[1] - 1)
        yi = min(max(int(round(y)), 0), shape[0] - 1)
        mask[yi, xi] = True
    return mask
