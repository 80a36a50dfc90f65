"""Volume, contour and image I/O.

Two volume input formats are accepted:

* ``LWV1`` text: header line ``LWV1 <width> <height> <depth>`` followed by
  ``depth`` blocks of ``height`` rows of ``width`` integers in 0..255.
* PGM manifest: a text file listing one PGM (P2 or P5) path per line; all
  slices must share dimensions, listing order is slice order.

Contours are stored as JSON (see :func:`save_contours`).  All parsers are
bit-exact: intensities are never rescaled or clamped silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class VolumeFormatError(ValueError):
    """Malformed volume file; carries the offending line number when known."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class ContourFormatError(ValueError):
    pass


@dataclass
class Volume:
    """3D grayscale stack: ``voxels[z, y, x]`` in 0..255, uint8.

    ``spacing`` is the slice-to-slice distance in pixel units; it is carried
    through to mesh z coordinates but plays no role in in-plane costs.
    """

    voxels: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.voxels)
        if v.ndim != 3:
            raise ValueError(f"voxels must be 3D (depth, height, width), got shape {v.shape}")
        d, h, w = v.shape
        # >= 3x3 is required only when a slice becomes a live-wire domain;
        # storage accepts any non-empty grid
        if w < 1 or h < 1 or d < 1:
            raise ValueError(f"empty volume {w}x{h}x{d}")
        if v.dtype != np.uint8:
            if v.min() < 0 or v.max() > 255:
                raise ValueError("voxel intensities outside [0, 255]")
            v = v.astype(np.uint8)
        self.voxels = v

    @property
    def width(self) -> int:
        return self.voxels.shape[2]

    @property
    def height(self) -> int:
        return self.voxels.shape[1]

    @property
    def depth(self) -> int:
        return self.voxels.shape[0]


def slice_of(volume: Volume, k: int) -> np.ndarray:
    """Copy of plane ``k`` as a 2D uint8 image; mutating it never touches the volume."""
    if not 0 <= k < volume.depth:
        raise IndexError(f"slice index {k} out of range 0..{volume.depth - 1}")
    return volume.voxels[k].copy()


@dataclass
class ContourSet:
    """Per-slice closed boundaries grouped into constant-topology segments.

    ``slices`` holds ``(slice_index, points)`` pairs with strictly increasing
    indices; ``points`` is an (N, 2) array of (x, y) pixel coordinates forming
    a closed polygon (first vertex not repeated at the end).  ``segments`` is
    a list of inclusive ``(first_slice, last_slice)`` ranges, ordered and
    non-overlapping.
    """

    slices: list = field(default_factory=list)
    segments: list = field(default_factory=list)
    spacing: float = 1.0

    def __post_init__(self):
        norm = []
        prev = None
        for idx, pts in self.slices:
            idx = int(idx)
            if prev is not None and idx <= prev:
                raise ValueError("slice indices must be strictly increasing")
            prev = idx
            norm.append((idx, np.asarray(pts)))
        self.slices = norm
        segs = [(int(a), int(b)) for a, b in self.segments]
        for (a, b), (c, _) in zip(segs, segs[1:]):
            if not (a <= b < c):
                raise ValueError("segment ranges must be ordered and non-overlapping")
        if segs and segs[-1][0] > segs[-1][1]:
            raise ValueError("segment range reversed")
        self.segments = segs

    def contour(self, slice_index: int) -> np.ndarray:
        for idx, pts in self.slices:
            if idx == slice_index:
                return pts
        raise KeyError(f"no contour stored for slice {slice_index}")


# ---------------------------------------------------------------------------
# LWV1
# ---------------------------------------------------------------------------

def _parse_lwv1(text: str, path) -> Volume:
    lines = text.splitlines()
    if not lines:
        raise VolumeFormatError("empty file", path, 1)
    header = lines[0].split()
    if len(header) != 4 or header[0] != "LWV1":
        raise VolumeFormatError("expected header 'LWV1 <width> <height> <depth>'", path, 1)
    try:
        w, h, d = (int(t) for t in header[1:])
    except ValueError:
        raise VolumeFormatError("non-integer dimension in header", path, 1) from None
    if w < 1 or h < 1 or d < 1:
        raise VolumeFormatError(f"bad dimensions {w}x{h}x{d}", path, 1)

    values = np.empty(w * h * d, dtype=np.int64)
    n = 0
    for lineno, line in enumerate(lines[1:], start=2):
        for tok in line.split():
            try:
                v = int(tok)
            except ValueError:
                raise VolumeFormatError(f"non-integer value {tok!r}", path, lineno) from None
            if not 0 <= v <= 255:
                raise VolumeFormatError(f"intensity {v} outside [0, 255]", path, lineno)
            if n >= values.size:
                raise VolumeFormatError(
                    f"too many values: expected {values.size}", path, lineno)
            values[n] = v
            n += 1
    if n != values.size:
        raise VolumeFormatError(
            f"truncated data: expected {values.size} values, got {n}", path, len(lines))
    return Volume(values.astype(np.uint8).reshape(d, h, w))


def save_volume_lwv1(volume: Volume, path) -> None:
    out = [f"LWV1 {volume.width} {volume.height} {volume.depth}"]
    for k in range(volume.depth):
        for row in volume.voxels[k]:
            out.append(" ".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# PGM
# ---------------------------------------------------------------------------

def read_pgm(path) -> np.ndarray:
    """Read a P2 (ascii) or P5 (binary) PGM with maxval <= 255."""
    data = Path(path).read_bytes()
    pos = 0

    def _token():
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise VolumeFormatError("unexpected end of PGM header", path)
        return data[start:pos]

    magic = _token()
    if magic not in (b"P2", b"P5"):
        raise VolumeFormatError(f"not a PGM: magic {magic!r}", path)
    w, h, maxval = int(_token()), int(_token()), int(_token())
    if maxval <= 0 or maxval > 255:
        raise VolumeFormatError(f"unsupported maxval {maxval}", path)
    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        raw = data[pos : pos + w * h]
        if len(raw) != w * h:
            raise VolumeFormatError("truncated P5 pixel data", path)
        img = np.frombuffer(raw, dtype=np.uint8).reshape(h, w)
    else:
        vals = data[pos:].split()
        if len(vals) < w * h:
            raise VolumeFormatError("truncated P2 pixel data", path)
        img = np.array([int(v) for v in vals[: w * h]], dtype=np.int64)
        if img.min() < 0 or img.max() > maxval:
            raise VolumeFormatError("P2 value outside 0..maxval", path)
        img = img.astype(np.uint8).reshape(h, w)
    return img.copy()


def write_pgm(img: np.ndarray, path, binary: bool = True) -> None:
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    if binary:
        with open(path, "wb") as f:
            f.write(f"P5\n{w} {h}\n255\n".encode())
            f.write(img.tobytes())
    else:
        rows = "\n".join(" ".join(str(int(v)) for v in row) for row in img)
        Path(path).write_text(f"P2\n{w} {h}\n255\n{rows}\n")


def pgm_bytes(img: np.ndarray) -> bytes:
    """In-memory P5 encoding, used by the session service to ship slices."""
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + img.tobytes()


def _parse_manifest(text: str, path) -> Volume:
    base = Path(path).parent if path is not None else Path(".")
    slices = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        name = line.strip()
        if not name or name.startswith("#"):
            continue
        p = Path(name)
        if not p.is_absolute():
            p = base / p
        if not p.exists():
            raise VolumeFormatError(f"slice file not found: {p}", path, lineno)
        img = read_pgm(p)
        if slices and img.shape != slices[0].shape:
            raise VolumeFormatError(
                f"slice dimension mismatch: {img.shape[::-1]} vs {slices[0].shape[::-1]}",
                path, lineno)
        slices.append(img)
    if not slices:
        raise VolumeFormatError("manifest lists no slices", path)
    return Volume(np.stack(slices))


def load_volume(path) -> Volume:
    """Load an LWV1 volume or a PGM-stack manifest, deciding by content."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    text = path.read_text()
    head = text.lstrip()[:5]
    if head.startswith("LWV1"):
        return _parse_lwv1(text, path)
    return _parse_manifest(text, path)


# ---------------------------------------------------------------------------
# Contour JSON
# ---------------------------------------------------------------------------

def contours_to_json(contours: ContourSet) -> str:
    doc = {
        "spacing": float(contours.spacing),
        "segments": [[int(a), int(b)] for a, b in contours.segments],
        "slices": [
            {
                "index": int(idx),
                "contour": [[_json_num(x), _json_num(y)] for x, y in np.asarray(pts)],
            }
            for idx, pts in contours.slices
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def _json_num(v):
    f = float(v)
    return int(f) if f.is_integer() else f


def save_contours(contours: ContourSet, path) -> None:
    Path(path).write_text(contours_to_json(contours) + "\n")


def contours_from_json(text: str) -> ContourSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ContourFormatError(f"invalid JSON: {e}") from None
    for key in ("spacing", "segments", "slices"):
        if key not in doc:
            raise ContourFormatError(f"missing key {key!r}")
    slices = []
    for entry in doc["slices"]:
        pts = np.asarray(entry["contour"], dtype=float)
        if pts.size and (pts.ndim != 2 or pts.shape[1] != 2):
            raise ContourFormatError("contour must be a list of [x, y] pairs")
        if pts.size and np.all(pts == np.round(pts)):
            pts = pts.astype(np.int64)
        slices.append((int(entry["index"]), pts.reshape(-1, 2)))
    return ContourSet(
        slices=slices,
        segments=[tuple(s) for s in doc["segments"]],
        spacing=float(doc["spacing"]),
    )


def load_contours(path) -> ContourSet:
    return contours_from_json(Path(path).read_text())
