"""File formats, observation masks and report emission.

The on-disk tensor container (T3B) is a little-endian binary format: magic
``T3B1``, one payload-kind byte (0 = float64 tensor, 1 = uint8 mask), three
u32 dims, then the payload serialized first-index-fastest. Images move in and
out as binary PGM (P5) and PPM (P6), 8- or 16-bit, so no codec dependencies
are needed. Masks come from independent per-entry sampling (PCG64, seeded)
or from simulated opaque cloud regions applied to every band.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np
from matplotlib.path import Path as GeomPath

from . import tensor

T3B_MAGIC = b"T3B1"
KIND_TENSOR = 0
KIND_MASK = 1

CSV_HEADER = ["label", "band", "psnr_db", "ssim", "mpsnr_db", "mssim", "seconds"]


class FileFormatError(Exception):
    """Raised when a file does not parse as its declared format."""


@dataclass
class ObservationMask:
    """Boolean membership tensor for the observed index set."""

    observed: np.ndarray

    def __post_init__(self):
        self.observed = np.asarray(self.observed, dtype=bool)
        if self.observed.ndim != 3:
            raise ValueError("mask must be a third-order array")

    @property
    def dims(self):
        return self.observed.shape

    @property
    def count(self):
        return int(np.count_nonzero(self.observed))

    @property
    def fraction(self):
        return self.count / self.observed.size


@dataclass(frozen=True)
class NormalizationRecord:
    """Affine map between original values and the [0,1] working scale.

    `lo`/`hi` give the original range; `maxval` is the integer pixel level
    used when quantizing back out to images.
    """

    lo: float
    hi: float
    maxval: int = 255

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("max must exceed min")
        if not 1 <= self.maxval <= 65535:
            raise ValueError("maxval out of the PGM/PPM range")

    @classmethod
    def from_tensor(cls, a, maxval=255):
        a = np.asarray(a)
        lo, hi = float(np.min(a)), float(np.max(a))
        if hi == lo:
            hi = lo + 1.0
        return cls(lo=lo, hi=hi, maxval=maxval)

    def normalize(self, a):
        return (np.asarray(a, dtype=np.float64) - self.lo) / (self.hi - self.lo)

    def denormalize(self, a):
        return np.asarray(a, dtype=np.float64) * (self.hi - self.lo) + self.lo


def random_mask(dims, p, seed):
    """Observe each entry independently with probability p.

    Driven by numpy's PCG64 so a (dims, p, seed) triple pins the mask exactly
    on any platform.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("sampling rate must lie in [0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    return ObservationMask(rng.random(dims) < p)


@dataclass(frozen=True)
class Ellipse:
    """Axis-aligned ellipse in (row, col) pixel coordinates."""

    row: float
    col: float
    row_radius: float
    col_radius: float

    def __post_init__(self):
        if self.row_radius <= 0 or self.col_radius <= 0:
            raise ValueError("radii must be positive")

    def bounds(self):
        return (
            self.row - self.row_radius,
            self.row + self.row_radius,
            self.col - self.col_radius,
            self.col + self.col_radius,
        )

    def contains(self, rows, cols):
        dr = (rows - self.row) / self.row_radius
        dc = (cols - self.col) / self.col_radius
        return dr * dr + dc * dc <= 1.0


@dataclass(frozen=True)
class Polygon:
    """Simple polygon in (row, col) pixel coordinates."""

    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(tuple(map(float, v)) for v in self.vertices))
        if len(self.vertices) < 3:
            raise ValueError("a polygon needs at least three vertices")

    def bounds(self):
        rs = [v[0] for v in self.vertices]
        cs = [v[1] for v in self.vertices]
        return (min(rs), max(rs), min(cs), max(cs))

    def contains(self, rows, cols):
        pts = np.column_stack([rows.ravel(), cols.ravel()])
        path = GeomPath(np.asarray(self.vertices))
        # the sign of `radius` that expands the path depends on the winding
        # order, so take the union to count boundary points as covered
        inside = path.contains_points(pts, radius=1e-9) | path.contains_points(
            pts, radius=-1e-9
        )
        return inside.reshape(rows.shape)


def cloud_mask(dims, regions):
    """Mark entries inside any opaque region missing in every band."""
    i1, i2, i3 = dims
    for reg in regions:
        r_lo, r_hi, c_lo, c_hi = reg.bounds()
        if r_lo < 0 or c_lo < 0 or r_hi > i1 - 1 or c_hi > i2 - 1:
            raise ValueError(f"region {reg} exceeds the {i1}x{i2} image bounds")
    rows, cols = np.meshgrid(np.arange(i1, dtype=float), np.arange(i2, dtype=float), indexing="ij")
    covered = np.zeros((i1, i2), dtype=bool)
    for reg in regions:
        covered |= reg.contains(rows, cols)
    observed = np.broadcast_to(~covered[:, :, None], (i1, i2, i3)).copy()
    if not observed.any():
        raise ValueError("regions cover the whole image; nothing is observed")
    return ObservationMask(observed)


def cloud_preset(name, dims):
    """Built-in cloud layouts: scattered small, single medium, single large.

    Geometry is relative to the image size, so one preset serves any dims.
    """
    i1, i2 = dims[0], dims[1]

    def ell(r, c, rr, cr):
        return Ellipse(row=r * (i1 - 1), col=c * (i2 - 1),
                       row_radius=rr * i1, col_radius=cr * i2)

    if name == "case1":
        return [
            ell(0.20, 0.24, 0.060, 0.075),
            ell(0.30, 0.62, 0.050, 0.080),
            ell(0.16, 0.80, 0.045, 0.055),
            ell(0.55, 0.14, 0.070, 0.060),
            ell(0.62, 0.46, 0.055, 0.070),
            ell(0.72, 0.78, 0.065, 0.080),
            ell(0.84, 0.32, 0.050, 0.065),
        ]
    if name == "case2":
        return [ell(0.50, 0.50, 0.18, 0.22)]
    if name == "case3":
        return [ell(0.50, 0.50, 0.30, 0.36)]
    raise ValueError(f"unknown cloud preset {name!r}")


CLOUD_PRESETS = ("case1", "case2", "case3")


def write_t3b(path, obj):
    """Serialize a tensor or a mask into the T3B container."""
    if isinstance(obj, ObservationMask):
        kind = KIND_MASK
        payload = obj.observed.astype(np.uint8).ravel(order="F").tobytes()
        dims = obj.dims
    else:
        a = tensor.as_tensor3(obj)
        kind = KIND_TENSOR
        payload = a.astype("<f8").ravel(order="F").tobytes()
        dims = a.shape
    if any(d > 0xFFFFFFFF for d in dims):
        raise FileFormatError("dimension exceeds the u32 container limit")
    header = T3B_MAGIC + struct.pack("<B3I", kind, *dims)
    FsPath(path).write_bytes(header + payload)


def read_t3b(path):
    """Parse a T3B container back into a float tensor or an ObservationMask."""
    raw = FsPath(path).read_bytes()
    if len(raw) < 4 or raw[:4] != T3B_MAGIC:
        raise FileFormatError(f"{path}: bad magic, not a T3B file")
    if len(raw) < 17:
        raise FileFormatError(f"{path}: truncated header, missing {17 - len(raw)} bytes")
    kind, i1, i2, i3 = struct.unpack("<B3I", raw[4:17])
    if kind not in (KIND_TENSOR, KIND_MASK):
        raise FileFormatError(f"{path}: unknown payload kind {kind}")
    count = i1 * i2 * i3
    itemsize = 8 if kind == KIND_TENSOR else 1
    expected = count * itemsize
    body = raw[17:]
    if len(body) < expected:
        raise FileFormatError(
            f"{path}: truncated payload, missing {expected - len(body)} bytes"
        )
    if len(body) > expected:
        raise FileFormatError(f"{path}: {len(body) - expected} trailing bytes")
    if kind == KIND_TENSOR:
        values = np.frombuffer(body, dtype="<f8")
        return values.reshape((i1, i2, i3), order="F").astype(np.float64)
    values = np.frombuffer(body, dtype=np.uint8)
    return ObservationMask(values.reshape((i1, i2, i3), order="F") != 0)


def _parse_pnm(raw, path):
    """Parse a binary PGM/PPM header and payload."""
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(raw):
            ch = raw[pos : pos + 1]
            if ch == b"#":
                while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FileFormatError(f"{path}: header ended early")
        return raw[start:pos]

    magic = next_token()
    if magic not in (b"P5", b"P6"):
        raise FileFormatError(f"{path}: unsupported magic {magic!r}")
    width = int(next_token())
    height = int(next_token())
    maxval = int(next_token())
    if not 1 <= maxval <= 65535:
        raise FileFormatError(f"{path}: maxval {maxval} out of range")
    pos += 1  # the single whitespace byte after maxval
    channels = 3 if magic == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    expected = width * height * channels * dtype.itemsize
    body = raw[pos : pos + expected]
    if len(body) < expected:
        raise FileFormatError(f"{path}: truncated pixels, missing {expected - len(body)} bytes")
    pixels = np.frombuffer(body, dtype=dtype).astype(np.float64)
    if channels == 3:
        pixels = pixels.reshape(height, width, 3)
    else:
        pixels = pixels.reshape(height, width, 1)
    return pixels, maxval


def import_image_stack(paths):
    """Load an ordered list of PGM/PPM files into a tensor in [0,1].

    A color (P6) file contributes three bands in R,G,B order; grayscale
    files contribute one each. All files must agree on width, height and
    pixel maxval.
    """
    if not paths:
        raise ValueError("no image paths given")
    bands = []
    shape = None
    maxval = None
    for path in paths:
        pixels, mv = _parse_pnm(FsPath(path).read_bytes(), path)
        if shape is None:
            shape, maxval = pixels.shape[:2], mv
        elif pixels.shape[:2] != shape:
            raise FileFormatError(f"{path}: size {pixels.shape[:2]} differs from {shape}")
        elif mv != maxval:
            raise FileFormatError(f"{path}: maxval {mv} differs from {maxval}")
        bands.append(pixels / mv)
    stack = np.concatenate(bands, axis=2)
    record = NormalizationRecord(lo=0.0, hi=float(maxval), maxval=maxval)
    return stack, record


def export_image_stack(a, record, out_dir):
    """Quantize a [0,1] tensor back to images in `out_dir`.

    A three-band tensor becomes one color PPM; anything else becomes one
    grayscale PGM per band. Returns the written paths.
    """
    a = tensor.as_tensor3(a)
    out_dir = FsPath(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    maxval = record.maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    pixels = np.rint(np.clip(a, 0.0, 1.0) * maxval).astype(dtype)
    h, w, b = a.shape
    written = []
    if b == 3:
        path = out_dir / "stack.ppm"
        header = f"P6\n{w} {h}\n{maxval}\n".encode("ascii")
        path.write_bytes(header + pixels.tobytes())
        written.append(path)
    else:
        for i in range(b):
            path = out_dir / f"band_{i + 1:03d}.pgm"
            header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
            path.write_bytes(header + pixels[:, :, i].tobytes())
            written.append(path)
    return written


def _fmt(value, places):
    if value is None:
        return ""
    if value == float("inf"):
        return "inf"
    return f"{value:.{places}f}"


def write_report_csv(reports, path):
    """Emit per-band metric rows plus one summary row per labeled report.

    `reports` is a list of (label, QualityReport, seconds) triples. Band rows
    carry the per-band PSNR/SSIM; the summary row carries the band means and
    the wall time. A `None` report records a failed run as a single row with
    `failed` in the band column.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for label, report, seconds in reports:
            if report is None:
                writer.writerow([label, "failed", "", "", "", "", _fmt(seconds, 3)])
                continue
            for b in range(report.band_count):
                writer.writerow([
                    label,
                    str(b + 1),
                    _fmt(report.psnr_per_band[b], 4),
                    _fmt(report.ssim_per_band[b], 4),
                    "",
                    "",
                    "",
                ])
            writer.writerow([
                label,
                "all",
                "",
                "",
                _fmt(report.mpsnr, 4),
                _fmt(report.mssim, 4),
                _fmt(seconds, 3),
            ])
