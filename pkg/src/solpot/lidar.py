"""LiDAR point ingest: LAS / xyz-text readers, noise filtering, DSM/DEM gridding.

The surface model takes the per-cell maximum of first-return heights; the
elevation model takes the per-cell minimum over the ground-like classes
(Ground, Road Surface, Bridge Deck by default).  Cell membership is half-open
on the west/south edges so boundary points land deterministically.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import CapabilityError, ParseError
from .raster import DEFAULT_NODATA, GridSpec, Raster


class PointRecord(NamedTuple):
    x: float
    y: float
    z: float
    classification: int
    return_number: int


@dataclass
class IngestConfig:
    """Gridding and noise-filter parameters.

    ASPRS codes: 2 Ground, 11 Road Surface, 17 Bridge Deck feed the elevation
    model; 7 (low noise) and 18 (high noise) are dropped.  All configurable
    because vintage files vary.
    """

    cell_size: float = 0.5
    dem_classes: frozenset[int] = frozenset({2, 11, 17})
    noise_classes: frozenset[int] = frozenset({7, 18})
    z_bounds: tuple[float, float] = (-500.0, 9000.0)

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        if not self.z_bounds[0] < self.z_bounds[1]:
            raise ValueError(f"z_bounds must satisfy min < max, got {self.z_bounds}")
        self.dem_classes = frozenset(self.dem_classes)
        self.noise_classes = frozenset(self.noise_classes)


# LAS point formats 0-3 share the 20-byte core layout; 1 and 3 append GPS
# time, 2 and 3 append RGB.  Only the core fields are read.
_LAS_CORE = struct.Struct("<lllHBBbBH")
_POINT_FORMAT_SIZES = {0: 20, 1: 28, 2: 26, 3: 34}


def read_points(path, fmt: str = "las") -> Iterator[PointRecord]:
    """Stream points from a LAS (1.2-1.4, formats 0-3) or xyz-text file."""
    if fmt == "las":
        return _read_las(path)
    if fmt == "xyz-text":
        return _read_xyz_text(path)
    raise ValueError(f"unknown point format {fmt!r} (expected 'las' or 'xyz-text')")


def _read_xyz_text(path) -> Iterator[PointRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ParseError(
                    f"expected 'x y z classification return_number', got {line!r}",
                    line=lineno,
                )
            try:
                x, y, z = float(parts[0]), float(parts[1]), float(parts[2])
                cls, ret = int(parts[3]), int(parts[4])
            except ValueError:
                raise ParseError(f"bad numeric field in {line!r}", line=lineno)
            yield PointRecord(x, y, z, cls, ret)


def _read_las(path) -> Iterator[PointRecord]:
    with open(path, "rb") as fh:
        header = fh.read(375)
        if len(header) < 4 or header[:4] != b"LASF":
            raise ParseError("not a LAS file (missing LASF signature)", byte_offset=0)
        if len(header) < 227:
            raise ParseError(
                f"truncated LAS header ({len(header)} bytes)", byte_offset=len(header)
            )
        ver_major, ver_minor = header[24], header[25]
        if ver_major != 1 or ver_minor not in (2, 3, 4):
            raise CapabilityError(f"LAS version {ver_major}.{ver_minor} not supported")

        offset_to_points = struct.unpack_from("<I", header, 96)[0]
        point_format = header[104]
        if point_format & 0x80:
            raise CapabilityError(
                f"LAZ-compressed point format {point_format} not supported"
            )
        if point_format not in _POINT_FORMAT_SIZES:
            raise CapabilityError(f"LAS point format {point_format} not supported")
        record_len = struct.unpack_from("<H", header, 105)[0]
        if record_len < _POINT_FORMAT_SIZES[point_format]:
            raise ParseError(
                f"point record length {record_len} shorter than format "
                f"{point_format} minimum {_POINT_FORMAT_SIZES[point_format]}",
                byte_offset=105,
            )
        n_points = struct.unpack_from("<I", header, 107)[0]
        if ver_minor == 4 and n_points == 0:
            n_points = struct.unpack_from("<Q", header, 247)[0]
        sx, sy, sz = struct.unpack_from("<3d", header, 131)
        ox, oy, oz = struct.unpack_from("<3d", header, 155)

        fh.seek(offset_to_points)
        data = fh.read(n_points * record_len)
        if len(data) < n_points * record_len:
            raise ParseError(
                f"expected {n_points} point records of {record_len} bytes, "
                f"file ends early",
                byte_offset=offset_to_points + len(data),
            )

    dtype = np.dtype(
        {
            "names": ["X", "Y", "Z", "flags", "cls"],
            "formats": ["<i4", "<i4", "<i4", "u1", "u1"],
            "offsets": [0, 4, 8, 14, 15],
            "itemsize": record_len,
        }
    )
    recs = np.frombuffer(data, dtype=dtype, count=n_points)
    xs = recs["X"] * sx + ox
    ys = recs["Y"] * sy + oy
    zs = recs["Z"] * sz + oz
    returns = recs["flags"] & 0x07
    classes = recs["cls"] & 0x1F  # upper bits are synthetic/keypoint/withheld flags
    for i in range(n_points):
        yield PointRecord(
            float(xs[i]), float(ys[i]), float(zs[i]), int(classes[i]), int(returns[i])
        )


def filter_noise(points: Iterable[PointRecord], cfg: IngestConfig) -> Iterator[PointRecord]:
    """Drop noise-class points and points outside the plausible height window."""
    zmin, zmax = cfg.z_bounds
    for p in points:
        if p.classification in cfg.noise_classes:
            continue
        if not (zmin <= p.z <= zmax):
            continue
        yield p


def _bucket(points: Iterable[PointRecord], spec: GridSpec):
    """Flat cell index and (x, y, z, class, return) row per in-grid point."""
    pts = list(points)
    if not pts:
        return np.empty(0, dtype=np.int64), np.empty((0, 5))
    arr = np.asarray(pts, dtype=np.float64)
    col = np.floor((arr[:, 0] - spec.x_origin) / spec.cell_size).astype(np.int64)
    row_s = np.floor((arr[:, 1] - spec.y_origin) / spec.cell_size).astype(np.int64)
    row = spec.nrows - 1 - row_s
    inside = (col >= 0) & (col < spec.ncols) & (row >= 0) & (row < spec.nrows)
    flat = row[inside] * spec.ncols + col[inside]
    return flat, arr[inside]


def grid_dsm(points: Iterable[PointRecord], spec: GridSpec) -> Raster:
    """Surface model: per-cell max height of first returns; empty cells nodata."""
    flat, arr = _bucket(points, spec)
    acc = np.full(spec.nrows * spec.ncols, -np.inf)
    if flat.size:
        first = arr[:, 4] == 1.0
        np.maximum.at(acc, flat[first], arr[first, 2])
    out = np.where(np.isneginf(acc), DEFAULT_NODATA, acc)
    return Raster(spec, out.reshape(spec.nrows, spec.ncols))


def grid_dem(points: Iterable[PointRecord], spec: GridSpec, cfg: IngestConfig) -> Raster:
    """Elevation model: per-cell min height over the ground-like classes."""
    flat, arr = _bucket(points, spec)
    acc = np.full(spec.nrows * spec.ncols, np.inf)
    if flat.size:
        keep = np.isin(arr[:, 3].astype(np.int64), list(cfg.dem_classes))
        np.minimum.at(acc, flat[keep], arr[keep, 2])
    out = np.where(np.isposinf(acc), DEFAULT_NODATA, acc)
    return Raster(spec, out.reshape(spec.nrows, spec.ncols))


def fill_voids(r: Raster, max_radius_cells: int) -> Raster:
    """Fill nodata pixels from the nearest valid pixel within a cell radius.

    Nearest by Euclidean pixel distance; ties go to the smallest row, then the
    smallest column.  Pixels with no valid neighbor in range stay nodata.
    """
    if max_radius_cells < 1:
        raise ValueError(f"max_radius_cells must be >= 1, got {max_radius_cells}")
    valid = r.valid_mask()
    holes = np.argwhere(~valid)
    if holes.size == 0:
        return Raster(r.spec, r.values.copy(), r.nodata)

    rad = max_radius_cells
    offsets = []
    for dr in range(-rad, rad + 1):
        for dc in range(-rad, rad + 1):
            if dr == 0 and dc == 0:
                continue
            d2 = dr * dr + dc * dc
            if d2 <= rad * rad:
                offsets.append((d2, dr, dc))
    offsets.sort()

    out = r.values.copy()
    nrows, ncols = out.shape
    for hr, hc in holes:
        for _, dr, dc in offsets:
            nr, nc = hr + dr, hc + dc
            if 0 <= nr < nrows and 0 <= nc < ncols and valid[nr, nc]:
                out[hr, hc] = r.values[nr, nc]
                break
    return Raster(r.spec, out, r.nodata)


def spec_from_points(points: Iterable[PointRecord], cell_size: float) -> tuple[GridSpec, list[PointRecord]]:
    """Derive a grid covering all points, origin snapped to the cell size.

    Returns the spec and the materialized point list (the stream is consumed).
    """
    pts = list(points)
    if not pts:
        raise ValueError("cannot derive a grid from an empty point stream")
    xs = np.array([p.x for p in pts])
    ys = np.array([p.y for p in pts])
    x0 = np.floor(xs.min() / cell_size) * cell_size
    y0 = np.floor(ys.min() / cell_size) * cell_size
    ncols = int(np.floor((xs.max() - x0) / cell_size)) + 1
    nrows = int(np.floor((ys.max() - y0) / cell_size)) + 1
    return GridSpec(ncols, nrows, float(x0), float(y0), cell_size), pts
