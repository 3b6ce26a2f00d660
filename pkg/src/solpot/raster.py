"""Georeferenced grid container and the pixel-algebra primitives.

A raster is an immutable (by convention) 2-D float64 grid with a nodata
sentinel.  Row 0 is the northernmost row; the grid origin is the lower-left
corner, matching the ASCII grid interchange format.  All operations are pure
functions returning new rasters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRasterError, ExtentError, ShapeError

DEFAULT_NODATA = -9999.0


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a square-pixel grid: size, lower-left corner, cell size."""

    ncols: int
    nrows: int
    x_origin: float
    y_origin: float
    cell_size: float

    def __post_init__(self):
        if self.ncols < 1 or self.nrows < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.ncols}x{self.nrows}")
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")

    @property
    def x_max(self) -> float:
        return self.x_origin + self.ncols * self.cell_size

    @property
    def y_max(self) -> float:
        return self.y_origin + self.nrows * self.cell_size

    def col_centers(self) -> np.ndarray:
        return self.x_origin + (np.arange(self.ncols) + 0.5) * self.cell_size

    def row_centers(self) -> np.ndarray:
        """Y of each row center, row 0 = northernmost."""
        return self.y_origin + (self.nrows - np.arange(self.nrows) - 0.5) * self.cell_size

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """(row, col) of the half-open cell [x0, x0+cs) x [y0, y0+cs) containing a point.

        Indices may fall outside the grid; callers filter.
        """
        col = int(np.floor((x - self.x_origin) / self.cell_size))
        row = self.nrows - 1 - int(np.floor((y - self.y_origin) / self.cell_size))
        return row, col

    def overlaps(self, other: "GridSpec") -> bool:
        return (
            self.x_origin < other.x_max
            and other.x_origin < self.x_max
            and self.y_origin < other.y_max
            and other.y_origin < self.y_max
        )


class Raster:
    """A GridSpec plus a (nrows, ncols) float64 value array with a nodata sentinel.

    Every stored value is finite or equal to ``nodata``; this is checked at
    construction.  Instances are treated as immutable: operations return new
    rasters and never write into an existing one.
    """

    __slots__ = ("spec", "values", "nodata")

    def __init__(self, spec: GridSpec, values, nodata: float = DEFAULT_NODATA):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(spec.nrows, spec.ncols)
        if values.shape != (spec.nrows, spec.ncols):
            raise ShapeError(
                f"value array shape {values.shape} does not match grid "
                f"{spec.nrows}x{spec.ncols}"
            )
        bad = ~(np.isfinite(values) | (values == nodata))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise ValueError(f"non-finite value {values[r, c]} at row {r}, col {c}")
        self.spec = spec
        self.values = values
        self.nodata = float(nodata)

    @classmethod
    def filled(cls, spec: GridSpec, value: float, nodata: float = DEFAULT_NODATA) -> "Raster":
        return cls(spec, np.full((spec.nrows, spec.ncols), value, dtype=np.float64), nodata)

    def valid_mask(self) -> np.ndarray:
        return self.values != self.nodata

    def with_values(self, values) -> "Raster":
        """New raster on the same grid and nodata sentinel."""
        return type(self)(self.spec, values, self.nodata)

    def __eq__(self, other):
        if not isinstance(other, Raster):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.nodata == other.nodata
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return (
            f"{type(self).__name__}({self.spec.ncols}x{self.spec.nrows}, "
            f"cell {self.spec.cell_size}, nodata {self.nodata})"
        )


class BinaryMask(Raster):
    """A raster restricted to values {0, 1, nodata}."""

    def __init__(self, spec: GridSpec, values, nodata: float = DEFAULT_NODATA):
        super().__init__(spec, values, nodata)
        v = self.values
        bad = ~((v == 0.0) | (v == 1.0) | (v == nodata))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise ValueError(f"mask value {v[r, c]} at row {r}, col {c} is not 0, 1, or nodata")


def _require_same_grid(*rasters: Raster):
    spec = rasters[0].spec
    for r in rasters[1:]:
        if r.spec != spec:
            raise ShapeError(f"grid mismatch: {r.spec} vs {spec}")


def substitute(base: Raster, mask: BinaryMask, source) -> Raster:
    """Replace base pixels where mask is 1 with the source value.

    ``source`` is a raster on the same grid or a plain number.  Nodata in the
    base propagates: a missing base pixel stays missing even under the mask.
    """
    _require_same_grid(base, mask)
    if isinstance(source, Raster):
        _require_same_grid(base, source)
        src = np.where(source.values == source.nodata, base.nodata, source.values)
    else:
        src = np.full_like(base.values, float(source))
    take = (mask.values == 1.0) & (base.values != base.nodata)
    out = np.where(take, src, base.values)
    return Raster(base.spec, out, base.nodata)


def min_merge(inputs: list[Raster]) -> Raster:
    """Per-pixel minimum across rasters; nodata in any input wins the pixel."""
    if len(inputs) < 2:
        raise ValueError(f"min_merge needs at least 2 rasters, got {len(inputs)}")
    _require_same_grid(*inputs)
    first = inputs[0]
    stack = np.stack([r.values for r in inputs])
    any_nodata = np.zeros(first.values.shape, dtype=bool)
    for r in inputs:
        any_nodata |= r.values == r.nodata
    out = np.where(any_nodata, first.nodata, stack.min(axis=0))
    return Raster(first.spec, out, first.nodata)


def min_max(r: Raster) -> tuple[float, float]:
    """(min, max) over valid pixels only."""
    valid = r.valid_mask()
    if not valid.any():
        raise EmptyRasterError("raster has no valid pixels")
    v = r.values[valid]
    return float(v.min()), float(v.max())


def resample_to(src: Raster, target: GridSpec, method: str = "nearest") -> Raster:
    """Resample a raster onto another grid.

    nearest: each target pixel takes the source pixel whose center is nearest
    the target pixel center (containing-cell rule; ties go to the higher
    index).  mean: each target pixel averages the source pixels whose centers
    fall inside it.  Target pixels with no source coverage become nodata.
    """
    if not src.spec.overlaps(target):
        raise ExtentError(f"source extent does not overlap target: {src.spec} vs {target}")
    out = np.full((target.nrows, target.ncols), src.nodata, dtype=np.float64)

    if method == "nearest":
        tx = target.col_centers()
        ty = target.row_centers()
        col = np.floor((tx - src.spec.x_origin) / src.spec.cell_size).astype(np.int64)
        row_from_s = np.floor((ty - src.spec.y_origin) / src.spec.cell_size).astype(np.int64)
        row = src.spec.nrows - 1 - row_from_s
        ok_c = (col >= 0) & (col < src.spec.ncols)
        ok_r = (row >= 0) & (row < src.spec.nrows)
        rr, cc = np.meshgrid(row, col, indexing="ij")
        okr, okc = np.meshgrid(ok_r, ok_c, indexing="ij")
        inside = okr & okc
        out[inside] = src.values[rr[inside], cc[inside]]
    elif method == "mean":
        sx = src.spec.col_centers()
        sy = src.spec.row_centers()
        tcol = np.floor((sx - target.x_origin) / target.cell_size).astype(np.int64)
        trow_from_s = np.floor((sy - target.y_origin) / target.cell_size).astype(np.int64)
        trow = target.nrows - 1 - trow_from_s
        ok_c = (tcol >= 0) & (tcol < target.ncols)
        ok_r = (trow >= 0) & (trow < target.nrows)
        rr, cc = np.meshgrid(trow, tcol, indexing="ij")
        okr, okc = np.meshgrid(ok_r, ok_c, indexing="ij")
        inside = okr & okc & src.valid_mask()
        flat = rr[inside] * target.ncols + cc[inside]
        sums = np.zeros(target.nrows * target.ncols, dtype=np.float64)
        counts = np.zeros(target.nrows * target.ncols, dtype=np.int64)
        np.add.at(sums, flat, src.values[inside])
        np.add.at(counts, flat, 1)
        covered = counts > 0
        flat_out = out.reshape(-1)
        flat_out[covered] = sums[covered] / counts[covered]
        out = flat_out.reshape(target.nrows, target.ncols)
    else:
        raise ValueError(f"unknown resample method {method!r}")

    return Raster(target, out, src.nodata)
