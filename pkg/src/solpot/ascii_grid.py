"""Reader/writer for the ESRI ASCII grid interchange format.

Header is six ``key value`` lines (ncols, nrows, xllcorner, yllcorner,
cellsize, NODATA_value) followed by rows north to south.  Values are written
with 6 significant digits; the reader accepts arbitrary whitespace between
tokens.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError
from .raster import GridSpec, Raster

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


def read_grid(path) -> Raster:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")

    header = {}
    for i, key in enumerate(_HEADER_KEYS):
        if i >= len(lines):
            raise ParseError(f"missing header line for {key}", line=i + 1)
        parts = lines[i].split()
        if len(parts) != 2 or parts[0].lower() != key:
            raise ParseError(
                f"expected header '{key} <value>', got {lines[i]!r}", line=i + 1
            )
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise ParseError(f"bad numeric value for {key}: {parts[1]!r}", line=i + 1)

    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    try:
        spec = GridSpec(ncols, nrows, header["xllcorner"], header["yllcorner"], header["cellsize"])
    except ValueError as exc:
        raise ParseError(str(exc), line=1)

    tokens = "\n".join(lines[len(_HEADER_KEYS):]).split()
    if len(tokens) != ncols * nrows:
        raise ParseError(
            f"expected {ncols * nrows} values ({nrows} rows of {ncols}), "
            f"found {len(tokens)}",
            line=len(_HEADER_KEYS) + 1,
        )
    try:
        flat = np.asarray(tokens, dtype=np.float64)
    except ValueError:
        bad = next(t for t in tokens if not _is_float(t))
        raise ParseError(f"bad raster value {bad!r}", line=len(_HEADER_KEYS) + 1)

    return Raster(spec, flat.reshape(nrows, ncols), header["nodata_value"])


def _is_float(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def write_grid(raster: Raster, path) -> None:
    path = Path(path)
    spec = raster.spec
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"ncols {spec.ncols}\n")
        fh.write(f"nrows {spec.nrows}\n")
        fh.write(f"xllcorner {spec.x_origin:.10g}\n")
        fh.write(f"yllcorner {spec.y_origin:.10g}\n")
        fh.write(f"cellsize {spec.cell_size:.10g}\n")
        fh.write(f"NODATA_value {raster.nodata:.10g}\n")
        for row in raster.values:
            fh.write(" ".join(f"{v:.6g}" for v in row))
            fh.write("\n")
