"""RGB imagery loading: binary PPM (P6) and 8-bit RGB PNG, with world files.

A georeferenced image carries a world-file sidecar (``<name>.wld``): six
lines A D B E C F with zero rotation terms, pixel sizes A = -E, and C/F the
center of the upper-left pixel.  Canopy photographs need no sidecar.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ParseError
from .raster import GridSpec


@dataclass
class RgbImage:
    """8-bit RGB pixels, optionally anchored to a grid."""

    pixels: np.ndarray  # (height, width, 3) uint8
    spec: GridSpec | None = None

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError(f"expected (h, w, 3) uint8 pixels, got {p.shape} {p.dtype}")
        self.pixels = p

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def read_ppm(path) -> np.ndarray:
    """Binary P6 PPM with maxval 255; '#' comments allowed in the header."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] != b"P6":
        raise ParseError(f"{path.name}: not a P6 PPM", byte_offset=0)
    pos = 2
    fields = []
    while len(fields) < 3:
        # skip whitespace and comments
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise ParseError(f"{path.name}: bad header token {tok!r}", byte_offset=start)
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise ParseError(f"{path.name}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    need = width * height * 3
    raw = data[pos : pos + need]
    if len(raw) < need:
        raise ParseError(
            f"{path.name}: expected {need} pixel bytes, found {len(raw)}",
            byte_offset=pos + len(raw),
        )
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)


def write_ppm(pixels: np.ndarray, path) -> None:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = pixels.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def read_world_file(path, width: int, height: int) -> GridSpec:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split()
    if len(lines) != 6:
        raise ParseError(f"{path.name}: world file needs 6 values, got {len(lines)}")
    try:
        a, d, b, e, c, f = (float(v) for v in lines)
    except ValueError:
        raise ParseError(f"{path.name}: non-numeric world file entry")
    if d != 0.0 or b != 0.0:
        raise ParseError(f"{path.name}: rotation terms must be zero")
    if not (a > 0 and e < 0):
        raise ParseError(f"{path.name}: expected A > 0 and E < 0, got A={a} E={e}")
    if abs(a + e) > 1e-9 * a:
        raise ParseError(f"{path.name}: anisotropic pixels not supported (A={a}, E={e})")
    x_origin = c - a / 2.0
    y_origin = f - (height - 0.5) * a
    return GridSpec(width, height, x_origin, y_origin, a)


def write_world_file(spec: GridSpec, path) -> None:
    ul_x = spec.x_origin + spec.cell_size / 2.0
    ul_y = spec.y_origin + (spec.nrows - 0.5) * spec.cell_size
    text = "\n".join(
        [
            f"{spec.cell_size:.10g}",
            "0",
            "0",
            f"{-spec.cell_size:.10g}",
            f"{ul_x:.10g}",
            f"{ul_y:.10g}",
        ]
    )
    Path(path).write_text(text + "\n", encoding="utf-8")


def _world_file_for(path: Path) -> Path:
    cand = path.with_suffix(".wld")
    if cand.exists():
        return cand
    cand2 = Path(str(path) + ".wld")
    if cand2.exists():
        return cand2
    raise FileNotFoundError(f"no world file ({cand.name} or {cand2.name}) beside {path}")


def load_image(path, *, georeferenced: bool = False) -> RgbImage:
    """Load a PPM or PNG; attach the world-file grid when georeferenced."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".ppm":
        pixels = read_ppm(path)
    elif suffix == ".png":
        with Image.open(path) as img:
            pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    else:
        raise ParseError(f"unsupported image format {suffix!r} (expected .ppm or .png)")
    spec = None
    if georeferenced:
        spec = read_world_file(_world_file_for(path), pixels.shape[1], pixels.shape[0])
    return RgbImage(pixels, spec)
