"""Planar polygon handling: GeoJSON loading and pixel-center rasterization.

Containment uses the even-odd rule on pixel centers with the classic
crossing-count tie behavior, so centers exactly on an edge resolve
deterministically.  All coordinates are planar meters in the shared CRS.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import GeometryError
from .raster import GridSpec

Ring = list[tuple[float, float]]


def load_polygons(path) -> list[list[Ring]]:
    """Read Polygon/MultiPolygon features from GeoJSON; one ring list per polygon."""
    with open(Path(path), "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    feats = doc["features"] if doc.get("type") == "FeatureCollection" else [doc]
    polys = []
    for feat in feats:
        geom = feat.get("geometry", feat)
        polys.extend(_geometry_rings(geom))
    return polys


def _geometry_rings(geom: dict) -> list[list[Ring]]:
    gtype = geom.get("type")
    if gtype == "Polygon":
        return [[_as_ring(r) for r in geom["coordinates"]]]
    if gtype == "MultiPolygon":
        return [[_as_ring(r) for r in poly] for poly in geom["coordinates"]]
    raise GeometryError(f"unsupported geometry type {gtype!r} (expected Polygon/MultiPolygon)")


def _as_ring(coords) -> Ring:
    return [(float(x), float(y)) for x, y, *_ in coords]


def validate_ring(ring: Ring, *, require_closed: bool = False, label: str = "") -> Ring:
    """Drop a duplicate closing vertex and check the ring has >= 3 vertices."""
    tag = f" in {label}" if label else ""
    if require_closed and (len(ring) < 2 or ring[0] != ring[-1]):
        raise GeometryError(f"ring not closed (first vertex != last){tag}")
    open_ring = ring[:-1] if len(ring) > 1 and ring[0] == ring[-1] else list(ring)
    if len(open_ring) < 3:
        raise GeometryError(f"ring has {len(open_ring)} vertices, need at least 3{tag}")
    return open_ring


def _ring_crossings(ring: Ring, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Even-odd crossing parity of one ring for arrays of points."""
    inside = np.zeros(px.shape, dtype=bool)
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        crosses = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = (x2 - x1) * (py - y1) / (y2 - y1) + x1
        inside ^= crosses & (px < x_at)
    return inside


def polygon_mask(rings: list[Ring], spec: GridSpec, *, label: str = "") -> np.ndarray:
    """Boolean grid of pixel centers inside the polygon (even-odd over all rings)."""
    checked = [validate_ring(r, label=label) for r in rings]
    xs = spec.col_centers()
    ys = spec.row_centers()

    all_pts = np.concatenate([np.asarray(r) for r in checked])
    xmin, ymin = all_pts.min(axis=0)
    xmax, ymax = all_pts.max(axis=0)
    c0 = max(0, int(np.floor((xmin - spec.x_origin) / spec.cell_size)) - 1)
    c1 = min(spec.ncols, int(np.ceil((xmax - spec.x_origin) / spec.cell_size)) + 1)
    r1s = max(0, int(np.floor((ymin - spec.y_origin) / spec.cell_size)) - 1)
    r1n = min(spec.nrows, int(np.ceil((ymax - spec.y_origin) / spec.cell_size)) + 1)
    rlo = spec.nrows - r1n
    rhi = spec.nrows - r1s

    out = np.zeros((spec.nrows, spec.ncols), dtype=bool)
    if c0 >= c1 or rlo >= rhi:
        return out
    px, py = np.meshgrid(xs[c0:c1], ys[rlo:rhi])
    box = np.zeros(px.shape, dtype=bool)
    for ring in checked:
        box ^= _ring_crossings(ring, px, py)
    out[rlo:rhi, c0:c1] = box
    return out
