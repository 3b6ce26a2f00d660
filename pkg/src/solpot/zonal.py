"""Per-polygon mean solar potential for parking lots and roads.

Zones rasterize by pixel-center containment onto a label grid; means are
arithmetic over the valid pixels under each label.  Output is a CSV with one
row per zone and two-decimal means.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GeometryError, ShapeError
from .geometry import Ring, polygon_mask, validate_ring
from .raster import GridSpec, Raster

ZONE_KINDS = ("parking", "road")

CSV_HEADER = "id,kind,leaf_on_mean_whm2day,leaf_off_mean_whm2day,pixel_count"


@dataclass
class ZonePolygon:
    id: str
    kind: str
    rings: list[Ring]

    def __post_init__(self):
        if self.kind not in ZONE_KINDS:
            raise GeometryError(f"zone {self.id!r}: kind must be one of {ZONE_KINDS}, got {self.kind!r}")
        for ring in self.rings:
            validate_ring(ring, require_closed=True, label=f"zone {self.id!r}")


@dataclass
class ZonalRow:
    id: str
    kind: str
    leaf_on_mean: float | None
    leaf_off_mean: float | None
    pixel_count: int


def load_zones(path) -> list[ZonePolygon]:
    """Zone polygons from GeoJSON; features need 'id' and 'kind' properties."""
    with open(Path(path), "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise GeometryError("zone file must be a GeoJSON FeatureCollection")
    zones = []
    for i, feat in enumerate(doc["features"]):
        props = feat.get("properties") or {}
        if "id" not in props or "kind" not in props:
            raise GeometryError(f"zone feature {i} missing 'id' or 'kind' property")
        geom = feat["geometry"]
        if geom["type"] == "Polygon":
            rings = [[(float(x), float(y)) for x, y, *_ in r] for r in geom["coordinates"]]
        else:
            raise GeometryError(
                f"zone {props['id']!r}: only Polygon geometry supported, got {geom['type']}"
            )
        zones.append(ZonePolygon(str(props["id"]), str(props["kind"]), rings))
    return zones


def rasterize_zones(zones: list[ZonePolygon], spec: GridSpec) -> Raster:
    """Label raster: pixel value = zone index, nodata outside all zones.

    Overlaps resolve to the later zone in file order, with a warning.
    """
    labels = np.full((spec.nrows, spec.ncols), -9999.0)
    for i, zone in enumerate(zones):
        inside = polygon_mask(zone.rings, spec, label=f"zone {zone.id!r}")
        taken = inside & (labels != -9999.0)
        if taken.any():
            warnings.warn(
                f"zone {zone.id!r} overlaps an earlier zone on "
                f"{int(taken.sum())} pixels; later zone wins",
                stacklevel=2,
            )
        labels[inside] = float(i)
    return Raster(spec, labels, -9999.0)


def zonal_means(
    leaf_on: Raster, leaf_off: Raster, labels: Raster, zones: list[ZonePolygon]
) -> list[ZonalRow]:
    """Arithmetic mean of each season's valid pixels under every zone label."""
    if not (leaf_on.spec == leaf_off.spec == labels.spec):
        raise ShapeError("season rasters and label raster must share one grid")

    rows = []
    label_vals = labels.values
    usable = leaf_on.valid_mask() & leaf_off.valid_mask()
    for i, zone in enumerate(zones):
        under = (label_vals == float(i)) & usable
        count = int(under.sum())
        if count:
            on = float(leaf_on.values[under].mean())
            off = float(leaf_off.values[under].mean())
        else:
            on = off = None
        rows.append(ZonalRow(zone.id, zone.kind, on, off, count))
    return rows


def write_zonal_csv(rows: list[ZonalRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            on = f"{row.leaf_on_mean:.2f}" if row.leaf_on_mean is not None else ""
            off = f"{row.leaf_off_mean:.2f}" if row.leaf_off_mean is not None else ""
            fh.write(f"{row.id},{row.kind},{on},{off},{row.pixel_count}\n")
