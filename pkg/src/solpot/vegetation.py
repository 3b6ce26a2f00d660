"""Scene classification: building DEM, tree mask, green-share index, tree split.

Trees are whatever rises more than the height threshold above the
building-augmented terrain.  Winter imagery separates evergreen from
deciduous crowns through the green share G/(R+G+B): evergreens stay green,
bare deciduous crowns drop below the threshold.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .geometry import Ring, polygon_mask
from .imagery import RgbImage
from .raster import BinaryMask, GridSpec, Raster, resample_to, substitute


@dataclass
class ClassifyConfig:
    tree_height_threshold: float = 2.5   # meters above building_DEM
    evergreen_threshold: float = 0.375   # green share separating evergreen

    def __post_init__(self):
        if not self.tree_height_threshold > 0:
            raise ValueError(f"tree_height_threshold must be positive: {self.tree_height_threshold}")
        if not 0.0 < self.evergreen_threshold < 1.0:
            raise ValueError(f"evergreen_threshold must be in (0, 1): {self.evergreen_threshold}")


@dataclass
class SceneMasks:
    building: BinaryMask
    tree: BinaryMask
    evergreen: BinaryMask
    deciduous: BinaryMask


def building_dem(dem: Raster, dsm: Raster, footprints: list[list[Ring]]) -> tuple[Raster, BinaryMask]:
    """Terrain with building-footprint pixels raised to the surface height.

    Returns (building_DEM, building mask); the mask marks pixel centers inside
    any footprint polygon.
    """
    if dem.spec != dsm.spec:
        raise ShapeError(f"dem/dsm grid mismatch: {dem.spec} vs {dsm.spec}")
    combined = np.zeros((dem.spec.nrows, dem.spec.ncols), dtype=bool)
    for i, rings in enumerate(footprints):
        combined |= polygon_mask(rings, dem.spec, label=f"footprint {i}")
    mask = BinaryMask(dem.spec, combined.astype(np.float64), dem.nodata)
    return substitute(dem, mask, dsm), mask


def tree_mask(dsm: Raster, bdem: Raster, cfg: ClassifyConfig) -> BinaryMask:
    """1 where the surface rises strictly more than the threshold above building_DEM."""
    if dsm.spec != bdem.spec:
        raise ShapeError(f"dsm/building_dem grid mismatch: {dsm.spec} vs {bdem.spec}")
    valid = dsm.valid_mask() & bdem.valid_mask()
    tall = (dsm.values - bdem.values) > cfg.tree_height_threshold
    out = np.where(valid, np.where(tall, 1.0, 0.0), dsm.nodata)
    return BinaryMask(dsm.spec, out, dsm.nodata)


def channel_percent(img: RgbImage, target: GridSpec) -> Raster:
    """Green share G/(R+G+B) at native resolution, mean-resampled to the target.

    Black pixels (zero channel sum) carry no color information and become
    nodata before resampling.
    """
    if img.spec is None:
        raise ValueError("imagery has no geospatial anchor (world file missing)")
    rgb = img.pixels.astype(np.float64)
    total = rgb.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        share = rgb[:, :, 1] / total
    native = np.where(total > 0, share, -9999.0)
    native_raster = Raster(img.spec, native, -9999.0)
    return resample_to(native_raster, target, method="mean")


def split_trees(chan: Raster, tree: BinaryMask, cfg: ClassifyConfig) -> tuple[BinaryMask, BinaryMask]:
    """Partition tree pixels into evergreen (green share strictly above t) and deciduous.

    Tree pixels with no usable green share default to deciduous; that is the
    light-transmitting (riskier) direction, so a warning reports the count.
    """
    if chan.spec != tree.spec:
        raise ShapeError(f"channel/tree grid mismatch: {chan.spec} vs {tree.spec}")
    is_tree = tree.values == 1.0
    chan_ok = chan.valid_mask()
    ever = is_tree & chan_ok & (chan.values > cfg.evergreen_threshold)
    decid = is_tree & ~ever

    unknown = int(np.count_nonzero(is_tree & ~chan_ok))
    if unknown:
        warnings.warn(
            f"{unknown} tree pixels lack a green-share value; defaulting to deciduous",
            stacklevel=2,
        )

    tree_nodata = tree.values == tree.nodata
    ever_vals = np.where(tree_nodata, tree.nodata, ever.astype(np.float64))
    decid_vals = np.where(tree_nodata, tree.nodata, decid.astype(np.float64))
    return (
        BinaryMask(tree.spec, ever_vals, tree.nodata),
        BinaryMask(tree.spec, decid_vals, tree.nodata),
    )


def tree_type_dem(dem: Raster, dsm: Raster, mask: BinaryMask) -> Raster:
    """Terrain with one tree type's crown pixels raised to the surface height."""
    return substitute(dem, mask, dsm)
