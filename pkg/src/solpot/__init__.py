"""Seasonal clear-sky solar potential for parking lots and roads.

Builds DSM/DEM rasters from LiDAR, classifies buildings and evergreen versus
deciduous trees, runs an internal clear-sky irradiation engine with shadow
casting, applies the seasonal beneath-crown corrections, and reports
per-polygon mean potential for parking lots and roads.
"""

from .canopy import CanopyPhoto, PenetrationEstimate, RoiCircle, crown_transparency, penetration_factor
from .composite import (
    SeasonInputs,
    SeasonOutputs,
    apply_penetration,
    beneath_trees_leaf_off,
    compose_seasons,
    leaf_off_composite,
    leaf_on_composite,
)
from .config import RunConfig
from .lidar import IngestConfig, PointRecord, fill_voids, filter_noise, grid_dem, grid_dsm, read_points
from .pipeline import PipelineResult, RunReport, run_pipeline
from .raster import BinaryMask, GridSpec, Raster, min_max, min_merge, resample_to, substitute
from .sun import (
    IrradianceSample,
    SolarConfig,
    SunPosition,
    clearsky_components,
    daily_irradiation,
    is_shadowed,
    solar_position,
)
from .vegetation import ClassifyConfig, SceneMasks, building_dem, channel_percent, split_trees, tree_mask, tree_type_dem
from .zonal import ZonalRow, ZonePolygon, rasterize_zones, zonal_means

__version__ = "0.1.0"
