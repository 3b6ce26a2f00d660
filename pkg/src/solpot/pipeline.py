"""End-to-end orchestration: ingest, classify, four solar runs, composites, zonal CSV.

Every intermediate raster is persisted; the run report records the derived
constants (shade value, penetration factor, per-raster extrema) so reported
numbers can be recomputed from the emitted files.  A failed stage removes the
files written during this run and aborts with the stage name.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import canopy, composite, lidar, sun, vegetation, zonal
from .ascii_grid import write_grid
from .config import RunConfig
from .errors import SolpotError
from .geometry import load_polygons, polygon_mask
from .imagery import load_image
from .raster import GridSpec, Raster, min_max

logger = logging.getLogger(__name__)


class PipelineError(SolpotError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


@dataclass
class RunReport:
    constants: dict = field(default_factory=dict)
    raster_stats: dict = field(default_factory=dict)
    warnings: dict = field(default_factory=dict)
    timings_s: dict = field(default_factory=dict)
    per_photo_ratios: list = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "constants": self.constants,
            "raster_stats": self.raster_stats,
            "warnings": self.warnings,
            "timings_s": self.timings_s,
            "per_photo_ratios": self.per_photo_ratios,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


@dataclass
class PipelineResult:
    seasons: composite.SeasonOutputs
    zonal_rows: list[zonal.ZonalRow]
    report: RunReport
    output_dir: Path


def set_threads(threads: int) -> None:
    """Pin the numba thread count; 0 leaves the runtime default."""
    if threads > 0:
        import numba

        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    cfg.validate()
    set_threads(cfg.threads)

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    report = RunReport()

    def save(raster: Raster, name: str) -> None:
        path = out_dir / f"{name}.asc"
        write_grid(raster, path)
        written.append(path)
        report.raster_stats[name] = dict(zip(("min", "max"), min_max(raster)))

    def stage(name: str):
        logger.info("stage %s", name)
        return _StageTimer(name, report)

    try:
        with stage("ingest"):
            ingest_cfg = lidar.IngestConfig(
                cell_size=cfg.cell_size,
                dem_classes=cfg.class_set("dem_classes"),
                noise_classes=cfg.class_set("noise_classes"),
                z_bounds=(cfg.z_min, cfg.z_max),
            )
            points = lidar.filter_noise(
                lidar.read_points(cfg.points, cfg.resolve_points_format()), ingest_cfg
            )
            if cfg.ncols is not None:
                spec = GridSpec(cfg.ncols, cfg.nrows, cfg.x_origin, cfg.y_origin, cfg.cell_size)
                points = list(points)
            else:
                spec, points = lidar.spec_from_points(points, cfg.cell_size)
            dsm = lidar.fill_voids(lidar.grid_dsm(points, spec), cfg.fill_radius)
            dem = lidar.fill_voids(lidar.grid_dem(points, spec, ingest_cfg), cfg.fill_radius)
            save(dsm, "dsm")
            save(dem, "dem")

        with stage("classify"):
            classify_cfg = vegetation.ClassifyConfig(
                tree_height_threshold=cfg.tree_height_threshold,
                evergreen_threshold=cfg.evergreen_threshold,
            )
            footprints = load_polygons(cfg.footprints)
            bdem, bmask = vegetation.building_dem(dem, dsm, footprints)
            tmask = vegetation.tree_mask(dsm, bdem, classify_cfg)
            imagery = load_image(cfg.imagery, georeferenced=True)
            chan = vegetation.channel_percent(imagery, spec)
            no_share = int(np.count_nonzero((tmask.values == 1.0) & ~chan.valid_mask()))
            report.warnings["trees_without_green_share"] = no_share
            emask, dmask = vegetation.split_trees(chan, tmask, classify_cfg)
            masks = vegetation.SceneMasks(bmask, tmask, emask, dmask)
            edem = vegetation.tree_type_dem(dem, dsm, emask)
            ddem = vegetation.tree_type_dem(dem, dsm, dmask)
            save(bdem, "building_dem")
            save(bmask, "building_mask")
            save(tmask, "tree_mask")
            save(chan, "channel_percent")
            save(emask, "evergreen_mask")
            save(dmask, "deciduous_mask")
            save(edem, "evergreen_dem")
            save(ddem, "deciduous_dem")

        with stage("solar"):
            summer = _solar_config(cfg, cfg.leaf_on_day)
            winter = _solar_config(cfg, cfg.leaf_off_day)
            leaf_on_irr = sun.daily_irradiation(dsm, summer)
            building_run = sun.daily_irradiation(bdem, winter)
            evergreen_run = sun.daily_irradiation(edem, winter)
            deciduous_run = sun.daily_irradiation(ddem, winter)
            save(leaf_on_irr, "irradiation_leaf_on")
            save(building_run, "irradiation_building")
            save(evergreen_run, "irradiation_evergreen")
            save(deciduous_run, "irradiation_deciduous")

        with stage("canopy"):
            if cfg.penetration_override is not None:
                f = float(cfg.penetration_override)
                report.constants["penetration_source"] = "override"
            else:
                photos = _load_photos(cfg)
                estimate = canopy.penetration_factor(
                    photos, fixed_threshold=cfg.canopy_fixed_threshold
                )
                f = estimate.factor
                report.per_photo_ratios = estimate.per_photo_ratios
                report.constants["penetration_source"] = f"{len(photos)} photos"

        with stage("compose"):
            seasons = composite.compose_seasons(
                composite.SeasonInputs(
                    leaf_on_irr=leaf_on_irr,
                    building_run=building_run,
                    evergreen_run=evergreen_run,
                    deciduous_run=deciduous_run,
                    masks=masks,
                    penetration=f,
                    shade_value=cfg.shade_value,
                )
            )
            save(seasons.leaf_on, "leaf_on")
            save(seasons.leaf_off, "leaf_off")
            report.constants.update(
                {
                    "shade_value": seasons.shade_value,
                    "penetration_factor": f,
                    "evergreen_threshold": cfg.evergreen_threshold,
                    "deciduous_min": seasons.deciduous_min,
                    "deciduous_max": seasons.deciduous_max,
                }
            )

        with stage("zonal"):
            zones = zonal.load_zones(cfg.zones)
            labels = zonal.rasterize_zones(zones, spec)
            covered = sum(
                int(np.count_nonzero(polygon_mask(z.rings, spec))) for z in zones
            )
            labeled = int(np.count_nonzero(labels.valid_mask()))
            report.warnings["zone_overlap_pixels"] = covered - labeled
            rows = zonal.zonal_means(seasons.leaf_on, seasons.leaf_off, labels, zones)
            csv_path = out_dir / "zonal.csv"
            zonal.write_zonal_csv(rows, csv_path)
            written.append(csv_path)
            save(labels, "zone_labels")

        report_path = out_dir / "report.json"
        report_path.write_text(report.to_json() + "\n", encoding="utf-8")
        return PipelineResult(seasons, rows, report, out_dir)

    except PipelineError:
        for path in written:
            path.unlink(missing_ok=True)
        raise


class _StageTimer:
    def __init__(self, name: str, report: RunReport):
        self.name = name
        self.report = report

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.report.timings_s[self.name] = round(time.perf_counter() - self.start, 3)
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def _solar_config(cfg: RunConfig, day: int) -> sun.SolarConfig:
    return sun.SolarConfig(
        latitude=cfg.latitude,
        day_of_year=day,
        linke_turbidity=cfg.linke_turbidity,
        albedo=cfg.albedo,
        time_step=cfg.time_step,
        shadow_max_distance=cfg.shadow_max_distance,
        terrain_mode=cfg.terrain_mode,
    )


def _load_photos(cfg: RunConfig) -> list[canopy.CanopyPhoto]:
    roi = canopy.RoiCircle(cfg.roi_center_x, cfg.roi_center_y, cfg.roi_radius)
    photo_dir = Path(cfg.photos)
    paths = sorted(
        p for p in photo_dir.iterdir() if p.suffix.lower() in (".ppm", ".png")
    )
    if not paths:
        raise ValueError(f"no .ppm or .png canopy photos in {photo_dir}")
    return [canopy.CanopyPhoto(load_image(p), roi) for p in paths]
