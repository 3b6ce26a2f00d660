"""Command-line entry points.

One subcommand per pipeline stage plus ``pipeline`` for the one-shot run.
Stage subcommands read and write the interchange formats (ASCII grid,
GeoJSON, PPM/PNG, CSV) so any stage can be rerun independently.  ``pipeline``
takes a key=value config file; every config key is also a flag, and flags
override file values.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import canopy, composite, lidar, sun, vegetation, zonal
from .ascii_grid import read_grid, write_grid
from .config import RunConfig, build_config, read_config_file
from .errors import SolpotError
from .geometry import load_polygons
from .imagery import load_image
from .pipeline import PipelineError, run_pipeline, set_threads
from .raster import BinaryMask, GridSpec


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SolpotError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solpot",
        description="Seasonal clear-sky solar potential for parking lots and roads",
    )
    subs = parser.add_subparsers(dest="command")

    p = subs.add_parser("grid", help="grid LiDAR points into DSM and DEM rasters")
    p.add_argument("--points", required=True)
    p.add_argument("--points-format", default="auto", choices=("auto", "las", "xyz-text"))
    p.add_argument("--cell-size", type=float, default=0.5)
    p.add_argument("--x-origin", type=float)
    p.add_argument("--y-origin", type=float)
    p.add_argument("--ncols", type=int)
    p.add_argument("--nrows", type=int)
    p.add_argument("--dem-classes", default="2,11,17")
    p.add_argument("--noise-classes", default="7,18")
    p.add_argument("--z-min", type=float, default=-500.0)
    p.add_argument("--z-max", type=float, default=9000.0)
    p.add_argument("--fill-radius", type=int, default=10)
    p.add_argument("--out-dsm", required=True)
    p.add_argument("--out-dem", required=True)
    p.set_defaults(func=_cmd_grid)

    p = subs.add_parser("sun", help="daily clear-sky irradiation of a surface raster")
    p.add_argument("--surface", required=True, help="ASCII grid elevation raster")
    p.add_argument("--latitude", type=float, required=True)
    p.add_argument("--day", type=int, required=True, help="day of year, 1-365")
    p.add_argument("--linke-turbidity", type=float, default=3.0)
    p.add_argument("--albedo", type=float, default=0.2)
    p.add_argument("--time-step", type=float, default=0.25)
    p.add_argument("--shadow-max-distance", type=float, default=1000.0)
    p.add_argument("--terrain-mode", default="terrain-following", choices=sun.TERRAIN_MODES)
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sun)

    p = subs.add_parser("classify", help="building DEM, tree masks, and tree-type DEMs")
    p.add_argument("--dem", required=True)
    p.add_argument("--dsm", required=True)
    p.add_argument("--footprints", required=True, help="building footprints GeoJSON")
    p.add_argument("--imagery", required=True, help="winter RGB imagery with world file")
    p.add_argument("--tree-height-threshold", type=float, default=2.5)
    p.add_argument("--evergreen-threshold", type=float, default=0.375)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_classify)

    p = subs.add_parser("canopy", help="light penetration factor from canopy photos")
    p.add_argument("--photos", required=True, help="directory of .ppm/.png photos")
    p.add_argument("--roi-center-x", type=float, default=0.5)
    p.add_argument("--roi-center-y", type=float, default=0.5)
    p.add_argument("--roi-radius", type=float, default=0.45)
    p.add_argument("--fixed-threshold", type=float)
    p.add_argument("--out", help="write the estimate as JSON here")
    p.set_defaults(func=_cmd_canopy)

    p = subs.add_parser("compose", help="seasonal composites from the four solar runs")
    p.add_argument("--leaf-on-irr", required=True)
    p.add_argument("--building-run", required=True)
    p.add_argument("--evergreen-run", required=True)
    p.add_argument("--deciduous-run", required=True)
    p.add_argument("--tree-mask", required=True)
    p.add_argument("--evergreen-mask", required=True)
    p.add_argument("--deciduous-mask", required=True)
    p.add_argument("--building-mask", required=True)
    p.add_argument("--penetration", type=float, required=True)
    p.add_argument("--shade-value", type=float)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_compose)

    p = subs.add_parser("zonal", help="per-polygon means of the seasonal rasters")
    p.add_argument("--leaf-on", required=True)
    p.add_argument("--leaf-off", required=True)
    p.add_argument("--zones", required=True, help="zones GeoJSON with id/kind properties")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_zonal)

    p = subs.add_parser("pipeline", help="run every stage from a config file")
    p.add_argument("--config", help="key=value config file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        p.add_argument(flag, dest=f.name, default=None)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def _cmd_grid(args) -> None:
    ingest_cfg = lidar.IngestConfig(
        cell_size=args.cell_size,
        dem_classes=frozenset(int(t) for t in args.dem_classes.split(",")),
        noise_classes=frozenset(int(t) for t in args.noise_classes.split(",") if t.strip()),
        z_bounds=(args.z_min, args.z_max),
    )
    fmt = args.points_format
    if fmt == "auto":
        fmt = "las" if args.points.lower().endswith(".las") else "xyz-text"
    points = lidar.filter_noise(lidar.read_points(args.points, fmt), ingest_cfg)
    if args.ncols is not None:
        spec = GridSpec(args.ncols, args.nrows, args.x_origin, args.y_origin, args.cell_size)
        points = list(points)
    else:
        spec, points = lidar.spec_from_points(points, args.cell_size)
    dsm = lidar.fill_voids(lidar.grid_dsm(points, spec), args.fill_radius)
    dem = lidar.fill_voids(lidar.grid_dem(points, spec, ingest_cfg), args.fill_radius)
    write_grid(dsm, args.out_dsm)
    write_grid(dem, args.out_dem)
    print(f"wrote {args.out_dsm} and {args.out_dem} ({spec.ncols}x{spec.nrows})")


def _cmd_sun(args) -> None:
    set_threads(args.threads)
    cfg = sun.SolarConfig(
        latitude=args.latitude,
        day_of_year=args.day,
        linke_turbidity=args.linke_turbidity,
        albedo=args.albedo,
        time_step=args.time_step,
        shadow_max_distance=args.shadow_max_distance,
        terrain_mode=args.terrain_mode,
    )
    surface = read_grid(args.surface)
    result = sun.daily_irradiation(surface, cfg)
    write_grid(result, args.out)
    print(f"wrote {args.out}")


def _cmd_classify(args) -> None:
    dem = read_grid(args.dem)
    dsm = read_grid(args.dsm)
    cfg = vegetation.ClassifyConfig(args.tree_height_threshold, args.evergreen_threshold)
    bdem, bmask = vegetation.building_dem(dem, dsm, load_polygons(args.footprints))
    tmask = vegetation.tree_mask(dsm, bdem, cfg)
    imagery = load_image(args.imagery, georeferenced=True)
    chan = vegetation.channel_percent(imagery, dem.spec)
    emask, dmask = vegetation.split_trees(chan, tmask, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for raster, name in (
        (bdem, "building_dem"),
        (bmask, "building_mask"),
        (tmask, "tree_mask"),
        (chan, "channel_percent"),
        (emask, "evergreen_mask"),
        (dmask, "deciduous_mask"),
        (vegetation.tree_type_dem(dem, dsm, emask), "evergreen_dem"),
        (vegetation.tree_type_dem(dem, dsm, dmask), "deciduous_dem"),
    ):
        write_grid(raster, out / f"{name}.asc")
    print(f"wrote classification rasters to {out}")


def _cmd_canopy(args) -> None:
    roi = canopy.RoiCircle(args.roi_center_x, args.roi_center_y, args.roi_radius)
    photo_dir = Path(args.photos)
    paths = sorted(p for p in photo_dir.iterdir() if p.suffix.lower() in (".ppm", ".png"))
    if not paths:
        raise ValueError(f"no .ppm or .png canopy photos in {photo_dir}")
    photos = [canopy.CanopyPhoto(load_image(p), roi) for p in paths]
    estimate = canopy.penetration_factor(photos, fixed_threshold=args.fixed_threshold)
    payload = {
        "penetration_factor": estimate.factor,
        "per_photo_ratios": dict(zip((p.name for p in paths), estimate.per_photo_ratios)),
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _as_mask(path) -> BinaryMask:
    r = read_grid(path)
    return BinaryMask(r.spec, r.values, r.nodata)


def _cmd_compose(args) -> None:
    masks = vegetation.SceneMasks(
        building=_as_mask(args.building_mask),
        tree=_as_mask(args.tree_mask),
        evergreen=_as_mask(args.evergreen_mask),
        deciduous=_as_mask(args.deciduous_mask),
    )
    inputs = composite.SeasonInputs(
        leaf_on_irr=read_grid(args.leaf_on_irr),
        building_run=read_grid(args.building_run),
        evergreen_run=read_grid(args.evergreen_run),
        deciduous_run=read_grid(args.deciduous_run),
        masks=masks,
        penetration=args.penetration,
        shade_value=args.shade_value,
    )
    seasons = composite.compose_seasons(inputs)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_grid(seasons.leaf_on, out / "leaf_on.asc")
    write_grid(seasons.leaf_off, out / "leaf_off.asc")
    print(
        f"wrote {out / 'leaf_on.asc'} and {out / 'leaf_off.asc'} "
        f"(shade value {seasons.shade_value:.2f})"
    )


def _cmd_zonal(args) -> None:
    leaf_on = read_grid(args.leaf_on)
    leaf_off = read_grid(args.leaf_off)
    zones = zonal.load_zones(args.zones)
    labels = zonal.rasterize_zones(zones, leaf_on.spec)
    rows = zonal.zonal_means(leaf_on, leaf_off, labels, zones)
    zonal.write_zonal_csv(rows, args.out)
    print(f"wrote {args.out} ({len(rows)} zones)")


def _cmd_pipeline(args) -> None:
    file_values = read_config_file(args.config) if args.config else {}
    cli_values = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    cfg = build_config(file_values, cli_values)
    result = run_pipeline(cfg)
    for row in result.zonal_rows:
        on = f"{row.leaf_on_mean:.2f}" if row.leaf_on_mean is not None else "-"
        off = f"{row.leaf_off_mean:.2f}" if row.leaf_off_mean is not None else "-"
        print(f"{row.kind} {row.id}: leaf-on {on}, leaf-off {off} Wh/m2/day ({row.pixel_count} px)")
    print(f"outputs in {result.output_dir}")


if __name__ == "__main__":
    sys.exit(main())
