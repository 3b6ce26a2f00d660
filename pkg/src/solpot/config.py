"""Run configuration: flat key=value files, defaults, and validation.

Every key in the config file exists as a CLI flag (dashes for underscores);
flags override file values.  Unknown keys are rejected so typos surface at
validation time instead of silently falling back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ParseError

_PATH_KEYS = ("points", "footprints", "zones", "imagery", "photos")


@dataclass
class RunConfig:
    # input/output paths
    points: str = ""
    points_format: str = "auto"          # las | xyz-text | auto (by suffix)
    footprints: str = ""
    zones: str = ""
    imagery: str = ""
    photos: str = ""                     # directory of canopy photos
    output_dir: str = "solpot_out"

    # analysis grid; all four of x_origin/y_origin/ncols/nrows or none
    cell_size: float = 0.5
    x_origin: float | None = None
    y_origin: float | None = None
    ncols: int | None = None
    nrows: int | None = None

    # solar runs
    latitude: float | None = None
    leaf_on_day: int = 172               # June 21, summer solstice
    leaf_off_day: int = 1                # January 1, mid-winter
    linke_turbidity: float = 3.0
    albedo: float = 0.2
    time_step: float = 0.25
    shadow_max_distance: float = 1000.0
    terrain_mode: str = "terrain-following"

    # ingest
    dem_classes: str = "2,11,17"
    noise_classes: str = "7,18"
    z_min: float = -500.0
    z_max: float = 9000.0
    fill_radius: int = 10

    # classification
    tree_height_threshold: float = 2.5
    evergreen_threshold: float = 0.375

    # canopy roi
    roi_center_x: float = 0.5
    roi_center_y: float = 0.5
    roi_radius: float = 0.45
    canopy_fixed_threshold: float | None = None

    # overrides
    shade_value: float | None = None         # leaf-on all-day-shade value v
    penetration_override: float | None = None  # skip photos, use this f

    threads: int = 0                     # 0 = numba default

    def validate(self) -> None:
        missing = [k for k in ("points", "footprints", "zones", "imagery") if not getattr(self, k)]
        if self.penetration_override is None and not self.photos:
            missing.append("photos (or penetration_override)")
        if self.latitude is None:
            missing.append("latitude")
        if missing:
            raise ValueError(f"missing required configuration: {', '.join(missing)}")
        for key in _PATH_KEYS:
            value = getattr(self, key)
            if value and not Path(value).exists():
                raise ValueError(f"{key} path does not exist: {value}")
        if self.leaf_on_day == self.leaf_off_day:
            raise ValueError("leaf_on_day and leaf_off_day must differ")
        grid_keys = (self.x_origin, self.y_origin, self.ncols, self.nrows)
        given = sum(v is not None for v in grid_keys)
        if given not in (0, 4):
            raise ValueError("give all of x_origin/y_origin/ncols/nrows or none")

    def class_set(self, key: str) -> frozenset[int]:
        raw = getattr(self, key)
        try:
            return frozenset(int(tok) for tok in str(raw).split(",") if tok.strip())
        except ValueError:
            raise ValueError(f"{key} must be a comma-separated list of integers, got {raw!r}")

    def resolve_points_format(self) -> str:
        if self.points_format != "auto":
            return self.points_format
        return "las" if self.points.lower().endswith(".las") else "xyz-text"


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}

_INT_KEYS = {"ncols", "nrows", "leaf_on_day", "leaf_off_day", "fill_radius", "threads"}
_FLOAT_KEYS = {
    "cell_size", "x_origin", "y_origin", "latitude", "linke_turbidity", "albedo",
    "time_step", "shadow_max_distance", "z_min", "z_max", "tree_height_threshold",
    "evergreen_threshold", "roi_center_x", "roi_center_y", "roi_radius",
    "canopy_fixed_threshold", "shade_value", "penetration_override",
}


def coerce(key: str, value):
    if key not in _FIELD_TYPES:
        raise ValueError(f"unknown configuration key {key!r}")
    if value is None:
        return None
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    return str(value)


def read_config_file(path) -> dict:
    """Parse a flat key=value file with '#' comments into a coerced dict."""
    values = {}
    with open(Path(path), "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"expected key=value, got {line!r}", line=lineno)
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            try:
                values[key] = coerce(key, value)
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno)
    return values


def build_config(file_values: dict | None = None, cli_values: dict | None = None) -> RunConfig:
    """Layer defaults, then config-file values, then CLI flag values."""
    merged = {}
    for source in (file_values or {}), (cli_values or {}):
        for key, value in source.items():
            if value is not None:
                merged[key] = coerce(key, value)
    return RunConfig(**merged)
