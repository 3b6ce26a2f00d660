"""Seasonal composites: shade substitution beneath crowns and the winter merge.

Leaf-on: crown pixels take the all-day-shade value (the raster minimum, or a
manual override).  Leaf-off: the deciduous run is first lifted by the light
penetration factor, both crown sets are substituted (evergreen with its run's
minimum, deciduous with min + f·(max − min) from the unadjusted run), and the
building, evergreen, and deciduous rasters merge by per-pixel minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RangeError
from .raster import Raster, min_max, min_merge, substitute
from .vegetation import SceneMasks

PENETRATION_CUTOFF = 0.995  # fraction of the maximum treated as fully sunlit


@dataclass
class SeasonInputs:
    leaf_on_irr: Raster          # irradiation of the surface model, summer date
    building_run: Raster         # irradiation of building_DEM, winter date
    evergreen_run: Raster        # irradiation of evergreen_DEM, winter date
    deciduous_run: Raster        # irradiation of deciduous_DEM, winter date
    masks: SceneMasks
    penetration: float           # light penetration factor f in [0, 1]
    shade_value: float | None = None  # leaf-on all-day-shade override

    def __post_init__(self):
        if not 0.0 <= self.penetration <= 1.0:
            raise ValueError(f"penetration factor must be in [0, 1]: {self.penetration}")


@dataclass
class SeasonOutputs:
    leaf_on: Raster
    leaf_off: Raster
    shade_value: float           # v actually used
    deciduous_min: float         # min/max of the unadjusted deciduous run,
    deciduous_max: float         # the operands of both leaf-off formulas


def leaf_on_composite(leaf_on_irr: Raster, tree, v_override: float | None = None) -> tuple[Raster, float]:
    """Substitute crown pixels with the all-day-shade value; returns (raster, v).

    v defaults to the raster minimum, which equals the value of an all-day
    shaded pixel; an override outside [min, max] is rejected.
    """
    lo, hi = min_max(leaf_on_irr)
    if v_override is None:
        v = lo
    else:
        if not lo <= v_override <= hi:
            raise RangeError(
                f"shade value {v_override} outside raster range [{lo}, {hi}]"
            )
        v = float(v_override)
    return substitute(leaf_on_irr, tree, v), v


def apply_penetration(d: Raster, f: float) -> Raster:
    """Lift every pixel below the sunlit cutoff toward the raster maximum.

    new = current + f·(max − current) for pixels under 99.5% of the maximum;
    pixels at or above the cutoff and nodata pixels are untouched.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"penetration factor must be in [0, 1]: {f}")
    _, hi = min_max(d)
    valid = d.valid_mask()
    lift = valid & (d.values < PENETRATION_CUTOFF * hi)
    out = np.where(lift, d.values + f * (hi - d.values), d.values)
    return Raster(d.spec, out, d.nodata)


def beneath_trees_leaf_off(
    e: Raster,
    d_adj: Raster,
    masks: SceneMasks,
    f: float,
    d_min: float,
    d_max: float,
) -> tuple[Raster, Raster]:
    """Substitute the under-crown pixels of both winter tree runs.

    Evergreen crowns take the evergreen run's own minimum (full shade all
    winter); deciduous crowns take min + f·(max − min), with min/max taken
    from the deciduous run before the penetration adjustment.
    """
    e_min, _ = min_max(e)
    e_sub = substitute(e, masks.evergreen, e_min)
    d_value = d_min + f * (d_max - d_min)
    d_sub = substitute(d_adj, masks.deciduous, d_value)
    return e_sub, d_sub


def leaf_off_composite(b: Raster, e_sub: Raster, d_sub: Raster) -> Raster:
    """Per-pixel minimum of the three winter rasters."""
    return min_merge([b, e_sub, d_sub])


def compose_seasons(inputs: SeasonInputs) -> SeasonOutputs:
    """Run the full seasonal arithmetic in pipeline order.

    Penetration adjustment first, then the beneath-crown substitutions, then
    the minimum merge.
    """
    leaf_on, v = leaf_on_composite(inputs.leaf_on_irr, inputs.masks.tree, inputs.shade_value)

    d_min, d_max = min_max(inputs.deciduous_run)
    d_adj = apply_penetration(inputs.deciduous_run, inputs.penetration)
    e_sub, d_sub = beneath_trees_leaf_off(
        inputs.evergreen_run, d_adj, inputs.masks, inputs.penetration, d_min, d_max
    )
    leaf_off = leaf_off_composite(inputs.building_run, e_sub, d_sub)
    return SeasonOutputs(leaf_on, leaf_off, v, d_min, d_max)
