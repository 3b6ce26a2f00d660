"""Crown transparency from upward canopy photographs.

Each photograph is reduced to the fraction of sky pixels inside a circular
region of interest: luminance, Otsu threshold, pixels at or above the
threshold count as sky.  The light penetration factor is the mean of those
fractions over a photo sample.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .imagery import RgbImage


@dataclass(frozen=True)
class RoiCircle:
    """Circle in image-fraction units: center (of width/height), radius of min(w, h)."""

    center_x: float = 0.5
    center_y: float = 0.5
    radius: float = 0.45

    def __post_init__(self):
        if not 0.0 < self.radius:
            raise ValueError(f"radius must be positive, got {self.radius}")
        for name, c in (("center_x", self.center_x), ("center_y", self.center_y)):
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {c}")


@dataclass
class CanopyPhoto:
    image: RgbImage
    roi: RoiCircle = field(default_factory=RoiCircle)

    def __post_init__(self):
        w, h = self.image.width, self.image.height
        cx, cy = self.roi.center_x * w, self.roi.center_y * h
        r = self.roi.radius * min(w, h)
        if cx - r < 0 or cx + r > w or cy - r < 0 or cy + r > h:
            raise ValueError("roi circle extends outside the image")


@dataclass
class PenetrationEstimate:
    per_photo_ratios: list[float]
    factor: float


def otsu_threshold(hist: np.ndarray) -> int | None:
    """Threshold maximizing between-class variance; None for a degenerate histogram.

    The returned level t splits at value >= t; ties pick the smallest t.
    """
    counts = hist.astype(np.float64)
    total = counts.sum()
    levels = np.arange(len(counts))
    w0 = np.cumsum(counts)
    sum0 = np.cumsum(counts * levels)
    grand = sum0[-1]

    best_t, best_var = None, -1.0
    for t in range(1, len(counts)):
        n0 = w0[t - 1]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = sum0[t - 1] / n0
        mu1 = (grand - sum0[t - 1]) / n1
        var = n0 * n1 * (mu0 - mu1) ** 2
        if var > best_var + 1e-12 * max(best_var, 1.0):
            best_var, best_t = var, t
    return best_t


def _roi_luminance(photo: CanopyPhoto) -> np.ndarray:
    img = photo.image
    ys, xs = np.mgrid[0 : img.height, 0 : img.width]
    cx = photo.roi.center_x * img.width
    cy = photo.roi.center_y * img.height
    r = photo.roi.radius * min(img.width, img.height)
    inside = (xs + 0.5 - cx) ** 2 + (ys + 0.5 - cy) ** 2 <= r * r
    rgb = img.pixels.astype(np.float64)
    lum = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return lum[inside]


def crown_transparency(photo: CanopyPhoto, *, fixed_threshold: float | None = None) -> float:
    """Sky fraction of the roi: luminance Otsu split, sky at or above threshold.

    ``fixed_threshold`` bypasses Otsu for reproducibility across photo sets.
    A degenerate roi (single luminance level) yields 0 with a warning.
    """
    lum = _roi_luminance(photo)
    if lum.size < 100:
        raise ValueError(f"roi contains {lum.size} pixels, need at least 100")

    if fixed_threshold is not None:
        return float(np.count_nonzero(lum >= fixed_threshold) / lum.size)

    quantized = np.clip(np.rint(lum), 0, 255).astype(np.int64)
    hist = np.bincount(quantized, minlength=256)
    t = otsu_threshold(hist)
    if t is None:
        warnings.warn("degenerate luminance histogram; treating roi as all canopy", stacklevel=2)
        return 0.0
    return float(np.count_nonzero(quantized >= t) / lum.size)


def penetration_factor(photos: list[CanopyPhoto], *, fixed_threshold: float | None = None) -> PenetrationEstimate:
    """Mean crown transparency over a photo sample.

    fsum keeps the mean exactly permutation-invariant.
    """
    if not photos:
        raise ValueError("need at least one canopy photo")
    ratios = [crown_transparency(p, fixed_threshold=fixed_threshold) for p in photos]
    return PenetrationEstimate(ratios, math.fsum(ratios) / len(ratios))
