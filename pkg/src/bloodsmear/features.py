"""Pixel-to-micron calibration and per-cell morphology features.

Calibration rests on the assumption that a red blood cell is 8 um across.
Counting the pixels of one representative red cell then yields a pixels per
square micron density, which converts white cell pixel counts into areas and
equivalent circular diameters.

`pi` is configurable because the area arithmetic can run in a compatibility
mode that uses the rounded constant 3.14 throughout; the default mode keeps
that behavior so published worked figures reproduce exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .shapes import CellDetection

PI_COMPAT = 3.14


class FeatureError(ValueError):
    """Raised when calibration or feature extraction inputs are unusable."""


def pi_for_mode(mode: str) -> float:
    if mode == "paper-compat":
        return PI_COMPAT
    if mode == "standard":
        return math.pi
    raise FeatureError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class CalibrationProfile:
    """Pixel density derived from one red blood cell of known diameter."""

    rbc_diameter_um: float
    rbc_pixel_count: int
    rbc_area_um2: float
    px_per_um2: float

    def __post_init__(self):
        if self.rbc_diameter_um <= 0 or self.rbc_pixel_count <= 0:
            raise FeatureError("red cell diameter and pixel count must be positive")
        if self.rbc_area_um2 <= 0 or self.px_per_um2 <= 0:
            raise FeatureError("derived calibration values must be positive")


def calibrate(
    rbc_pixel_count: int,
    rbc_diameter_um: float = 8.0,
    pi_value: float = PI_COMPAT,
) -> CalibrationProfile:
    """Build a calibration profile from one red cell's pixel count.

    Area of the reference cell is (d/2)^2 * pi; density is pixels over that
    area.
    """
    if rbc_pixel_count <= 0:
        raise FeatureError(f"red cell pixel count must be positive, got {rbc_pixel_count}")
    if rbc_diameter_um <= 0:
        raise FeatureError(f"red cell diameter must be positive, got {rbc_diameter_um}")
    radius = rbc_diameter_um / 2.0
    area = radius * radius * pi_value
    return CalibrationProfile(
        rbc_diameter_um=rbc_diameter_um,
        rbc_pixel_count=int(rbc_pixel_count),
        rbc_area_um2=area,
        px_per_um2=rbc_pixel_count / area,
    )


def wbc_area_um2(wbc_pixel_count: int, calibration: CalibrationProfile) -> float:
    """White cell area in square microns from its pixel count."""
    if wbc_pixel_count < 0:
        raise FeatureError(f"pixel count cannot be negative, got {wbc_pixel_count}")
    return wbc_pixel_count / calibration.px_per_um2

def wbc_diameter_um(area_um2: float, pi_value: float = PI_COMPAT) -> float:
    """Equivalent circular diameter 2 * sqrt(area / pi)."""
    if area_um2 < 0:
        raise FeatureError(f"area cannot be negative, got {area_um2}")
    return 2.0 * math.sqrt(area_um2 / pi_value)


@dataclass(frozen=True)
class CellFeatures:
    """The three classifier inputs for one cell, plus the area behind them."""

    wbc_area_um2: float
    wbc_diameter_um: float
    nucleus_ratio: float
    granule_ratio: float

    def __post_init__(self):
        if self.wbc_area_um2 < 0 or self.wbc_diameter_um < 0:
            raise FeatureError("area and diameter cannot be negative")
        for name, value in (("nucleus", self.nucleus_ratio), ("granule", self.granule_ratio)):
            if not 0.0 <= value <= 1.0:
                raise FeatureError(f"{name} ratio must lie in [0, 1], got {value}")


def extract_features(
    detection: CellDetection,
    calibration: CalibrationProfile,
    pi_value: float = PI_COMPAT,
) -> CellFeatures:
    """Morphology features for one detection.

    Nucleus and granule ratios are pixel-count fractions of the cell body;
    a detection with no cell body pixels cannot be measured.
    """
    if detection.wbc_pixels <= 0:
        raise FeatureError("detection has no cell body pixels to measure")
    area = wbc_area_um2(detection.wbc_pixels, calibration)
    return CellFeatures(
        wbc_area_um2=area,
        wbc_diameter_um=wbc_diameter_um(area, pi_value),
        nucleus_ratio=detection.nucleus_pixels / detection.wbc_pixels,
        granule_ratio=detection.granule_pixels / detection.wbc_pixels,
    )


def estimate_rbc_count(rbc_mask_pixels: int, calibration: CalibrationProfile) -> int:
    """Rough red cell count: stained red pixels over one cell's pixel count."""
    if rbc_mask_pixels < 0:
        raise FeatureError(f"pixel count cannot be negative, got {rbc_mask_pixels}")
    return int(round(rbc_mask_pixels / calibration.rbc_pixel_count))
