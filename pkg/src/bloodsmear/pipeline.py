"""Whole-image analysis: stain masks -> edges -> cells -> features -> label.

`analyze_image` is pure given (image bytes, config): no clocks, no random
state, no global mutation, so batch runs parallelize trivially and repeat
byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig, default_config
from .edges import canny
from .features import (
    FeatureError,
    calibrate,
    estimate_rbc_count,
    extract_features,
    pi_for_mode,
)
from .fuzzy import LABEL_UNIDENTIFIED, infer
from .raster import BinaryMask, GrayImage, RasterImage, color_filter, load_image, mask_apply, threshold, to_grayscale
from .shapes import CellDetection, count_cells

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StainMasks:
    wbc: BinaryMask
    nucleus: BinaryMask
    granule: BinaryMask
    rbc: BinaryMask | None


def segment_stains(image: RasterImage, config: PipelineConfig | None = None) -> StainMasks:
    """Color-range masks for the cell body, nucleus, granules, and red cells.

    The body mask is the broad stain filter composed with a fixed gray-level
    threshold: pixels outside the color range are forced to zero first, so
    they can never survive thresholding.
    """
    config = config if config is not None else default_config()
    ranges = config.color_ranges
    giemsa = color_filter(image, ranges["giemsa-purple"])
    gray = to_grayscale(image)
    body = threshold(mask_apply(gray, giemsa, fill=0.0), config.threshold)
    nucleus = color_filter(image, ranges["nucleus-blue"])
    granule = color_filter(image, ranges["granule-magenta"])
    rbc = color_filter(image, ranges["rbc-pink"]) if "rbc-pink" in ranges else None
    return StainMasks(wbc=body, nucleus=nucleus, granule=granule, rbc=rbc)


def detect_cells(
    image: RasterImage,
    config: PipelineConfig | None = None,
    diagnostics: list[str] | None = None,
) -> tuple[list[CellDetection], BinaryMask, StainMasks]:
    """Edge detection on the body mask followed by shape-based cell counting."""
    config = config if config is not None else default_config()
    masks = segment_stains(image, config)
    edge_input = GrayImage(np.where(masks.wbc.bits, 255.0, 0.0))
    edge_mask = canny(edge_input, config.canny)
    detections = count_cells(
        edge_mask,
        masks.wbc,
        masks.nucleus,
        masks.granule,
        merge_params=config.merge,
        circle_tolerance_pct=config.shapes.circle_tolerance_pct,
        corner_window=config.shapes.corner_window,
        corner_angle_deg=config.shapes.corner_angle_deg,
        min_segment_points=config.shapes.min_segment_points,
        fit_residual_max=config.shapes.fit_residual_max,
        diagnostics=diagnostics,
    )
    return detections, edge_mask, masks


def _detection_geometry(det: CellDetection) -> dict:
    geom: dict = {"kind": det.kind, "center": [det.center[0], det.center[1]]}
    if det.kind == "circle":
        geom["radius"] = det.radius
    else:
        e = det.ellipse
        geom["ellipse"] = {
            "cx": e.cx,
            "cy": e.cy,
            "a": e.a,
            "b": e.b,
            "rotation": e.rotation,
        }
    return geom


def analyze_image(
    source: str | Path | RasterImage,
    config: PipelineConfig | None = None,
) -> dict:
    """Analyze one smear image and return the report as a plain dict.

    The report carries every detected cell with its geometry, stain pixel
    counts, micron features, rule firings, score and label; the image-level
    label comes from the largest cell by area. Cells whose features cannot
    be extracted are skipped with a diagnostic note.
    """
    config = config if config is not None else default_config()
    if isinstance(source, RasterImage):
        image = source
        source_name = "<memory>"
    else:
        image = load_image(source)
        source_name = str(source)

    pi_value = pi_for_mode(config.mode)
    calibration = calibrate(
        config.calibration.rbc_pixel_count,
        config.calibration.rbc_diameter_um,
        pi_value,
    )
    diagnostics: list[str] = []
    detections, _edge_mask, masks = detect_cells(image, config, diagnostics)

    cells = []
    for det in detections:
        try:
            feats = extract_features(det, calibration, pi_value)
        except FeatureError as exc:
            diagnostics.append(f"skipped a {det.kind} detection: {exc}")
            continue
        diag = infer(feats, config.model, config.mode)
        cell = _detection_geometry(det)
        cell.update(
            {
                "wbc_pixels": det.wbc_pixels,
                "nucleus_pixels": det.nucleus_pixels,
                "granule_pixels": det.granule_pixels,
                "wbc_area_um2": feats.wbc_area_um2,
                "wbc_diameter_um": feats.wbc_diameter_um,
                "nucleus_ratio": feats.nucleus_ratio,
                "granule_ratio": feats.granule_ratio,
                "score": diag.score,
                "label": diag.label,
                "fired": [
                    {"rule": f.rule, "strength": f.strength, "z": f.z} for f in diag.fired
                ],
            }
        )
        cells.append(cell)

    if cells:
        subject_idx = max(range(len(cells)), key=lambda i: cells[i]["wbc_area_um2"])
        label = cells[subject_idx]["label"]
        score = cells[subject_idx]["score"]
    else:
        subject_idx = None
        label = LABEL_UNIDENTIFIED
        score = None
        diagnostics.append("no white cell found")

    rbc_count = (
        estimate_rbc_count(masks.rbc.popcount(), calibration) if masks.rbc is not None else None
    )

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "source": source_name,
        "mode": config.mode,
        "label": label,
        "score": score,
        "wbc_count": len(cells),
        "rbc_count": rbc_count,
        "subject": subject_idx,
        "calibration": {
            "rbc_diameter_um": calibration.rbc_diameter_um,
            "rbc_pixel_count": calibration.rbc_pixel_count,
            "rbc_area_um2": calibration.rbc_area_um2,
            "px_per_um2": calibration.px_per_um2,
        },
        "cells": cells,
        "diagnostics": diagnostics,
    }
