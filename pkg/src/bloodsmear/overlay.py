"""Render an annotated copy of an analyzed image.

The annotation canvas is the original image with cell outlines and a nucleus
tint, plus a text banner strip appended above it. The banner is extra canvas,
not paint over pixels, so an image with zero detections comes back with its
pixel region untouched.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .raster import BinaryMask, RasterError, RasterImage
from .shapes import EllipseParams, disk_region, ellipse_region

BANNER_HEIGHT = 22
BANNER_BG = (32, 32, 36)
BANNER_FG = (235, 235, 235)
OUTLINE_COLOR = (255, 200, 0)
SUBJECT_COLOR = (255, 64, 64)
NUCLEUS_TINT = (70, 90, 220)
TINT_ALPHA = 0.45


def _cell_region(cell: dict, shape: tuple[int, int]) -> np.ndarray:
    if cell["kind"] == "circle":
        return disk_region(tuple(cell["center"]), cell["radius"], shape)
    e = cell["ellipse"]
    params = EllipseParams(cx=e["cx"], cy=e["cy"], a=e["a"], b=e["b"], rotation=e["rotation"])
    return ellipse_region(params, shape)


def _ellipse_outline(draw: ImageDraw.ImageDraw, e: dict, offset_y: int, color) -> None:
    ts = np.linspace(0.0, 2.0 * math.pi, 180)
    cos_r, sin_r = math.cos(e["rotation"]), math.sin(e["rotation"])
    xs = e["cx"] + e["a"] * np.cos(ts) * cos_r - e["b"] * np.sin(ts) * sin_r
    ys = e["cy"] + e["a"] * np.cos(ts) * sin_r + e["b"] * np.sin(ts) * cos_r
    pts = [(float(x), float(y) + offset_y) for x, y in zip(xs, ys)]
    draw.line(pts + [pts[0]], fill=color, width=2)


def render_overlay(
    image: RasterImage,
    report: dict,
    out_path: str | Path | None = None,
    nucleus_mask: BinaryMask | None = None,
) -> RasterImage:
    """Compose the annotated image; optionally write it as PNG.

    `report` is an analyze_image result for this image. When a nucleus mask
    is given, nucleus pixels inside detected cells are tinted.
    """
    h, w = image.height, image.width
    pixels = image.pixels.copy()

    if nucleus_mask is not None and report["cells"]:
        if nucleus_mask.bits.shape != (h, w):
            raise RasterError("nucleus mask shape does not match the image")
        region = np.zeros((h, w), dtype=bool)
        for cell in report["cells"]:
            region |= _cell_region(cell, (h, w))
        tint = region & nucleus_mask.bits
        blended = (
            pixels[tint].astype(np.float64) * (1.0 - TINT_ALPHA)
            + np.array(NUCLEUS_TINT, dtype=np.float64) * TINT_ALPHA
        )
        pixels[tint] = np.clip(np.rint(blended), 0, 255).astype(np.uint8)

    canvas = Image.new("RGB", (w, h + BANNER_HEIGHT), BANNER_BG)
    canvas.paste(Image.fromarray(pixels, mode="RGB"), (0, BANNER_HEIGHT))
    draw = ImageDraw.Draw(canvas)

    subject = report.get("subject")
    for idx, cell in enumerate(report["cells"]):
        color = SUBJECT_COLOR if idx == subject else OUTLINE_COLOR
        if cell["kind"] == "circle":
            cx, cy = cell["center"]
            r = cell["radius"]
            box = (cx - r, cy - r + BANNER_HEIGHT, cx + r, cy + r + BANNER_HEIGHT)
            draw.ellipse(box, outline=color, width=2)
        else:
            _ellipse_outline(draw, cell["ellipse"], BANNER_HEIGHT, color)

    score = report["score"]
    score_text = f"{score:.3f}" if score is not None else "-"
    text = f"{report['label']}  score={score_text}  cells={report['wbc_count']}"
    if report.get("rbc_count") is not None:
        text += f"  rbc~{report['rbc_count']}"
    draw.text((6, 4), text, fill=BANNER_FG)

    out = RasterImage(np.asarray(canvas, dtype=np.uint8))
    if out_path is not None:
        try:
            canvas.save(out_path)
        except OSError as exc:
            raise RasterError(f"cannot write overlay {out_path}: {exc}") from exc
    return out
