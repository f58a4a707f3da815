"""Deterministic synthetic smear images and edge fixtures for tests and demos.

Colors are chosen so each drawn structure lands inside exactly the intended
default color ranges after uint8 quantization: the cell body reads as the
broad stain only, the nucleus as stain + nucleus range, granules as stain +
granule range, and red cells as the red range only. Everything is seeded or
closed-form; regenerating a fixture yields identical pixels.
"""

from __future__ import annotations

import colorsys
import math

import numpy as np

from .raster import BinaryMask, RasterImage
from .shapes import EllipseParams

# (hue degrees, saturation, value) per structure; see module docstring
BODY_HSV = (290.0, 0.50, 0.70)
NUCLEUS_HSV = (267.0, 0.55, 0.45)
GRANULE_HSV = (312.0, 0.50, 0.55)
RBC_HSV = (355.0, 0.30, 0.85)
BACKGROUND_RGB = (242, 242, 240)


def hsv_to_rgb8(hue: float, sat: float, val: float) -> tuple[int, int, int]:
    r, g, b = colorsys.hsv_to_rgb(hue / 360.0, sat, val)
    return int(round(r * 255)), int(round(g * 255)), int(round(b * 255))


def blank_image(width: int, height: int, rgb: tuple[int, int, int] = BACKGROUND_RGB) -> np.ndarray:
    arr = np.empty((height, width, 3), dtype=np.uint8)
    arr[:, :] = rgb
    return arr


def draw_disk(arr: np.ndarray, cx: float, cy: float, r: float, rgb: tuple[int, int, int]) -> int:
    """Fill pixels within distance r of (cx, cy); returns pixels written."""
    h, w = arr.shape[:2]
    ys, xs = np.ogrid[:h, :w]
    mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    arr[mask] = rgb
    return int(mask.sum())


def draw_filled_ellipse(
    arr: np.ndarray,
    cx: float,
    cy: float,
    a: float,
    b: float,
    rotation: float,
    rgb: tuple[int, int, int],
) -> int:
    h, w = arr.shape[:2]
    ys, xs = np.ogrid[:h, :w]
    dx = xs - cx
    dy = ys - cy
    cos_r, sin_r = math.cos(rotation), math.sin(rotation)
    xr = dx * cos_r + dy * sin_r
    yr = -dx * sin_r + dy * cos_r
    mask = (xr / a) ** 2 + (yr / b) ** 2 <= 1.0
    arr[mask] = rgb
    return int(mask.sum())


def speckle_annulus(
    arr: np.ndarray,
    cx: float,
    cy: float,
    r_inner: float,
    r_outer: float,
    budget_px: int,
    rgb: tuple[int, int, int],
    pitch: int = 3,
    dot: int = 2,
) -> int:
    """Scatter dot x dot squares on a grid inside an annulus, up to budget_px.

    Placement is a plain row-major grid walk, so the pattern is reproducible
    without any random state. Returns the number of pixels written.
    """
    h, w = arr.shape[:2]
    written = 0
    y = int(cy - r_outer)
    while y <= int(cy + r_outer) and written < budget_px:
        x = int(cx - r_outer)
        while x <= int(cx + r_outer) and written < budget_px:
            d = math.hypot(x - cx, y - cy)
            if r_inner <= d <= r_outer:
                y1 = min(y + dot, h)
                x1 = min(x + dot, w)
                block = arr[y:y1, x:x1]
                count = block.shape[0] * block.shape[1]
                if count and written + count <= budget_px + dot * dot:
                    block[:, :] = rgb
                    written += count
            x += pitch
        y += pitch
    return written


def cell_image(
    width: int,
    height: int,
    center: tuple[float, float],
    radius: float,
    nucleus_frac: float,
    granule_frac: float,
    granules_in_nucleus: bool = True,
    rbcs: tuple[tuple[float, float, float], ...] = (),
) -> RasterImage:
    """One white cell plus optional red cells on a pale background.

    nucleus_frac and granule_frac are target area fractions of the cell body.
    With granules_in_nucleus the granules form a solid core inside the
    nucleus (the nucleus keeps its designed pixel share because granule
    pixels count toward it); otherwise granules scatter as speckles in the
    cytoplasm outside the nucleus, which adds their share on top of the
    nucleus fraction.
    """
    if not 0 <= granule_frac <= 1 or not 0 <= nucleus_frac <= 1:
        raise ValueError("area fractions must lie in [0, 1]")
    arr = blank_image(width, height)
    for rx, ry, rr in rbcs:
        draw_disk(arr, rx, ry, rr, hsv_to_rgb8(*RBC_HSV))
    cx, cy = center
    body_px = draw_disk(arr, cx, cy, radius, hsv_to_rgb8(*BODY_HSV))
    nucleus_r = radius * math.sqrt(nucleus_frac) if nucleus_frac > 0 else 0.0
    if nucleus_r > 0:
        draw_disk(arr, cx, cy, nucleus_r, hsv_to_rgb8(*NUCLEUS_HSV))
    if granule_frac > 0:
        if granules_in_nucleus:
            core_r = radius * math.sqrt(granule_frac)
            if core_r > nucleus_r:
                raise ValueError("granule core cannot exceed the nucleus")
            draw_disk(arr, cx, cy, core_r, hsv_to_rgb8(*GRANULE_HSV))
        else:
            budget = int(round(granule_frac * body_px))
            speckle_annulus(
                arr, cx, cy, nucleus_r + 3.0, radius * 0.92, budget, hsv_to_rgb8(*GRANULE_HSV)
            )
    return RasterImage(arr)


def overlapping_cells_image(
    width: int = 160,
    height: int = 104,
    a: float = 40.0,
    b: float = 22.0,
    separation: float = 36.0,
    nucleus_frac: float = 0.4,
) -> tuple[RasterImage, tuple[float, float], tuple[float, float]]:
    """Two equal upright elongated cells overlapping into one silhouette.

    Vertical elongation keeps the boundary-crossing tangents steep (the gap
    is near 140 degrees), so the two boundary arcs stay separate groups even
    after edge smoothing rounds the notches a little. Returns the image and
    both cell centers.
    """
    arr = blank_image(width, height)
    c1 = (width / 2.0 - separation / 2.0, height / 2.0)
    c2 = (width / 2.0 + separation / 2.0, height / 2.0)
    body = hsv_to_rgb8(*BODY_HSV)
    nucleus = hsv_to_rgb8(*NUCLEUS_HSV)
    rot = math.pi / 2  # major axis vertical
    scale = math.sqrt(nucleus_frac)
    for cx, cy in (c1, c2):
        draw_filled_ellipse(arr, cx, cy, a, b, rot, body)
    for cx, cy in (c1, c2):
        draw_filled_ellipse(arr, cx, cy, a * scale, b * scale, rot, nucleus)
    return RasterImage(arr), c1, c2


def ellipse_ring_pixels(params: EllipseParams, cx_cy: tuple[float, float] | None = None) -> list[tuple[int, int]]:
    """Rasterize an ellipse outline as a thin ordered 8-connected ring.

    Dense parametric sampling is deduplicated and then elbow-thinned: any
    pixel whose cyclic neighbors are already 8-adjacent to each other is
    dropped, until the ring is single-pixel wide everywhere.
    """
    cx, cy = cx_cy if cx_cy is not None else (params.cx, params.cy)
    n = max(720, int(2.0 * math.pi * max(params.a, params.b) / 0.05))
    ts = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    cos_r, sin_r = math.cos(params.rotation), math.sin(params.rotation)
    ex = params.a * np.cos(ts)
    ey = params.b * np.sin(ts)
    xs = np.rint(cx + ex * cos_r - ey * sin_r).astype(int)
    ys = np.rint(cy + ex * sin_r + ey * cos_r).astype(int)

    ring: list[tuple[int, int]] = []
    seen = set()
    for p in zip(xs.tolist(), ys.tolist()):
        if p in seen:
            continue
        seen.add(p)
        ring.append(p)

    def adjacent(u, v):
        return max(abs(u[0] - v[0]), abs(u[1] - v[1])) <= 1

    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(ring) and len(ring) > 4:
            prev_p = ring[i - 1]
            next_p = ring[(i + 1) % len(ring)]
            if adjacent(prev_p, next_p):
                ring.pop(i)
                changed = True
            else:
                i += 1
    return ring


def circle_ring_pixels(cx: float, cy: float, r: float) -> list[tuple[int, int]]:
    return ellipse_ring_pixels(EllipseParams(cx=cx, cy=cy, a=r, b=r, rotation=0.0))


def ring_mask(shape: tuple[int, int], pixels: list[tuple[int, int]]) -> BinaryMask:
    bits = np.zeros(shape, dtype=bool)
    for x, y in pixels:
        if 0 <= y < shape[0] and 0 <= x < shape[1]:
            bits[y, x] = True
    return BinaryMask(bits)


def occluded_pair_edges(
    shape: tuple[int, int] = (100, 160),
    r: float = 30.0,
    separation: float = 52.0,
    stub_len: float = 8.0,
) -> tuple[BinaryMask, tuple[float, float], tuple[float, float]]:
    """Edge-level occlusion fixture: one full ring plus a crossing partial ring.

    The second ring keeps its arc outside the first circle plus short stubs
    overshooting inside past each crossing point, the way an occlusion
    boundary bleeds a little past the true silhouette. Returns the mask and
    both circle centers.
    """
    h, w = shape
    c1 = (w / 2.0 - separation / 2.0, h / 2.0)
    c2 = (w / 2.0 + separation / 2.0, h / 2.0)
    ring1 = circle_ring_pixels(c1[0], c1[1], r)
    ring2 = circle_ring_pixels(c2[0], c2[1], r)

    # crossing points of the two circles, for stub placement
    half = separation / 2.0
    yoff = math.sqrt(r * r - half * half)
    cross = (
        (c1[0] + half, c1[1] + yoff),
        (c1[0] + half, c1[1] - yoff),
    )

    kept = list(ring1)
    for px in ring2:
        d1 = math.hypot(px[0] - c1[0], px[1] - c1[1])
        near_cross = min(math.hypot(px[0] - p[0], px[1] - p[1]) for p in cross)
        if d1 >= r - 0.5 or near_cross <= stub_len:
            kept.append(px)
    return ring_mask(shape, kept), c1, c2


CLASS_ALL = "ALL"
CLASS_AML = "AML-M3"
CLASS_HEALTHY = "Healthy"

# per-variant drawing recipes; ratios sit well inside the term windows that
# make exactly the intended rules fire, with margin for rasterization
_SUITE_RECIPES = (
    # (name, true label, expected prediction, radius, nucleus_frac, granule_frac, in_nucleus)
    ("all_01", CLASS_ALL, CLASS_ALL, 28.0, 0.80, 0.0, True),
    ("all_02", CLASS_ALL, CLASS_ALL, 27.0, 0.78, 0.0, True),
    ("all_03", CLASS_ALL, CLASS_ALL, 29.0, 0.82, 0.0, True),
    ("all_04", CLASS_ALL, CLASS_ALL, 30.0, 0.79, 0.0, True),
    ("aml_01", CLASS_AML, CLASS_AML, 28.0, 0.50, 0.36, True),
    ("aml_02", CLASS_AML, CLASS_AML, 29.0, 0.52, 0.40, True),
    ("aml_03", CLASS_AML, CLASS_AML, 28.0, 0.05, 0.20, False),
    ("aml_04", CLASS_AML, CLASS_AML, 30.0, 0.06, 0.22, False),
    ("healthy_01", CLASS_HEALTHY, CLASS_HEALTHY, 28.0, 0.15, 0.0, True),
    ("healthy_02", CLASS_HEALTHY, CLASS_HEALTHY, 27.0, 0.12, 0.0, True),
    ("healthy_03", CLASS_HEALTHY, CLASS_HEALTHY, 29.0, 0.16, 0.0, True),
    # rule-coverage gap: big nucleus AND heavy granules matches no rule
    ("gap_01", CLASS_HEALTHY, "Unidentified", 28.0, 0.85, 0.40, True),
)

_RBC_SPOTS = (
    (22.0, 22.0, 14.0),
    (106.0, 20.0, 15.0),
    (24.0, 106.0, 15.0),
    (108.0, 108.0, 14.0),
)


def suite_recipes() -> tuple[tuple[str, str, str, float, float, float, bool], ...]:
    """(name, true label, expected prediction, radius, nucleus, granule, core)."""
    return _SUITE_RECIPES


def suite_image(recipe: tuple) -> RasterImage:
    _name, _true, _expected, radius, nucleus_frac, granule_frac, in_nucleus = recipe
    return cell_image(
        128,
        128,
        center=(64.0, 64.0),
        radius=radius,
        nucleus_frac=nucleus_frac,
        granule_frac=granule_frac,
        granules_in_nucleus=in_nucleus,
        rbcs=_RBC_SPOTS,
    )


def write_suite(directory) -> list[tuple[str, str, str]]:
    """Write the twelve-image suite as PNGs; returns (filename, true, expected)."""
    from pathlib import Path

    from .raster import save_image

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for recipe in _SUITE_RECIPES:
        name = recipe[0] + ".png"
        save_image(suite_image(recipe), directory / name)
        rows.append((name, recipe[1], recipe[2]))
    return rows


def write_manifest(directory, rows: list[tuple[str, str, str]], filename: str = "manifest.csv") -> str:
    from pathlib import Path

    directory = Path(directory)
    path = directory / filename
    lines = [f"{name},{true}" for name, true, _expected in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)
