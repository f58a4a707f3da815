"""Raster primitives: RGB images, HSV color filtering, grayscale, thresholding.

Everything here is a pure function over small immutable wrapper types.
Pixel layout is row-major; masks index as [y, x] while geometric code
elsewhere works in (x, y) point order.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class RasterError(ValueError):
    """Raised for malformed image data or out-of-range parameters."""


@dataclass(frozen=True)
class RasterImage:
    """An RGB image, shape (height, width, 3), dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if not isinstance(p, np.ndarray) or p.ndim != 3 or p.shape[2] != 3:
            raise RasterError("expected an array of shape (h, w, 3)")
        if p.dtype != np.uint8:
            raise RasterError(f"expected uint8 pixels, got {p.dtype}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise RasterError("image must have at least one pixel")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class GrayImage:
    """Single-channel image; uint8 or float64 with values in [0, 255]."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if not isinstance(v, np.ndarray) or v.ndim != 2:
            raise RasterError("expected an array of shape (h, w)")
        if v.dtype not in (np.dtype(np.uint8), np.dtype(np.float64)):
            raise RasterError(f"expected uint8 or float64 values, got {v.dtype}")
        if v.dtype == np.float64 and (v.min() < 0.0 or v.max() > 255.0):
            raise RasterError("float gray values must stay within [0, 255]")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BinaryMask:
    """Boolean mask, shape (height, width)."""

    bits: np.ndarray

    def __post_init__(self):
        b = self.bits
        if not isinstance(b, np.ndarray) or b.ndim != 2 or b.dtype != np.bool_:
            raise RasterError("expected a bool array of shape (h, w)")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def popcount(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class ColorRange:
    """Inclusive HSV box: hue in degrees [0, 360), saturation/value in [0, 1].

    A hue interval with lo > hi wraps through 0 (e.g. (350, 10) covers reds).
    """

    name: str
    hue: tuple[float, float]
    saturation: tuple[float, float]
    value: tuple[float, float]

    def __post_init__(self):
        for lo, hi in (self.hue,):
            if not (0.0 <= lo < 360.0 and 0.0 <= hi < 360.0):
                raise RasterError(f"{self.name}: hue bounds must lie in [0, 360)")
        for label, (lo, hi) in (("saturation", self.saturation), ("value", self.value)):
            if not (0.0 <= lo <= hi <= 1.0):
                raise RasterError(f"{self.name}: {label} bounds must satisfy 0 <= lo <= hi <= 1")

    def contains(self, hue: np.ndarray, sat: np.ndarray, val: np.ndarray) -> np.ndarray:
        h_lo, h_hi = self.hue
        if h_lo <= h_hi:
            in_hue = (hue >= h_lo) & (hue <= h_hi)
        else:
            in_hue = (hue >= h_lo) | (hue <= h_hi)
        in_sat = (sat >= self.saturation[0]) & (sat <= self.saturation[1])
        in_val = (val >= self.value[0]) & (val <= self.value[1])
        return in_hue & in_sat & in_val


def load_image(path: str | Path) -> RasterImage:
    """Decode an image file to RGB. Raises RasterError on unreadable input."""
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            pixels = np.asarray(rgb, dtype=np.uint8)
    except FileNotFoundError:
        raise RasterError(f"image not found: {path}") from None
    except Exception as exc:
        raise RasterError(f"cannot decode image {path}: {exc}") from exc
    return RasterImage(pixels)


def save_image(image: RasterImage, path: str | Path) -> None:
    try:
        Image.fromarray(image.pixels, mode="RGB").save(path)
    except OSError as exc:
        raise RasterError(f"cannot write image {path}: {exc}") from exc


def rgb_to_hsv(image: RasterImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pixel HSV: hue in [0, 360), saturation and value in [0, 1].

    Grays (max == min) get hue 0 by convention; black gets saturation 0.
    """
    rgb = image.pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=2)
    mn = rgb.min(axis=2)
    delta = mx - mn

    hue = np.zeros_like(mx)
    nz = delta > 0
    # sector formulas applied only where the channel is the max
    r_max = nz & (mx == r)
    g_max = nz & (mx == g) & ~r_max
    b_max = nz & ~r_max & ~g_max
    hue[r_max] = np.mod((g[r_max] - b[r_max]) / delta[r_max], 6.0)
    hue[g_max] = (b[g_max] - r[g_max]) / delta[g_max] + 2.0
    hue[b_max] = (r[b_max] - g[b_max]) / delta[b_max] + 4.0
    hue *= 60.0
    hue = np.mod(hue, 360.0)

    sat = np.zeros_like(mx)
    pos = mx > 0
    sat[pos] = delta[pos] / mx[pos]
    return hue, sat, mx


def color_filter(image: RasterImage, color_range: ColorRange) -> BinaryMask:
    """Mask of pixels whose HSV falls inside the range (bounds inclusive)."""
    hue, sat, val = rgb_to_hsv(image)
    return BinaryMask(color_range.contains(hue, sat, val))


def to_grayscale(image: RasterImage) -> GrayImage:
    """Luma conversion 0.299 R + 0.587 G + 0.114 B, rounded to uint8."""
    rgb = image.pixels.astype(np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return GrayImage(np.rint(luma).astype(np.uint8))


def threshold(gray: GrayImage, a_th: float, a0: bool = False, a1: bool = True) -> BinaryMask:
    """Fixed binarization: value >= a_th maps to a1, below maps to a0."""
    if not 0 < a_th <= 255:
        raise RasterError(f"threshold must satisfy 0 < a_th <= 255, got {a_th}")
    above = gray.values >= a_th
    bits = np.where(above, a1, a0)
    return BinaryMask(bits.astype(np.bool_))


def mask_apply(gray: GrayImage, mask: BinaryMask, fill: float = 0) -> GrayImage:
    """Keep gray values where mask is set; elsewhere write `fill`."""
    if gray.values.shape != mask.bits.shape:
        raise RasterError("gray image and mask shapes differ")
    out = np.where(mask.bits, gray.values.astype(np.float64), float(fill))
    return GrayImage(out)
