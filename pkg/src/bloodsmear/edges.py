"""Canny edge detection built from first principles.

Stages: Gaussian smoothing -> Sobel gradients -> direction-quantized
non-maximum suppression -> double threshold -> hysteresis. All stages are
deterministic; no randomness, no iteration-order dependence in the result.
"""

from __future__ import annotations

import collections
import math
from dataclasses import dataclass

import numpy as np

from .raster import BinaryMask, GrayImage, RasterError

EDGE_NONE = 0
EDGE_WEAK = 1
EDGE_STRONG = 2


@dataclass(frozen=True)
class CannyParams:
    sigma: float = 1.4
    low: float = 20.0
    high: float = 60.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise RasterError(f"sigma must be positive, got {self.sigma}")
        if not (0 <= self.low < self.high):
            raise RasterError(f"thresholds must satisfy 0 <= low < high, got {self.low}, {self.high}")


@dataclass(frozen=True)
class GradientField:
    """Per-pixel gradient magnitude plus direction quantized to 4 bins.

    Bin meaning (gradient direction, modulo 180 degrees):
      0 -> [0, 22.5) or [157.5, 180)   suppression neighbors east/west
      1 -> [22.5, 67.5)                suppression neighbors on the "/" diagonal pair (down-right, up-left)
      2 -> [67.5, 112.5)               suppression neighbors north/south
      3 -> [112.5, 157.5)              suppression neighbors on the "\\" diagonal pair (up-right, down-left)
    """

    magnitude: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        if self.magnitude.shape != self.direction.shape:
            raise RasterError("magnitude and direction shapes differ")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian, radius ceil(3*sigma), normalized to sum 1."""
    if sigma <= 0:
        raise RasterError(f"sigma must be positive, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def _convolve_1d_replicate(values: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(values, pad, mode="edge")
    out = np.zeros_like(values, dtype=np.float64)
    for i, w in enumerate(kernel):
        if axis == 0:
            out += w * padded[i : i + values.shape[0], :]
        else:
            out += w * padded[:, i : i + values.shape[1]]
    return out


def gaussian_smooth(gray: GrayImage, sigma: float) -> GrayImage:
    """Separable Gaussian blur with edge-replicate borders; float output."""
    vals = gray.values.astype(np.float64)
    k = gaussian_kernel(sigma)
    smoothed = _convolve_1d_replicate(_convolve_1d_replicate(vals, k, axis=0), k, axis=1)
    # replicate padding plus a sum-1 kernel cannot leave [min, max]; clip float fuzz
    return GrayImage(np.clip(smoothed, 0.0, 255.0))


_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)


def _convolve_3x3_replicate(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    padded = np.pad(values, 1, mode="edge")
    out = np.zeros_like(values, dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            w = kernel[dy, dx]
            if w != 0.0:
                out += w * padded[dy : dy + values.shape[0], dx : dx + values.shape[1]]
    return out


def sobel_gradients(gray: GrayImage) -> GradientField:
    """3x3 Sobel; magnitude is the Euclidean norm, direction quantized to 4 bins."""
    vals = gray.values.astype(np.float64)
    gx = _convolve_3x3_replicate(vals, _SOBEL_X)
    gy = _convolve_3x3_replicate(vals, _SOBEL_Y)
    magnitude = np.hypot(gx, gy)
    angle = np.degrees(np.arctan2(gy, gx))  # (-180, 180]
    angle = np.mod(angle, 180.0)
    direction = np.zeros(angle.shape, dtype=np.uint8)
    direction[(angle >= 22.5) & (angle < 67.5)] = 1
    direction[(angle >= 67.5) & (angle < 112.5)] = 2
    direction[(angle >= 112.5) & (angle < 157.5)] = 3
    return GradientField(magnitude=magnitude, direction=direction)


# per direction bin: the two neighbor offsets (dy, dx) along the gradient
_NMS_NEIGHBORS = {
    0: ((0, -1), (0, 1)),
    1: ((-1, -1), (1, 1)),
    2: ((-1, 0), (1, 0)),
    3: ((-1, 1), (1, -1)),
}


def nonmax_suppress(field: GradientField) -> np.ndarray:
    """Keep magnitude only at ridge crests along the gradient direction.

    The comparison is strict against one neighbor and non-strict against the
    other so that a two-pixel plateau across the ridge thins to one pixel
    instead of surviving twice or vanishing. Border pixels are always zero.
    """
    mag = field.magnitude
    h, w = mag.shape
    padded = np.pad(mag, 1, mode="constant")
    out = np.zeros_like(mag)
    for b, ((dy1, dx1), (dy2, dx2)) in _NMS_NEIGHBORS.items():
        sel = field.direction == b
        n1 = padded[1 + dy1 : 1 + dy1 + h, 1 + dx1 : 1 + dx1 + w]
        n2 = padded[1 + dy2 : 1 + dy2 + h, 1 + dx2 : 1 + dx2 + w]
        keep = sel & (mag > n1) & (mag >= n2)
        out[keep] = mag[keep]
    out[0, :] = 0.0
    out[-1, :] = 0.0
    out[:, 0] = 0.0
    out[:, -1] = 0.0
    return out


def double_threshold(suppressed: np.ndarray, low: float, high: float) -> np.ndarray:
    """Classify suppressed magnitudes as EDGE_NONE / EDGE_WEAK / EDGE_STRONG."""
    if not (0 <= low < high):
        raise RasterError(f"thresholds must satisfy 0 <= low < high, got {low}, {high}")
    classes = np.full(suppressed.shape, EDGE_NONE, dtype=np.int8)
    classes[suppressed >= low] = EDGE_WEAK
    classes[suppressed >= high] = EDGE_STRONG
    return classes


def hysteresis(classes: np.ndarray) -> BinaryMask:
    """Keep strong pixels plus weak pixels 8-connected to a strong one.

    Breadth-first flood from every strong seed; weak chains of any length
    survive as long as they touch a strong pixel somewhere.
    """
    h, w = classes.shape
    keep = classes == EDGE_STRONG
    weak = classes == EDGE_WEAK
    queue = collections.deque(zip(*np.nonzero(keep)))
    while queue:
        y, x = queue.popleft()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                ny, nx = y + dy, x + dx
                if 0 <= ny < h and 0 <= nx < w and weak[ny, nx] and not keep[ny, nx]:
                    keep[ny, nx] = True
                    queue.append((ny, nx))
    return BinaryMask(keep)


def canny_stages(gray: GrayImage, params: CannyParams = CannyParams()):
    """Run every stage and return (smoothed, field, suppressed, classes, mask).

    Exposed so diagnostics and tests can check per-stage invariants.
    """
    smoothed = gaussian_smooth(gray, params.sigma)
    field = sobel_gradients(smoothed)
    suppressed = nonmax_suppress(field)
    classes = double_threshold(suppressed, params.low, params.high)
    mask = hysteresis(classes)
    return smoothed, field, suppressed, classes, mask


def canny(gray: GrayImage, params: CannyParams = CannyParams()) -> BinaryMask:
    """Full edge detection; see canny_stages for the stage breakdown."""
    return canny_stages(gray, params)[-1]
