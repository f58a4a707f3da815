"""Edge detector tests.

Hysteresis is cross-checked against a small dilation-based fixpoint oracle
written here, independent of the BFS in the library.
"""

import numpy as np
import pytest

from bloodsmear.edges import (
    EDGE_NONE,
    EDGE_STRONG,
    EDGE_WEAK,
    CannyParams,
    canny,
    canny_stages,
    double_threshold,
    gaussian_kernel,
    gaussian_smooth,
    hysteresis,
    nonmax_suppress,
    sobel_gradients,
)
from bloodsmear.raster import GrayImage
from bloodsmear.shapes import trace_contours


def hysteresis_oracle(classes):
    """Grow the strong set over weak pixels by repeated 8-dilation."""
    keep = classes == EDGE_STRONG
    candidates = classes != EDGE_NONE
    while True:
        padded = np.pad(keep, 1)
        grown = np.zeros_like(keep)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                grown |= padded[1 + dy : 1 + dy + keep.shape[0], 1 + dx : 1 + dx + keep.shape[1]]
        grown &= candidates
        if np.array_equal(grown, keep):
            return keep
        keep = grown


def step_image(width=40, height=40, at=20, lo=40.0, hi=200.0):
    arr = np.full((height, width), lo)
    arr[:, at:] = hi
    return GrayImage(arr)


def disk_image(size=128, r=40.0, level=200.0):
    ys, xs = np.ogrid[:size, :size]
    c = size / 2.0
    arr = np.zeros((size, size))
    arr[(xs - c) ** 2 + (ys - c) ** 2 <= r * r] = level
    return GrayImage(arr)


class TestGaussian:
    def test_kernel_sums_to_one(self):
        for sigma in (0.6, 1.0, 1.4, 2.5):
            k = gaussian_kernel(sigma)
            assert k.sum() == pytest.approx(1.0, abs=1e-12)

    def test_kernel_radius_and_symmetry(self):
        k = gaussian_kernel(1.4)
        assert len(k) == 2 * 5 + 1  # radius ceil(3 * 1.4) = 5
        assert np.allclose(k, k[::-1])
        assert k.argmax() == 5

    def test_kernel_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            gaussian_kernel(0.0)

    def test_smooth_preserves_constant(self):
        flat = GrayImage(np.full((20, 20), 77.0))
        out = gaussian_smooth(flat, 1.4)
        assert np.allclose(out.values, 77.0, atol=1e-9)

    def test_smooth_stays_in_range(self):
        rng = np.random.default_rng(11)
        noisy = GrayImage(rng.uniform(0, 255, size=(30, 30)))
        out = gaussian_smooth(noisy, 2.0)
        assert out.values.min() >= 0.0
        assert out.values.max() <= 255.0


class TestGradients:
    def test_vertical_step_direction(self):
        field = sobel_gradients(step_image())
        # gradient points horizontally across a vertical edge: bin 0
        row = 20
        col = field.magnitude[row].argmax()
        assert field.direction[row, col] == 0
        assert field.magnitude[row, col] > 0

    def test_nms_thins_step_to_single_column(self):
        field = sobel_gradients(step_image())
        thin = nonmax_suppress(field)
        interior = thin[5:-5]
        for row in interior:
            assert (row > 0).sum() == 1
        cols = np.nonzero(interior.sum(axis=0))[0]
        assert len(cols) == 1


class TestThresholdAndHysteresis:
    def test_double_threshold_classes(self):
        sup = np.array([[0.0, 10.0, 30.0, 80.0]])
        classes = double_threshold(sup, low=20, high=60)
        assert classes.tolist() == [[EDGE_NONE, EDGE_NONE, EDGE_WEAK, EDGE_STRONG]]

    def test_double_threshold_rejects_bad_bounds(self):
        with pytest.raises(ValueError):
            double_threshold(np.zeros((2, 2)), low=60, high=20)

    def test_hysteresis_matches_dilation_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(12):
            classes = rng.choice(
                [EDGE_NONE, EDGE_WEAK, EDGE_STRONG], size=(24, 24), p=[0.72, 0.2, 0.08]
            ).astype(np.uint8)
            got = hysteresis(classes).bits
            assert np.array_equal(got, hysteresis_oracle(classes))

    def test_hysteresis_is_idempotent(self):
        rng = np.random.default_rng(5)
        classes = rng.choice(
            [EDGE_NONE, EDGE_WEAK, EDGE_STRONG], size=(30, 30), p=[0.7, 0.25, 0.05]
        ).astype(np.uint8)
        once = hysteresis(classes).bits
        again = hysteresis(np.where(once, EDGE_STRONG, EDGE_NONE).astype(np.uint8)).bits
        assert np.array_equal(once, again)

    def test_isolated_weak_pixels_drop(self):
        classes = np.zeros((5, 5), dtype=np.uint8)
        classes[2, 2] = EDGE_WEAK
        assert hysteresis(classes).popcount() == 0

    def test_weak_chain_attached_to_strong_survives(self):
        classes = np.zeros((3, 6), dtype=np.uint8)
        classes[1, 0] = EDGE_STRONG
        classes[1, 1:4] = EDGE_WEAK
        assert hysteresis(classes).popcount() == 4


class TestCanny:
    def test_constant_image_yields_no_edges(self):
        for level in (0.0, 100.0, 255.0):
            mask = canny(GrayImage(np.full((32, 32), level)))
            assert mask.popcount() == 0

    def test_ridge_property_on_disk(self):
        gray = disk_image()
        _, field, suppressed, _, mask = canny_stages(gray)
        ys, xs = np.nonzero(mask.bits)
        offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (-1, 1)}
        for y, x in zip(ys, xs):
            dy, dx = offsets[int(field.direction[y, x])]
            m = field.magnitude[y, x]
            for sy, sx in ((y + dy, x + dx), (y - dy, x - dx)):
                if 0 <= sy < gray.height and 0 <= sx < gray.width:
                    assert m >= field.magnitude[sy, sx]
            assert suppressed[y, x] > 0

    def test_threshold_monotonicity(self):
        gray = disk_image()
        loose = canny(gray, CannyParams(low=10, high=30))
        tight = canny(gray, CannyParams(low=40, high=90))
        assert not (tight.bits & ~loose.bits).any()
        assert loose.popcount() >= tight.popcount()

    def test_disk_gives_one_ring_component(self):
        # quantized directions leave small elbow bulges on the raw ring, so
        # closure after cleanup is exercised with the shape tests instead
        mask = canny(disk_image())
        contours = trace_contours(mask)
        assert len(contours) == 1
        x0, y0, x1, y1 = contours[0].bbox
        assert 75 <= x1 - x0 <= 85
        assert 75 <= y1 - y0 <= 85

    def test_border_stays_clear(self):
        gray = step_image(at=2)  # edge hugging the left border
        mask = canny(gray)
        assert not mask.bits[0, :].any()
        assert not mask.bits[-1, :].any()
        assert not mask.bits[:, 0].any()
        assert not mask.bits[:, -1].any()

    def test_params_validation(self):
        with pytest.raises(ValueError):
            CannyParams(sigma=-1.0)
        with pytest.raises(ValueError):
            CannyParams(low=50, high=10)
