"""Acceptance gate: one test per shipping criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the criterion lines
directly; under plain `pytest -v` the verdict is carried by the test names.
Every tolerance is pinned here, not in the library.
"""

import math
import time
from contextlib import contextmanager

import numpy as np

from bloodsmear.edges import (
    EDGE_NONE,
    EDGE_STRONG,
    CannyParams,
    canny,
    canny_stages,
    hysteresis,
)
from bloodsmear.evaluate import evaluate_batch, report_to_json
from bloodsmear.features import CellFeatures, calibrate, wbc_area_um2, wbc_diameter_um
from bloodsmear.fuzzy import LABEL_AML_M3, infer
from bloodsmear.raster import GrayImage
from bloodsmear.shapes import (
    CurveSegment,
    EllipseParams,
    circle_test,
    fit_ellipse,
    merge_segments,
    merging_measure,
    split_curve_segments,
    trace_contours,
)
from bloodsmear.synthetic import (
    circle_ring_pixels,
    ellipse_ring_pixels,
    occluded_pair_edges,
    ring_mask,
)


@contextmanager
def criterion(number, text):
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number}: {text}")
        raise
    print(f"[PASS] criterion {number}: {text}")


def promyelocyte_features():
    # diameter 16.92 um, nucleus 0.53, granule 0.41; area consistent with
    # the diameter under the rounded pi
    return CellFeatures(
        wbc_area_um2=3.14 * (16.92 / 2) ** 2,
        wbc_diameter_um=16.92,
        nucleus_ratio=0.53,
        granule_ratio=0.41,
    )


def test_criterion_1_worked_example_reproduction():
    with criterion(1, "worked example scores exactly 2 and labels AML-M3 in under 1 ms"):
        diag = infer(promyelocyte_features())
        assert diag.label == LABEL_AML_M3
        assert diag.score is not None
        assert abs(diag.score - 2.0) <= 1e-9
        # both fired rules sit at output level 2
        assert [f.z for f in diag.fired] == [2, 2]
        strengths = sorted(f.strength for f in diag.fired)
        assert abs(strengths[1] - 0.34) <= 1e-9
        assert abs(strengths[0] - 1.92 / 45) <= 1e-9

        n = 200
        started = time.perf_counter()
        for _ in range(n):
            infer(promyelocyte_features())
        per_call_ms = (time.perf_counter() - started) * 1000.0 / n
        assert per_call_ms < 1.0


def test_criterion_2_published_accuracy_arithmetic():
    with criterion(2, "accuracy formula reproduces 83.65 from 104 images, 11 wrong, 6 unidentified"):
        # The clinical image set behind these totals is not distributed with
        # this package, so the totals themselves cannot be re-measured here;
        # this verifies the arithmetic that turns totals into the accuracy.
        from bloodsmear.evaluate import accuracy_pct

        value = accuracy_pct(11, 6, 104)
        assert abs(value - 83.65) <= 0.01
        assert value == (1.0 - (11 + 6) / 104) * 100.0
    print("       note: original clinical dataset unavailable; formula verified on its published totals")


def test_criterion_3_calibration_round_trip():
    with criterion(3, "8 um red cell gives 50.24 um^2 and round-trips its diameter, both to 1e-9"):
        profile = calibrate(706)
        assert abs(profile.rbc_area_um2 - 50.24) <= 1e-9
        assert abs(profile.rbc_area_um2 - 16 * 3.14) <= 1e-9
        area = wbc_area_um2(706, profile)
        assert abs(wbc_diameter_um(area) - 8.0) <= 1e-9


def test_criterion_4_shape_detection_paths():
    with criterion(4, "circle accepted, 120x60 ellipse recovered within 2 px, occlusion splits 5/2"):
        # a) plain ring of radius 50 passes the circle test
        ring = trace_contours(ring_mask((129, 129), circle_ring_pixels(64, 64, 50.0)))[0]
        assert circle_test(ring)

        # b) thin 120x60 rotated ellipse: rejected as a circle, then
        #    recovered through split, merge and fit within 2 px
        true = EllipseParams(cx=84, cy=84, a=60, b=30, rotation=math.radians(25))
        contour = trace_contours(ring_mask((169, 169), ellipse_ring_pixels(true)))[0]
        assert contour.closed
        assert not circle_test(contour)
        segments = split_curve_segments(contour)
        groups = merge_segments(segments)
        assert len(groups) == 1
        pts = np.vstack([s.points for s in groups[0]]).astype(np.float64)
        fitted, residual = fit_ellipse(pts)
        assert abs(fitted.cx - true.cx) < 2.0
        assert abs(fitted.cy - true.cy) < 2.0
        assert abs(fitted.a - true.a) < 2.0
        assert abs(fitted.b - true.b) < 2.0
        assert residual < 2.0

        # c) two occluding rings shatter into five segments and regroup
        #    into the two cells
        edge_mask, c1, c2 = occluded_pair_edges()
        segments = []
        for contour in trace_contours(edge_mask):
            segments.extend(split_curve_segments(contour))
        assert len(segments) == 5
        groups = merge_segments(segments)
        assert len(groups) == 2
        centers = []
        for group in groups:
            pts = np.vstack([s.points for s in group]).astype(np.float64)
            fitted, _ = fit_ellipse(pts)
            centers.append((fitted.cx, fitted.cy))
        for got, want in zip(sorted(centers), sorted([c1, c2])):
            assert abs(got[0] - want[0]) < 2.0
            assert abs(got[1] - want[1]) < 2.0


def test_criterion_5_merging_measure_properties():
    with criterion(5, "merging measure on 1000 random pairs: symmetric, bounded, binary gate, right angle = 0.5"):
        rng = np.random.default_rng(1234)

        def random_segment():
            (x0, y0), (x1, y1) = rng.integers(0, 80, size=(2, 2))
            ta, tb = rng.uniform(-math.pi / 2, math.pi / 2, size=2)
            if ta <= -math.pi / 2:
                ta = math.pi / 2
            if tb <= -math.pi / 2:
                tb = math.pi / 2
            return CurveSegment(
                points=np.array([[x0, y0], [x1, y1]], dtype=np.int64),
                tangent_a=float(ta),
                tangent_b=float(tb),
            )

        for _ in range(1000):
            si, sj = random_segment(), random_segment()
            mm = merging_measure(si, sj)
            assert mm == merging_measure(sj, si)
            assert 0.0 <= mm <= 1.0
            closest = min(
                math.hypot(float(p[0] - q[0]), float(p[1] - q[1]))
                for p in (si.end_a, si.end_b)
                for q in (sj.end_a, sj.end_b)
            )
            if closest >= 10.0:
                assert mm == 0.0  # distance gate closed
            else:
                assert mm > 1.0 / 3.0  # gate open: the tangent term alone

        # perpendicular tangents at touching endpoints score exactly one half
        straight = CurveSegment(np.array([[5, 5], [9, 5]], dtype=np.int64), 0.0, 0.0)
        upright = CurveSegment(np.array([[10, 5], [10, 9]], dtype=np.int64), math.pi / 2, math.pi / 2)
        assert abs(merging_measure(straight, upright) - 0.5) <= 1e-12


def _edge_fixtures():
    """Twenty-plus small gray images with varied structure."""
    fixtures = []
    for level in (0.0, 128.0, 255.0):
        fixtures.append(GrayImage(np.full((48, 48), level)))
    ys, xs = np.ogrid[:64, :64]
    for r in (12.0, 18.0, 24.0, 29.0):
        disk = np.zeros((64, 64))
        disk[(xs - 32) ** 2 + (ys - 32) ** 2 <= r * r] = 210.0
        fixtures.append(GrayImage(disk))
    for at in (10, 25, 40, 55):
        step = np.full((64, 64), 30.0)
        step[:, at:] = 220.0
        fixtures.append(GrayImage(step))
    for a, b in ((25.0, 12.0), (28.0, 20.0), (30.0, 10.0)):
        el = np.zeros((64, 64))
        el[(xs - 32.0) ** 2 / a**2 + (ys - 32.0) ** 2 / b**2 <= 1.0] = 190.0
        fixtures.append(GrayImage(el))
    rng = np.random.default_rng(77)
    for _ in range(4):
        fixtures.append(GrayImage(rng.uniform(0, 255, size=(48, 48))))
    for axis in (0, 1):
        ramp = np.linspace(0, 255, 64)
        grad = np.tile(ramp, (64, 1))
        fixtures.append(GrayImage(grad if axis else grad.T))
    for width in (3, 6):
        bar = np.zeros((64, 64))
        bar[:, 30 : 30 + width] = 240.0
        fixtures.append(GrayImage(bar))
    return fixtures


def test_criterion_6_edge_detector_invariants():
    with criterion(6, "edge invariants hold on 20+ fixtures within 5 s"):
        fixtures = _edge_fixtures()
        assert len(fixtures) >= 20
        offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (-1, 1)}
        started = time.perf_counter()
        for gray in fixtures:
            _, field, suppressed, classes, mask = canny_stages(gray)

            if np.ptp(gray.values) == 0:
                assert mask.popcount() == 0  # constant image: no edges

            # every surviving pixel is a ridge crest along its gradient
            ys_e, xs_e = np.nonzero(mask.bits)
            for y, x in zip(ys_e, xs_e):
                assert suppressed[y, x] > 0.0
                dy, dx = offsets[int(field.direction[y, x])]
                for sy, sx in ((y + dy, x + dx), (y - dy, x - dx)):
                    if 0 <= sy < gray.height and 0 <= sx < gray.width:
                        assert field.magnitude[y, x] >= field.magnitude[sy, sx]

            # hysteresis is idempotent: feeding the result back changes nothing
            refired = hysteresis(
                np.where(mask.bits, EDGE_STRONG, EDGE_NONE).astype(np.uint8)
            )
            assert np.array_equal(refired.bits, mask.bits)

            # raising both thresholds never adds edge pixels
            tight = canny(gray, CannyParams(low=40, high=90))
            loose = canny(gray, CannyParams(low=10, high=30))
            assert not (tight.bits & ~loose.bits).any()
        elapsed = time.perf_counter() - started
        assert elapsed < 5.0


def test_criterion_7_twelve_image_suite(suite):
    with criterion(7, "12/12 synthetic smears match hand-worked labels, including an Unidentified, in under 10 s"):
        directory, rows, manifest = suite
        started = time.perf_counter()
        report = evaluate_batch(manifest)
        elapsed = time.perf_counter() - started
        # expected labels were worked out by hand from the rule bank before
        # the pipeline ran; the gap recipe is a deliberate no-rule cell
        expected = {name: want for name, _true, want in rows}
        predicted = {img["path"]: img["label"] for img in report["images"]}
        matches = sum(predicted[name] == expected[name] for name in expected)
        assert matches == 12
        assert sum(1 for v in predicted.values() if v == "Unidentified") >= 1
        assert elapsed < 10.0


def test_criterion_8_parallel_determinism(suite):
    with criterion(8, "evaluation reports are byte-identical across worker counts"):
        _, _, manifest = suite
        texts = {report_to_json(evaluate_batch(manifest, jobs=j)) for j in (1, 2, 5)}
        assert len(texts) == 1
