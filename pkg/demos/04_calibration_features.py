"""From red cell to microns: how pixel counts become morphology features.

A red blood cell is close to 8 um across regardless of the donor, so one
annotated red cell fixes the pixel density of the whole image. This script
draws a red cell, counts its pixels, calibrates, and then measures a white
cell with the resulting profile in both arithmetic modes.

Run:  python3 demos/04_calibration_features.py
"""

import math

import numpy as np

from bloodsmear.features import calibrate, extract_features, wbc_area_um2, wbc_diameter_um
from bloodsmear.raster import BinaryMask
from bloodsmear.shapes import CellDetection, count_cells, disk_region
from bloodsmear.synthetic import circle_ring_pixels, ring_mask


def main() -> None:
    shape = (96, 96)

    # a rasterized disk of radius 15 px stands in for the annotated red cell
    rbc_pixels = int(disk_region((48, 48), 15.0, shape).sum())
    print(f"annotated red cell: {rbc_pixels} px across an 8 um disk")

    for mode, pi_value in (("paper-compat", 3.14), ("standard", math.pi)):
        profile = calibrate(rbc_pixels, 8.0, pi_value)
        print(f"\n[{mode}] pi = {pi_value}")
        print(f"  red cell area   {profile.rbc_area_um2:8.4f} um^2")
        print(f"  pixel density   {profile.px_per_um2:8.4f} px per um^2")

        # sanity: a blob with one red cell worth of pixels measures 8 um
        area = wbc_area_um2(rbc_pixels, profile)
        print(f"  round trip      {wbc_diameter_um(area, pi_value):.6f} um (must be 8)")

    # measure an actual detection with the default profile
    profile = calibrate(rbc_pixels)
    wbc = BinaryMask(disk_region((48, 48), 25.0, shape))
    nucleus = BinaryMask(disk_region((48, 48), 17.0, shape))
    granule = BinaryMask(np.zeros(shape, dtype=bool))
    edge = ring_mask(shape, circle_ring_pixels(48, 48, 25.0))
    detection = count_cells(edge, wbc, nucleus, granule)[0]

    feats = extract_features(detection, profile)
    print("\nwhite cell measured against that calibration:")
    print(f"  body pixels     {detection.wbc_pixels}")
    print(f"  area            {feats.wbc_area_um2:8.2f} um^2")
    print(f"  diameter        {feats.wbc_diameter_um:8.2f} um")
    print(f"  nucleus ratio   {feats.nucleus_ratio:8.2f}")
    print(f"  granule ratio   {feats.granule_ratio:8.2f}")


if __name__ == "__main__":
    main()
