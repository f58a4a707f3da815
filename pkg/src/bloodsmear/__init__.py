"""Blood smear screening: cell detection, morphology features, fuzzy labeling."""

from .config import PipelineConfig, default_config, load_config
from .edges import CannyParams, canny
from .features import CalibrationProfile, CellFeatures, calibrate, extract_features
from .fuzzy import (
    Diagnosis,
    FuzzyModel,
    classify,
    default_model,
    fire_rules,
    fuzzify,
    infer,
    membership,
    weighted_average,
)
from .pipeline import analyze_image, detect_cells, segment_stains
from .evaluate import evaluate_batch, read_manifest
from .overlay import render_overlay
from .raster import (
    BinaryMask,
    ColorRange,
    GrayImage,
    RasterImage,
    color_filter,
    load_image,
    save_image,
    threshold,
    to_grayscale,
)
from .shapes import (
    CellDetection,
    Contour,
    CurveSegment,
    EllipseParams,
    MergeParams,
    circle_test,
    count_cells,
    fit_ellipse,
    merge_segments,
    merging_measure,
    split_curve_segments,
    trace_contours,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "PipelineConfig", "default_config", "load_config",
    "CannyParams", "canny",
    "CalibrationProfile", "CellFeatures", "calibrate", "extract_features",
    "Diagnosis", "FuzzyModel", "classify", "default_model", "fire_rules",
    "fuzzify", "infer", "membership", "weighted_average",
    "analyze_image", "detect_cells", "segment_stains",
    "evaluate_batch", "read_manifest",
    "render_overlay",
    "BinaryMask", "ColorRange", "GrayImage", "RasterImage", "color_filter",
    "load_image", "save_image", "threshold", "to_grayscale",
    "CellDetection", "Contour", "CurveSegment", "EllipseParams", "MergeParams",
    "circle_test", "count_cells", "fit_ellipse", "merge_segments",
    "merging_measure", "split_curve_segments", "trace_contours",
]
