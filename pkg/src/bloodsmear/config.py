"""Pipeline configuration: defaults, JSON round-trip, environment override.

The whole pipeline is driven by one PipelineConfig value. `load_config`
resolves, in order: an explicit path argument, the BLOODSMEAR_CONFIG
environment variable, then built-in defaults. Files may specify any subset
of keys; unspecified keys keep their defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .edges import CannyParams
from .fuzzy import (
    DEFAULT_BANDS,
    MODES,
    FuzzyModel,
    FuzzyRule,
    FuzzyTerm,
    FuzzyVariable,
    default_rules,
    default_variables,
)
from .raster import ColorRange
from .shapes import MergeParams

ENV_CONFIG_PATH = "BLOODSMEAR_CONFIG"

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration data."""


def default_color_ranges() -> dict[str, ColorRange]:
    """Stain color boxes tuned for Giemsa-like stains.

    giemsa-purple covers the whole white cell body; nucleus-blue the darker
    chromatin; granule-magenta the reddish cytoplasmic granules; rbc-pink the
    red cell background population used for the red count estimate.
    """
    return {
        "giemsa-purple": ColorRange("giemsa-purple", (260.0, 320.0), (0.15, 1.0), (0.2, 1.0)),
        "nucleus-blue": ColorRange("nucleus-blue", (210.0, 280.0), (0.3, 1.0), (0.1, 0.7)),
        "granule-magenta": ColorRange("granule-magenta", (300.0, 350.0), (0.2, 1.0), (0.2, 0.9)),
        "rbc-pink": ColorRange("rbc-pink", (330.0, 20.0), (0.1, 0.6), (0.5, 1.0)),
    }


@dataclass(frozen=True)
class ShapeParams:
    circle_tolerance_pct: float = 30.0
    corner_window: int = 5
    corner_angle_deg: float = 60.0
    min_segment_points: int = 3
    fit_residual_max: float = 2.0


@dataclass(frozen=True)
class CalibrationParams:
    rbc_diameter_um: float = 8.0
    # fallback pixel count when no red cell annotation is given; matches a
    # red cell of roughly 30 px diameter
    rbc_pixel_count: int = 706


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "paper-compat"
    threshold: float = 1.0
    color_ranges: dict[str, ColorRange] = field(default_factory=default_color_ranges)
    canny: CannyParams = field(default_factory=CannyParams)
    merge: MergeParams = field(default_factory=MergeParams)
    shapes: ShapeParams = field(default_factory=ShapeParams)
    calibration: CalibrationParams = field(default_factory=CalibrationParams)
    model: FuzzyModel = field(default_factory=FuzzyModel)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        for key in ("giemsa-purple", "nucleus-blue", "granule-magenta"):
            if key not in self.color_ranges:
                raise ConfigError(f"color_ranges is missing required range {key!r}")


def default_config() -> PipelineConfig:
    return PipelineConfig()


def _range_to_json(r: ColorRange) -> dict:
    return {"hue": list(r.hue), "saturation": list(r.saturation), "value": list(r.value)}


def _term_to_json(t: FuzzyTerm) -> dict:
    return {"label": t.label, "a": t.a, "b": t.b, "c": t.c, "shape": t.shape}


def config_to_json(config: PipelineConfig) -> str:
    """Serialize to a stable, human-editable JSON document."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": config.mode,
        "threshold": config.threshold,
        "color_ranges": {name: _range_to_json(r) for name, r in config.color_ranges.items()},
        "canny": {
            "sigma": config.canny.sigma,
            "low": config.canny.low,
            "high": config.canny.high,
        },
        "merge": {
            "distance_th": config.merge.distance_th,
            "angle_scale": config.merge.angle_scale,
            "mm_cut": config.merge.mm_cut,
        },
        "shapes": {
            "circle_tolerance_pct": config.shapes.circle_tolerance_pct,
            "corner_window": config.shapes.corner_window,
            "corner_angle_deg": config.shapes.corner_angle_deg,
            "min_segment_points": config.shapes.min_segment_points,
            "fit_residual_max": config.shapes.fit_residual_max,
        },
        "calibration": {
            "rbc_diameter_um": config.calibration.rbc_diameter_um,
            "rbc_pixel_count": config.calibration.rbc_pixel_count,
        },
        "fuzzy": {
            "variables": {
                v.name: [_term_to_json(t) for t in v.terms] for v in config.model.variables
            },
            "rules": [
                {**{var: label for var, label in r.antecedents}, "output": r.z}
                for r in config.model.rules
            ],
            "bands": list(config.model.bands),
        },
    }
    return json.dumps(doc, indent=2)


def _parse_range(name: str, doc: dict) -> ColorRange:
    try:
        return ColorRange(
            name,
            tuple(doc["hue"]),
            tuple(doc["saturation"]),
            tuple(doc["value"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad color range {name!r}: {exc}") from exc


def _parse_model(doc: dict) -> FuzzyModel:
    variables = []
    for name, terms in doc.get("variables", {}).items():
        try:
            variables.append(
                FuzzyVariable(
                    name,
                    tuple(
                        FuzzyTerm(t["label"], t["a"], t["b"], t["c"], t["shape"]) for t in terms
                    ),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad fuzzy variable {name!r}: {exc}") from exc
    if not variables:
        variables = list(default_variables())
    rules = []
    for i, r in enumerate(doc.get("rules", [])):
        try:
            z = r["output"]
            antecedents = tuple((k, v) for k, v in r.items() if k != "output")
            rules.append(FuzzyRule(antecedents=antecedents, z=z))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad fuzzy rule {i}: {exc}") from exc
    if not rules:
        rules = list(default_rules())
    bands = tuple(doc.get("bands", DEFAULT_BANDS))
    try:
        return FuzzyModel(variables=tuple(variables), rules=tuple(rules), bands=bands)
    except ValueError as exc:
        raise ConfigError(f"inconsistent fuzzy model: {exc}") from exc


def config_from_json(text: str) -> PipelineConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema_version {version}")

    base = default_config()
    ranges = dict(base.color_ranges)
    for name, rdoc in doc.get("color_ranges", {}).items():
        ranges[name] = _parse_range(name, rdoc)

    canny_doc = doc.get("canny", {})
    merge_doc = doc.get("merge", {})
    shapes_doc = doc.get("shapes", {})
    cal_doc = doc.get("calibration", {})
    try:
        canny = CannyParams(
            sigma=canny_doc.get("sigma", base.canny.sigma),
            low=canny_doc.get("low", base.canny.low),
            high=canny_doc.get("high", base.canny.high),
        )
        merge = MergeParams(
            distance_th=merge_doc.get("distance_th", base.merge.distance_th),
            angle_scale=merge_doc.get("angle_scale", base.merge.angle_scale),
            mm_cut=merge_doc.get("mm_cut", base.merge.mm_cut),
        )
        shapes = ShapeParams(
            circle_tolerance_pct=shapes_doc.get(
                "circle_tolerance_pct", base.shapes.circle_tolerance_pct
            ),
            corner_window=shapes_doc.get("corner_window", base.shapes.corner_window),
            corner_angle_deg=shapes_doc.get("corner_angle_deg", base.shapes.corner_angle_deg),
            min_segment_points=shapes_doc.get(
                "min_segment_points", base.shapes.min_segment_points
            ),
            fit_residual_max=shapes_doc.get("fit_residual_max", base.shapes.fit_residual_max),
        )
        calibration = CalibrationParams(
            rbc_diameter_um=cal_doc.get("rbc_diameter_um", base.calibration.rbc_diameter_um),
            rbc_pixel_count=cal_doc.get("rbc_pixel_count", base.calibration.rbc_pixel_count),
        )
        model = _parse_model(doc.get("fuzzy", {}))
        return PipelineConfig(
            mode=doc.get("mode", base.mode),
            threshold=doc.get("threshold", base.threshold),
            color_ranges=ranges,
            canny=canny,
            merge=merge,
            shapes=shapes,
            calibration=calibration,
            model=model,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Load configuration from a path, the environment, or defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH) or None
    if path is None:
        return default_config()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_json(text)
