"""Command line interface.

Exit codes: 0 on success, 1 for usage errors (bad flags or arguments),
2 for data errors (unreadable images, bad manifests, invalid config).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .config import ConfigError, config_to_json, load_config
from .evaluate import EvaluateError, evaluate_batch, report_to_json
from .features import FeatureError, calibrate, pi_for_mode
from .fuzzy import MODES, FuzzyError
from .overlay import render_overlay
from .pipeline import analyze_image, segment_stains
from .raster import RasterError, load_image
from .shapes import ShapeError

_DATA_ERRORS = (ConfigError, EvaluateError, RasterError, FeatureError, ShapeError, FuzzyError)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems by default; this tool reserves
    # 2 for data errors, so remap
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="bloodsmear", description="Blood smear screening pipeline")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--mode", choices=MODES, help="override the config arithmetic mode")
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="analyze one image")
    p_analyze.add_argument("image", help="image file to analyze")
    p_analyze.add_argument("--out", help="write the JSON report here as well as stdout")
    p_analyze.add_argument("--overlay", help="write an annotated PNG here")

    p_eval = sub.add_parser("evaluate", help="evaluate a labeled manifest")
    p_eval.add_argument("manifest", help="CSV manifest with path,label rows")
    p_eval.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    p_eval.add_argument("--out", help="write the JSON report here as well as stdout")
    p_eval.add_argument(
        "--skip-missing",
        action="store_true",
        help="skip unreadable images instead of failing",
    )

    p_cal = sub.add_parser("calibrate", help="derive a calibration profile")
    p_cal.add_argument(
        "annotation",
        help='JSON file like {"rbc_pixel_count": 706, "rbc_diameter_um": 8.0}',
    )

    sub.add_parser("dump-config", help="print the effective configuration")
    return parser


def _apply_mode(config, mode):
    if mode is None or mode == config.mode:
        return config
    from dataclasses import replace

    return replace(config, mode=mode)


def _emit(text: str, out: str | None) -> None:
    print(text)
    if out:
        try:
            Path(out).write_text(text + "\n")
        except OSError as exc:
            raise RasterError(f"cannot write report {out}: {exc}") from exc


def _cmd_analyze(args, config) -> int:
    started = time.perf_counter()
    report = analyze_image(args.image, config)
    report["timing_ms"] = (time.perf_counter() - started) * 1000.0
    _emit(json.dumps(report, indent=2), args.out)
    if args.overlay:
        image = load_image(args.image)
        masks = segment_stains(image, config)
        render_overlay(image, report, out_path=args.overlay, nucleus_mask=masks.nucleus)
    return 0


def _cmd_evaluate(args, config) -> int:
    report = evaluate_batch(
        args.manifest, config, jobs=args.jobs, skip_missing=args.skip_missing
    )
    _emit(report_to_json(report), args.out)
    return 0


def _cmd_calibrate(args, config) -> int:
    try:
        doc = json.loads(Path(args.annotation).read_text())
    except OSError as exc:
        raise RasterError(f"cannot read annotation {args.annotation}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RasterError(f"annotation is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "rbc_pixel_count" not in doc:
        raise RasterError("annotation must be an object with rbc_pixel_count")
    profile = calibrate(
        int(doc["rbc_pixel_count"]),
        float(doc.get("rbc_diameter_um", config.calibration.rbc_diameter_um)),
        pi_for_mode(config.mode),
    )
    print(
        json.dumps(
            {
                "rbc_diameter_um": profile.rbc_diameter_um,
                "rbc_pixel_count": profile.rbc_pixel_count,
                "rbc_area_um2": profile.rbc_area_um2,
                "px_per_um2": profile.px_per_um2,
                "mode": config.mode,
            },
            indent=2,
        )
    )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "evaluate" and args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        config = _apply_mode(load_config(args.config), args.mode)
        if args.command == "analyze":
            return _cmd_analyze(args, config)
        if args.command == "evaluate":
            return _cmd_evaluate(args, config)
        if args.command == "calibrate":
            return _cmd_calibrate(args, config)
        print(config_to_json(config))
        return 0
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
