"""Batch evaluation against a labeled manifest.

The manifest is a two-column CSV `path,label` (no header needed; one is
tolerated). Relative image paths resolve against the manifest's directory.
Accuracy follows the screening convention: wrong identifications and
unidentified cells both count against it,
    accuracy = (1 - (wrong + unidentified) / total) * 100.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import PipelineConfig, default_config
from .fuzzy import LABEL_ALL, LABEL_AML_M3, LABEL_HEALTHY, LABEL_UNIDENTIFIED
from .pipeline import analyze_image
from .raster import RasterError

KNOWN_LABELS = (LABEL_ALL, LABEL_AML_M3, LABEL_HEALTHY)

EVAL_SCHEMA_VERSION = 1


class EvaluateError(ValueError):
    """Raised for unusable manifests or unreadable images."""


@dataclass(frozen=True)
class ManifestEntry:
    path: str  # as written in the manifest
    resolved: str  # absolute or manifest-relative resolution
    label: str


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    manifest_path = Path(path)
    try:
        text = manifest_path.read_text()
    except OSError as exc:
        raise EvaluateError(f"cannot read manifest {path}: {exc}") from exc
    base = manifest_path.parent
    entries = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or all(not col.strip() for col in row):
            continue
        if len(row) != 2:
            raise EvaluateError(f"{path}:{lineno}: expected two columns, got {len(row)}")
        raw_path, label = row[0].strip(), row[1].strip()
        if lineno == 1 and (raw_path.lower(), label.lower()) == ("path", "label"):
            continue
        if label not in KNOWN_LABELS:
            raise EvaluateError(
                f"{path}:{lineno}: unknown label {label!r}; expected one of {KNOWN_LABELS}"
            )
        if not raw_path:
            raise EvaluateError(f"{path}:{lineno}: empty image path")
        resolved = raw_path if Path(raw_path).is_absolute() else str(base / raw_path)
        entries.append(ManifestEntry(path=raw_path, resolved=resolved, label=label))
    if not entries:
        raise EvaluateError(f"manifest {path} lists no images")
    return entries


def accuracy_pct(wrong: int, unidentified: int, total: int) -> float:
    """(1 - (wrong + unidentified) / total) * 100."""
    if total <= 0:
        raise EvaluateError(f"total must be positive, got {total}")
    if wrong < 0 or unidentified < 0 or wrong + unidentified > total:
        raise EvaluateError(
            f"counts must satisfy 0 <= wrong + unidentified <= total, got {wrong}, {unidentified}, {total}"
        )
    return (1.0 - (wrong + unidentified) / total) * 100.0


def evaluate_batch(
    manifest: str | Path | list[ManifestEntry],
    config: PipelineConfig | None = None,
    jobs: int = 1,
    skip_missing: bool = False,
) -> dict:
    """Analyze every manifest image and tally the confusion totals.

    Images are processed with a thread pool when jobs > 1; analysis is pure
    per image, so the report is identical whatever the worker count. With
    skip_missing, unreadable images are excluded from the totals and listed
    under "skipped" instead of failing the run.
    """
    config = config if config is not None else default_config()
    if jobs < 1:
        raise EvaluateError(f"jobs must be >= 1, got {jobs}")
    entries = manifest if isinstance(manifest, list) else read_manifest(manifest)

    def run_one(entry: ManifestEntry):
        try:
            return entry, analyze_image(entry.resolved, config), None
        except RasterError as exc:
            return entry, None, str(exc)

    if jobs == 1:
        outcomes = [run_one(e) for e in entries]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_one, entries))

    images = []
    skipped = []
    wrong = unidentified = 0
    for entry, report, error in outcomes:
        if report is None:
            if not skip_missing:
                raise EvaluateError(error)
            skipped.append({"path": entry.path, "reason": error})
            continue
        predicted = report["label"]
        if predicted == LABEL_UNIDENTIFIED:
            unidentified += 1
        elif predicted != entry.label:
            wrong += 1
        images.append(
            {
                "path": entry.path,
                "true_label": entry.label,
                "label": predicted,
                "score": report["score"],
                "wbc_count": report["wbc_count"],
                "rbc_count": report["rbc_count"],
            }
        )
    total = len(images)
    if total == 0:
        raise EvaluateError("no images left to evaluate after skipping")
    correct = total - wrong - unidentified
    return {
        "schema_version": EVAL_SCHEMA_VERSION,
        "mode": config.mode,
        "total_images": total,
        "correct": correct,
        "wrong": wrong,
        "unidentified": unidentified,
        "accuracy_pct": accuracy_pct(wrong, unidentified, total),
        "skipped": skipped,
        "images": images,
    }


def report_to_json(report: dict) -> str:
    """Canonical serialization used by the CLI; key order is insertion order."""
    return json.dumps(report, indent=2)
