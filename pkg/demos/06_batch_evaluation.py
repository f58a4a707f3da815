"""Render the built-in twelve-image suite and evaluate it end to end.

Writes the suite PNGs plus a manifest, runs the batch evaluator, and prints
a per-image table with the confusion totals. One image is designed to hit
the rule bank's gap and come back Unidentified, so the suite never scores
100 percent by construction.

Run:  python3 demos/06_batch_evaluation.py [--jobs N]
"""

import argparse
from pathlib import Path

from bloodsmear.evaluate import evaluate_batch
from bloodsmear.synthetic import write_manifest, write_suite

OUT = Path(__file__).parent / "output" / "06_suite"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--jobs", type=int, default=2, help="worker threads")
    args = parser.parse_args()

    rows = write_suite(OUT)
    manifest = write_manifest(OUT, rows)
    print(f"wrote {len(rows)} images and {manifest}\n")

    report = evaluate_batch(manifest, jobs=args.jobs)

    print(f"{'image':14s} {'true':8s} {'predicted':12s} score")
    for img in report["images"]:
        score = "-" if img["score"] is None else f"{img['score']:.3f}"
        flag = "" if img["label"] == img["true_label"] else "  <-"
        print(f"{img['path']:14s} {img['true_label']:8s} {img['label']:12s} {score:>6s}{flag}")

    print(f"\ncorrect {report['correct']}, wrong {report['wrong']},"
          f" unidentified {report['unidentified']} of {report['total_images']}")
    print(f"accuracy: {report['accuracy_pct']:.2f}%")
    print("(the unidentified image is the planned rule-gap case)")


if __name__ == "__main__":
    main()
