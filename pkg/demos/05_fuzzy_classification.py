"""Trace the fuzzy classifier by hand on one promyelocyte-sized cell.

Prints the membership degrees per variable, the fired rules with their
strengths, the Sugeno weighted average and the final label. Then sweeps the
nucleus ratio to show where the label flips, and prints the rule bank gap
that produces Unidentified.

Run:  python3 demos/05_fuzzy_classification.py
"""

from bloodsmear.features import CellFeatures
from bloodsmear.fuzzy import (
    default_model,
    fire_rules,
    fuzzify,
    infer,
    weighted_average,
)


def features(diameter_um: float, nucleus: float, granule: float) -> CellFeatures:
    return CellFeatures(
        wbc_area_um2=3.14 * (diameter_um / 2) ** 2,
        wbc_diameter_um=diameter_um,
        nucleus_ratio=nucleus,
        granule_ratio=granule,
    )


def walkthrough() -> None:
    model = default_model()
    feats = features(16.92, 0.53, 0.41)
    print("cell: diameter 16.92 um, nucleus ratio 0.53, granule ratio 0.41\n")

    degrees = fuzzify(feats, model)
    for var_name, terms in degrees.items():
        rendered = "  ".join(f"{label}={value:.7g}" for label, value in terms.items())
        print(f"  {var_name:14s} {rendered}")

    firings = fire_rules(degrees, model.rules)
    print("\nfired rules (strength = min over non-wildcard antecedents):")
    for f in firings:
        rule = model.rules[f.rule]
        pattern = ", ".join(label for _var, label in rule.antecedents)
        print(f"  rule {f.rule}: ({pattern}) -> level {f.z}, strength {f.strength:.7g}")

    score = weighted_average(firings)
    print(f"\nweighted average: {score}")
    print(f"label: {infer(feats, model).label}")


def nucleus_sweep() -> None:
    print("\nnucleus ratio sweep at diameter 15 um, no granules:")
    last = None
    for i in range(0, 101, 5):
        ratio = i / 100
        diag = infer(features(15.0, ratio, 0.02))
        if diag.label != last:
            score = "-" if diag.score is None else f"{diag.score:.3f}"
            print(f"  ratio {ratio:4.2f}  score {score:>6s}  {diag.label}")
            last = diag.label


def rule_gap() -> None:
    diag = infer(features(15.0, 0.85, 0.5))
    print(f"\nbig nucleus plus heavy granules matches no rule -> {diag.label}"
          f" (fired: {len(diag.fired)})")


if __name__ == "__main__":
    walkthrough()
    nucleus_sweep()
    rule_gap()
