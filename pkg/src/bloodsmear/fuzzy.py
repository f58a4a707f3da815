"""Zero-order Sugeno fuzzy classifier over the three morphology features.

Rules combine antecedent memberships with min, each fired rule contributes a
constant output level, and the crisp score is the weighted average of levels
by firing strength. Score bands map to the final label; when no rule fires
the cell is Unidentified.

Two membership evaluation modes exist:

* "standard": conventional shapes. Triangles rise on [a, b] and fall on
  [b, c]; shoulder ramps saturate past their elbow.
* "paper-compat" (default): ramps run over the full [a, c] support on the
  rising or falling side, with hard saturation at the elbow b. Triangles
  evaluate (x - a) / (c - a) below the peak and (c - x) / (c - a) above it,
  with an exact 1 at x = b. This mode reproduces published worked figures
  digit for digit; the price is a jump discontinuity at b.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .features import CellFeatures

LABEL_ALL = "ALL"
LABEL_AML_M3 = "AML-M3"
LABEL_HEALTHY = "Healthy"
LABEL_UNIDENTIFIED = "Unidentified"

MODES = ("standard", "paper-compat")

WILDCARD = "-"


class FuzzyError(ValueError):
    """Raised for malformed terms, variables, rules, or out-of-range scores."""


@dataclass(frozen=True)
class FuzzyTerm:
    """A labeled membership function with break points a <= b <= c.

    shape is one of "ramp-down" (full membership left of b), "triangle"
    (peak at b), "ramp-up" (full membership right of b).
    """

    label: str
    a: float
    b: float
    c: float
    shape: str

    def __post_init__(self):
        if self.shape not in ("ramp-down", "triangle", "ramp-up"):
            raise FuzzyError(f"unknown shape {self.shape!r}")
        if not (self.a <= self.b <= self.c):
            raise FuzzyError(f"break points must be ordered, got {self.a}, {self.b}, {self.c}")
        if self.a == self.c:
            raise FuzzyError("term support cannot be a single point")


def membership(x: float, term: FuzzyTerm, mode: str = "paper-compat") -> float:
    """Degree of membership of x in term, in [0, 1]."""
    if mode not in MODES:
        raise FuzzyError(f"unknown mode {mode!r}")
    a, b, c = term.a, term.b, term.c
    if mode == "paper-compat":
        rise_span = c - a
        if term.shape == "ramp-up":
            if x < a:
                return 0.0
            if x >= b:
                return 1.0
            return (x - a) / rise_span
        if term.shape == "ramp-down":
            if x <= b:
                return 1.0
            if x > c:
                return 0.0
            return (c - x) / rise_span
        # triangle
        if x < a or x > c:
            return 0.0
        if x == b:
            return 1.0
        if x < b:
            return (x - a) / rise_span
        return (c - x) / rise_span

    # standard shapes
    if term.shape == "ramp-up":
        if x >= b:
            return 1.0
        if x <= a:
            return 0.0
        return (x - a) / (b - a)
    if term.shape == "ramp-down":
        if x <= b:
            return 1.0
        if x >= c:
            return 0.0
        return (c - x) / (c - b)
    if x <= a or x >= c:
        return 0.0
    if x == b:
        return 1.0
    if x < b:
        return (x - a) / (b - a)
    return (c - x) / (c - b)


@dataclass(frozen=True)
class FuzzyVariable:
    name: str
    terms: tuple[FuzzyTerm, ...]

    def __post_init__(self):
        labels = [t.label for t in self.terms]
        if len(labels) != len(set(labels)):
            raise FuzzyError(f"variable {self.name}: duplicate term labels")
        if not self.terms:
            raise FuzzyError(f"variable {self.name}: needs at least one term")

    def term(self, label: str) -> FuzzyTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise FuzzyError(f"variable {self.name}: no term {label!r}")


@dataclass(frozen=True)
class FuzzyRule:
    """Antecedent term labels per variable ("-" is a wildcard) -> level z."""

    antecedents: tuple[tuple[str, str], ...]  # (variable name, term label or "-")
    z: int

    def __post_init__(self):
        if self.z not in (0, 1, 2):
            raise FuzzyError(f"rule output level must be 0, 1 or 2, got {self.z}")


class Firing(NamedTuple):
    strength: float
    z: int
    rule: int


VAR_WBC = "wbc_area"
VAR_NUCLEUS = "nucleus_ratio"
VAR_GRANULE = "granule_ratio"

S, M, B = "Small", "Medium", "Big"


def default_variables() -> tuple[FuzzyVariable, ...]:
    """The stock linguistic variables.

    The cell-size variable is fed the equivalent circular diameter in
    microns, not the raw area, so its break points are micron lengths.
    """
    return (
        FuzzyVariable(
            VAR_WBC,
            (
                FuzzyTerm(S, 6.0, 10.0, 15.0, "ramp-down"),
                FuzzyTerm(M, 10.0, 15.0, 30.0, "triangle"),
                FuzzyTerm(B, 15.0, 25.0, 60.0, "ramp-up"),
            ),
        ),
        FuzzyVariable(
            VAR_NUCLEUS,
            (
                FuzzyTerm(S, 0.0, 0.2, 0.3, "ramp-down"),
                FuzzyTerm(M, 0.2, 0.5, 0.7, "triangle"),
                FuzzyTerm(B, 0.6, 0.75, 1.0, "ramp-up"),
            ),
        ),
        FuzzyVariable(
            VAR_GRANULE,
            (
                FuzzyTerm(S, 0.0, 0.1, 0.2, "ramp-down"),
                FuzzyTerm(B, 0.1, 0.3, 1.0, "ramp-up"),
            ),
        ),
    )


def _rule(wbc: str, nucleus: str, granule: str, z: int) -> FuzzyRule:
    return FuzzyRule(
        antecedents=((VAR_WBC, wbc), (VAR_NUCLEUS, nucleus), (VAR_GRANULE, granule)),
        z=z,
    )


def default_rules() -> tuple[FuzzyRule, ...]:
    """The ten-rule bank. Level 0 = healthy, 1 = lymphoblast, 2 = promyelocyte."""
    return (
        _rule(S, WILDCARD, S, 0),
        _rule(M, S, S, 0),
        _rule(M, S, B, 2),
        _rule(M, M, S, 0),
        _rule(M, M, B, 2),
        _rule(M, B, S, 1),
        _rule(B, S, S, 0),
        _rule(B, S, B, 2),
        _rule(B, M, S, 0),
        _rule(B, M, B, 2),
    )


DEFAULT_BANDS = (0.5, 1.0)


@dataclass(frozen=True)
class FuzzyModel:
    variables: tuple[FuzzyVariable, ...] = field(default_factory=default_variables)
    rules: tuple[FuzzyRule, ...] = field(default_factory=default_rules)
    bands: tuple[float, float] = DEFAULT_BANDS

    def __post_init__(self):
        names = {v.name for v in self.variables}
        for i, rule in enumerate(self.rules):
            for var_name, label in rule.antecedents:
                if var_name not in names:
                    raise FuzzyError(f"rule {i}: unknown variable {var_name!r}")
                if label != WILDCARD:
                    self.variable(var_name).term(label)  # raises if missing
        lo, hi = self.bands
        if not 0 < lo < hi <= 2:
            raise FuzzyError(f"bands must satisfy 0 < lo < hi <= 2, got {self.bands}")

    def variable(self, name: str) -> FuzzyVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise FuzzyError(f"no variable {name!r}")


def default_model() -> FuzzyModel:
    return FuzzyModel()


def fuzzify(
    features: CellFeatures,
    model: FuzzyModel,
    mode: str = "paper-compat",
) -> dict[str, dict[str, float]]:
    """Membership degrees per variable and term for one cell's features."""
    inputs = {
        VAR_WBC: features.wbc_diameter_um,
        VAR_NUCLEUS: features.nucleus_ratio,
        VAR_GRANULE: features.granule_ratio,
    }
    degrees: dict[str, dict[str, float]] = {}
    for var in model.variables:
        x = inputs[var.name]
        degrees[var.name] = {t.label: membership(x, t, mode) for t in var.terms}
    return degrees


def fire_rules(degrees: dict[str, dict[str, float]], rules: tuple[FuzzyRule, ...]) -> list[Firing]:
    """Evaluate every rule; returns only rules with positive strength.

    Strength is the min over non-wildcard antecedent degrees; a rule with
    every antecedent wildcarded would fire at full strength.
    """
    firings = []
    for i, rule in enumerate(rules):
        strength = 1.0
        for var_name, label in rule.antecedents:
            if label == WILDCARD:
                continue
            try:
                strength = min(strength, degrees[var_name][label])
            except KeyError as exc:
                raise FuzzyError(f"rule {i}: no degree for {var_name}.{label}") from exc
        if strength > 0.0:
            firings.append(Firing(strength=strength, z=rule.z, rule=i))
    return firings


def weighted_average(firings: list[Firing]) -> float | None:
    """Sugeno crisp output: sum(w * z) / sum(w); None when nothing fired."""
    total = sum(f.strength for f in firings)
    if total == 0.0:
        return None
    return sum(f.strength * f.z for f in firings) / total


@dataclass(frozen=True)
class Diagnosis:
    label: str
    score: float | None  # weighted average; None when no rule fired
    fired: tuple[Firing, ...]


def classify(
    score: float | None,
    fired: tuple[Firing, ...] = (),
    bands: tuple[float, float] = DEFAULT_BANDS,
) -> Diagnosis:
    """Map a crisp score to a label.

    [0, lo) is healthy, [lo, hi] is lymphoblastic, (hi, 2] is promyelocytic;
    a missing score (no fired rule) is Unidentified. Scores outside [0, 2]
    are rejected since output levels cannot produce them.
    """
    lo, hi = bands
    if score is None:
        return Diagnosis(label=LABEL_UNIDENTIFIED, score=None, fired=fired)
    if not 0.0 <= score <= 2.0:
        raise FuzzyError(f"score must lie in [0, 2], got {score}")
    if score < lo:
        label = LABEL_HEALTHY
    elif score <= hi:
        label = LABEL_ALL
    else:
        label = LABEL_AML_M3
    return Diagnosis(label=label, score=score, fired=fired)


def infer(
    features: CellFeatures,
    model: FuzzyModel | None = None,
    mode: str = "paper-compat",
) -> Diagnosis:
    """Full chain: fuzzify, fire rules, weighted average, label."""
    model = model if model is not None else default_model()
    degrees = fuzzify(features, model, mode)
    fired = fire_rules(degrees, model.rules)
    score = weighted_average(fired)
    return classify(score, tuple(fired), model.bands)
