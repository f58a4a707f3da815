"""Membership functions, rule firing and the Sugeno weighted average.

Pinned degree values below were worked out by hand from the break point
tables before the implementation existed.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bloodsmear.features import CellFeatures
from bloodsmear.fuzzy import (
    LABEL_ALL,
    LABEL_AML_M3,
    LABEL_HEALTHY,
    LABEL_UNIDENTIFIED,
    VAR_GRANULE,
    VAR_NUCLEUS,
    VAR_WBC,
    WILDCARD,
    Firing,
    FuzzyError,
    FuzzyModel,
    FuzzyRule,
    FuzzyTerm,
    FuzzyVariable,
    classify,
    default_model,
    default_rules,
    default_variables,
    fire_rules,
    fuzzify,
    infer,
    membership,
    weighted_average,
)


def features(diameter_um, nucleus, granule):
    # area consistent with the diameter under the rounded pi
    area = 3.14 * (diameter_um / 2.0) ** 2
    return CellFeatures(
        wbc_area_um2=area,
        wbc_diameter_um=diameter_um,
        nucleus_ratio=nucleus,
        granule_ratio=granule,
    )


TRI = FuzzyTerm("M", 10.0, 15.0, 30.0, "triangle")
UP = FuzzyTerm("B", 15.0, 25.0, 60.0, "ramp-up")
DOWN = FuzzyTerm("S", 6.0, 10.0, 15.0, "ramp-down")


class TestCompatMembership:
    """Semantics that reproduce the published worked figures."""

    def test_triangle_falling_side_uses_full_support(self):
        # (30 - 16.92) / (30 - 10) = 0.654
        assert membership(16.92, TRI) == pytest.approx(0.654, abs=1e-12)

    def test_ramp_up_rising_side_uses_full_support(self):
        # (16.92 - 15) / (60 - 15) = 0.0426...
        assert membership(16.92, UP) == pytest.approx(1.92 / 45, abs=1e-12)

    def test_ramp_saturates_at_elbow(self):
        assert membership(25.0, UP) == 1.0
        assert membership(59.0, UP) == 1.0
        assert membership(10.0, DOWN) == 1.0
        assert membership(6.0, DOWN) == 1.0
        assert membership(5.0, DOWN) == 1.0  # below the support, still left of b

    def test_triangle_peak_is_exactly_one(self):
        assert membership(15.0, TRI) == 1.0

    def test_triangle_jump_at_peak(self):
        # rising side just left of b: (15 - eps - 10) / 20 -> 0.25
        assert membership(14.999999, TRI) == pytest.approx(0.25, abs=1e-6)
        # falling side just right: (30 - 15 - eps) / 20 -> 0.75
        assert membership(15.000001, TRI) == pytest.approx(0.75, abs=1e-6)

    def test_outside_support_is_zero(self):
        assert membership(9.0, TRI) == 0.0
        assert membership(31.0, TRI) == 0.0
        assert membership(14.0, UP) == 0.0
        assert membership(15.1, DOWN) == 0.0

    def test_nucleus_medium_worked_value(self):
        term = FuzzyTerm("M", 0.2, 0.5, 0.7, "triangle")
        # (0.7 - 0.53) / (0.7 - 0.2) = 0.34
        assert membership(0.53, term) == pytest.approx(0.34, abs=1e-12)

    def test_granule_big_saturated_worked_value(self):
        term = FuzzyTerm("B", 0.1, 0.3, 1.0, "ramp-up")
        assert membership(0.41, term) == 1.0


class TestStandardMembership:
    def test_triangle_classic_slopes(self):
        assert membership(12.5, TRI, "standard") == pytest.approx(0.5)
        assert membership(22.5, TRI, "standard") == pytest.approx(0.5)
        assert membership(15.0, TRI, "standard") == 1.0

    def test_continuity_at_peak(self):
        eps = 1e-9
        lo = membership(15.0 - eps, TRI, "standard")
        hi = membership(15.0 + eps, TRI, "standard")
        assert lo == pytest.approx(1.0, abs=1e-8)
        assert hi == pytest.approx(1.0, abs=1e-8)

    def test_ramps(self):
        assert membership(20.0, UP, "standard") == pytest.approx(0.5)
        assert membership(12.5, DOWN, "standard") == pytest.approx(0.5)
        assert membership(30.0, UP, "standard") == 1.0
        assert membership(8.0, DOWN, "standard") == 1.0

    def test_unknown_mode_rejected(self):
        with pytest.raises(FuzzyError):
            membership(1.0, TRI, "compat")


@settings(max_examples=400)
@given(
    x=st.floats(min_value=-100, max_value=200, allow_nan=False),
    mode=st.sampled_from(["standard", "paper-compat"]),
)
def test_membership_always_in_unit_interval(x, mode):
    for var in default_variables():
        for term in var.terms:
            value = membership(x, term, mode)
            assert 0.0 <= value <= 1.0


def test_term_validation():
    with pytest.raises(FuzzyError):
        FuzzyTerm("x", 3.0, 2.0, 4.0, "triangle")
    with pytest.raises(FuzzyError):
        FuzzyTerm("x", 1.0, 1.0, 1.0, "triangle")
    with pytest.raises(FuzzyError):
        FuzzyTerm("x", 0.0, 0.5, 1.0, "trapezoid")


class TestRuleBank:
    def test_ten_rules_with_known_levels(self):
        rules = default_rules()
        assert len(rules) == 10
        assert sorted(r.z for r in rules) == [0, 0, 0, 0, 0, 1, 2, 2, 2, 2]

    def test_small_cell_rule_ignores_nucleus(self):
        assert default_rules()[0].antecedents[1][1] == WILDCARD

    def test_wildcard_skipped_in_min(self):
        degrees = {
            VAR_WBC: {"Small": 0.7, "Medium": 0.0, "Big": 0.0},
            VAR_NUCLEUS: {"Small": 0.0, "Medium": 0.0, "Big": 0.0},
            VAR_GRANULE: {"Small": 0.9, "Big": 0.0},
        }
        firings = fire_rules(degrees, default_rules())
        # only rule 0 (Small, -, Small) can fire; nucleus all-zero is skipped
        assert firings == [Firing(strength=0.7, z=0, rule=0)]

    def test_all_wildcard_rule_fires_at_full_strength(self):
        rule = FuzzyRule(antecedents=((VAR_WBC, WILDCARD),), z=1)
        firings = fire_rules({VAR_WBC: {"Small": 0.0}}, (rule,))
        assert firings == [Firing(strength=1.0, z=1, rule=0)]

    def test_zero_strength_rules_omitted(self):
        degrees = {
            VAR_WBC: {"Small": 0.0, "Medium": 0.0, "Big": 0.0},
            VAR_NUCLEUS: {"Small": 0.0, "Medium": 0.0, "Big": 0.0},
            VAR_GRANULE: {"Small": 0.0, "Big": 0.0},
        }
        assert fire_rules(degrees, default_rules()) == []

    def test_unknown_label_in_rule_raises(self):
        with pytest.raises(FuzzyError):
            fire_rules({VAR_WBC: {"Small": 1.0}}, (FuzzyRule(((VAR_WBC, "Huge"),), 0),))


class TestWeightedAverage:
    def test_plain_average(self):
        firings = [Firing(0.5, 0, 0), Firing(0.5, 2, 1)]
        assert weighted_average(firings) == pytest.approx(1.0)

    def test_empty_is_none(self):
        assert weighted_average([]) is None

    def test_single_level_collapses_to_that_level(self):
        firings = [Firing(0.34, 2, 4), Firing(0.0426667, 2, 9)]
        assert weighted_average(firings) == 2.0


class TestClassify:
    @pytest.mark.parametrize(
        "score,label",
        [
            (0.0, LABEL_HEALTHY),
            (0.49, LABEL_HEALTHY),
            (0.5, LABEL_ALL),
            (0.75, LABEL_ALL),
            (1.0, LABEL_ALL),
            (1.01, LABEL_AML_M3),
            (2.0, LABEL_AML_M3),
        ],
    )
    def test_bands(self, score, label):
        assert classify(score).label == label

    def test_none_is_unidentified(self):
        diag = classify(None)
        assert diag.label == LABEL_UNIDENTIFIED
        assert diag.score is None

    @pytest.mark.parametrize("score", [-0.1, 2.1])
    def test_out_of_range_rejected(self, score):
        with pytest.raises(FuzzyError):
            classify(score)

    def test_band_validation(self):
        with pytest.raises(FuzzyError):
            FuzzyModel(bands=(1.0, 0.5))


class TestWorkedExample:
    """A promyelocyte-sized cell: diameter 16.92 um, nucleus 0.53, granule 0.41."""

    def test_degrees(self):
        degrees = fuzzify(features(16.92, 0.53, 0.41), default_model())
        assert degrees[VAR_WBC]["Small"] == 0.0
        assert degrees[VAR_WBC]["Medium"] == pytest.approx(0.654, abs=1e-12)
        assert degrees[VAR_WBC]["Big"] == pytest.approx(1.92 / 45, abs=1e-12)
        assert degrees[VAR_NUCLEUS]["Small"] == 0.0
        assert degrees[VAR_NUCLEUS]["Medium"] == pytest.approx(0.34, abs=1e-12)
        assert degrees[VAR_NUCLEUS]["Big"] == 0.0
        assert degrees[VAR_GRANULE]["Small"] == 0.0
        assert degrees[VAR_GRANULE]["Big"] == 1.0

    def test_two_rules_fire(self):
        degrees = fuzzify(features(16.92, 0.53, 0.41), default_model())
        firings = fire_rules(degrees, default_rules())
        assert [(f.rule, f.z) for f in firings] == [(4, 2), (9, 2)]
        assert firings[0].strength == pytest.approx(0.34, abs=1e-12)
        assert firings[1].strength == pytest.approx(1.92 / 45, abs=1e-12)

    def test_score_is_exactly_two(self):
        diag = infer(features(16.92, 0.53, 0.41))
        assert diag.score == 2.0
        assert diag.label == LABEL_AML_M3

    def test_standard_mode_agrees_on_the_label_here(self):
        diag = infer(features(16.92, 0.53, 0.41), mode="standard")
        assert diag.label == LABEL_AML_M3


class TestInferBands:
    def test_healthy_cell(self):
        diag = infer(features(9.0, 0.15, 0.05))
        assert diag.label == LABEL_HEALTHY

    def test_lymphoblast_like_cell(self):
        # medium cell, big nucleus, few granules: rule 5 (z=1) dominates
        diag = infer(features(15.0, 0.8, 0.05))
        assert diag.label == LABEL_ALL
        assert diag.score == pytest.approx(1.0)

    def test_gap_in_rule_bank_gives_unidentified(self):
        # big nucleus with many granules matches no rule
        diag = infer(features(15.0, 0.85, 0.5))
        assert diag.label == LABEL_UNIDENTIFIED
        assert diag.fired == ()

    def test_unidentified_iff_nothing_fired(self):
        grid = [
            features(d, n, g)
            for d in (5.0, 9.0, 13.0, 17.0, 28.0, 45.0)
            for n in (0.05, 0.25, 0.55, 0.8, 0.95)
            for g in (0.02, 0.15, 0.45, 0.9)
        ]
        for feats in grid:
            diag = infer(feats)
            assert (diag.label == LABEL_UNIDENTIFIED) == (len(diag.fired) == 0)
            if diag.score is not None:
                assert 0.0 <= diag.score <= 2.0


def test_variable_lookup_errors():
    model = default_model()
    with pytest.raises(FuzzyError):
        model.variable("plasma")
    with pytest.raises(FuzzyError):
        model.variable(VAR_WBC).term("Giant")
    with pytest.raises(FuzzyError):
        FuzzyVariable("v", (FuzzyTerm("X", 0, 1, 2, "triangle"), FuzzyTerm("X", 0, 1, 2, "triangle")))
