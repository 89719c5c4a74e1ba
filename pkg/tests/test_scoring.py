from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairgauge.citations import CitationRecord, merge_citations
from fairgauge.licensing import CompatibilityMatrix, Dependency, audit_compatibility
from fairgauge.model import (
    CheckResult,
    FairnessAssessment,
    FileInventory,
    IssueStats,
    ScoreCard,
    ScoreWeights,
    display_percent,
)
from fairgauge.reuse import ReuseReport
from fairgauge.scoring import (
    build_scorecard,
    documentation_score,
    impact_score,
    maintainability_score,
    quality_score,
)

FITTED = ScoreWeights()  # quality group (3, 2, 2, 1), impact group (1, 1, 1)


def fairness(passed: int) -> FairnessAssessment:
    checks = tuple(
        CheckResult(rid, i < passed, ("ok",) if i < passed else ())
        for i, rid in enumerate(("R1", "R2", "R3", "R4", "R5"))
    )
    return FairnessAssessment(checks, passed, 20.0 * passed)


def clean_audit(n: int = 0):
    matrix = CompatibilityMatrix(("MIT",), {("MIT", "MIT"): "compatible"})
    deps = [
        Dependency(name=f"dep{i}", ecosystem="python-package", license_id="MIT") for i in range(n)
    ]
    return audit_compatibility("MIT", deps, matrix)


class TestMaintainabilityScore:
    def test_seven_of_ten(self):
        assert maintainability_score(IssueStats(10, 7)) == 70.0

    def test_all_closed_is_100(self):
        assert maintainability_score(IssueStats(8, 8)) == 100.0

    def test_no_issues_convention(self):
        assert maintainability_score(IssueStats(0, 0)) == 100.0

    def test_property_thousand_random_pairs(self):
        rng = random.Random(0)
        for _ in range(1000):
            total = rng.randrange(0, 500)
            closed = rng.randrange(0, total + 1)
            score = maintainability_score(IssueStats(total, closed))
            assert 0.0 <= score <= 100.0
            if total > 0:
                assert score == pytest.approx(100.0 * closed / total)


class TestDocumentationScore:
    def test_readme_only(self):
        assert documentation_score(FileInventory(has_readme=True, readme_text="x")) == 50.0

    def test_both(self):
        inventory = FileInventory(has_readme=True, readme_text="x", has_docs_dir=True)
        assert documentation_score(inventory) == 100.0

    def test_neither(self):
        assert documentation_score(FileInventory()) == 0.0

    def test_docs_only(self):
        assert documentation_score(FileInventory(has_docs_dir=True)) == 50.0


class TestQualityScore:
    def test_all_hundred_fixed_point(self):
        assert quality_score(100, 100, 100, 100, ScoreWeights(1, 1, 1, 1)) == 100.0

    def test_equal_weights_mean(self):
        weights = ScoreWeights(1, 1, 1, 1)
        assert quality_score(80, 60, 40, 20, weights) == pytest.approx(50.0)

    def test_fitted_weights_reproduce_published_row(self):
        # (100, 100, 100, 50) with weights (3, 2, 2, 1) -> 750/8 = 93.75 -> "94"
        value = quality_score(100, 100, 100, 50, FITTED)
        assert value == pytest.approx(93.75)
        assert display_percent(value) == 94

    def test_equal_inputs_fixed_point(self):
        for x in (0.0, 33.3, 87.5, 100.0):
            assert quality_score(x, x, x, x, FITTED) == pytest.approx(x)

    def test_domain_validation(self):
        with pytest.raises(ValueError, match="s_fair"):
            quality_score(101, 0, 0, 0, FITTED)
        with pytest.raises(ValueError, match="quality weight group"):
            quality_score(50, 50, 50, 50, ScoreWeights(0, 0, 0, 0))

    @given(st.floats(0.01, 100.0))
    def test_homogeneity_under_weight_scaling(self, factor):
        base = ScoreWeights(3, 2, 2, 1)
        scaled = ScoreWeights(3 * factor, 2 * factor, 2 * factor, 1 * factor)
        original = quality_score(80, 60, 40, 20, base)
        rescaled = quality_score(80, 60, 40, 20, scaled)
        assert abs(original - rescaled) <= 1e-9

    def test_monotone_in_each_subscore(self):
        weights = ScoreWeights(3, 2, 2, 1)
        base = quality_score(50, 50, 50, 50, weights)
        assert quality_score(60, 50, 50, 50, weights) > base
        assert quality_score(50, 60, 50, 50, weights) > base
        assert quality_score(50, 50, 60, 50, weights) > base
        assert quality_score(50, 50, 50, 60, weights) > base


class TestImpactScore:
    def test_projection_identity(self):
        weights = ScoreWeights(w_citations=0, w_reuse=0, w_quality=1)
        assert impact_score(50, 10, 73.25, weights) == 73.25

    def test_equal_weights_hand_value(self):
        weights = ScoreWeights(w_citations=1, w_reuse=1, w_quality=1)
        assert impact_score(10, 2, 60, weights) == pytest.approx(24.0)

    def test_raw_value_not_clamped(self):
        weights = ScoreWeights(w_citations=1, w_reuse=0, w_quality=0)
        assert impact_score(500, 0, 50, weights) == 500.0

    def test_count_cap(self):
        weights = ScoreWeights(w_citations=1, w_reuse=1, w_quality=1)
        capped = impact_score(1000, 1000, 0, weights, count_cap=100)
        assert capped == pytest.approx(200 / 3)

    def test_monotonicity(self):
        weights = ScoreWeights(w_citations=1, w_reuse=1, w_quality=1)
        base = impact_score(10, 5, 50, weights)
        assert impact_score(11, 5, 50, weights) > base
        assert impact_score(10, 6, 50, weights) > base
        assert impact_score(10, 5, 51, weights) > base

    def test_domain_validation(self):
        weights = ScoreWeights()
        with pytest.raises(ValueError):
            impact_score(-1, 0, 50, weights)
        with pytest.raises(ValueError):
            impact_score(0, 0, 150, weights)


class TestBuildScorecard:
    def make_inputs(self, n_citations=4):
        citations = merge_citations(
            [
                CitationRecord(
                    title=f"P{i}", authors=("A",), source_catalog="openalex", doi=f"10.1/p{i}"
                )
                for i in range(n_citations)
            ]
        )
        reuse = ReuseReport(matches=(), n_reuse_projects=0)
        return citations, reuse

    def test_published_style_regression(self):
        # fairness 4/5, clean licenses, 29 of 30 issues closed, full docs:
        # (80*3 + 100*2 + 96.67*2 + 100*1) / 8 = 91.67 -> displayed 92
        citations, reuse = self.make_inputs()
        inventory = FileInventory(has_readme=True, readme_text="x", has_docs_dir=True)
        card = build_scorecard(
            fairness(4), clean_audit(3), IssueStats(30, 29), inventory, citations, reuse, FITTED
        )
        assert display_percent(card.s_quality) == 92
        assert card.s_fair == 80.0
        assert card.s_license == 100.0
        assert card.s_maintainability == pytest.approx(100 * 29 / 30)
        assert card.s_documentation == 100.0

    def test_zero_everything(self):
        citations, reuse = self.make_inputs(n_citations=0)
        card = build_scorecard(
            fairness(0), clean_audit(0), IssueStats(0, 0), FileInventory(),
            citations, reuse, ScoreWeights(),
        )
        assert card.s_fair == 0.0
        assert card.n_citations == 0
        assert card.n_reuse_projects == 0

    def test_json_round_trip(self):
        citations, reuse = self.make_inputs()
        inventory = FileInventory(has_readme=True, readme_text="x")
        card = build_scorecard(
            fairness(3), clean_audit(2), IssueStats(4, 1), inventory, citations, reuse, FITTED
        )
        assert ScoreCard.from_dict(card.to_dict()) == card

    def test_heavily_cited_impact_clamps_at_display_scale(self):
        # 400 citing works with citation-only weights: raw combination is 400,
        # the card stores the display-scale 100
        citations, reuse = self.make_inputs(n_citations=400)
        weights = ScoreWeights(w_citations=1, w_reuse=0, w_quality=0)
        inventory = FileInventory(has_readme=True, readme_text="x")
        card = build_scorecard(
            fairness(5), clean_audit(0), IssueStats(0, 0), inventory, citations, reuse, weights
        )
        assert impact_score(400, 0, card.s_quality, weights) == 400.0
        assert card.s_impact == 100.0

    def test_count_cap_recorded_in_card(self):
        citations, reuse = self.make_inputs(n_citations=50)
        weights = ScoreWeights(w_citations=1, w_reuse=1, w_quality=1)
        inventory = FileInventory(has_readme=True, readme_text="x")
        card = build_scorecard(
            fairness(5), clean_audit(0), IssueStats(0, 0), inventory, citations, reuse,
            weights, count_cap=10,
        )
        assert card.n_citations == 10
        assert ScoreCard.from_dict(card.to_dict()) == card
