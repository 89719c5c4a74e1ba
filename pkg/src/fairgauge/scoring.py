"""Maintainability/documentation sub-scores and the two composite scores."""

from __future__ import annotations

from .citations import CitationSet
from .licensing import LicenseAuditResult, license_score
from .model import (
    FairnessAssessment,
    FileInventory,
    IssueStats,
    ScoreCard,
    ScoreWeights,
    combine_impact,
    combine_quality,
    validate_weights,
)
from .reuse import ReuseReport


def maintainability_score(issues: IssueStats) -> float:
    """Percentage of lifetime issues that were closed.

    A repository with no issues at all is not penalized: the score is 100.
    """
    if issues.total_issues == 0:
        return 100.0
    return 100.0 * issues.closed_issues / issues.total_issues


def documentation_score(inventory: FileInventory) -> float:
    """50 points for a README, 50 for a documentation directory."""
    return 50.0 * inventory.has_docs_dir + 50.0 * inventory.has_readme


def quality_score(
    s_fair: float,
    s_license: float,
    s_maintainability: float,
    s_documentation: float,
    weights: ScoreWeights,
) -> float:
    """Weighted mean of the four quality sub-scores, normalized by the weight total."""
    for name, value in (
        ("s_fair", s_fair),
        ("s_license", s_license),
        ("s_maintainability", s_maintainability),
        ("s_documentation", s_documentation),
    ):
        if not 0.0 <= value <= 100.0:
            raise ValueError(f"{name} must be in [0, 100], got {value!r}")
    validate_weights(weights)
    return combine_quality(s_fair, s_license, s_maintainability, s_documentation, weights)


def impact_score(
    n_citations: int,
    n_reuse_projects: int,
    s_quality: float,
    weights: ScoreWeights,
    count_cap: int | None = None,
) -> float:
    """Weighted combination of citation count, reuse count, and quality score.

    Counts enter raw (no normalization); count_cap optionally bounds each
    count before weighting. The raw combination is returned; clamping to the
    0-100 display scale happens when a scorecard or report is built.
    """
    if n_citations < 0 or n_reuse_projects < 0:
        raise ValueError("citation and reuse counts must be >= 0")
    if not 0.0 <= s_quality <= 100.0:
        raise ValueError(f"s_quality must be in [0, 100], got {s_quality!r}")
    validate_weights(weights)
    if count_cap is not None:
        n_citations = min(n_citations, count_cap)
        n_reuse_projects = min(n_reuse_projects, count_cap)
    return combine_impact(n_citations, n_reuse_projects, s_quality, weights)


def build_scorecard(
    fairness: FairnessAssessment,
    license_audit: LicenseAuditResult,
    issues: IssueStats,
    inventory: FileInventory,
    citations: CitationSet,
    reuse: ReuseReport,
    weights: ScoreWeights,
    count_cap: int | None = None,
) -> ScoreCard:
    """Derive every sub-score and both composites into one ScoreCard."""
    s_fair = fairness.s_fair
    s_license = license_score(license_audit.fraction_ok, license_audit.n_licenses)
    s_maintainability = maintainability_score(issues)
    s_documentation = documentation_score(inventory)
    s_quality = quality_score(s_fair, s_license, s_maintainability, s_documentation, weights)
    n_citations = citations.n_citations
    n_reuse_projects = reuse.n_reuse_projects
    if count_cap is not None:
        # The card stores the counts as scored so it stays recomputable; the
        # full citation set travels alongside in the report.
        n_citations = min(n_citations, count_cap)
        n_reuse_projects = min(n_reuse_projects, count_cap)
    raw_impact = impact_score(n_citations, n_reuse_projects, s_quality, weights)
    return ScoreCard(
        s_fair=s_fair,
        s_license=s_license,
        s_maintainability=s_maintainability,
        s_documentation=s_documentation,
        s_quality=s_quality,
        s_impact=min(100.0, raw_impact),
        n_citations=n_citations,
        n_reuse_projects=n_reuse_projects,
        weights=weights,
    )
