"""Shared domain types and the score-weight configuration.

Every type here is an immutable value object: invalid states are rejected at
construction time with a ValueError naming the offending field. The module
performs no I/O.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

RECOMMENDATION_IDS = ("R1", "R2", "R3", "R4", "R5")

SCORE_TOLERANCE = 1e-9

QUALITY_WEIGHT_FIELDS = ("w_fair", "w_license", "w_maintainability", "w_documentation")
IMPACT_WEIGHT_FIELDS = ("w_citations", "w_reuse", "w_quality")


def display_percent(score: float) -> int:
    """Round a 0-100 score half-up to the integer percent shown in reports.

    Scores stay full-precision internally; rounding happens only at render
    time so intermediate results never compound rounding error.
    """
    return int(math.floor(score + 0.5))


def iso_instant(value: datetime) -> str:
    """Serialize a timezone-aware instant to ISO 8601."""
    return value.astimezone(timezone.utc).isoformat()


def parse_instant(text: str) -> datetime:
    """Parse an ISO 8601 instant, accepting a trailing 'Z'."""
    value = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if value.tzinfo is None:
        raise ValueError(f"instant {text!r} has no timezone")
    return value


def _check_score_range(name: str, value: float) -> None:
    if not 0.0 <= value <= 100.0:
        raise ValueError(f"{name} must be in [0, 100], got {value!r}")


@dataclass(frozen=True)
class RepositoryRef:
    """Where an analyzed repository lives: forge coordinates, a local checkout, or both."""

    owner: str
    name: str
    forge_host: str | None = None
    local_path: Path | None = None

    def __post_init__(self) -> None:
        if not self.owner:
            raise ValueError("owner must be non-empty")
        if not self.name:
            raise ValueError("name must be non-empty")
        if self.forge_host is None and self.local_path is None:
            raise ValueError("ref needs forge coordinates or a local path; both are absent")
        if self.local_path is not None and not isinstance(self.local_path, Path):
            object.__setattr__(self, "local_path", Path(self.local_path))

    @property
    def slug(self) -> str:
        return f"{self.owner}/{self.name}"

    def url(self) -> str | None:
        if self.forge_host is None:
            return None
        return f"https://{self.forge_host}/{self.owner}/{self.name}"


@dataclass(frozen=True)
class RepositoryMetadata:
    """Forge-reported facts about the repository at assessment time."""

    title: str
    owner: str
    stars: int
    watchers: int
    forks: int
    default_branch: str
    is_public: bool
    assessed_at: datetime
    declared_license_id: str | None = None

    def __post_init__(self) -> None:
        for counter in ("stars", "watchers", "forks"):
            if getattr(self, counter) < 0:
                raise ValueError(f"{counter} must be >= 0")
        if self.assessed_at.tzinfo is None:
            raise ValueError("assessed_at must be timezone-aware")


@dataclass(frozen=True)
class IssueStats:
    """Lifetime issue counts; pull requests are excluded."""

    total_issues: int
    closed_issues: int

    def __post_init__(self) -> None:
        if self.total_issues < 0:
            raise ValueError("total_issues must be >= 0")
        if self.closed_issues < 0:
            raise ValueError("closed_issues must be >= 0")
        if self.closed_issues > self.total_issues:
            raise ValueError(
                f"closed_issues ({self.closed_issues}) exceeds total_issues ({self.total_issues})"
            )


@dataclass(frozen=True)
class SourceFile:
    path: Path
    language: str


@dataclass(frozen=True)
class FileInventory:
    """File-level facts gathered from a local checkout."""

    has_readme: bool = False
    readme_text: str | None = None
    has_docs_dir: bool = False
    license_file: Path | None = None
    citation_file: Path | None = None
    zenodo_file: Path | None = None
    manifest_files: tuple[Path, ...] = ()
    source_files: tuple[SourceFile, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "manifest_files", tuple(self.manifest_files))
        object.__setattr__(self, "source_files", tuple(self.source_files))
        if self.readme_text is not None and not self.has_readme:
            raise ValueError("readme_text present but has_readme is false")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one of the five recommendation checks."""

    recommendation_id: str
    passed: bool
    evidence: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "evidence", tuple(self.evidence))
        if self.recommendation_id not in RECOMMENDATION_IDS:
            raise ValueError(f"unknown recommendation id {self.recommendation_id!r}")
        if self.passed and not self.evidence:
            raise ValueError(f"{self.recommendation_id} passed without evidence")


@dataclass(frozen=True)
class FairnessAssessment:
    """All five check results plus the derived 0-100 fairness score."""

    checks: tuple[CheckResult, ...]
    raw_score: int
    s_fair: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "checks", tuple(self.checks))
        ids = [check.recommendation_id for check in self.checks]
        if sorted(ids) != sorted(RECOMMENDATION_IDS):
            raise ValueError(f"need exactly one check per recommendation, got {ids}")
        passed = sum(1 for check in self.checks if check.passed)
        if self.raw_score != passed:
            raise ValueError(f"raw_score {self.raw_score} != number of passed checks {passed}")
        if self.s_fair != 20 * self.raw_score:
            raise ValueError(f"s_fair {self.s_fair} != 20 * raw_score {self.raw_score}")


@dataclass(frozen=True)
class ScoreWeights:
    """Weights for the quality combination and the impact combination.

    Defaults for the quality group are a documented reconstruction fitted to
    published per-tool results, not canonical constants; override via the
    weight configuration file. Weights need not sum to 1; each combination
    normalizes by its group total.
    """

    w_fair: float = 3.0
    w_license: float = 2.0
    w_maintainability: float = 2.0
    w_documentation: float = 1.0
    w_citations: float = 1.0
    w_reuse: float = 1.0
    w_quality: float = 1.0

    @property
    def quality_total(self) -> float:
        return self.w_fair + self.w_license + self.w_maintainability + self.w_documentation

    @property
    def impact_total(self) -> float:
        return self.w_citations + self.w_reuse + self.w_quality

    def to_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_WEIGHTS = ScoreWeights()


def weights_from_mapping(mapping: dict[str, float]) -> ScoreWeights:
    """Build ScoreWeights from a flat key-to-number mapping, starting from defaults."""
    known = {f.name for f in fields(ScoreWeights)}
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise ValueError(f"unknown weight keys: {', '.join(unknown)}")
    values = {key: float(value) for key, value in mapping.items()}
    return validate_weights(ScoreWeights(**values))


def validate_weights(weights: ScoreWeights) -> ScoreWeights:
    """Check sign and group-sum constraints; return the weights unchanged."""
    for name in QUALITY_WEIGHT_FIELDS + IMPACT_WEIGHT_FIELDS:
        if getattr(weights, name) < 0:
            raise ValueError(f"{name} must be non-negative")
    if weights.quality_total <= 0:
        raise ValueError("quality weight group sums to zero")
    if weights.impact_total <= 0:
        raise ValueError("impact weight group sums to zero")
    return weights


def combine_quality(
    s_fair: float,
    s_license: float,
    s_maintainability: float,
    s_documentation: float,
    weights: ScoreWeights,
) -> float:
    """Weighted mean of the four quality sub-scores."""
    return (
        s_fair * weights.w_fair
        + s_license * weights.w_license
        + s_maintainability * weights.w_maintainability
        + s_documentation * weights.w_documentation
    ) / weights.quality_total


def combine_impact(
    n_citations: int,
    n_reuse_projects: int,
    s_quality: float,
    weights: ScoreWeights,
) -> float:
    """Weighted combination of citation count, reuse count, and quality score.

    Counts enter as raw values; the result is not clamped here.
    """
    return (
        n_citations * weights.w_citations
        + n_reuse_projects * weights.w_reuse
        + s_quality * weights.w_quality
    ) / weights.impact_total


@dataclass(frozen=True)
class ScoreCard:
    """All sub-scores and both composites, with the weights that produced them.

    The stored composites must recompute from the stored inputs: s_quality via
    the quality combination exactly, s_impact via the impact combination
    clamped to [0, 100] (the card carries the display-scale value; the raw
    combination is available from the scoring operations).
    """

    s_fair: float
    s_license: float
    s_maintainability: float
    s_documentation: float
    s_quality: float
    s_impact: float
    n_citations: int
    n_reuse_projects: int
    weights: ScoreWeights

    def __post_init__(self) -> None:
        for name in (
            "s_fair",
            "s_license",
            "s_maintainability",
            "s_documentation",
            "s_quality",
            "s_impact",
        ):
            _check_score_range(name, getattr(self, name))
        if self.n_citations < 0:
            raise ValueError("n_citations must be >= 0")
        if self.n_reuse_projects < 0:
            raise ValueError("n_reuse_projects must be >= 0")
        validate_weights(self.weights)
        expected_quality = combine_quality(
            self.s_fair, self.s_license, self.s_maintainability, self.s_documentation, self.weights
        )
        if abs(expected_quality - self.s_quality) > SCORE_TOLERANCE:
            raise ValueError(
                f"s_quality {self.s_quality} does not recompute from its inputs "
                f"(expected {expected_quality})"
            )
        expected_impact = min(
            100.0,
            combine_impact(self.n_citations, self.n_reuse_projects, self.s_quality, self.weights),
        )
        if abs(expected_impact - self.s_impact) > SCORE_TOLERANCE:
            raise ValueError(
                f"s_impact {self.s_impact} does not recompute from its inputs "
                f"(expected {expected_impact})"
            )

    def to_dict(self) -> dict:
        return {
            "s_fair": self.s_fair,
            "s_license": self.s_license,
            "s_maintainability": self.s_maintainability,
            "s_documentation": self.s_documentation,
            "s_quality": self.s_quality,
            "s_impact": self.s_impact,
            "n_citations": self.n_citations,
            "n_reuse_projects": self.n_reuse_projects,
            "weights": self.weights.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScoreCard":
        return cls(
            s_fair=data["s_fair"],
            s_license=data["s_license"],
            s_maintainability=data["s_maintainability"],
            s_documentation=data["s_documentation"],
            s_quality=data["s_quality"],
            s_impact=data["s_impact"],
            n_citations=data["n_citations"],
            n_reuse_projects=data["n_reuse_projects"],
            weights=ScoreWeights(**data["weights"]),
        )


@dataclass(frozen=True)
class RepositorySnapshot:
    """Everything gathered about one repository in one analysis run."""

    ref: RepositoryRef
    metadata: RepositoryMetadata
    issues: IssueStats
    inventory: FileInventory
