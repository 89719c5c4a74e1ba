"""The five FAIR-software recommendation checks and the CITATION.cff parser.

All checks are pure functions of their inputs and work fully offline:
registry presence (R3) and checklist usage (R5) are detected from badge and
DOI patterns rather than live registry queries.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from datetime import date, datetime
from importlib import resources
from pathlib import Path

import yaml

from .model import (
    RECOMMENDATION_IDS,
    CheckResult,
    FairnessAssessment,
    FileInventory,
    RepositoryMetadata,
)

logger = logging.getLogger(__name__)

DOI_RE = re.compile(r"10\.\d+(?:\.\d+)*/[^\s\"'<>)\]]+")

# DOI suffixes that indicate a deposit in a software/community registry.
REGISTRY_DOI_MARKERS = ("zenodo", "figshare", "codeocean", "softwareheritage")

# README link fragments that indicate a registry deposit badge.
REGISTRY_LINK_MARKERS = (
    "zenodo.org/badge",
    "zenodo.org/record",
    "zenodo.org/records",
    "zenodo.org/doi",
    "doi.org/10.5281/zenodo",
)

_BADGE_DATA_FILE = "badge_patterns.txt"


class CffError(ValueError):
    """CITATION.cff could not be parsed into the supported subset."""


@dataclass(frozen=True)
class Author:
    family: str
    given: str = ""
    orcid: str | None = None


@dataclass(frozen=True)
class CitationMetadata:
    """The required subset of a citation file: enough to cite and to find a DOI."""

    cff_version: str
    title: str
    authors: tuple[Author, ...]
    doi: str | None = None
    version: str | None = None
    date_released: date | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "authors", tuple(self.authors))
        if not self.cff_version:
            raise ValueError("cff_version must be non-empty")
        if not self.title:
            raise ValueError("title must be non-empty")
        if not self.authors:
            raise ValueError("authors must be non-empty")
        if self.doi is not None and not re.fullmatch(r"10\.\d+(?:\.\d+)*/\S+", self.doi):
            raise ValueError(f"doi {self.doi!r} does not match 10.<registrant>/<suffix>")


def parse_cff(text: str) -> CitationMetadata:
    """Parse a CITATION.cff document (required-field subset; unknown keys ignored)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise CffError(f"malformed citation file: {exc}") from exc
    if not isinstance(doc, dict):
        raise CffError("citation file is not a mapping")

    for key in ("cff-version", "title"):
        if key not in doc or doc[key] in (None, ""):
            raise CffError(f"citation file is missing required key '{key}'")

    raw_authors = doc.get("authors")
    if not isinstance(raw_authors, list) or not raw_authors:
        raise CffError("citation file must declare a non-empty 'authors' list")
    authors = []
    for entry in raw_authors:
        if not isinstance(entry, dict):
            raise CffError(f"author entry is not a mapping: {entry!r}")
        family = str(entry.get("family-names") or entry.get("name") or "")
        given = str(entry.get("given-names") or "")
        if not family and not given:
            raise CffError(f"author entry has no name: {entry!r}")
        orcid = entry.get("orcid")
        authors.append(Author(family=family, given=given, orcid=str(orcid) if orcid else None))

    doi = doc.get("doi")
    version = doc.get("version")
    released = doc.get("date-released")
    if isinstance(released, datetime):
        released = released.date()
    elif isinstance(released, str):
        try:
            released = date.fromisoformat(released)
        except ValueError as exc:
            raise CffError(f"date-released {released!r} is not an ISO date") from exc

    try:
        return CitationMetadata(
            cff_version=str(doc["cff-version"]),
            title=str(doc["title"]),
            authors=tuple(authors),
            doi=str(doi) if doi else None,
            version=str(version) if version is not None else None,
            date_released=released,
        )
    except ValueError as exc:
        raise CffError(str(exc)) from exc


def _quoted(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_cff(meta: CitationMetadata) -> str:
    """Serialize CitationMetadata back to a minimal citation-file document."""
    lines = [
        f"cff-version: {_quoted(meta.cff_version)}",
        f"title: {_quoted(meta.title)}",
        "authors:",
    ]
    for author in meta.authors:
        lines.append(f"  - family-names: {_quoted(author.family)}")
        if author.given:
            lines.append(f"    given-names: {_quoted(author.given)}")
        if author.orcid:
            lines.append(f"    orcid: {_quoted(author.orcid)}")
    if meta.doi:
        lines.append(f"doi: {_quoted(meta.doi)}")
    if meta.version is not None:
        lines.append(f"version: {_quoted(meta.version)}")
    if meta.date_released is not None:
        lines.append(f"date-released: {_quoted(meta.date_released.isoformat())}")
    return "\n".join(lines) + "\n"


def load_badge_patterns(path: Path | str | None = None) -> tuple[str, ...]:
    """Load checklist badge patterns: one URL substring per line, '#' comments."""
    if path is None:
        text = (resources.files("fairgauge") / "data" / _BADGE_DATA_FILE).read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    patterns = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            patterns.append(line)
    return tuple(patterns)


def check_r1_public(metadata: RepositoryMetadata, forge_host: str = "github.com") -> CheckResult:
    """R1: the repository is publicly accessible under version control."""
    url = f"https://{forge_host}/{metadata.owner}/{metadata.title}"
    if metadata.is_public:
        return CheckResult("R1", True, (f"publicly accessible with version control at {url}",))
    return CheckResult("R1", False, (f"{url} does not resolve without authentication",))


def check_r2_license(inventory: FileInventory, metadata: RepositoryMetadata) -> CheckResult:
    """R2: a license accompanies the repository (root file or forge-declared id)."""
    if inventory.license_file is not None:
        return CheckResult("R2", True, (f"license file present: {inventory.license_file.name}",))
    if metadata.declared_license_id:
        return CheckResult(
            "R2", True, (f"declared license on the forge: {metadata.declared_license_id}",)
        )
    return CheckResult("R2", False, ("no root license file and no declared license id",))


def _cff_for_inventory(inventory: FileInventory) -> CitationMetadata | None:
    if inventory.citation_file is None:
        return None
    try:
        return parse_cff(inventory.citation_file.read_text(encoding="utf-8"))
    except (OSError, CffError):
        return None


def check_r3_registry(
    inventory: FileInventory, cff: CitationMetadata | None = None
) -> CheckResult:
    """R3: the code is registered in a community registry (badge/DOI evidence)."""
    readme = inventory.readme_text or ""
    for marker in REGISTRY_LINK_MARKERS:
        if marker in readme:
            return CheckResult("R3", True, (f"registry badge link in README ({marker})",))
    if inventory.zenodo_file is not None:
        return CheckResult("R3", True, ("registry deposit metadata file .zenodo.json present",))
    if cff is None:
        cff = _cff_for_inventory(inventory)
    if cff is not None and cff.doi:
        suffix = cff.doi.split("/", 1)[1].lower() if "/" in cff.doi else ""
        for marker in REGISTRY_DOI_MARKERS:
            if marker in suffix:
                return CheckResult(
                    "R3", True, (f"citation file DOI points at a registry deposit: {cff.doi}",)
                )
    return CheckResult("R3", False, ("no registry badge, deposit file, or registry DOI found",))


def check_r4_citation(
    inventory: FileInventory,
) -> tuple[CheckResult, CitationMetadata | None]:
    """R4: citation of the software is enabled via a parseable CITATION.cff."""
    if inventory.citation_file is None:
        return CheckResult("R4", False, ("no CITATION.cff at the repository root",)), None
    try:
        text = inventory.citation_file.read_text(encoding="utf-8")
    except OSError as exc:
        return CheckResult("R4", False, (f"CITATION.cff unreadable: {exc}",)), None
    try:
        meta = parse_cff(text)
    except CffError as exc:
        return CheckResult("R4", False, (f"CITATION.cff does not parse: {exc}",)), None
    return CheckResult("R4", True, (f"valid citation file for '{meta.title}'",)), meta


def check_r5_checklist(
    inventory: FileInventory, patterns: tuple[str, ...] | None = None
) -> CheckResult:
    """R5: the README advertises a recognized software quality checklist badge."""
    if patterns is None:
        patterns = load_badge_patterns()
    readme = inventory.readme_text or ""
    for pattern in patterns:
        if pattern in readme:
            return CheckResult("R5", True, (f"quality checklist badge in README ({pattern})",))
    return CheckResult("R5", False, ("no recognized quality checklist badge in README",))


def assess_fairness(checks) -> FairnessAssessment:
    """Combine the five check results into the 0-100 fairness score."""
    checks = list(checks)
    seen: dict[str, CheckResult] = {}
    for check in checks:
        if check.recommendation_id in seen:
            raise ValueError(f"duplicate check for {check.recommendation_id}")
        seen[check.recommendation_id] = check
    missing = [rid for rid in RECOMMENDATION_IDS if rid not in seen]
    if missing:
        raise ValueError(f"missing checks for {', '.join(missing)}")
    ordered = tuple(seen[rid] for rid in RECOMMENDATION_IDS)
    raw = sum(1 for check in ordered if check.passed)
    return FairnessAssessment(checks=ordered, raw_score=raw, s_fair=20.0 * raw)
