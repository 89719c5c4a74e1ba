"""Report assembly: canonical JSON document, static HTML, history, artifacts.

Rendering is pure; given the same inputs and an injected clock the artifacts
are byte-identical. The HTML is self-contained (inline CSS, inline SVG radar
chart) and references no external network resources.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from html import escape
from pathlib import Path

import jinja2

from .citations import CitationRecord, CitationSet, RadarData
from .licensing import LicenseAuditResult, SbomDocument
from .model import (
    CheckResult,
    FairnessAssessment,
    RepositorySnapshot,
    ScoreCard,
    display_percent,
    iso_instant,
    parse_instant,
)
from .reuse import ReuseReport

try:
    import fcntl
except ImportError:  # non-POSIX; history writes fall back to no locking
    fcntl = None

SCHEMA_VERSION = "1"

REPORT_SECTIONS = (
    ("overview", "Overview"),
    ("citation", "Citation"),
    ("fairness", "FAIRness"),
    ("license-violation", "License violation"),
    ("impact", "Impact"),
    ("quality-score", "Quality Score"),
    ("impact-history", "Impact History"),
)


class HistoryError(Exception):
    """The history file is corrupt or out of order; it was left untouched."""


class ArtifactWriteError(OSError):
    """An artifact file could not be written."""


@dataclass(frozen=True)
class RepoSummary:
    """The snapshot facts the report displays (no local paths, fully portable)."""

    title: str
    owner: str
    forge_host: str | None
    stars: int
    watchers: int
    forks: int
    default_branch: str
    declared_license_id: str | None
    is_public: bool
    assessed_at: datetime
    total_issues: int
    closed_issues: int
    has_readme: bool
    has_docs_dir: bool

    @classmethod
    def from_snapshot(cls, snapshot: RepositorySnapshot) -> "RepoSummary":
        return cls(
            title=snapshot.metadata.title,
            owner=snapshot.metadata.owner,
            forge_host=snapshot.ref.forge_host,
            stars=snapshot.metadata.stars,
            watchers=snapshot.metadata.watchers,
            forks=snapshot.metadata.forks,
            default_branch=snapshot.metadata.default_branch,
            declared_license_id=snapshot.metadata.declared_license_id,
            is_public=snapshot.metadata.is_public,
            assessed_at=snapshot.metadata.assessed_at,
            total_issues=snapshot.issues.total_issues,
            closed_issues=snapshot.issues.closed_issues,
            has_readme=snapshot.inventory.has_readme,
            has_docs_dir=snapshot.inventory.has_docs_dir,
        )

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "owner": self.owner,
            "forge_host": self.forge_host,
            "stars": self.stars,
            "watchers": self.watchers,
            "forks": self.forks,
            "default_branch": self.default_branch,
            "declared_license_id": self.declared_license_id,
            "is_public": self.is_public,
            "assessed_at": iso_instant(self.assessed_at),
            "total_issues": self.total_issues,
            "closed_issues": self.closed_issues,
            "has_readme": self.has_readme,
            "has_docs_dir": self.has_docs_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RepoSummary":
        kwargs = dict(data)
        kwargs["assessed_at"] = parse_instant(kwargs["assessed_at"])
        return cls(**kwargs)


@dataclass(frozen=True)
class ReportDocument:
    """Everything one analysis run produced, serializable losslessly."""

    repository: RepoSummary
    fairness: FairnessAssessment
    license_audit: LicenseAuditResult
    sbom: SbomDocument
    citations: CitationSet
    radar: RadarData
    reuse: ReuseReport
    scorecard: ScoreCard
    highlight: CitationRecord | None
    generated_at: datetime
    schema_version: str = SCHEMA_VERSION
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "notes", tuple(self.notes))
        if not self.schema_version:
            raise ValueError("schema_version must be present")

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "generated_at": iso_instant(self.generated_at),
            "notes": list(self.notes),
            "repository": self.repository.to_dict(),
            "fairness": {
                "checks": [
                    {
                        "recommendation_id": check.recommendation_id,
                        "passed": check.passed,
                        "evidence": list(check.evidence),
                    }
                    for check in self.fairness.checks
                ],
                "raw_score": self.fairness.raw_score,
                "s_fair": self.fairness.s_fair,
            },
            "license_audit": self.license_audit.to_dict(),
            "sbom": self.sbom.to_dict(),
            "citations": self.citations.to_dict(),
            "radar": self.radar.to_dict(),
            "reuse": self.reuse.to_dict(),
            "highlight": self.highlight.to_dict() if self.highlight else None,
            "scorecard": self.scorecard.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        fairness_data = data["fairness"]
        fairness = FairnessAssessment(
            checks=tuple(
                CheckResult(
                    recommendation_id=item["recommendation_id"],
                    passed=item["passed"],
                    evidence=tuple(item["evidence"]),
                )
                for item in fairness_data["checks"]
            ),
            raw_score=fairness_data["raw_score"],
            s_fair=fairness_data["s_fair"],
        )
        highlight = data.get("highlight")
        return cls(
            repository=RepoSummary.from_dict(data["repository"]),
            fairness=fairness,
            license_audit=LicenseAuditResult.from_dict(data["license_audit"]),
            sbom=SbomDocument.from_dict(data["sbom"]),
            citations=CitationSet.from_dict(data["citations"]),
            radar=RadarData.from_dict(data["radar"]),
            reuse=ReuseReport.from_dict(data["reuse"]),
            scorecard=ScoreCard.from_dict(data["scorecard"]),
            highlight=CitationRecord.from_dict(highlight) if highlight else None,
            generated_at=parse_instant(data["generated_at"]),
            schema_version=data["schema_version"],
            notes=tuple(data.get("notes", ())),
        )


def build_report(
    snapshot: RepositorySnapshot,
    fairness: FairnessAssessment,
    license_audit: LicenseAuditResult,
    sbom: SbomDocument,
    citations: CitationSet,
    radar: RadarData,
    reuse: ReuseReport,
    scorecard: ScoreCard,
    highlight: CitationRecord | None = None,
    notes: tuple[str, ...] = (),
    now: datetime | None = None,
) -> ReportDocument:
    """Assemble the canonical report document; deterministic modulo generated_at."""
    sections = {
        "snapshot": snapshot,
        "fairness": fairness,
        "license_audit": license_audit,
        "sbom": sbom,
        "citations": citations,
        "radar": radar,
        "reuse": reuse,
        "scorecard": scorecard,
    }
    for name, value in sections.items():
        if value is None:
            raise ValueError(f"missing mandatory report section: {name}")
    return ReportDocument(
        repository=RepoSummary.from_snapshot(snapshot),
        fairness=fairness,
        license_audit=license_audit,
        sbom=sbom,
        citations=citations,
        radar=radar,
        reuse=reuse,
        scorecard=scorecard,
        highlight=highlight,
        generated_at=now or datetime.now(timezone.utc),
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class HistoryEntry:
    timestamp: datetime
    s_quality: float
    s_fair: float
    n_citations: int
    n_reuse: int

    def to_dict(self) -> dict:
        return {
            "timestamp": iso_instant(self.timestamp),
            "s_quality": self.s_quality,
            "s_fair": self.s_fair,
            "n_citations": self.n_citations,
            "n_reuse": self.n_reuse,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HistoryEntry":
        return cls(
            timestamp=parse_instant(data["timestamp"]),
            s_quality=float(data["s_quality"]),
            s_fair=float(data["s_fair"]),
            n_citations=int(data["n_citations"]),
            n_reuse=int(data["n_reuse"]),
        )


@dataclass(frozen=True)
class HistoryDelta:
    s_quality: float
    s_fair: float
    n_citations: int
    n_reuse: int


@dataclass(frozen=True)
class ImpactHistory:
    """Append-only run history with fieldwise deltas between consecutive entries."""

    entries: tuple[HistoryEntry, ...]
    deltas: tuple[HistoryDelta, ...]

    @classmethod
    def from_entries(cls, entries) -> "ImpactHistory":
        entries = tuple(entries)
        for previous, current in zip(entries, entries[1:]):
            if current.timestamp <= previous.timestamp:
                raise HistoryError(
                    f"history timestamps are not strictly increasing: "
                    f"{iso_instant(previous.timestamp)} then {iso_instant(current.timestamp)}"
                )
        deltas = tuple(
            HistoryDelta(
                s_quality=current.s_quality - previous.s_quality,
                s_fair=current.s_fair - previous.s_fair,
                n_citations=current.n_citations - previous.n_citations,
                n_reuse=current.n_reuse - previous.n_reuse,
            )
            for previous, current in zip(entries, entries[1:])
        )
        return cls(entries=entries, deltas=deltas)


def _load_history_entries(path: Path) -> list[HistoryEntry]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return [HistoryEntry.from_dict(item) for item in data["entries"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise HistoryError(f"history file {path} is corrupt; refusing to modify it: {exc}") from exc


def load_history(path: Path | str) -> ImpactHistory:
    """Read and validate an existing history file."""
    return ImpactHistory.from_entries(_load_history_entries(Path(path)))


def append_history(report: ReportDocument, path: Path | str) -> ImpactHistory:
    """Append this run to the history file and rewrite it atomically.

    A corrupt or non-monotone file is refused and left byte-for-byte intact.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lock_path = path.with_name(path.name + ".lock")
    with open(lock_path, "w") as lock_file:
        if fcntl is not None:
            fcntl.flock(lock_file, fcntl.LOCK_EX)
        try:
            entries = _load_history_entries(path) if path.exists() else []
            entries.append(
                HistoryEntry(
                    timestamp=report.generated_at,
                    s_quality=report.scorecard.s_quality,
                    s_fair=report.scorecard.s_fair,
                    n_citations=report.scorecard.n_citations,
                    n_reuse=report.scorecard.n_reuse_projects,
                )
            )
            history = ImpactHistory.from_entries(entries)
            payload = json.dumps(
                {"entries": [entry.to_dict() for entry in history.entries]}, indent=2
            )
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_text(payload + "\n", encoding="utf-8")
            os.replace(tmp, path)
        finally:
            if fcntl is not None:
                fcntl.flock(lock_file, fcntl.LOCK_UN)
    return history


def radar_chart_svg(radar: RadarData, size: int = 420) -> str:
    """Render the field distribution as a polar polygon, one axis per field."""
    if not radar.axes:
        return ""
    center = size / 2.0
    radius = size * 0.32
    count_max = max(count for _, count in radar.axes)
    k = len(radar.axes)

    def point(index: int, r: float) -> tuple[float, float]:
        angle = 2.0 * math.pi * index / k - math.pi / 2.0
        return center + r * math.cos(angle), center + r * math.sin(angle)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" '
        f'width="{size}" height="{size}" role="img" class="radar">'
    ]
    for ring in (0.25, 0.5, 0.75, 1.0):
        parts.append(
            f'<circle cx="{center:.1f}" cy="{center:.1f}" r="{radius * ring:.1f}" '
            f'fill="none" stroke="#d5dbe3" stroke-width="1"/>'
        )
    for index, (label, count) in enumerate(radar.axes):
        x, y = point(index, radius)
        lx, ly = point(index, radius * 1.12)
        anchor = "middle"
        if lx < center - 1:
            anchor = "end"
        elif lx > center + 1:
            anchor = "start"
        parts.append(
            f'<line x1="{center:.1f}" y1="{center:.1f}" x2="{x:.1f}" y2="{y:.1f}" '
            f'stroke="#aab4c0" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{lx:.1f}" y="{ly:.1f}" font-size="12" text-anchor="{anchor}" '
            f'fill="#30343a">{escape(label)} ({count})</text>'
        )
    data_points = [
        point(index, radius * count / count_max) for index, (_, count) in enumerate(radar.axes)
    ]
    if len(data_points) >= 3:
        polygon = " ".join(f"{x:.1f},{y:.1f}" for x, y in data_points)
        parts.append(
            f'<polygon points="{polygon}" fill="#4c78a8" fill-opacity="0.35" '
            f'stroke="#4c78a8" stroke-width="2"/>'
        )
    for x, y in data_points:
        parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3.5" fill="#4c78a8"/>')
    parts.append("</svg>")
    return "".join(parts)


_HTML_TEMPLATE = """<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>{{ repo.title }} analysis report</title>
<style>
  body { font-family: Georgia, "Times New Roman", serif; color: #24292f; margin: 0; background: #f6f7f9; }
  main { max-width: 960px; margin: 1.5rem auto; padding: 0 1rem; }
  header.page { background: #24436c; color: #fff; padding: 1.2rem 1rem; }
  header.page h1 { margin: 0; font-size: 1.6rem; }
  header.page p { margin: 0.3rem 0 0; color: #cdd9ea; }
  nav.tabs { margin: 0.8rem 0; }
  nav.tabs a { margin-right: 0.8rem; color: #24436c; }
  section { background: #fff; border: 1px solid #d8dee4; border-radius: 6px; padding: 1rem 1.2rem; margin-bottom: 1rem; }
  h2 { margin-top: 0; font-size: 1.2rem; border-bottom: 1px solid #eceff2; padding-bottom: 0.4rem; }
  table { border-collapse: collapse; width: 100%; font-size: 0.92rem; }
  th, td { text-align: left; padding: 0.35rem 0.5rem; border-bottom: 1px solid #eceff2; vertical-align: top; }
  .score { font-size: 1.4rem; font-weight: bold; }
  .pass { color: #1a7f37; font-weight: bold; }
  .fail { color: #cf222e; font-weight: bold; }
  .verdict-incompatible { color: #cf222e; font-weight: bold; }
  .verdict-compatible { color: #1a7f37; }
  .verdict-unknown { color: #9a6700; }
  .muted { color: #57606a; }
  ul.notes { color: #9a6700; }
  .delta-up { color: #1a7f37; }
  .delta-down { color: #cf222e; }
  @media print { section { break-inside: avoid; border: none; } nav.tabs { display: none; } }
</style>
</head>
<body>
<header class="page">
  <h1>{{ repo.title }}</h1>
  <p>{{ repo.owner }}{% if repo.forge_host %} on {{ repo.forge_host }}{% endif %}
     &middot; assessed {{ generated_at }}</p>
</header>
<main>
{% if notes %}
<ul class="notes">
{% for note in notes %}  <li>{{ note }}</li>
{% endfor %}</ul>
{% endif %}
<nav class="tabs">
{% for section_id, section_title in sections %}  <a href="#{{ section_id }}">{{ section_title }}</a>
{% endfor %}</nav>

<section id="overview">
<h2>Overview</h2>
<table>
  <tr><th>Repository title</th><td>{{ repo.title }}</td></tr>
  <tr><th>Repository owner</th><td>{{ repo.owner }}</td></tr>
  <tr><th>Date of issue</th><td>{{ assessed_at }}</td></tr>
  <tr><th>Repository stars</th><td>{{ repo.stars }}</td></tr>
  <tr><th>Repository watchers</th><td>{{ repo.watchers }}</td></tr>
  <tr><th>Repository forks</th><td>{{ repo.forks }}</td></tr>
</table>
<table>
  <tr>
    <th>Citations</th><th>FAIRness</th><th>Methods matched elsewhere</th>
    <th>Quality score</th><th>Impact score</th>
  </tr>
  <tr>
    <td>{{ card.n_citations }}</td>
    <td>{{ fairness.raw_score }} / 5</td>
    <td>{{ reuse.matches | length }} ({{ card.n_reuse_projects }} projects)</td>
    <td>{{ card.s_quality | percent }}%</td>
    <td>{{ card.s_impact | percent }}%</td>
  </tr>
</table>
</section>

<section id="citation">
<h2>Citation</h2>
{% if citations.records %}
<table>
  <tr><th>Title</th><th>Authors</th><th>Source</th><th>Published</th><th>DOI</th><th>Link</th></tr>
{% for record in citations.records %}  <tr>
    <td>{{ record.title }}</td>
    <td>{{ record.authors | join(", ") }}</td>
    <td>{{ record.source_catalog }}</td>
    <td>{{ record.publication_date or "" }}</td>
    <td>{{ record.doi or "" }}</td>
    <td>{% if record.url %}<a href="{{ record.url }}">paper</a>{% endif %}</td>
  </tr>
{% endfor %}</table>
{% else %}
<p class="muted">No citing works were found for this software.</p>
{% endif %}
</section>

<section id="fairness">
<h2>FAIRness</h2>
<p><span class="score">{{ fairness.raw_score }} / 5</span> recommendations met
   (score {{ fairness.s_fair | percent }}%).</p>
<table>
  <tr><th>Recommendation</th><th>Result</th><th>Evidence</th></tr>
{% for check in fairness.checks %}  <tr>
    <td>{{ check.recommendation_id }}</td>
    <td>{% if check.passed %}<span class="pass">pass</span>{% else %}<span class="fail">fail</span>{% endif %}</td>
    <td>{{ check.evidence | join("; ") }}</td>
  </tr>
{% endfor %}</table>
</section>

<section id="license-violation">
<h2>License violation</h2>
<p>Root license: {{ audit.root_license or "undeclared" }} &middot;
   {{ audit.n_licenses }} dependency licenses, {{ audit.violated_count }} violations
   &middot; license score {{ card.s_license | percent }}%.</p>
{% if audit.findings %}
<table>
  <tr><th>Dependency</th><th>Version</th><th>Ecosystem</th><th>License</th><th>Verdict</th><th>Rationale</th></tr>
{% for finding in audit.findings %}  <tr>
    <td>{{ finding.dependency.name }}</td>
    <td>{{ finding.dependency.version or "" }}</td>
    <td>{{ finding.dependency.ecosystem }}</td>
    <td>{{ finding.dependency.license_id or "unknown" }}</td>
    <td class="verdict-{{ finding.verdict }}">{{ finding.verdict }}</td>
    <td>{{ finding.rationale }}</td>
  </tr>
{% endfor %}</table>
{% else %}
<p class="muted">No dependencies were found to audit.</p>
{% endif %}
</section>

<section id="impact">
<h2>Impact</h2>
<p>Cited {{ card.n_citations }} times; methods reused in {{ card.n_reuse_projects }}
   other projects; impact score {{ card.s_impact | percent }}%.</p>
{% if radar_svg %}
{{ radar_svg | safe }}
{% else %}
<p class="muted">No citations, so there is no field distribution to chart.</p>
{% endif %}
{% if highlight %}
<p>Most significant citing paper (by its own citation count):
   <strong>{{ highlight.title }}</strong>
   {% if highlight.venue %}({{ highlight.venue }}){% endif %}
   {% if highlight.cited_by_count is not none %} &middot; cited {{ highlight.cited_by_count }} times{% endif %}</p>
{% endif %}
{% if reuse.matches %}
<table>
  <tr><th>Local method</th><th>Matched in</th><th>Direction</th></tr>
{% for match in reuse.matches %}  <tr>
    <td>{{ match.local.method }} ({{ match.local.file }}:{{ match.local.line }})</td>
    <td>{% for entry in match.remote %}{{ entry.project }}:{{ entry.file }}:{{ entry.line }}{% if not loop.last %}, {% endif %}{% endfor %}</td>
    <td>{{ match.direction }}</td>
  </tr>
{% endfor %}</table>
{% endif %}
</section>

<section id="quality-score">
<h2>Quality Score</h2>
<p><span class="score">{{ card.s_quality | percent }}%</span></p>
<table>
  <tr><th>Factor</th><th>Score</th><th>Weight</th></tr>
  <tr><td>FAIRness</td><td>{{ card.s_fair | percent }}%</td><td>{{ weights.w_fair }}</td></tr>
  <tr><td>Licenses</td><td>{{ card.s_license | percent }}%</td><td>{{ weights.w_license }}</td></tr>
  <tr><td>Maintainability</td><td>{{ card.s_maintainability | percent }}%</td><td>{{ weights.w_maintainability }}</td></tr>
  <tr><td>Documentation</td><td>{{ card.s_documentation | percent }}%</td><td>{{ weights.w_documentation }}</td></tr>
</table>
<p class="muted">Closed issues: {{ repo.closed_issues }} of {{ repo.total_issues }};
   README: {{ "yes" if repo.has_readme else "no" }};
   documentation directory: {{ "yes" if repo.has_docs_dir else "no" }}.</p>
</section>

<section id="impact-history">
<h2>Impact History</h2>
{% if history and history.entries | length > 1 %}
<table>
  <tr><th>Run</th><th>Quality</th><th>FAIRness</th><th>Citations</th><th>Reuse</th></tr>
{% for entry in history.entries %}  <tr>
    <td>{{ entry.timestamp.isoformat() }}</td>
    <td>{{ entry.s_quality | percent }}%</td>
    <td>{{ entry.s_fair | percent }}%</td>
    <td>{{ entry.n_citations }}</td>
    <td>{{ entry.n_reuse }}</td>
  </tr>
{% endfor %}</table>
<p>Change since the previous run:
{% set delta = history.deltas[-1] %}
  <span class="{{ 'delta-up' if delta.s_quality >= 0 else 'delta-down' }}">quality {{ "%+.2f" | format(delta.s_quality) }}</span>,
  <span class="{{ 'delta-up' if delta.s_fair >= 0 else 'delta-down' }}">FAIRness {{ "%+.2f" | format(delta.s_fair) }}</span>,
  <span class="{{ 'delta-up' if delta.n_citations >= 0 else 'delta-down' }}">citations {{ "%+d" | format(delta.n_citations) }}</span>,
  <span class="{{ 'delta-up' if delta.n_reuse >= 0 else 'delta-down' }}">reuse {{ "%+d" | format(delta.n_reuse) }}</span>.
</p>
{% elif history and history.entries %}
<p class="muted">First recorded run; future runs will show changes here.</p>
{% else %}
<p class="muted">No run history is available yet.</p>
{% endif %}
</section>
</main>
</body>
</html>
"""

_jinja_env = jinja2.Environment(autoescape=True, undefined=jinja2.StrictUndefined)
_jinja_env.filters["percent"] = display_percent
_template = _jinja_env.from_string(_HTML_TEMPLATE)


def render_html(report: ReportDocument, history: ImpactHistory | None = None) -> str:
    """Render the self-contained seven-section HTML report."""
    return _template.render(
        sections=REPORT_SECTIONS,
        repo=report.repository,
        fairness=report.fairness,
        audit=report.license_audit,
        citations=report.citations,
        reuse=report.reuse,
        card=report.scorecard,
        weights=report.scorecard.weights,
        highlight=report.highlight,
        radar_svg=radar_chart_svg(report.radar) if report.radar.axes else None,
        history=history,
        notes=report.notes,
        generated_at=iso_instant(report.generated_at),
        assessed_at=iso_instant(report.repository.assessed_at),
    )


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def write_artifacts(
    report: ReportDocument,
    output_dir: Path | str,
    history: ImpactHistory | None = None,
) -> dict[str, Path]:
    """Write report.json, report.html, sbom.json, and license-audit.json.

    Returns the written paths keyed by artifact name; the first unwritable
    artifact aborts with an error naming its path.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    license_audit_payload = report.license_audit.to_dict()
    license_audit_payload["s_license"] = report.scorecard.s_license
    artifacts = {
        "report.json": _json_text(report.to_dict()),
        "report.html": render_html(report, history),
        "sbom.json": _json_text(report.sbom.to_dict()),
        "license-audit.json": _json_text(license_audit_payload),
    }
    written: dict[str, Path] = {}
    for name, content in artifacts.items():
        path = out / name
        try:
            path.write_text(content, encoding="utf-8")
        except OSError as exc:
            raise ArtifactWriteError(f"could not write artifact {path}: {exc}") from exc
        written[name] = path
    return written
