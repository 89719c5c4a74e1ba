"""Command-line pipeline: analyze a repository, build a reuse index, show history.

Exit codes: 0 success, 1 fatal error, 2 invalid usage. Analysis degrades
gracefully when optional data sources fail (a catalog outage leaves a note in
the report and a zero citation count); a missing repository is fatal.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlparse

from . import __version__
from .citations import (
    CATALOGS,
    fetch_citing_works,
    field_distribution,
    highlight_paper,
    merge_citations,
    resolve_software_doi,
)
from .fairness import (
    assess_fairness,
    check_r1_public,
    check_r2_license,
    check_r3_registry,
    check_r4_citation,
    check_r5_checklist,
    load_badge_patterns,
)
from .ingest import (
    CachedFetcher,
    ForgeError,
    ResponseCache,
    fetch_issue_stats,
    fetch_repo_metadata,
    scan_repository,
)
from .licensing import (
    CompatibilityMatrix,
    audit_compatibility,
    extract_dependencies,
    generate_sbom,
    load_license_db,
    resolve_licenses,
)
from .model import (
    DEFAULT_WEIGHTS,
    FileInventory,
    IssueStats,
    RepositoryMetadata,
    RepositoryRef,
    RepositorySnapshot,
    parse_instant,
    weights_from_mapping,
)
from .report import (
    ArtifactWriteError,
    HistoryError,
    append_history,
    build_report,
    load_history,
    write_artifacts,
)
from .reuse import ReuseIndex, ReuseReport, build_index, fingerprint_tree, match_repository
from .scoring import build_scorecard

logger = logging.getLogger(__name__)

HISTORY_FILENAME = "history.json"


class ConfigError(Exception):
    """Invalid configuration or usage; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one analyze run needs."""

    ref: RepositoryRef
    out_dir: Path
    weights_path: Path | None = None
    matrix_path: Path | None = None
    license_db_path: Path | None = None
    index_path: Path | None = None
    offline: bool = False
    cache_dir: Path | None = None
    token: str | None = None
    now: datetime | None = None
    count_cap: int | None = None

    def __post_init__(self) -> None:
        if self.offline and self.cache_dir is None:
            raise ConfigError("--offline requires --cache DIR (a populated response cache)")


def parse_target(target: str, checkout: str | None = None) -> RepositoryRef:
    """Accept a forge URL, an owner/name slug, or an existing local directory."""
    local = Path(checkout) if checkout else None
    if "://" in target:
        parsed = urlparse(target)
        parts = [part for part in parsed.path.split("/") if part]
        if not parsed.netloc or len(parts) < 2:
            raise ConfigError(f"cannot parse repository URL {target!r}")
        name = parts[1].removesuffix(".git")
        return RepositoryRef(
            owner=parts[0], name=name, forge_host=parsed.netloc, local_path=local
        )
    path = Path(target)
    if path.is_dir():
        resolved = path.resolve()
        return RepositoryRef(
            owner=resolved.name, name=resolved.name, forge_host=None, local_path=path
        )
    slug = re.fullmatch(r"([A-Za-z0-9._-]+)/([A-Za-z0-9._-]+)", target)
    if slug:
        return RepositoryRef(
            owner=slug.group(1), name=slug.group(2), forge_host="github.com", local_path=local
        )
    raise ConfigError(
        f"target {target!r} is neither a repository URL, an owner/name slug, "
        "nor an existing directory"
    )


def _load_weights(path: Path | None):
    if path is None:
        return DEFAULT_WEIGHTS
    try:
        mapping = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(mapping, dict):
            raise ValueError("weight file must be a flat JSON object of key: number")
        return weights_from_mapping(mapping)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load weights from {path}: {exc}") from exc


def _load_matrix(path: Path | None) -> CompatibilityMatrix:
    try:
        return CompatibilityMatrix.load(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load compatibility matrix from {path}: {exc}") from exc


def _load_db(path: Path | None):
    try:
        return load_license_db(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load license database from {path}: {exc}") from exc


def run_analyze(config: RunConfig) -> int:
    """Execute ingest, checks, audit, harvest, matching, scoring, and reporting."""
    ref = config.ref
    now = config.now or datetime.now(timezone.utc)
    notes: list[str] = []

    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    fetcher = CachedFetcher(cache=cache, offline=config.offline)

    if ref.local_path is not None:
        inventory = scan_repository(ref.local_path)
    else:
        inventory = FileInventory()
        notes.append("no local checkout provided; file-based checks ran on an empty inventory")

    if ref.forge_host is not None:
        metadata = fetch_repo_metadata(ref, fetcher, config.token, now=now)
        try:
            issues = fetch_issue_stats(ref, fetcher, config.token)
        except ForgeError as exc:
            issues = IssueStats(0, 0)
            notes.append(
                f"issue statistics unavailable ({exc}); "
                "maintainability falls back to the no-issues convention"
            )
    else:
        metadata = RepositoryMetadata(
            title=ref.name,
            owner=ref.owner,
            stars=0,
            watchers=0,
            forks=0,
            default_branch="unknown",
            is_public=False,
            assessed_at=now,
            declared_license_id=None,
        )
        issues = IssueStats(0, 0)
        notes.append("forge metadata unavailable for a local-only target; counts default to zero")

    check_r4, cff = check_r4_citation(inventory)
    fairness = assess_fairness(
        [
            check_r1_public(metadata, ref.forge_host or "github.com"),
            check_r2_license(inventory, metadata),
            check_r3_registry(inventory, cff),
            check_r4,
            check_r5_checklist(inventory, load_badge_patterns()),
        ]
    )

    deps = resolve_licenses(extract_dependencies(inventory), _load_db(config.license_db_path))
    sbom = generate_sbom(metadata, deps, now=now)
    root_license = metadata.declared_license_id
    if root_license is None and inventory.license_file is not None:
        notes.append(
            "root license file present but no declared identifier; "
            "compatibility verdicts are 'unknown'"
        )
    audit = audit_compatibility(root_license, deps, _load_matrix(config.matrix_path))

    doi = resolve_software_doi(cff, inventory.readme_text)
    harvested: list = []
    failed_catalogs: list[str] = []
    if doi is None:
        notes.append("no software DOI found in the citation file or README; citation count is 0")
    else:
        for catalog in CATALOGS:
            try:
                harvested.append(fetch_citing_works(doi, catalog, fetcher))
            except (ForgeError, ValueError) as exc:
                failed_catalogs.append(catalog)
                notes.append(f"citation catalog '{catalog}' unavailable: {exc}")
        if failed_catalogs and len(failed_catalogs) == len(CATALOGS):
            notes.append(
                "citations unavailable from every catalog; citation count treated as 0"
            )
    citations = merge_citations(*harvested)
    radar = field_distribution(citations)
    top_paper = highlight_paper(citations)

    if config.index_path is not None:
        index_path = Path(config.index_path)
        if not index_path.exists():
            raise ConfigError(f"reuse index not found: {index_path}")
        index = ReuseIndex.load(index_path)
        local_fingerprints = (
            fingerprint_tree(ref.local_path, ref.slug) if ref.local_path is not None else []
        )
        reuse_report = match_repository(local_fingerprints, index, ref.slug)
    else:
        reuse_report = ReuseReport(matches=(), n_reuse_projects=0)
        notes.append("no reuse index supplied; method reuse count is 0")

    weights = _load_weights(config.weights_path)
    scorecard = build_scorecard(
        fairness, audit, issues, inventory, citations, reuse_report, weights, config.count_cap
    )

    snapshot = RepositorySnapshot(ref=ref, metadata=metadata, issues=issues, inventory=inventory)
    document = build_report(
        snapshot,
        fairness,
        audit,
        sbom,
        citations,
        radar,
        reuse_report,
        scorecard,
        highlight=top_paper,
        notes=tuple(notes),
        now=now,
    )
    history = append_history(document, Path(config.out_dir) / HISTORY_FILENAME)
    written = write_artifacts(document, config.out_dir, history)
    for note in notes:
        logger.warning("%s", note)
    for path in written.values():
        print(f"wrote {path}")
    return 0


def run_build_index(corpus_dir: Path | str, output_path: Path | str) -> int:
    """Index every immediate subdirectory of the corpus as one project."""
    corpus = Path(corpus_dir)
    if not corpus.is_dir():
        print(f"error: corpus directory not found: {corpus}", file=sys.stderr)
        return 1
    projects = [(entry.name, entry) for entry in sorted(corpus.iterdir()) if entry.is_dir()]
    index = build_index(projects)
    index.write(output_path)
    print(
        f"indexed {index.record_count()} methods from {index.project_count} projects "
        f"into {output_path}"
    )
    return 0


def run_history(output_dir: Path | str) -> int:
    """Print the recorded runs and the change between consecutive runs."""
    history_path = Path(output_dir) / HISTORY_FILENAME
    if not history_path.exists():
        print(f"error: no history file at {history_path}", file=sys.stderr)
        return 1
    history = load_history(history_path)
    entries = history.entries
    print(f"run history ({len(entries)} runs)")
    print(f"{'timestamp':<32}{'quality':>10}{'fairness':>10}{'citations':>11}{'reuse':>8}")
    for entry in entries:
        stamp = entry.timestamp.isoformat()
        print(
            f"{stamp:<32}{entry.s_quality:>10.2f}{entry.s_fair:>10.2f}"
            f"{entry.n_citations:>11d}{entry.n_reuse:>8d}"
        )
    if not history.deltas:
        print("first run: no previous run to compare against")
    else:
        print("deltas")
        for index, delta in enumerate(history.deltas, start=1):
            label = f"run {index} -> {index + 1}"
            print(
                f"{label:<32}{delta.s_quality:>+10.2f}{delta.s_fair:>+10.2f}"
                f"{delta.n_citations:>+11d}{delta.n_reuse:>+8d}"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairgauge",
        description="Analyze a repository for FAIRness, license risk, citations, "
        "method reuse, and composite quality/impact scores.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the full analysis pipeline")
    analyze.add_argument("target", help="repository URL, owner/name slug, or local directory")
    analyze.add_argument("--path", help="local checkout to scan when the target is a URL/slug")
    analyze.add_argument("--out", default="fairgauge-out", help="output directory for artifacts")
    analyze.add_argument("--weights", help="weight configuration file (flat JSON object)")
    analyze.add_argument("--matrix", help="license compatibility matrix CSV")
    analyze.add_argument("--license-db", help="package license database (TSV)")
    analyze.add_argument("--index", help="pre-built reuse index (JSON lines)")
    analyze.add_argument("--offline", action="store_true", help="never open a network connection")
    analyze.add_argument("--cache", help="response cache directory (record/replay)")
    analyze.add_argument("--now", help="inject a fixed ISO 8601 clock for reproducible artifacts")
    analyze.add_argument(
        "--count-cap", type=int, help="cap citation/reuse counts before impact weighting"
    )

    build_idx = sub.add_parser("build-index", help="fingerprint a corpus of projects")
    build_idx.add_argument("corpus", help="directory whose subdirectories are projects")
    build_idx.add_argument("--out", default="reuse-index.jsonl", help="index file to write")

    history = sub.add_parser("history", help="print recorded runs and their deltas")
    history.add_argument("out_dir", help="analysis output directory containing history.json")

    return parser


def _analyze_config(args: argparse.Namespace) -> RunConfig:
    ref = parse_target(args.target, args.path)
    now = None
    if args.now:
        try:
            now = parse_instant(args.now)
        except ValueError as exc:
            raise ConfigError(f"--now is not an ISO 8601 instant: {exc}") from exc
    return RunConfig(
        ref=ref,
        out_dir=Path(args.out),
        weights_path=Path(args.weights) if args.weights else None,
        matrix_path=Path(args.matrix) if args.matrix else None,
        license_db_path=Path(args.license_db) if args.license_db else None,
        index_path=Path(args.index) if args.index else None,
        offline=args.offline,
        cache_dir=Path(args.cache) if args.cache else None,
        token=os.environ.get("GITHUB_TOKEN"),
        now=now,
        count_cap=args.count_cap,
    )


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="[%(levelname)s] %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return run_analyze(_analyze_config(args))
        if args.command == "build-index":
            return run_build_index(args.corpus, args.out)
        return run_history(args.out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ForgeError, HistoryError, ArtifactWriteError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
