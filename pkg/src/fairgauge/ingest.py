"""Forge metadata/issue ingestion and local checkout scanning.

Network access goes through a record/replay response cache so analyses can be
re-run offline and tests stay deterministic. In offline mode no connection is
ever opened; a cache miss raises instead.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import quote

import requests

from .model import FileInventory, IssueStats, RepositoryMetadata, RepositoryRef, SourceFile

logger = logging.getLogger(__name__)

DEFAULT_API_BASE = "https://api.github.com"

MANIFEST_NAMES = frozenset(
    {
        "requirements.txt",
        "pyproject.toml",
        "package.json",
        "Cargo.toml",
        "package-lock.json",
        "Cargo.lock",
        "poetry.lock",
    }
)

LANGUAGE_BY_EXTENSION = {
    ".py": "python",
    ".c": "c",
    ".h": "c",
    ".cc": "cpp",
    ".cpp": "cpp",
    ".cxx": "cpp",
    ".hpp": "cpp",
    ".hh": "cpp",
    ".java": "java",
    ".js": "javascript",
    ".jsx": "javascript",
    ".ts": "typescript",
    ".tsx": "typescript",
    ".go": "go",
    ".rs": "rust",
    ".cs": "csharp",
}

_VCS_DIRS = frozenset({".git", ".hg", ".svn"})
_DOCS_DIR_NAMES = frozenset({"docs", "doc", "documentation"})
_LICENSE_STEMS = frozenset({"LICENSE", "COPYING"})


class ForgeError(Exception):
    """Base class for forge/catalog fetch failures."""


class NotFoundError(ForgeError):
    """The requested resource does not exist (or is private without auth)."""


class RateLimitedError(ForgeError):
    """The remote API throttled the request."""

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class TransportError(ForgeError):
    """Connection-level failure."""


class OfflineCacheMissError(TransportError):
    """Offline mode was requested but the cache has no recording for the URL."""


@dataclass(frozen=True)
class CachedResponse:
    url: str
    status: int
    body: bytes
    fetched_at: str
    retry_after: float | None = None


class ResponseCache:
    """One file pair per request key: verbatim body plus a small header record.

    Keys are derived from the full request URL, so replays are byte-identical
    to what was recorded. Writes go through a temp file and rename, which
    serializes concurrent writers per key; reads need no locking.
    """

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key_for(url: str) -> str:
        return hashlib.sha256(url.encode("utf-8")).hexdigest()

    def _paths(self, url: str) -> tuple[Path, Path]:
        key = self.key_for(url)
        return self.directory / f"{key}.body", self.directory / f"{key}.meta.json"

    def get(self, url: str) -> CachedResponse | None:
        body_path, meta_path = self._paths(url)
        if not body_path.exists() or not meta_path.exists():
            return None
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        return CachedResponse(
            url=meta["url"],
            status=int(meta["status"]),
            body=body_path.read_bytes(),
            fetched_at=meta["fetched_at"],
            retry_after=meta.get("retry_after"),
        )

    def put(
        self,
        url: str,
        status: int,
        body: bytes,
        fetched_at: str | None = None,
        retry_after: float | None = None,
    ) -> None:
        body_path, meta_path = self._paths(url)
        if fetched_at is None:
            fetched_at = datetime.now(timezone.utc).isoformat()
        meta = {"url": url, "status": status, "fetched_at": fetched_at}
        if retry_after is not None:
            meta["retry_after"] = retry_after
        for path, payload in (
            (body_path, body),
            (meta_path, json.dumps(meta, indent=1).encode("utf-8")),
        ):
            tmp = path.with_suffix(path.suffix + ".tmp")
            tmp.write_bytes(payload)
            os.replace(tmp, path)


class CachedFetcher:
    """HTTP GET with record/replay semantics over a ResponseCache.

    A cached URL is always replayed, never re-fetched; uncached URLs are
    fetched then recorded. With offline=True the network path is unreachable
    by construction.
    """

    def __init__(
        self,
        cache: ResponseCache | None = None,
        offline: bool = False,
        timeout: float = 30.0,
        user_agent: str = "fairgauge",
    ):
        if offline and cache is None:
            raise ValueError("offline mode requires a response cache")
        self.cache = cache
        self.offline = offline
        self.timeout = timeout
        self.user_agent = user_agent

    def get(self, url: str, headers: dict[str, str] | None = None) -> CachedResponse:
        if self.cache is not None:
            hit = self.cache.get(url)
            if hit is not None:
                return hit
        if self.offline:
            raise OfflineCacheMissError(f"offline mode: no cached response for {url}")

        merged = {"User-Agent": self.user_agent}
        if headers:
            merged.update(headers)
        try:
            response = requests.get(url, headers=merged, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"request to {url} failed: {exc}") from exc

        retry_after = _retry_after_hint(response)
        fetched_at = datetime.now(timezone.utc).isoformat()
        if self.cache is not None:
            self.cache.put(url, response.status_code, response.content, fetched_at, retry_after)
        return CachedResponse(
            url=url,
            status=response.status_code,
            body=response.content,
            fetched_at=fetched_at,
            retry_after=retry_after,
        )


def _retry_after_hint(response: requests.Response) -> float | None:
    value = response.headers.get("Retry-After")
    if value is not None:
        try:
            return float(value)
        except ValueError:
            return None
    reset = response.headers.get("X-RateLimit-Reset")
    remaining = response.headers.get("X-RateLimit-Remaining")
    if reset is not None and remaining == "0":
        try:
            return max(0.0, float(reset) - datetime.now(timezone.utc).timestamp())
        except ValueError:
            return None
    return None


def _auth_headers(token: str | None) -> dict[str, str]:
    token = token or os.environ.get("GITHUB_TOKEN")
    headers = {"Accept": "application/vnd.github.v3+json"}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    return headers


def repo_endpoint(ref: RepositoryRef, api_base: str = DEFAULT_API_BASE) -> str:
    return f"{api_base}/repos/{ref.owner}/{ref.name}"


def issue_search_endpoint(
    ref: RepositoryRef, state: str | None = None, api_base: str = DEFAULT_API_BASE
) -> str:
    query = f"repo:{ref.owner}/{ref.name} type:issue"
    if state:
        query += f" state:{state}"
    # '+' joins keep the recorded URL readable; each term is quoted separately.
    encoded = "+".join(quote(term, safe="") for term in query.split(" "))
    return f"{api_base}/search/issues?q={encoded}"


def _raise_for_status(response: CachedResponse, subject: str) -> None:
    if response.status == 200:
        return
    if response.status == 404:
        raise NotFoundError(f"{subject} not found (or private without a token)")
    if response.status in (403, 429):
        raise RateLimitedError(
            f"rate limited while fetching {subject}", retry_after=response.retry_after
        )
    raise TransportError(f"fetching {subject} returned HTTP {response.status}")


def fetch_repo_metadata(
    ref: RepositoryRef,
    fetcher: CachedFetcher,
    token: str | None = None,
    now: datetime | None = None,
    api_base: str = DEFAULT_API_BASE,
) -> RepositoryMetadata:
    """Fetch stars/watchers/forks and license facts from the forge REST API."""
    if ref.forge_host is None:
        raise ValueError("ref carries no forge coordinates")
    url = repo_endpoint(ref, api_base)
    response = fetcher.get(url, headers=_auth_headers(token))
    _raise_for_status(response, f"repository {ref.slug}")
    data = json.loads(response.body)

    license_info = data.get("license") or {}
    spdx = license_info.get("spdx_id")
    if spdx in (None, "NOASSERTION"):
        spdx = None
    watchers = data.get("subscribers_count")
    if watchers is None:
        watchers = data.get("watchers_count", 0)
    return RepositoryMetadata(
        title=data.get("name", ref.name),
        owner=(data.get("owner") or {}).get("login", ref.owner),
        stars=int(data.get("stargazers_count", 0)),
        watchers=int(watchers),
        forks=int(data.get("forks_count", 0)),
        default_branch=data.get("default_branch", "main"),
        is_public=not data.get("private", False),
        assessed_at=now or datetime.now(timezone.utc),
        declared_license_id=spdx,
    )


def fetch_issue_stats(
    ref: RepositoryRef,
    fetcher: CachedFetcher,
    token: str | None = None,
    api_base: str = DEFAULT_API_BASE,
) -> IssueStats:
    """Count lifetime issues (pull requests excluded) via the issue-search endpoint."""
    if ref.forge_host is None:
        raise ValueError("ref carries no forge coordinates")
    counts = []
    for state in (None, "closed"):
        url = issue_search_endpoint(ref, state, api_base)
        response = fetcher.get(url, headers=_auth_headers(token))
        _raise_for_status(response, f"issues of {ref.slug}")
        counts.append(int(json.loads(response.body).get("total_count", 0)))
    return IssueStats(total_issues=counts[0], closed_issues=counts[1])


def _escapes_root(path: Path, root: Path) -> bool:
    if not path.is_symlink():
        return False
    try:
        resolved = path.resolve()
    except OSError:
        return True
    return not resolved.is_relative_to(root)


def scan_repository(path: Path | str) -> FileInventory:
    """Scan a local checkout into a FileInventory.

    README/license/citation/docs detection is root-level only; manifests and
    source files are enumerated recursively, skipping version-control metadata
    directories and any symlink that points outside the scanned root.
    """
    root = Path(path).resolve()
    if not root.is_dir():
        raise FileNotFoundError(f"not a readable directory: {path}")

    has_readme = False
    readme_text = None
    has_docs_dir = False
    license_file = None
    citation_file = None
    zenodo_file = None

    for entry in sorted(root.iterdir()):
        if entry.is_dir() and not entry.is_symlink():
            if entry.name.lower() in _DOCS_DIR_NAMES:
                has_docs_dir = True
            continue
        if not entry.is_file():
            continue
        stem = entry.stem.upper()
        if stem == "README" and not has_readme:
            has_readme = True
            try:
                readme_text = entry.read_text(encoding="utf-8", errors="replace")
            except OSError:
                readme_text = None
                has_readme = False
        elif stem in _LICENSE_STEMS and license_file is None:
            license_file = entry
        elif entry.name == "CITATION.cff":
            citation_file = entry
        elif entry.name == ".zenodo.json":
            zenodo_file = entry

    manifest_files: list[Path] = []
    source_files: list[SourceFile] = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames[:] = sorted(d for d in dirnames if d not in _VCS_DIRS)
        base = Path(dirpath)
        for filename in sorted(filenames):
            file_path = base / filename
            if _escapes_root(file_path, root):
                logger.warning("skipping symlink escaping the scan root: %s", file_path)
                continue
            if filename in MANIFEST_NAMES:
                manifest_files.append(file_path)
            language = LANGUAGE_BY_EXTENSION.get(file_path.suffix)
            if language is not None:
                source_files.append(SourceFile(path=file_path, language=language))

    return FileInventory(
        has_readme=has_readme,
        readme_text=readme_text,
        has_docs_dir=has_docs_dir,
        license_file=license_file,
        citation_file=citation_file,
        zenodo_file=zenodo_file,
        manifest_files=tuple(manifest_files),
        source_files=tuple(source_files),
    )
