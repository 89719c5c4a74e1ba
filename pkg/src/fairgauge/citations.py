"""Citing-work harvest from two open scholarly catalogs.

Catalog A resolves the DOI to a work id, then pages through a works endpoint
filtered by "cites:<work-id>". Catalog B pages a paper-citations endpoint
keyed directly by DOI. Both return plain records that merge_citations
deduplicates into one CitationSet.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from datetime import date

from .fairness import DOI_RE, REGISTRY_DOI_MARKERS, CitationMetadata
from .ingest import CachedFetcher, RateLimitedError, TransportError

logger = logging.getLogger(__name__)

CATALOG_A = "openalex"
CATALOG_B = "semanticscholar"
CATALOGS = (CATALOG_A, CATALOG_B)

OPENALEX_BASE = "https://api.openalex.org"
SEMANTIC_SCHOLAR_BASE = "https://api.semanticscholar.org/graph/v1"

_OPENALEX_PAGE_SIZE = 50
_S2_PAGE_SIZE = 100
_S2_FIELDS = "title,authors,externalIds,publicationDate,fieldsOfStudy,citationCount,venue,url"

_DOI_PREFIXES = ("https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "doi.org/", "doi:")


def normalize_doi(raw: str | None) -> str | None:
    """Lowercase a DOI and strip resolver prefixes."""
    if not raw:
        return None
    doi = raw.strip()
    lowered = doi.lower()
    for prefix in _DOI_PREFIXES:
        if lowered.startswith(prefix):
            doi = doi[len(prefix):]
            lowered = doi.lower()
    return doi.lower() or None


@dataclass(frozen=True)
class CitationRecord:
    """One citing work as reported by a catalog."""

    title: str
    authors: tuple[str, ...]
    source_catalog: str
    publication_date: date | None = None
    doi: str | None = None
    url: str | None = None
    fields_of_study: tuple[str, ...] = ()
    cited_by_count: int | None = None
    venue: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "authors", tuple(self.authors))
        object.__setattr__(self, "fields_of_study", tuple(self.fields_of_study))
        if not self.title:
            raise ValueError("citation title must be non-empty")
        object.__setattr__(self, "doi", normalize_doi(self.doi))
        if self.cited_by_count is not None and self.cited_by_count < 0:
            raise ValueError("cited_by_count must be >= 0")

    def populated_field_count(self) -> int:
        """How many optional fields carry data; used to pick the richer duplicate."""
        return sum(
            1
            for value in (
                self.authors,
                self.publication_date,
                self.doi,
                self.url,
                self.fields_of_study,
                self.cited_by_count,
                self.venue,
            )
            if value not in (None, (), "")
        )

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "authors": list(self.authors),
            "source_catalog": self.source_catalog,
            "publication_date": self.publication_date.isoformat() if self.publication_date else None,
            "doi": self.doi,
            "url": self.url,
            "fields_of_study": list(self.fields_of_study),
            "cited_by_count": self.cited_by_count,
            "venue": self.venue,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CitationRecord":
        published = data.get("publication_date")
        return cls(
            title=data["title"],
            authors=tuple(data.get("authors", ())),
            source_catalog=data["source_catalog"],
            publication_date=date.fromisoformat(published) if published else None,
            doi=data.get("doi"),
            url=data.get("url"),
            fields_of_study=tuple(data.get("fields_of_study", ())),
            cited_by_count=data.get("cited_by_count"),
            venue=data.get("venue"),
        )


@dataclass(frozen=True)
class CitationSet:
    """Deduplicated citing works; the record count is the citation count."""

    records: tuple[CitationRecord, ...]
    n_citations: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        if self.n_citations != len(self.records):
            raise ValueError("n_citations must equal the number of records")
        dois = [record.doi for record in self.records if record.doi]
        if len(dois) != len(set(dois)):
            raise ValueError("records share a normalized DOI")
        titles = [record.title.casefold() for record in self.records if not record.doi]
        if len(titles) != len(set(titles)):
            raise ValueError("DOI-less records share a title")

    def to_dict(self) -> dict:
        return {
            "n_citations": self.n_citations,
            "records": [record.to_dict() for record in self.records],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CitationSet":
        return cls(
            records=tuple(CitationRecord.from_dict(item) for item in data["records"]),
            n_citations=data["n_citations"],
        )


@dataclass(frozen=True)
class RadarData:
    """Citation counts per scientific field, ready for the radar chart."""

    axes: tuple[tuple[str, int], ...]
    total: int

    def __post_init__(self) -> None:
        ordered = sorted(
            ((name, int(count)) for name, count in self.axes),
            key=lambda axis: (-axis[1], axis[0]),
        )
        object.__setattr__(self, "axes", tuple(ordered))
        for name, count in self.axes:
            if count < 1:
                raise ValueError(f"axis {name!r} has count {count}; axes need at least one citation")
            if count > self.total:
                raise ValueError(f"axis {name!r} count {count} exceeds total {self.total}")

    def to_dict(self) -> dict:
        return {"axes": [list(axis) for axis in self.axes], "total": self.total}

    @classmethod
    def from_dict(cls, data: dict) -> "RadarData":
        return cls(axes=tuple((name, count) for name, count in data["axes"]), total=data["total"])


def resolve_software_doi(
    cff: CitationMetadata | None, readme: str | None
) -> str | None:
    """Pick the software's own DOI: citation file first, then README badge links."""
    if cff is not None and cff.doi:
        return normalize_doi(cff.doi)
    for match in DOI_RE.finditer(readme or ""):
        doi = normalize_doi(match.group(0))
        if doi is None or "/" not in doi:
            continue
        suffix = doi.split("/", 1)[1]
        if any(marker in suffix for marker in REGISTRY_DOI_MARKERS):
            return doi
    return None


def openalex_work_url(doi: str) -> str:
    return f"{OPENALEX_BASE}/works/doi:{doi}"


def openalex_citing_url(work_id: str, cursor: str) -> str:
    return f"{OPENALEX_BASE}/works?filter=cites:{work_id}&per-page={_OPENALEX_PAGE_SIZE}&cursor={cursor}"


def semanticscholar_citations_url(doi: str, offset: int) -> str:
    return (
        f"{SEMANTIC_SCHOLAR_BASE}/paper/DOI:{doi}/citations"
        f"?fields={_S2_FIELDS}&offset={offset}&limit={_S2_PAGE_SIZE}"
    )


def _parse_date(text: str | None) -> date | None:
    if not text:
        return None
    try:
        return date.fromisoformat(text)
    except ValueError:
        return None


def _get_json(fetcher: CachedFetcher, url: str, subject: str) -> dict | None:
    response = fetcher.get(url)
    if response.status == 404:
        return None
    if response.status in (403, 429):
        raise RateLimitedError(f"rate limited while fetching {subject}", response.retry_after)
    if response.status != 200:
        raise TransportError(f"fetching {subject} returned HTTP {response.status}")
    try:
        return json.loads(response.body)
    except json.JSONDecodeError as exc:
        raise TransportError(f"{subject} returned malformed JSON: {exc}") from exc


def _openalex_record(work: dict) -> CitationRecord | None:
    title = work.get("display_name") or work.get("title")
    if not title:
        return None
    authors = tuple(
        name
        for authorship in work.get("authorships", [])
        if (name := (authorship.get("author") or {}).get("display_name"))
    )
    fields = []
    for concept in work.get("concepts", []):
        name = concept.get("display_name")
        if name and name not in fields:
            fields.append(name)
    venue = ((work.get("primary_location") or {}).get("source") or {}).get("display_name")
    return CitationRecord(
        title=title,
        authors=authors,
        source_catalog=CATALOG_A,
        publication_date=_parse_date(work.get("publication_date")),
        doi=work.get("doi"),
        url=work.get("id"),
        fields_of_study=tuple(fields),
        cited_by_count=work.get("cited_by_count"),
        venue=venue,
    )


def _fetch_openalex(doi: str, fetcher: CachedFetcher) -> list[CitationRecord]:
    lookup = _get_json(fetcher, openalex_work_url(doi), f"work record for {doi}")
    if lookup is None:
        return []
    work_id = str(lookup.get("id", "")).rstrip("/").rsplit("/", 1)[-1]
    if not work_id:
        return []
    records: list[CitationRecord] = []
    cursor = "*"
    while cursor:
        page = _get_json(fetcher, openalex_citing_url(work_id, cursor), f"citing works of {doi}")
        if page is None:
            break
        for work in page.get("results", []):
            record = _openalex_record(work)
            if record is None:
                logger.warning("dropping citing work without a title: %s", work.get("id"))
                continue
            records.append(record)
        cursor = (page.get("meta") or {}).get("next_cursor")
    return records


def _s2_record(entry: dict) -> CitationRecord | None:
    paper = entry.get("citingPaper") or {}
    title = paper.get("title")
    if not title:
        return None
    doi = (paper.get("externalIds") or {}).get("DOI")
    return CitationRecord(
        title=title,
        authors=tuple(a["name"] for a in paper.get("authors", []) if a.get("name")),
        source_catalog=CATALOG_B,
        publication_date=_parse_date(paper.get("publicationDate")),
        doi=doi,
        url=paper.get("url"),
        fields_of_study=tuple(paper.get("fieldsOfStudy") or ()),
        cited_by_count=paper.get("citationCount"),
        venue=paper.get("venue"),
    )


def _fetch_semanticscholar(doi: str, fetcher: CachedFetcher) -> list[CitationRecord]:
    records: list[CitationRecord] = []
    offset: int | None = 0
    while offset is not None:
        page = _get_json(
            fetcher, semanticscholar_citations_url(doi, offset), f"citations of {doi}"
        )
        if page is None:
            return records
        for entry in page.get("data", []):
            record = _s2_record(entry)
            if record is None:
                logger.warning("dropping citing work without a title: %r", entry)
                continue
            records.append(record)
        offset = page.get("next")
    return records


def fetch_citing_works(doi: str, catalog: str, fetcher: CachedFetcher) -> list[CitationRecord]:
    """Fetch every citing work the catalog reports for the DOI, pages exhausted.

    A DOI the catalog does not know yields an empty list, not an error.
    """
    normalized = normalize_doi(doi)
    if not normalized or not re.fullmatch(r"10\.\d+(?:\.\d+)*/\S+", normalized):
        raise ValueError(f"not a well-formed DOI: {doi!r}")
    if catalog == CATALOG_A:
        return _fetch_openalex(normalized, fetcher)
    if catalog == CATALOG_B:
        return _fetch_semanticscholar(normalized, fetcher)
    raise ValueError(f"unknown catalog tag {catalog!r}")


def _better(current: CitationRecord, challenger: CitationRecord) -> CitationRecord:
    cur, new = current.populated_field_count(), challenger.populated_field_count()
    if new > cur:
        return challenger
    if new == cur and current.source_catalog != CATALOG_A and challenger.source_catalog == CATALOG_A:
        return challenger
    return current


def merge_citations(*record_lists) -> CitationSet:
    """Union the catalogs' records, deduplicating by DOI then by title.

    On a DOI collision the record with more populated fields wins; ties go to
    catalog A. Records without a DOI deduplicate by case-folded title.
    """
    by_doi: dict[str, CitationRecord] = {}
    by_title: dict[str, CitationRecord] = {}
    for records in record_lists:
        for record in records:
            if record.doi:
                key = record.doi
                by_doi[key] = _better(by_doi[key], record) if key in by_doi else record
            else:
                key = record.title.casefold()
                by_title[key] = _better(by_title[key], record) if key in by_title else record
    merged = sorted(
        list(by_doi.values()) + list(by_title.values()),
        key=lambda r: (r.title.casefold(), r.doi or ""),
    )
    return CitationSet(records=tuple(merged), n_citations=len(merged))


def field_distribution(citation_set: CitationSet) -> RadarData:
    """Count citing works per field label; a work with k fields feeds k axes."""
    counts: dict[str, int] = {}
    for record in citation_set.records:
        for field_name in record.fields_of_study:
            counts[field_name] = counts.get(field_name, 0) + 1
    axes = tuple(sorted(counts.items(), key=lambda item: (-item[1], item[0])))
    return RadarData(axes=axes, total=citation_set.n_citations)


def highlight_paper(citation_set: CitationSet) -> CitationRecord | None:
    """The most-cited citing work; earlier publication then title break ties."""
    if not citation_set.records:
        return None
    return min(
        citation_set.records,
        key=lambda r: (
            -(r.cited_by_count if r.cited_by_count is not None else -1),
            r.publication_date or date.max,
            r.title,
        ),
    )
