"""Dependency extraction, license resolution, SBOM generation, and the audit.

Licenses come from a local name-to-identifier database, never from the
network; compatibility verdicts come from a CSV matrix keyed by
(dependency license, root license). Pairs the matrix does not declare are
"unknown", never silently compatible.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import TOOL_NAME, __version__
from .model import FileInventory, RepositoryMetadata, iso_instant

logger = logging.getLogger(__name__)

UNKNOWN_LICENSE = "unknown"

COMPATIBLE = "compatible"
INCOMPATIBLE = "incompatible"
UNKNOWN_VERDICT = "unknown"

_CSV_VERDICTS = {"C": COMPATIBLE, "I": INCOMPATIBLE, "U": UNKNOWN_VERDICT}

ECOSYSTEM_PYTHON = "python-package"
ECOSYSTEM_NODE = "node-package"
ECOSYSTEM_RUST = "rust-crate"

_LICENSE_DB_FILE = "license_db.tsv"
_MATRIX_FILE = "compatibility_matrix.csv"

_REQUIREMENT_RE = re.compile(r"^([A-Za-z0-9][A-Za-z0-9._-]*)(\[[^\]]*\])?\s*(.*)$")


@dataclass(frozen=True)
class Dependency:
    """One declared third-party component."""

    name: str
    ecosystem: str
    version: str | None = None
    license_id: str | None = None
    direct: bool = True

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("dependency name must be non-empty")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "ecosystem": self.ecosystem,
            "license": self.license_id or UNKNOWN_LICENSE,
            "direct": self.direct,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dependency":
        return cls(
            name=data["name"],
            ecosystem=data["ecosystem"],
            version=data.get("version"),
            license_id=data.get("license"),
            direct=bool(data.get("direct", True)),
        )


@dataclass(frozen=True)
class SbomDocument:
    """Deterministic bill of materials for one analyzed repository."""

    subject_name: str
    subject_version: str
    components: tuple[Dependency, ...]
    generated_at: datetime
    tool_name: str = TOOL_NAME
    tool_version: str = __version__

    def __post_init__(self) -> None:
        # Whether a component was a direct dependency is the audit's business;
        # the bill of materials lists components uniformly.
        ordered = tuple(
            sorted(
                (replace(dep, direct=True) for dep in self.components),
                key=lambda d: (d.ecosystem, d.name.lower(), d.version or ""),
            )
        )
        object.__setattr__(self, "components", ordered)

    def to_dict(self) -> dict:
        return {
            "subject": {"name": self.subject_name, "version": self.subject_version},
            "components": [
                {
                    "name": dep.name,
                    "version": dep.version,
                    "ecosystem": dep.ecosystem,
                    "license": dep.license_id or UNKNOWN_LICENSE,
                }
                for dep in self.components
            ],
            "generated_at": iso_instant(self.generated_at),
            "tool": {"name": self.tool_name, "version": self.tool_version},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SbomDocument":
        from .model import parse_instant

        return cls(
            subject_name=data["subject"]["name"],
            subject_version=data["subject"]["version"],
            components=tuple(Dependency.from_dict(item) for item in data["components"]),
            generated_at=parse_instant(data["generated_at"]),
            tool_name=data["tool"]["name"],
            tool_version=data["tool"]["version"],
        )


class CompatibilityMatrix:
    """Verdict lookup for (dependency license, root license) pairs."""

    def __init__(self, identifiers: tuple[str, ...], cells: dict[tuple[str, str], str]):
        for pair, verdict in cells.items():
            if verdict not in (COMPATIBLE, INCOMPATIBLE, UNKNOWN_VERDICT):
                raise ValueError(f"bad verdict {verdict!r} for {pair}")
        self.identifiers = tuple(identifiers)
        self._cells = dict(cells)

    def verdict(self, inbound: str, root: str) -> str:
        return self._cells.get((inbound, root), UNKNOWN_VERDICT)

    def with_cell(self, inbound: str, root: str, verdict: str) -> "CompatibilityMatrix":
        cells = dict(self._cells)
        cells[(inbound, root)] = verdict
        return CompatibilityMatrix(self.identifiers, cells)

    @classmethod
    def load(cls, path: Path | str | None = None) -> "CompatibilityMatrix":
        """Load a matrix CSV: header row/column of license ids, cells in {C,I,U}."""
        if path is None:
            text = (resources.files("fairgauge") / "data" / _MATRIX_FILE).read_text("utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        rows = list(csv.reader(text.splitlines()))
        if not rows or len(rows[0]) < 2:
            raise ValueError("compatibility matrix needs a header row of license ids")
        roots = [cell.strip() for cell in rows[0][1:]]
        cells: dict[tuple[str, str], str] = {}
        inbound_ids = []
        for row in rows[1:]:
            if not row or not row[0].strip():
                continue
            inbound = row[0].strip()
            inbound_ids.append(inbound)
            if len(row) - 1 != len(roots):
                raise ValueError(f"matrix row for {inbound} has {len(row) - 1} cells, want {len(roots)}")
            for root, cell in zip(roots, row[1:]):
                code = cell.strip().upper()
                if code not in _CSV_VERDICTS:
                    raise ValueError(f"matrix cell ({inbound}, {root}) has bad code {cell!r}")
                cells[(inbound, root)] = _CSV_VERDICTS[code]
        return cls(tuple(sorted(set(inbound_ids) | set(roots))), cells)


@dataclass(frozen=True)
class Finding:
    dependency: Dependency
    verdict: str
    rationale: str

    def to_dict(self) -> dict:
        return {
            "dependency": self.dependency.to_dict(),
            "verdict": self.verdict,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Finding":
        return cls(
            dependency=Dependency.from_dict(data["dependency"]),
            verdict=data["verdict"],
            rationale=data["rationale"],
        )


@dataclass(frozen=True)
class LicenseAuditResult:
    """Per-dependency verdicts plus the aggregate fraction feeding the license score."""

    root_license: str | None
    findings: tuple[Finding, ...]
    n_licenses: int
    violated_count: int
    fraction_ok: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "findings", tuple(self.findings))
        if self.n_licenses != len(self.findings):
            raise ValueError("n_licenses must equal the number of findings")
        if self.violated_count > self.n_licenses:
            raise ValueError("violated_count exceeds n_licenses")
        expected = 1.0 if self.n_licenses == 0 else (self.n_licenses - self.violated_count) / self.n_licenses
        if abs(self.fraction_ok - expected) > 1e-12:
            raise ValueError(f"fraction_ok {self.fraction_ok} != expected {expected}")

    def to_dict(self) -> dict:
        return {
            "root_license": self.root_license,
            "findings": [finding.to_dict() for finding in self.findings],
            "n_licenses": self.n_licenses,
            "violated_count": self.violated_count,
            "fraction_ok": self.fraction_ok,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LicenseAuditResult":
        return cls(
            root_license=data.get("root_license"),
            findings=tuple(Finding.from_dict(item) for item in data["findings"]),
            n_licenses=data["n_licenses"],
            violated_count=data["violated_count"],
            fraction_ok=data["fraction_ok"],
        )


def _parse_requirements(path: Path) -> list[Dependency]:
    deps = []
    for raw_line in path.read_text(encoding="utf-8", errors="replace").splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line or line.startswith("-"):
            continue
        line = line.split(";", 1)[0].strip()
        match = _REQUIREMENT_RE.match(line)
        if not match:
            logger.warning("unparsable requirement line in %s: %r", path, raw_line)
            continue
        name, _extras, constraint = match.groups()
        deps.append(
            Dependency(name=name, ecosystem=ECOSYSTEM_PYTHON, version=_tidy_constraint(constraint))
        )
    return deps


def _tidy_constraint(constraint: str) -> str | None:
    constraint = constraint.strip()
    if not constraint:
        return None
    pinned = re.fullmatch(r"==\s*([^,\s]+)", constraint)
    if pinned:
        return pinned.group(1)
    return constraint


def _parse_pyproject(path: Path) -> list[Dependency]:
    data = tomllib.loads(path.read_text(encoding="utf-8"))
    deps = []
    for spec_line in (data.get("project") or {}).get("dependencies", []):
        line = spec_line.split(";", 1)[0].strip()
        match = _REQUIREMENT_RE.match(line)
        if not match:
            logger.warning("unparsable dependency in %s: %r", path, spec_line)
            continue
        name, _extras, constraint = match.groups()
        deps.append(
            Dependency(name=name, ecosystem=ECOSYSTEM_PYTHON, version=_tidy_constraint(constraint))
        )
    return deps


def _parse_package_json(path: Path) -> list[Dependency]:
    data = json.loads(path.read_text(encoding="utf-8"))
    deps = []
    for section in ("dependencies", "devDependencies"):
        for name, version in (data.get(section) or {}).items():
            deps.append(Dependency(name=name, ecosystem=ECOSYSTEM_NODE, version=str(version)))
    return deps


def _parse_cargo_toml(path: Path) -> list[Dependency]:
    data = tomllib.loads(path.read_text(encoding="utf-8"))
    deps = []
    for name, value in (data.get("dependencies") or {}).items():
        if isinstance(value, str):
            version = value
        elif isinstance(value, dict):
            version = value.get("version")
        else:
            version = None
        deps.append(Dependency(name=name, ecosystem=ECOSYSTEM_RUST, version=version))
    return deps


def _parse_package_lock(path: Path) -> list[Dependency]:
    data = json.loads(path.read_text(encoding="utf-8"))
    deps = []
    packages = data.get("packages")
    if isinstance(packages, dict):
        for key, info in packages.items():
            if not key:  # the root project entry
                continue
            name = key.rsplit("node_modules/", 1)[-1]
            deps.append(
                Dependency(
                    name=name,
                    ecosystem=ECOSYSTEM_NODE,
                    version=(info or {}).get("version"),
                    direct=False,
                )
            )
    else:
        for name, info in (data.get("dependencies") or {}).items():
            deps.append(
                Dependency(
                    name=name,
                    ecosystem=ECOSYSTEM_NODE,
                    version=(info or {}).get("version"),
                    direct=False,
                )
            )
    return deps


def _parse_cargo_lock(path: Path) -> list[Dependency]:
    data = tomllib.loads(path.read_text(encoding="utf-8"))
    return [
        Dependency(
            name=pkg["name"], ecosystem=ECOSYSTEM_RUST, version=pkg.get("version"), direct=False
        )
        for pkg in data.get("package", [])
        if pkg.get("name")
    ]


def _parse_poetry_lock(path: Path) -> list[Dependency]:
    data = tomllib.loads(path.read_text(encoding="utf-8"))
    return [
        Dependency(
            name=pkg["name"], ecosystem=ECOSYSTEM_PYTHON, version=pkg.get("version"), direct=False
        )
        for pkg in data.get("package", [])
        if pkg.get("name")
    ]


_MANIFEST_PARSERS = {
    "requirements.txt": _parse_requirements,
    "pyproject.toml": _parse_pyproject,
    "package.json": _parse_package_json,
    "Cargo.toml": _parse_cargo_toml,
    "package-lock.json": _parse_package_lock,
    "Cargo.lock": _parse_cargo_lock,
    "poetry.lock": _parse_poetry_lock,
}


def extract_dependencies(inventory: FileInventory) -> list[Dependency]:
    """Parse every recognized manifest into dependencies, deduplicated per package.

    When the same package appears in both a manifest and a lockfile, the
    direct (manifest) entry wins; unreadable manifests are skipped with a
    warning and never abort the extraction.
    """
    collected: dict[tuple[str, str], Dependency] = {}
    for path in sorted(inventory.manifest_files, key=lambda p: p.as_posix()):
        parser = _MANIFEST_PARSERS.get(path.name)
        if parser is None:
            logger.warning("unrecognized manifest skipped: %s", path)
            continue
        try:
            parsed = parser(path)
        except (OSError, ValueError, tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
            logger.warning("manifest %s could not be parsed: %s", path, exc)
            continue
        for dep in parsed:
            key = (dep.ecosystem, dep.name.lower())
            current = collected.get(key)
            if current is None:
                collected[key] = dep
            elif dep.direct and not current.direct:
                collected[key] = dep
            elif dep.direct == current.direct and current.version is None and dep.version:
                collected[key] = dep
    return sorted(collected.values(), key=lambda d: (d.ecosystem, d.name.lower()))


def load_license_db(path: Path | str | None = None) -> dict[tuple[str, str], str]:
    """Load the package-to-license database: name<TAB>ecosystem<TAB>spdx-id lines."""
    if path is None:
        text = (resources.files("fairgauge") / "data" / _LICENSE_DB_FILE).read_text("utf-8")
    else:
        db_path = Path(path)
        if not db_path.exists():
            raise FileNotFoundError(f"license database not found: {path}")
        text = db_path.read_text(encoding="utf-8")
    table: dict[tuple[str, str], str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"license db line {lineno} is not name<TAB>ecosystem<TAB>id: {line!r}")
        name, ecosystem, spdx = (part.strip() for part in parts)
        table[(name.lower(), ecosystem)] = spdx
    return table


def resolve_licenses(
    deps: list[Dependency], license_db: dict[tuple[str, str], str]
) -> list[Dependency]:
    """Fill license_id for each dependency from the local database ('unknown' otherwise)."""
    resolved = []
    for dep in deps:
        spdx = license_db.get((dep.name.lower(), dep.ecosystem))
        resolved.append(replace(dep, license_id=spdx if spdx else UNKNOWN_LICENSE))
    return resolved


def generate_sbom(
    metadata: RepositoryMetadata,
    deps: list[Dependency],
    now: datetime | None = None,
) -> SbomDocument:
    """Build the deterministic SBOM; the subject version is the analyzed branch."""
    return SbomDocument(
        subject_name=metadata.title,
        subject_version=metadata.default_branch,
        components=tuple(deps),
        generated_at=now or datetime.now(timezone.utc),
    )


def audit_compatibility(
    root_license: str | None,
    deps: list[Dependency],
    matrix: CompatibilityMatrix,
) -> LicenseAuditResult:
    """Judge every dependency license against the root license.

    Unresolvable licenses get an "unknown" verdict: they dilute the license
    count but are never counted as violations.
    """
    findings = []
    violated = 0
    for dep in deps:
        license_id = dep.license_id
        if license_id in (None, UNKNOWN_LICENSE):
            verdict = UNKNOWN_VERDICT
            rationale = "dependency license could not be resolved"
        elif root_license is None:
            verdict = UNKNOWN_VERDICT
            rationale = "root license undeclared; compatibility cannot be judged"
        else:
            verdict = matrix.verdict(license_id, root_license)
            if verdict == COMPATIBLE:
                rationale = f"{license_id} is compatible with root license {root_license}"
            elif verdict == INCOMPATIBLE:
                violated += 1
                rationale = f"{license_id} conflicts with root license {root_license}"
            else:
                rationale = f"no compatibility rule for ({license_id}, {root_license})"
        findings.append(Finding(dependency=dep, verdict=verdict, rationale=rationale))

    n_licenses = len(findings)
    fraction = 1.0 if n_licenses == 0 else (n_licenses - violated) / n_licenses
    return LicenseAuditResult(
        root_license=root_license,
        findings=tuple(findings),
        n_licenses=n_licenses,
        violated_count=violated,
        fraction_ok=fraction,
    )


def license_score(fraction_ok: float, n_licenses: int) -> float:
    """Score license compliance on 0-100.

    The non-violated fraction is raised to log2(1 + license count) and scaled
    by 100, so a single violation hurts more as the dependency set grows.
    With no dependency licenses at all the score is exactly 100.
    """
    if not 0.0 <= fraction_ok <= 1.0:
        raise ValueError(f"fraction_ok must be in [0, 1], got {fraction_ok!r}")
    if n_licenses < 0:
        raise ValueError(f"n_licenses must be >= 0, got {n_licenses!r}")
    if n_licenses == 0:
        return 100.0
    return fraction_ok ** math.log2(1 + n_licenses) * 100.0
