from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairgauge.licensing import (
    CompatibilityMatrix,
    Dependency,
    LicenseAuditResult,
    audit_compatibility,
    extract_dependencies,
    generate_sbom,
    license_score,
    load_license_db,
    resolve_licenses,
)
from fairgauge.ingest import scan_repository
from fairgauge.model import FileInventory, RepositoryMetadata

NOW = datetime(2026, 3, 1, 12, 0, 0, tzinfo=timezone.utc)


def metadata():
    return RepositoryMetadata(
        title="demo-tool",
        owner="acme",
        stars=1,
        watchers=1,
        forks=0,
        default_branch="main",
        is_public=True,
        assessed_at=NOW,
        declared_license_id="MIT",
    )


def inventory_with(*manifests: Path) -> FileInventory:
    return FileInventory(manifest_files=tuple(manifests))


def small_matrix():
    cells = {
        ("Apache-2.0", "MIT"): "compatible",
        ("BSD-3-Clause", "MIT"): "compatible",
        ("GPL-3.0-only", "MIT"): "incompatible",
        ("GPL-3.0-only", "proprietary-all-rights-reserved"): "incompatible",
        ("MIT", "MIT"): "compatible",
    }
    return CompatibilityMatrix(
        ("Apache-2.0", "BSD-3-Clause", "GPL-3.0-only", "MIT", "proprietary-all-rights-reserved"),
        cells,
    )


class TestExtractDependencies:
    def test_requirements_pin(self, tmp_path):
        req = tmp_path / "requirements.txt"
        req.write_text("numpy==1.24.0\n", encoding="utf-8")
        deps = extract_dependencies(inventory_with(req))
        assert deps == [Dependency(name="numpy", ecosystem="python-package", version="1.24.0")]

    def test_no_manifests(self):
        assert extract_dependencies(FileInventory()) == []

    def test_duplicates_deduplicated(self, tmp_path):
        req = tmp_path / "requirements.txt"
        req.write_text("numpy==1.24.0\nnumpy==1.24.0\nNumPy\n", encoding="utf-8")
        deps = extract_dependencies(inventory_with(req))
        assert len(deps) == 1
        assert deps[0].version == "1.24.0"

    def test_requirements_skips_options_and_comments(self, tmp_path):
        req = tmp_path / "requirements.txt"
        req.write_text(
            "# pinned deps\n-r other.txt\nrequests>=2.28  # http\n\nclick[extra]==8.0 ; python_version>'3'\n",
            encoding="utf-8",
        )
        deps = extract_dependencies(inventory_with(req))
        assert [(d.name, d.version) for d in deps] == [("click", "8.0"), ("requests", ">=2.28")]

    def test_pyproject_dependencies(self, tmp_path):
        pyproject = tmp_path / "pyproject.toml"
        pyproject.write_text(
            '[project]\nname = "x"\ndependencies = ["PyYAML>=6.0", "Jinja2"]\n',
            encoding="utf-8",
        )
        deps = extract_dependencies(inventory_with(pyproject))
        assert [(d.name, d.version) for d in deps] == [("Jinja2", None), ("PyYAML", ">=6.0")]

    def test_package_json(self, tmp_path):
        pkg = tmp_path / "package.json"
        pkg.write_text(
            json.dumps({"dependencies": {"react": "^18.0.0"}, "devDependencies": {"jest": "^29"}}),
            encoding="utf-8",
        )
        deps = extract_dependencies(inventory_with(pkg))
        assert {(d.name, d.ecosystem) for d in deps} == {
            ("react", "node-package"),
            ("jest", "node-package"),
        }

    def test_cargo_toml(self, tmp_path):
        cargo = tmp_path / "Cargo.toml"
        cargo.write_text(
            '[dependencies]\nserde = "1.0"\ntokio = { version = "1.2", features = ["full"] }\n',
            encoding="utf-8",
        )
        deps = extract_dependencies(inventory_with(cargo))
        assert [(d.name, d.version) for d in deps] == [("serde", "1.0"), ("tokio", "1.2")]

    def test_lockfile_entries_are_transitive(self, tmp_path):
        lock = tmp_path / "package-lock.json"
        lock.write_text(
            json.dumps(
                {
                    "packages": {
                        "": {"name": "root"},
                        "node_modules/lodash": {"version": "4.17.21"},
                        "node_modules/react/node_modules/scheduler": {"version": "0.23.0"},
                    }
                }
            ),
            encoding="utf-8",
        )
        deps = extract_dependencies(inventory_with(lock))
        assert {(d.name, d.direct) for d in deps} == {("lodash", False), ("scheduler", False)}

    def test_manifest_wins_over_lockfile(self, tmp_path):
        pkg = tmp_path / "package.json"
        pkg.write_text(json.dumps({"dependencies": {"lodash": "^4"}}), encoding="utf-8")
        lock = tmp_path / "package-lock.json"
        lock.write_text(
            json.dumps({"packages": {"node_modules/lodash": {"version": "4.17.21"}}}),
            encoding="utf-8",
        )
        deps = extract_dependencies(inventory_with(pkg, lock))
        assert len(deps) == 1
        assert deps[0].direct is True

    def test_cargo_lock_transitive(self, tmp_path):
        lock = tmp_path / "Cargo.lock"
        lock.write_text(
            'version = 3\n\n[[package]]\nname = "serde"\nversion = "1.0.99"\n\n'
            '[[package]]\nname = "itoa"\nversion = "1.0.1"\n',
            encoding="utf-8",
        )
        deps = extract_dependencies(inventory_with(lock))
        assert [(d.name, d.version, d.direct) for d in deps] == [
            ("itoa", "1.0.1", False),
            ("serde", "1.0.99", False),
        ]

    def test_poetry_lock_transitive(self, tmp_path):
        lock = tmp_path / "poetry.lock"
        lock.write_text(
            '[[package]]\nname = "idna"\nversion = "3.4"\n\n'
            '[[package]]\nname = "certifi"\nversion = "2024.2.2"\n',
            encoding="utf-8",
        )
        deps = extract_dependencies(inventory_with(lock))
        assert {(d.name, d.ecosystem, d.direct) for d in deps} == {
            ("certifi", "python-package", False),
            ("idna", "python-package", False),
        }

    def test_unreadable_manifest_is_nonfatal(self, tmp_path):
        broken = tmp_path / "pyproject.toml"
        broken.write_text("not [valid toml", encoding="utf-8")
        good = tmp_path / "requirements.txt"
        good.write_text("numpy\n", encoding="utf-8")
        deps = extract_dependencies(inventory_with(broken, good))
        assert [d.name for d in deps] == ["numpy"]

    def test_demo_repo_fixture(self):
        from fixture_data import DEMO_REPO

        deps = extract_dependencies(scan_repository(DEMO_REPO))
        assert [(d.name, d.version) for d in deps] == [
            ("internal-widgets", "0.3.1"),
            ("numpy", "1.24.0"),
            ("requests", ">=2.28"),
        ]


class TestResolveLicenses:
    def test_known_package_from_shipped_db(self):
        deps = [Dependency(name="numpy", ecosystem="python-package")]
        resolved = resolve_licenses(deps, load_license_db())
        assert resolved[0].license_id == "BSD-3-Clause"

    def test_unlisted_package_unknown(self):
        deps = [Dependency(name="internal-widgets", ecosystem="python-package")]
        resolved = resolve_licenses(deps, load_license_db())
        assert resolved[0].license_id == "unknown"

    def test_empty_list(self):
        assert resolve_licenses([], load_license_db()) == []

    def test_missing_db_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_license_db(tmp_path / "nope.tsv")

    def test_custom_db_fixture(self, tmp_path):
        db_file = tmp_path / "db.tsv"
        db_file.write_text("widget\tpython-package\tMIT\n", encoding="utf-8")
        db = load_license_db(db_file)
        resolved = resolve_licenses([Dependency(name="Widget", ecosystem="python-package")], db)
        assert resolved[0].license_id == "MIT"


class TestGenerateSbom:
    def test_components_sorted(self):
        deps = [
            Dependency(name="zlib-ng", ecosystem="python-package", version="1"),
            Dependency(name="alpha", ecosystem="rust-crate", version="2"),
            Dependency(name="beta", ecosystem="python-package", version="3"),
        ]
        sbom = generate_sbom(metadata(), deps, now=NOW)
        assert [c.name for c in sbom.components] == ["beta", "zlib-ng", "alpha"]

    def test_zero_deps_still_has_subject(self):
        sbom = generate_sbom(metadata(), [], now=NOW)
        assert sbom.components == ()
        payload = sbom.to_dict()
        assert payload["subject"] == {"name": "demo-tool", "version": "main"}
        assert payload["components"] == []

    def test_golden_document(self):
        deps = [
            Dependency(name="numpy", ecosystem="python-package", version="1.24.0", license_id="BSD-3-Clause"),
            Dependency(name="internal-widgets", ecosystem="python-package", version="0.3.1", license_id="unknown"),
        ]
        payload = generate_sbom(metadata(), deps, now=NOW).to_dict()
        assert payload == {
            "subject": {"name": "demo-tool", "version": "main"},
            "components": [
                {
                    "name": "internal-widgets",
                    "version": "0.3.1",
                    "ecosystem": "python-package",
                    "license": "unknown",
                },
                {
                    "name": "numpy",
                    "version": "1.24.0",
                    "ecosystem": "python-package",
                    "license": "BSD-3-Clause",
                },
            ],
            "generated_at": "2026-03-01T12:00:00+00:00",
            "tool": {"name": "fairgauge", "version": "0.1.0"},
        }

    def test_pure_modulo_timestamp(self):
        deps = [Dependency(name="numpy", ecosystem="python-package")]
        first = generate_sbom(metadata(), deps, now=NOW).to_dict()
        second = generate_sbom(
            metadata(), deps, now=datetime(2027, 1, 1, tzinfo=timezone.utc)
        ).to_dict()
        first.pop("generated_at")
        second.pop("generated_at")
        assert first == second


class TestAuditCompatibility:
    def test_all_compatible(self):
        deps = [
            Dependency(name="requests", ecosystem="python-package", license_id="Apache-2.0"),
            Dependency(name="numpy", ecosystem="python-package", license_id="BSD-3-Clause"),
        ]
        audit = audit_compatibility("MIT", deps, small_matrix())
        assert audit.violated_count == 0
        assert audit.fraction_ok == 1.0
        assert audit.n_licenses == 2

    def test_proprietary_root_with_gpl_dep(self):
        deps = [Dependency(name="reader", ecosystem="python-package", license_id="GPL-3.0-only")]
        audit = audit_compatibility("proprietary-all-rights-reserved", deps, small_matrix())
        assert audit.violated_count == 1
        assert audit.fraction_ok == 0.0
        assert audit.n_licenses == 1

    def test_no_dependencies(self):
        audit = audit_compatibility("MIT", [], small_matrix())
        assert audit.n_licenses == 0
        assert audit.fraction_ok == 1.0

    def test_unknown_license_not_a_violation(self):
        deps = [
            Dependency(name="mystery", ecosystem="python-package", license_id="unknown"),
            Dependency(name="reader", ecosystem="python-package", license_id="GPL-3.0-only"),
        ]
        audit = audit_compatibility("MIT", deps, small_matrix())
        assert audit.n_licenses == 2
        assert audit.violated_count == 1
        assert audit.fraction_ok == 0.5
        verdicts = {f.dependency.name: f.verdict for f in audit.findings}
        assert verdicts == {"mystery": "unknown", "reader": "incompatible"}

    def test_undeclared_pair_defaults_to_unknown(self):
        deps = [Dependency(name="x", ecosystem="python-package", license_id="MIT")]
        audit = audit_compatibility("Zlib", deps, small_matrix())  # pair not in matrix
        assert audit.findings[0].verdict == "unknown"
        assert audit.violated_count == 0

    def test_matrix_cell_change_flips_exactly_that_finding(self):
        deps = [
            Dependency(name="a", ecosystem="python-package", license_id="Apache-2.0"),
            Dependency(name="b", ecosystem="python-package", license_id="BSD-3-Clause"),
        ]
        before = audit_compatibility("MIT", deps, small_matrix())
        flipped = small_matrix().with_cell("Apache-2.0", "MIT", "incompatible")
        after = audit_compatibility("MIT", deps, flipped)
        assert before.findings[1].verdict == after.findings[1].verdict == "compatible"
        assert before.findings[0].verdict == "compatible"
        assert after.findings[0].verdict == "incompatible"
        assert after.violated_count == 1

    def test_matrix_csv_round_trip(self, tmp_path):
        csv_file = tmp_path / "matrix.csv"
        csv_file.write_text(
            "in\\root,MIT,GPL-3.0-only\nMIT,C,C\nGPL-3.0-only,I,C\n", encoding="utf-8"
        )
        matrix = CompatibilityMatrix.load(csv_file)
        assert matrix.verdict("GPL-3.0-only", "MIT") == "incompatible"
        assert matrix.verdict("MIT", "GPL-3.0-only") == "compatible"
        assert matrix.verdict("MIT", "Zlib") == "unknown"

    def test_bad_matrix_cell_rejected(self, tmp_path):
        csv_file = tmp_path / "matrix.csv"
        csv_file.write_text("in,MIT\nMIT,X\n", encoding="utf-8")
        with pytest.raises(ValueError, match="bad code"):
            CompatibilityMatrix.load(csv_file)


class TestLicenseScore:
    def test_perfect_fraction_is_always_100(self):
        for n in (0, 1, 10, 100):
            assert license_score(1.0, n) == 100.0

    def test_half_fraction_three_licenses(self):
        # 0.5 ** log2(4) = 0.5 ** 2 = 0.25
        assert license_score(0.5, 3) == pytest.approx(25.0, abs=1e-9)

    def test_three_quarters_fifteen_licenses(self):
        # 0.75 ** log2(16) = 0.75 ** 4 = 0.31640625
        assert license_score(0.75, 15) == pytest.approx(31.640625, abs=1e-6)

    def test_no_licenses_conventionally_100(self):
        assert license_score(1.0, 0) == 100.0
        assert license_score(0.0, 0) == 100.0

    def test_domain_violations(self):
        with pytest.raises(ValueError):
            license_score(1.5, 3)
        with pytest.raises(ValueError):
            license_score(0.5, -1)

    def test_monotone_in_violations_at_fixed_count(self):
        n = 10
        scores = [license_score((n - violations) / n, n) for violations in range(n + 1)]
        assert scores == sorted(scores, reverse=True)

    def test_strictly_decreasing_in_count_for_imperfect_fraction(self):
        scores = [license_score(0.9, n) for n in range(1, 50)]
        assert all(a > b for a, b in zip(scores, scores[1:]))

    @given(st.floats(0, 1), st.integers(0, 500))
    def test_bounds(self, fraction, count):
        assert 0.0 <= license_score(fraction, count) <= 100.0


class TestAuditResultInvariants:
    def test_fraction_must_match_counts(self):
        with pytest.raises(ValueError, match="fraction_ok"):
            LicenseAuditResult(
                root_license="MIT",
                findings=(),
                n_licenses=0,
                violated_count=0,
                fraction_ok=0.5,
            )

    def test_dict_round_trip(self):
        deps = [Dependency(name="a", ecosystem="python-package", license_id="Apache-2.0")]
        audit = audit_compatibility("MIT", deps, small_matrix())
        assert LicenseAuditResult.from_dict(audit.to_dict()) == audit
