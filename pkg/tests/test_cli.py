from __future__ import annotations

import json

import pytest

from fairgauge.cli import ConfigError, RunConfig, main, parse_target
from fairgauge.ingest import ResponseCache, issue_search_endpoint, repo_endpoint
from fairgauge.model import display_percent

from fixture_data import (
    CORPUS,
    DEMO_REPO,
    FIXED_NOW,
    ISSUES_CLOSED,
    ISSUES_TOTAL,
    REPO_PAYLOAD,
    demo_ref,
    populate_demo_cache,
    put_json,
)

DEMO_URL = "https://github.com/acme/demo-tool"


def analyze_args(tmp_path, out_name="out", extra=()):
    cache_dir = tmp_path / "cache"
    if not cache_dir.exists():
        populate_demo_cache(cache_dir)
    return [
        "analyze", DEMO_URL,
        "--path", str(DEMO_REPO),
        "--out", str(tmp_path / out_name),
        "--offline",
        "--cache", str(cache_dir),
        "--now", FIXED_NOW,
        *extra,
    ]


class TestParseTarget:
    def test_url(self):
        ref = parse_target("https://github.com/acme/demo-tool")
        assert (ref.forge_host, ref.owner, ref.name) == ("github.com", "acme", "demo-tool")

    def test_url_with_git_suffix(self):
        assert parse_target("https://github.com/acme/demo-tool.git").name == "demo-tool"

    def test_slug(self):
        ref = parse_target("acme/demo-tool")
        assert ref.forge_host == "github.com"

    def test_local_directory(self, tmp_path):
        ref = parse_target(str(tmp_path))
        assert ref.forge_host is None
        assert ref.local_path == tmp_path

    def test_garbage_rejected(self):
        with pytest.raises(ConfigError):
            parse_target("/no/such/path/anywhere")

    def test_offline_requires_cache(self, tmp_path):
        with pytest.raises(ConfigError, match="cache"):
            RunConfig(ref=demo_ref(), out_dir=tmp_path, offline=True)


class TestAnalyze:
    def test_offline_fixture_full_run(self, tmp_path, capsys):
        exit_code = main(analyze_args(tmp_path))
        assert exit_code == 0
        out = tmp_path / "out"
        for name in ("report.json", "report.html", "sbom.json", "license-audit.json",
                     "history.json"):
            assert (out / name).exists(), name

        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["fairness"]["raw_score"] == 4
        assert report["fairness"]["s_fair"] == 80.0
        assert report["citations"]["n_citations"] == 4
        assert dict(map(tuple, report["radar"]["axes"])) == {
            "Computer Science": 3, "Medicine": 2,
        }
        assert report["scorecard"]["s_license"] == 100.0
        assert display_percent(report["scorecard"]["s_maintainability"]) == 97  # 29/30
        assert report["scorecard"]["s_documentation"] == 100.0
        assert display_percent(report["scorecard"]["s_quality"]) == 92
        assert report["repository"]["stars"] == 42

    def test_with_reuse_index(self, tmp_path):
        index_path = tmp_path / "index.jsonl"
        assert main(["build-index", str(CORPUS), "--out", str(index_path)]) == 0
        exit_code = main(analyze_args(tmp_path, extra=["--index", str(index_path)]))
        assert exit_code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
        assert report["reuse"]["n_reuse_projects"] == 2
        assert report["scorecard"]["n_reuse_projects"] == 2

    def test_missing_repo_exits_nonzero(self, tmp_path, capsys):
        cache_dir = tmp_path / "cache"
        cache = populate_demo_cache(cache_dir)
        from fairgauge.model import RepositoryRef

        ghost = RepositoryRef(owner="nobody", name="ghost", forge_host="github.com")
        put_json(cache, repo_endpoint(ghost), {"message": "Not Found"}, status=404)
        exit_code = main(
            [
                "analyze", "https://github.com/nobody/ghost",
                "--out", str(tmp_path / "out"),
                "--offline", "--cache", str(cache_dir),
            ]
        )
        assert exit_code == 1
        assert "not found" in capsys.readouterr().err.lower()
        assert not (tmp_path / "out" / "report.json").exists()

    def test_catalog_outage_degrades_to_zero_citations(self, tmp_path):
        # cache holds forge responses only; both catalog fetches fail offline
        cache_dir = tmp_path / "cache"
        cache = ResponseCache(cache_dir)
        ref = demo_ref()
        put_json(cache, repo_endpoint(ref), REPO_PAYLOAD)
        put_json(cache, issue_search_endpoint(ref), {"total_count": ISSUES_TOTAL})
        put_json(cache, issue_search_endpoint(ref, "closed"), {"total_count": ISSUES_CLOSED})
        exit_code = main(analyze_args(tmp_path))
        assert exit_code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
        assert report["citations"]["n_citations"] == 0
        assert report["scorecard"]["n_citations"] == 0
        notes = " ".join(report["notes"])
        assert "unavailable" in notes
        assert "treated as 0" in notes

    def test_local_only_target_degrades_honestly(self, tmp_path):
        # a bare directory target has no forge coordinates: counts default to
        # zero, R1 fails, and (with an empty cache) the catalogs degrade too
        cache_dir = tmp_path / "cache"
        cache_dir.mkdir()
        exit_code = main(
            [
                "analyze", str(DEMO_REPO),
                "--out", str(tmp_path / "out"),
                "--offline", "--cache", str(cache_dir),
                "--now", FIXED_NOW,
            ]
        )
        assert exit_code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
        assert report["repository"]["forge_host"] is None
        assert report["repository"]["stars"] == 0
        checks = {c["recommendation_id"]: c["passed"] for c in report["fairness"]["checks"]}
        assert checks["R1"] is False  # public accessibility cannot be verified
        assert checks["R4"] is True  # file-based checks still run
        assert report["citations"]["n_citations"] == 0
        notes = " ".join(report["notes"])
        assert "forge metadata unavailable" in notes
        assert "unavailable" in notes

    def test_count_cap_flag(self, tmp_path):
        exit_code = main(analyze_args(tmp_path, extra=["--count-cap", "2"]))
        assert exit_code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
        assert report["citations"]["n_citations"] == 4  # full set still reported
        assert report["scorecard"]["n_citations"] == 2  # capped for scoring

    def test_weights_file_override(self, tmp_path):
        weights_file = tmp_path / "weights.json"
        weights_file.write_text(
            json.dumps({"w_fair": 1, "w_license": 1, "w_maintainability": 1, "w_documentation": 1}),
            encoding="utf-8",
        )
        exit_code = main(analyze_args(tmp_path, extra=["--weights", str(weights_file)]))
        assert exit_code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
        card = report["scorecard"]
        expected = (card["s_fair"] + card["s_license"] + card["s_maintainability"]
                    + card["s_documentation"]) / 4
        assert card["s_quality"] == pytest.approx(expected)

    def test_bad_weights_file_usage_error(self, tmp_path, capsys):
        weights_file = tmp_path / "weights.json"
        weights_file.write_text('{"w_bogus": 3}', encoding="utf-8")
        exit_code = main(analyze_args(tmp_path, extra=["--weights", str(weights_file)]))
        assert exit_code == 2

    def test_exit_zero_iff_report_written(self, tmp_path):
        exit_code = main(analyze_args(tmp_path))
        assert exit_code == 0
        assert (tmp_path / "out" / "report.json").exists()


class TestBuildIndexCommand:
    def test_two_project_corpus(self, tmp_path, capsys):
        index_path = tmp_path / "index.jsonl"
        assert main(["build-index", str(CORPUS), "--out", str(index_path)]) == 0
        lines = [json.loads(line) for line in index_path.read_text().splitlines()]
        assert {record["project"] for record in lines} == {"proj-a", "proj-b"}

    def test_empty_corpus(self, tmp_path):
        empty = tmp_path / "corpus"
        empty.mkdir()
        index_path = tmp_path / "index.jsonl"
        assert main(["build-index", str(empty), "--out", str(index_path)]) == 0
        assert index_path.read_text(encoding="utf-8") == ""

    def test_bad_path(self, tmp_path, capsys):
        assert main(["build-index", str(tmp_path / "missing"), "--out", str(tmp_path / "i")]) == 1


class TestHistoryCommand:
    def test_two_runs_show_delta_row(self, tmp_path, capsys):
        main(analyze_args(tmp_path))
        second = analyze_args(tmp_path)
        second[second.index("--now") + 1] = "2026-04-01T12:00:00+00:00"
        main(second)
        capsys.readouterr()
        assert main(["history", str(tmp_path / "out")]) == 0
        output = capsys.readouterr().out
        assert "run history (2 runs)" in output
        assert "deltas" in output
        assert "run 1 -> 2" in output

    def test_single_run_notice(self, tmp_path, capsys):
        main(analyze_args(tmp_path))
        capsys.readouterr()
        assert main(["history", str(tmp_path / "out")]) == 0
        assert "first run" in capsys.readouterr().out

    def test_missing_history_nonzero(self, tmp_path, capsys):
        assert main(["history", str(tmp_path / "empty")]) == 1
