"""CLI pipeline tests: ingest, extract (with resume), index, eval, report."""

import json
import shutil

import pytest
from click.testing import CliRunner

from heatrisk.cli import JobManifest, main

from conftest import FIXTURES


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def data_dir(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    shutil.copyfile(FIXTURES / "cities.csv", data / "cities.csv")
    return data


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestJobManifest:
    def test_kinds_validated(self, tmp_path):
        with pytest.raises(ValueError):
            JobManifest(kind="mystery")

    def test_completed_ids(self, tmp_path):
        log = tmp_path / "log.jsonl"
        log.write_text('{"article_id": "a1", "structural": {}}\n'
                       '{"article_id": "a2", "error": "boom"}\n', encoding="utf-8")
        manifest = JobManifest(kind="extract", resume_log=log)
        assert manifest.completed_ids() == {"a1", "a2"}


class TestIngest:
    def test_ingest_news_idempotent(self, runner, data_dir):
        result = run_ok(runner, ["ingest-news", str(FIXTURES / "corpus.jsonl"),
                                 "--data-dir", str(data_dir)])
        assert "inserted=50" in result.output
        result = run_ok(runner, ["ingest-news", str(FIXTURES / "corpus.jsonl"),
                                 "--data-dir", str(data_dir)])
        assert "inserted=0" in result.output
        assert "duplicates=50" in result.output

    def test_ingest_climate_hourly(self, runner, data_dir):
        result = run_ok(runner, ["ingest-climate",
                                 str(FIXTURES / "climate_hourly_sample.csv"),
                                 "--data-dir", str(data_dir),
                                 "--resolution", "hourly"])
        assert (data_dir / "climate_hourly.csv").exists()
        assert "ingested" in result.output

    def test_ingest_climate_invalid(self, runner, data_dir, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("timestamp,lat,lon,temperature,unit\n"
                       "2022-07-01T00:00:00,22.25,114.0,999.0,C\n", encoding="utf-8")
        result = runner.invoke(main, ["ingest-climate", str(bad),
                                      "--data-dir", str(data_dir)])
        assert result.exit_code == 1


class TestExtract:
    def seed_store(self, runner, data_dir):
        run_ok(runner, ["ingest-news", str(FIXTURES / "corpus.jsonl"),
                        "--data-dir", str(data_dir)])

    def test_full_run_then_rerun_zero(self, runner, data_dir):
        self.seed_store(runner, data_dir)
        result = run_ok(runner, ["extract", "--data-dir", str(data_dir)])
        assert "processed=50" in result.output
        assert "failures=0" in result.output
        result = run_ok(runner, ["extract", "--data-dir", str(data_dir)])
        assert "processed=0" in result.output

    def test_kill_and_resume_equals_single_run(self, runner, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for d in (a, b):
            d.mkdir()
            shutil.copyfile(FIXTURES / "cities.csv", d / "cities.csv")
            run_ok(runner, ["ingest-news", str(FIXTURES / "corpus.jsonl"),
                            "--data-dir", str(d)])
        run_ok(runner, ["extract", "--data-dir", str(a)])
        # simulate a kill after 20 articles, then resume
        result = run_ok(runner, ["extract", "--data-dir", str(b), "--limit", "20"])
        assert "processed=20" in result.output
        result = run_ok(runner, ["extract", "--data-dir", str(b)])
        assert "processed=30" in result.output
        assert (a / "extractions.jsonl").read_bytes() == \
            (b / "extractions.jsonl").read_bytes()

    def test_two_runs_bit_identical(self, runner, tmp_path):
        outs = []
        for name in ("r1", "r2"):
            d = tmp_path / name
            d.mkdir()
            shutil.copyfile(FIXTURES / "cities.csv", d / "cities.csv")
            run_ok(runner, ["ingest-news", str(FIXTURES / "corpus.jsonl"),
                            "--data-dir", str(d)])
            run_ok(runner, ["extract", "--data-dir", str(d)])
            run_ok(runner, ["index", "--data-dir", str(d),
                            "--config", str(FIXTURES / "config.json")])
            outs.append({
                "extractions": (d / "extractions.jsonl").read_bytes(),
                "topics": (d / "topics.json").read_bytes(),
                "layout": (d / "layout.json").read_bytes(),
                "embeddings": (d / "embeddings.npy").read_bytes(),
            })
        assert outs[0] == outs[1]

    def test_requires_articles(self, runner, data_dir):
        result = runner.invoke(main, ["extract", "--data-dir", str(data_dir)])
        assert result.exit_code == 1


class TestIndex:
    def test_index_outputs(self, runner, data_dir):
        run_ok(runner, ["ingest-news", str(FIXTURES / "corpus.jsonl"),
                        "--data-dir", str(data_dir)])
        run_ok(runner, ["extract", "--data-dir", str(data_dir)])
        result = run_ok(runner, ["index", "--data-dir", str(data_dir),
                                 "--config", str(FIXTURES / "config.json")])
        assert "indexed 50 articles" in result.output
        topics = json.loads((data_dir / "topics.json").read_text(encoding="utf-8"))
        labels = [c["label"] for c in topics["clusters"]]
        assert any(l.startswith("topic:") for l in labels)
        layout = json.loads((data_dir / "layout.json").read_text(encoding="utf-8"))
        cells = [tuple(g["cell"]) for g in layout["glyphs"].values()]
        assert len(set(cells)) == len(cells) == 50


class TestEval:
    def test_fixture_annotations(self, runner, tmp_path):
        out = tmp_path / "chart.json"
        result = run_ok(runner, ["eval", str(FIXTURES / "annotations.csv"),
                                 "--out", str(out)])
        assert "tag" in result.output
        chart = json.loads(out.read_text(encoding="utf-8"))
        tag = next(r for r in chart if r["field"] == "tag")
        assert tag["good"] == pytest.approx(23 / 24)
        time_row = next(r for r in chart if r["field"] == "time")
        assert time_row["good"] == pytest.approx(0.7307, abs=1e-3)

    def test_bad_file(self, runner, tmp_path):
        bad = tmp_path / "ann.csv"
        bad.write_text("article_id,field,judgment,annotator_id\n"
                       "a1,tag,amazing,e1\n", encoding="utf-8")
        result = runner.invoke(main, ["eval", str(bad)])
        assert result.exit_code == 1


class TestReportCommand:
    def test_report_for_session(self, runner, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        for name in ("cities.csv", "climate_daily.csv"):
            shutil.copyfile(FIXTURES / name, data / name)
        shutil.copytree(FIXTURES / "curves", data / "curves")
        run_ok(runner, ["ingest-news", str(FIXTURES / "corpus.jsonl"),
                        "--data-dir", str(data)])
        run_ok(runner, ["extract", "--data-dir", str(data)])
        (data / "sessions.json").write_text(json.dumps({
            "s1": {"session_id": "s1", "city_id": "hong_kong",
                   "selected_date": "2022-07-24"}}), encoding="utf-8")
        out = tmp_path / "report.txt"
        result = run_ok(runner, ["report", "--data-dir", str(data),
                                 "--session-id", "s1", "--out", str(out)])
        text = out.read_text(encoding="utf-8")
        assert "Meteorological conditions" in text

    def test_unknown_session(self, runner, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        shutil.copyfile(FIXTURES / "cities.csv", data / "cities.csv")
        result = runner.invoke(main, ["report", "--data-dir", str(data),
                                      "--session-id", "nope"])
        assert result.exit_code == 1
