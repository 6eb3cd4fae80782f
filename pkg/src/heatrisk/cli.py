"""Batch entry points: ingest, extract, index, serve, report, eval.

Extraction at corpus scale is slow against a hosted provider, so the extract
job appends to a log as it goes and resumes from it: killed runs lose nothing
and reruns process only what is missing. All outputs are deterministic given
the same inputs and seed.

Exit codes: 0 success, 1 validation error, 2 partial failure (extraction
failure rate at or above the bound), 3 provider unavailable.
"""

from __future__ import annotations

import json
import logging
import shutil
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import climate as cl
from . import layout as ly
from . import topics as tp
from .config import AppConfig, load_config
from .evaluation import accuracy, export_chart_data, format_table, load_annotations
from .gateway import ExtractionFailure, Gateway, ProviderError
from .gateway.schema import StructuralInfo
from .service import build_state, create_app, make_gateway
from .store import NewsStore

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARTIAL = 2
EXIT_PROVIDER = 3

JOB_KINDS = ("ingest-climate", "ingest-news", "extract", "index", "serve",
             "report", "eval")


@dataclass
class JobManifest:
    """What a batch job runs on and where it may resume from."""

    kind: str
    inputs: list[Path] = field(default_factory=list)
    resume_log: Path | None = None

    def __post_init__(self) -> None:
        if self.kind not in JOB_KINDS:
            raise ValueError(f"unknown job kind {self.kind!r}")

    def completed_ids(self) -> set[str]:
        """Article ids already processed according to the resume log."""
        done: set[str] = set()
        if self.resume_log is None or not self.resume_log.exists():
            return done
        with open(self.resume_log, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    done.add(json.loads(line)["article_id"])
                except (json.JSONDecodeError, KeyError):
                    logger.warning("skipping malformed resume-log line")
        return done


def _load_config(config_path: str | None, seed: int | None) -> AppConfig:
    cfg = load_config(config_path)
    if seed is not None:
        cfg.seed = seed
    return cfg


@click.group()
def main():
    """Heat-risk analytics pipeline."""
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s %(message)s")


@main.command("ingest-climate")
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.option("--data-dir", type=click.Path(path_type=Path), required=True)
@click.option("--resolution", type=click.Choice(["hourly", "daily"]), default="hourly")
def ingest_climate(file: Path, data_dir: Path, resolution: str):
    """Validate a climate CSV and install it into the data directory."""
    data_dir.mkdir(parents=True, exist_ok=True)
    cities_file = data_dir / "cities.csv"
    if not cities_file.exists():
        click.echo("data dir is missing cities.csv", err=True)
        sys.exit(EXIT_VALIDATION)
    dataset = cl.ClimateDataset(cl.load_cities(cities_file))
    try:
        rows = dataset.ingest_file(file, resolution=resolution)
    except (cl.ClimateError, ValueError, KeyError) as exc:
        click.echo(f"invalid climate file: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    target = data_dir / f"climate_{resolution}.csv"
    if file.resolve() != target.resolve():
        shutil.copyfile(file, target)
    click.echo(f"ingested {rows} rows -> {target}")


@main.command("ingest-news")
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.option("--data-dir", type=click.Path(path_type=Path), required=True)
def ingest_news(file: Path, data_dir: Path):
    """Ingest line-delimited news records into the store (idempotent by id)."""
    store = NewsStore(data_dir)
    store.load()
    report = store.ingest(file)
    store.save()
    click.echo(f"inserted={report.inserted} duplicates={report.duplicates} "
               f"rejected={report.rejected}")
    if report.rejected_lines:
        click.echo(f"rejected lines: {report.rejected_lines}", err=True)


@main.command("extract")
@click.option("--data-dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--provider", type=click.Choice(["mock", "http"]), default="mock")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Extraction export file (default: DATA_DIR/extractions.jsonl).")
@click.option("--force", is_flag=True, help="Re-extract articles that already have results.")
@click.option("--limit", type=int, default=None, help="Process at most N pending articles.")
@click.option("--failure-bound", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=None)
def extract(data_dir: Path, provider: str, config_path, out, force, limit,
            failure_bound, seed):
    """Structural extraction for every stored article that lacks it."""
    cfg = _load_config(config_path, seed)
    store = NewsStore(data_dir)
    store.load()
    if not store.articles:
        click.echo("no articles in store; run ingest-news first", err=True)
        sys.exit(EXIT_VALIDATION)
    cities = {}
    cities_file = data_dir / "cities.csv"
    if cities_file.exists():
        cities = cl.load_cities(cities_file)
    gateway = make_gateway(provider, cfg, cities)

    log_path = data_dir / "extraction_log.jsonl"
    manifest = JobManifest(kind="extract", inputs=[data_dir], resume_log=log_path)
    if force:
        log_path.unlink(missing_ok=True)
        for article in store.articles.values():
            article.structural = None
    done = manifest.completed_ids()
    # replay the log into the store before processing
    if log_path.exists():
        with open(log_path, encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                if rec.get("structural") and rec["article_id"] in store.articles:
                    store.articles[rec["article_id"]].structural = \
                        StructuralInfo.from_dict(rec["structural"])

    pending = [aid for aid in sorted(store.articles)
               if aid not in done and store.articles[aid].structural is None]
    if limit is not None:
        pending = pending[:max(limit, 0)]

    processed = 0
    failures: list[dict] = []
    provider_down = False
    with open(log_path, "a", encoding="utf-8") as log:
        for aid in pending:
            article = store.articles[aid]
            try:
                info = gateway.extract(article)
                article.structural = info
                log.write(json.dumps({"article_id": aid, "structural": info.to_dict()},
                                     sort_keys=True, ensure_ascii=False) + "\n")
            except ExtractionFailure as exc:
                failures.append({"article_id": aid, "error": str(exc),
                                 "raw_output": exc.raw_output})
                log.write(json.dumps({"article_id": aid, "error": str(exc)},
                                     sort_keys=True, ensure_ascii=False) + "\n")
                if "provider unavailable" in str(exc):
                    provider_down = True
            except ValueError as exc:
                failures.append({"article_id": aid, "error": str(exc), "raw_output": ""})
                log.write(json.dumps({"article_id": aid, "error": str(exc)},
                                     sort_keys=True, ensure_ascii=False) + "\n")
            processed += 1
            log.flush()

    store.save()
    out = out or (data_dir / "extractions.jsonl")
    store.export(out)
    failure_report = data_dir / "extraction_failures.json"
    failure_report.write_text(json.dumps(failures, sort_keys=True, indent=1),
                              encoding="utf-8")
    rate = (len(failures) / processed) if processed else 0.0
    click.echo(f"processed={processed} failures={len(failures)} rate={rate:.3f} "
               f"export={out}")
    if provider_down and failures and len(failures) == processed:
        sys.exit(EXIT_PROVIDER)
    if processed and rate >= failure_bound:
        sys.exit(EXIT_PARTIAL)


@main.command("index")
@click.option("--data-dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--provider", type=click.Choice(["mock", "http"]), default="mock")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
def index(data_dir: Path, provider: str, config_path, seed):
    """Embeddings, corpus-wide topics, and a corpus layout, persisted."""
    cfg = _load_config(config_path, seed)
    store = NewsStore(data_dir)
    store.load()
    if not store.articles:
        click.echo("no articles in store; run ingest-news first", err=True)
        sys.exit(EXIT_VALIDATION)
    cities = {}
    cities_file = data_dir / "cities.csv"
    if cities_file.exists():
        cities = cl.load_cities(cities_file)
    gateway = make_gateway(provider, cfg, cities)

    try:
        for aid in sorted(store.articles):
            store.embeddings[aid] = gateway.embed(store.articles[aid].body)

        articles = [store.articles[aid] for aid in sorted(store.articles)]
        hierarchy = tp.build_topics(articles, gateway, eps=cfg.clustering.eps,
                                    min_pts=cfg.clustering.min_pts)
        hierarchy.export(data_dir / "topics.json")

        matrix = np.stack([store.embeddings[aid] for aid in sorted(store.articles)])
        coords = ly.project_2d(matrix, seed=cfg.seed, method=cfg.layout.projector)
        cell = cfg.layout.cell_size or ly.default_cell_size(coords)
        items = []
        for i, aid in enumerate(sorted(store.articles)):
            info = store.articles[aid].structural
            total = info.casualty.total() if info else None
            items.append((aid, float(coords[i, 0]), float(coords[i, 1]),
                          float(total if total is not None else 0)))
        layout = ly.grid_snap(items, cell_size=cell, search_id="corpus")
        layout.export(data_dir / "layout.json")
    except ProviderError as exc:
        click.echo(f"provider failure: {exc}", err=True)
        sys.exit(EXIT_PROVIDER)

    store.save()
    click.echo(f"indexed {len(store.articles)} articles; "
               f"topics={len(hierarchy.clusters)} cell_size={cell:.4f}")


@main.command("serve")
@click.option("--data-dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--provider", type=click.Choice(["mock", "http"]), default="mock")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(data_dir: Path, host: str, port: int, provider: str, config_path):
    """Run the HTTP API."""
    import uvicorn

    cfg = _load_config(config_path, None)
    state = build_state(data_dir, provider=provider, config=cfg)
    app = create_app(state)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command("report")
@click.option("--data-dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--session-id", required=True)
@click.option("--provider", type=click.Choice(["mock", "http"]), default="mock")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None)
def report(data_dir: Path, session_id: str, provider: str, config_path, out):
    """Assemble the report for a persisted session."""
    from .service import ApiError, assemble_report

    cfg = _load_config(config_path, None)
    state = build_state(data_dir, provider=provider, config=cfg)
    try:
        session = state.sessions.get(session_id)
    except KeyError:
        click.echo(f"unknown session {session_id!r}", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        text = assemble_report(state, session)
    except ApiError as exc:
        click.echo(f"{exc.code}: {exc.message} {exc.detail or ''}", err=True)
        sys.exit(EXIT_VALIDATION if exc.status == 400 else EXIT_PARTIAL)
    except ProviderError as exc:
        click.echo(f"provider failure: {exc}", err=True)
        sys.exit(EXIT_PROVIDER)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"report written to {out}")
    else:
        click.echo(text)


@main.command("eval")
@click.argument("annotations", type=click.Path(exists=True, path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Chart-data JSON output path.")
def eval_cmd(annotations: Path, out):
    """Per-field extraction accuracy from an annotation file."""
    try:
        results = accuracy(load_annotations(annotations))
    except ValueError as exc:
        click.echo(f"invalid annotations: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(format_table(results))
    if out:
        export_chart_data(results, out)
        click.echo(f"chart data written to {out}")


if __name__ == "__main__":
    main()
