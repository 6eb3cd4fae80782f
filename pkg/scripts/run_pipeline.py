#!/usr/bin/env python3
"""End-to-end demo on the fixture data: ingest, extract, index, search,
topics, QA, report. Prints a short trace of the analyst workflow the API
serves. Everything runs offline against the deterministic mock provider.

Usage: python scripts/run_pipeline.py [--workdir PATH]
"""

import argparse
import shutil
import sys
import tempfile
from datetime import date
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from heatrisk import climate as cl  # noqa: E402
from heatrisk import rag  # noqa: E402
from heatrisk.config import load_config  # noqa: E402
from heatrisk.service import (  # noqa: E402
    assemble_report,
    build_state,
    search_topics,
    suggest_keywords,
)
from heatrisk.store import SearchQuery  # noqa: E402

FIXTURES = Path(__file__).parent.parent / "data" / "fixtures"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=None)
    args = parser.parse_args()

    workdir = args.workdir or Path(tempfile.mkdtemp(prefix="heatrisk-demo-"))
    data = workdir / "data"
    if not data.exists():
        data.mkdir(parents=True)
        for name in ("cities.csv", "climate_daily.csv", "forecast.csv"):
            shutil.copyfile(FIXTURES / name, data / name)
        shutil.copytree(FIXTURES / "curves", data / "curves")

    cfg = load_config(FIXTURES / "config.json")
    state = build_state(data, provider="mock", config=cfg)
    state.store.ingest(FIXTURES / "corpus.jsonl")
    print(f"[1] ingested {len(state.store.articles)} articles into {data}")

    for aid in sorted(state.store.articles):
        article = state.store.articles[aid]
        article.structural = state.gateway.extract(article)
        state.store.embeddings[aid] = state.gateway.embed(article.body)
    state.store.save()
    print("[2] extraction + embeddings complete")

    day = date(2022, 7, 24)
    clim = state.climate.climatology("hong_kong")
    series = state.climate.city_series("hong_kong")
    t = {e.day: e.mean_temp for e in series.entries}[day]
    print(f"[3] Hong Kong {day}: {t:.1f} degC, "
          f"{cl.percentile_of(clim, t):.1f}th percentile, "
          f"return period {cl.return_period(clim, t).display()}")

    keywords = suggest_keywords(state, "hong_kong", day)
    print(f"[4] suggested keywords: {keywords}")

    search = state.store.keyword_search(SearchQuery("Hong Kong", ("heatwave",)))
    print(f"[5] search {search.search_id}: {len(search.frozen_ids)} articles")

    hierarchy, _hexes = search_topics(state, search.search_id)
    for cluster in hierarchy.clusters:
        print(f"    topic {cluster.cluster_id:>2} [{cluster.article_count} articles] "
              f"{cluster.label}")

    scope = ["hk006", "hk007", "hk008"]
    index = rag.build_index(scope, state.store, state.gateway)
    answer = rag.answer(index, "What happened to the water supply during the drought?",
                        state.gateway)
    print(f"[6] QA: {answer.text}")
    print(f"    references: {answer.references}")

    state.sessions.upsert("demo", city_id="hong_kong", selected_date=day.isoformat())
    state.sessions.pin("demo", "Outdoor workers need mandatory heat breaks; "
                               "the government should enforce rest rotations.",
                       ["hk004"])
    report = assemble_report(state, state.sessions.get("demo"))
    print("[7] report:\n")
    print(report)


if __name__ == "__main__":
    main()
