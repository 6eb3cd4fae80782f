"""HTTP JSON API binding the analytics modules together.

Every endpoint is a thin adapter: contracts live in the bound modules.
Errors come back as {code, message, detail} with 400 for validation, 404 for
missing ids, 409 for conflicting state, and 502 for provider failures.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from datetime import date, timedelta
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import climate as cl
from . import layout as ly
from . import rag
from . import risk as rk
from . import topics as tp
from .config import AppConfig
from .gateway import Gateway, HttpProvider, MockProvider, ProviderError
from .session import NUMERIC_REF, AnalysisSession, SessionStore
from .store import FilterRules, NewsStore, SearchQuery, SearchState, StoreError

logger = logging.getLogger(__name__)

BASE_KEYWORDS = ("high temperature", "prolonged")
HEATWAVE_KEYWORD = "heatwave"
KEYWORD_WINDOW_DAYS = 7
DEFAULT_MARKER_CLUSTER_RADIUS = 40.0

INDEX_KINDS = ("temperature", "percentile", "return_period")
RESOLUTIONS = ("daily", "monthly", "yearly")

HIGHLIGHT_FIELDS = ("risk", "reason", "consequence", "advice")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


# ---------------------------------------------------------------------------
# Application state
# ---------------------------------------------------------------------------

@dataclass
class AppState:
    config: AppConfig
    data_dir: Path
    cities: dict[str, cl.CityDef]
    climate: cl.ClimateDataset
    curves: dict[str, rk.RiskCurve]
    store: NewsStore
    gateway: Gateway
    sessions: SessionStore
    topic_cache: dict[str, tuple[tp.TopicHierarchy, ly.HexLayout]] = dc_field(default_factory=dict)
    layout_cache: dict[str, ly.GlyphLayout] = dc_field(default_factory=dict)

    def city(self, city_id: str) -> cl.CityDef:
        if city_id not in self.cities:
            raise ApiError(404, "unknown_city", f"unknown city {city_id!r}")
        return self.cities[city_id]


def make_gateway(provider_kind: str, config: AppConfig,
                 cities: dict[str, cl.CityDef] | None = None) -> Gateway:
    if provider_kind == "mock":
        names = [n for c in (cities or {}).values() for n in c.all_names()]
        provider = MockProvider(known_locations=names, embed_dim=config.embed_dim)
        return Gateway(provider, config.provider, backoff_base=0.0, seed=config.seed)
    if provider_kind == "http":
        return Gateway(HttpProvider(config.provider), config.provider, seed=config.seed)
    raise ValueError(f"unknown provider kind {provider_kind!r}")


def build_state(data_dir: str | Path, provider: str = "mock",
                config: AppConfig | None = None) -> AppState:
    """Assemble the full engine from a data directory.

    Expected files: cities.csv (required); climate_daily.csv and/or
    climate_hourly.csv; forecast.csv, curves/*.csv optional; the news store's
    own files if ingestion has run.
    """
    data_dir = Path(data_dir)
    config = config or AppConfig()
    cities = cl.load_cities(data_dir / "cities.csv")

    dataset = cl.ClimateDataset(cities)
    loaded = False
    for name, resolution in (("climate_daily.csv", "daily"), ("climate_hourly.csv", "hourly")):
        path = data_dir / name
        if path.exists():
            dataset.ingest_file(path, resolution=resolution)
            loaded = True
    if not loaded:
        logger.warning("no climate files found in %s", data_dir)

    forecast = data_dir / "forecast.csv"
    if forecast.exists():
        for city_id in cities:
            try:
                dataset.ingest_forecast_file(forecast, city_id)
            except cl.ClimateError as exc:
                logger.warning("forecast skipped for %s: %s", city_id, exc)

    curves: dict[str, rk.RiskCurve] = {}
    curve_dir = data_dir / "curves"
    if curve_dir.is_dir():
        for path in sorted(curve_dir.glob("*.csv")):
            curve = rk.load_curve(path)
            curves[curve.city_id] = curve

    store = NewsStore(data_dir)
    store.load()
    gateway = make_gateway(provider, config, cities)
    sessions = SessionStore(data_dir / "sessions.json")
    return AppState(config=config, data_dir=data_dir, cities=cities, climate=dataset,
                    curves=curves, store=store, gateway=gateway, sessions=sessions)


# ---------------------------------------------------------------------------
# Operations owned by the service
# ---------------------------------------------------------------------------

def suggest_keywords(state: AppState, city_id: str, day: date) -> list[str]:
    """City name plus the base lexicon, plus "heatwave" when a detected event
    contains the date or lies within 7 days of it."""
    city = state.city(city_id)
    keywords = [city.name, *BASE_KEYWORDS]
    try:
        series = state.climate.city_series(city_id)
        clim = state.climate.climatology(city_id)
    except cl.ClimateError as exc:
        raise ApiError(409, "no_climate_data", str(exc))
    for event in cl.detect_heatwaves(series, clim):
        window_lo = event.start_date - timedelta(days=KEYWORD_WINDOW_DAYS)
        window_hi = event.end_date + timedelta(days=KEYWORD_WINDOW_DAYS)
        if window_lo <= day <= window_hi:
            keywords.append(HEATWAVE_KEYWORD)
            break
    return keywords


def numeric_summary(state: AppState, city_id: str, day: date) -> str:
    """The selected day's indices rendered to fixed-template sentences."""
    city = state.city(city_id)
    series = state.climate.city_series(city_id)
    clim = state.climate.climatology(city_id)
    by_day = {e.day: e for e in series.entries}
    lines = []
    entry = by_day.get(day)
    if entry is None:
        lines.append(f"No temperature record for {city.name} on {day.isoformat()}.")
    else:
        label = "projected " if entry.source == "forecast" else ""
        t = entry.mean_temp
        pct = cl.percentile_of(clim, t)
        rp = cl.return_period(clim, t)
        lines.append(f"On {day.isoformat()} the {label}daily mean temperature in "
                     f"{city.name} was {t:.1f} degC.")
        lines.append(f"That temperature sits at the {pct:.1f}th percentile of the "
                     f"{clim.window_start.year}-{clim.window_end.year} reference "
                     f"distribution.")
        lines.append(f"The empirical return period of exceeding {t:.1f} degC is "
                     f"{rp.display()}.")
        curve = state.curves.get(city_id)
        if curve is not None:
            rr = rk.relative_risk(curve, t)
            lines.append(f"Relative mortality risk at {t:.1f} degC is {rr:.2f} "
                         f"(minimum at {curve.mmt:.1f} degC).")
    events = [e for e in cl.detect_heatwaves(series, clim)
              if e.start_date - timedelta(days=KEYWORD_WINDOW_DAYS) <= day
              <= e.end_date + timedelta(days=KEYWORD_WINDOW_DAYS)]
    if events:
        ev = events[0]
        lines.append(f"A heatwave ran {ev.start_date.isoformat()} to "
                     f"{ev.end_date.isoformat()} (peak {ev.peak_temp:.1f} degC, "
                     f"threshold {ev.threshold_percentile}th percentile).")
    else:
        lines.append("No heatwave event detected within 7 days of the selected date.")
    return "\n".join(lines)


def assemble_report(state: AppState, session: AnalysisSession) -> str:
    """Numeric summary + pins + QA excerpts through the report synthesizer."""
    if not session.city_id or not session.selected_date:
        raise ApiError(400, "incomplete_session",
                       "session needs a selected city and date before reporting")
    dangling = sorted({
        ref for pin in session.pins for ref in pin.source_refs
        if ref != NUMERIC_REF and ref not in state.store.articles
    })
    if dangling:
        raise ApiError(409, "dangling_refs",
                       "pinned insights reference unknown articles", dangling)
    summary = numeric_summary(state, session.city_id,
                              date.fromisoformat(session.selected_date))
    pins = [p.text for p in session.pins]
    qa = [f"Q: {q.question} A: {q.answer}" for q in session.qa_history]
    try:
        return state.gateway.synthesize_report(summary, pins, qa)
    except ProviderError as exc:
        raise ApiError(502, "provider_failure", str(exc))


def search_topics(state: AppState, search_id: str) -> tuple[tp.TopicHierarchy, ly.HexLayout]:
    """Topic hierarchy + hex layout for a frozen search, built once and cached."""
    if search_id in state.topic_cache:
        return state.topic_cache[search_id]
    search = _search(state, search_id)
    articles = [state.store.get(aid) for aid in search.frozen_ids]
    hierarchy = tp.build_topics(articles, state.gateway,
                                eps=state.config.clustering.eps,
                                min_pts=state.config.clustering.min_pts)
    counts = [c.article_count for c in hierarchy.clusters]
    ids = [c.cluster_id for c in hierarchy.clusters]
    if hierarchy.clusters:
        embeddings = np.stack([
            _mean_unit(np.stack([state.gateway.embed(t) for t in c.member_tags]))
            for c in hierarchy.clusters
        ])
        hexes = ly.hex_place(embeddings, counts, topic_ids=ids, seed=state.config.seed,
                             hex_size=state.config.layout.hex_size,
                             method=state.config.layout.projector)
    else:
        hexes = ly.HexLayout()
    state.store.attach_topics(search_id, hierarchy.membership())
    state.topic_cache[search_id] = (hierarchy, hexes)
    return hierarchy, hexes


def _mean_unit(vectors: np.ndarray) -> np.ndarray:
    mean = vectors.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    return mean / norm if norm else mean


def search_layout(state: AppState, search_id: str) -> ly.GlyphLayout:
    """Glyph layout for a frozen search: project, snap, cache (immutable per id)."""
    if search_id in state.layout_cache:
        return state.layout_cache[search_id]
    search = _search(state, search_id)
    items = []
    vectors = []
    for aid in search.frozen_ids:
        article = state.store.get(aid)
        vec = state.store.embeddings.get(aid)
        if vec is None:
            vec = state.gateway.embed(article.body)
            state.store.embeddings[aid] = vec
        vectors.append(vec)
        total = article.structural.casualty.total() if article.structural else None
        items.append((aid, total if total is not None else 0))
    if not items:
        layout = ly.GlyphLayout(search_id=search_id, cell_size=1.0)
    else:
        coords = ly.project_2d(np.stack(vectors), seed=state.config.seed,
                               method=state.config.layout.projector)
        cell = state.config.layout.cell_size or ly.default_cell_size(coords)
        layout = ly.grid_snap(
            [(aid, float(coords[i, 0]), float(coords[i, 1]), float(importance))
             for i, (aid, importance) in enumerate(items)],
            cell_size=cell, search_id=search_id)
    state.layout_cache[search_id] = layout
    return layout


def representative_binding(state: AppState, city_id: str,
                           bin_width: float = 1.0) -> rk.RepresentativeBinding:
    city = state.city(city_id)
    rows = []
    for article in state.store.articles.values():
        info = article.structural
        if info is None or not Gateway.relevance_filter(info, city.all_names()):
            continue
        rows.append((article.id, article.published_at, info.temperature,
                     info.casualty.deaths))
    return rk.bind_representative_news(rows, bin_width=bin_width)


def highlight_spans(article) -> list[dict]:
    """Substring spans of the extracted narrative fields inside the body."""
    spans = []
    if article.structural is None:
        return spans
    for field_name in HIGHLIGHT_FIELDS:
        text = getattr(article.structural, field_name)
        if not text:
            continue
        start = article.body.find(text)
        if start >= 0:
            spans.append({"field": field_name, "start": start, "end": start + len(text)})
    return spans


def _search(state: AppState, search_id: str) -> SearchState:
    try:
        return state.store.search_state(search_id)
    except KeyError:
        raise ApiError(404, "unknown_search", f"unknown search {search_id!r}")


def _parse_date(value: str, name: str = "date") -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise ApiError(400, "bad_date", f"{name} must be an ISO date, got {value!r}")


def _series_payload(state: AppState, city_id: str, index: str, resolution: str,
                    dfrom: date | None, dto: date | None) -> dict:
    if index not in INDEX_KINDS:
        raise ApiError(400, "bad_index", f"index must be one of {INDEX_KINDS}")
    if resolution not in RESOLUTIONS:
        raise ApiError(400, "bad_resolution", f"resolution must be one of {RESOLUTIONS}")
    city = state.city(city_id)
    try:
        series = state.climate.city_series(city_id)
        clim = state.climate.climatology(city_id)
    except cl.ClimateError as exc:
        raise ApiError(409, "no_climate_data", str(exc))

    entries = [e for e in series.entries
               if (dfrom is None or e.day >= dfrom) and (dto is None or e.day <= dto)]

    def period_key(d: date) -> str:
        if resolution == "daily":
            return d.isoformat()
        if resolution == "monthly":
            return d.strftime("%Y-%m")
        return d.strftime("%Y")

    grouped: dict[str, list] = {}
    for e in entries:
        grouped.setdefault(period_key(e.day), []).append(e)

    # news volume per period: articles mentioning the city, bucketed by their
    # extracted event date (publication date before extraction)
    news_counts: dict[str, int] = {}
    lowered_names = [n.casefold() for n in city.all_names()]
    for article in state.store.articles.values():
        text = (article.title + "\n" + article.body).casefold()
        if not any(n in text for n in lowered_names):
            continue
        key = period_key(state.store.time_value(article))
        news_counts[key] = news_counts.get(key, 0) + 1

    points = []
    for key in sorted(grouped):
        bucket = grouped[key]
        mean_t = sum(e.mean_temp for e in bucket) / len(bucket)
        source = "forecast" if all(e.source == "forecast" for e in bucket) else "observed"
        if index == "temperature":
            value, extra = mean_t, {}
        elif index == "percentile":
            value, extra = cl.percentile_of(clim, mean_t), {}
        else:
            rp = cl.return_period(clim, mean_t)
            value = rp.years if rp.bounded else None
            extra = {"unbounded_min_years": rp.min_years}
        points.append({"period": key, "value": value, "source": source,
                       "news_count": news_counts.get(key, 0), **extra})
    return {"city_id": city_id, "index": index, "resolution": resolution,
            "points": points}


# ---------------------------------------------------------------------------
# Request models
# ---------------------------------------------------------------------------

class SearchRequest(BaseModel):
    city_id: str | None = None
    city_keyword: str | None = None
    keywords: list[str] = []
    relevant_only: bool = False


class RulesRequest(BaseModel):
    time_range: list[str] | None = None
    temperature_range: list[float] | None = None
    casualty_range: list[int] | None = None
    include_topics: list[int] = []
    exclude_topics: list[int] = []

    def to_rules(self) -> FilterRules:
        try:
            return FilterRules(
                time_range=tuple(date.fromisoformat(d) for d in self.time_range)
                if self.time_range else None,
                temperature_range=tuple(self.temperature_range)
                if self.temperature_range else None,
                casualty_range=tuple(self.casualty_range)
                if self.casualty_range else None,
                include_topics=frozenset(self.include_topics),
                exclude_topics=frozenset(self.exclude_topics),
            )
        except (StoreError, ValueError) as exc:
            raise ApiError(400, "bad_rules", str(exc))


class RankRequest(BaseModel):
    query_text: str


class QaRequest(BaseModel):
    question: str
    scope: list[str]
    session_id: str | None = None
    k: int | None = None


class PinRequest(BaseModel):
    session_id: str
    text: str
    source_refs: list[str] = []


class SessionUpdate(BaseModel):
    city_id: str | None = None
    selected_date: str | None = None
    index_kind: str | None = None
    resolution: str | None = None
    search_id: str | None = None


class ReportRequest(BaseModel):
    session_id: str


# ---------------------------------------------------------------------------
# App factory
# ---------------------------------------------------------------------------

def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="heat-risk analytics API")
    app.state.engine = state

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message,
                                     "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"code": "validation", "message": "invalid request",
                                     "detail": exc.errors()})

    # -- cities / climate ----------------------------------------------------

    @app.get("/api/cities")
    def cities():
        return [
            {"city_id": cid, "name": c.name, "aliases": list(c.aliases),
             "bbox": {"lat_min": c.lat_min, "lat_max": c.lat_max,
                      "lon_min": c.lon_min, "lon_max": c.lon_max}}
            for cid, c in sorted(state.cities.items())
        ]

    @app.get("/api/climate/{city_id}/series")
    def climate_series(city_id: str, index: str = "temperature",
                       resolution: str = "daily",
                       date_from: str | None = None, date_to: str | None = None):
        dfrom = _parse_date(date_from, "from") if date_from else None
        dto = _parse_date(date_to, "to") if date_to else None
        return _series_payload(state, city_id, index, resolution, dfrom, dto)

    @app.get("/api/climate/{city_id}/histogram")
    def climate_histogram(city_id: str, bin_width: float = 1.0):
        state.city(city_id)
        try:
            h = cl.histogram(state.climate.city_series(city_id), bin_width=bin_width)
        except cl.ClimateError as exc:
            raise ApiError(409, "no_climate_data", str(exc))
        return {"bin_edges": h.bin_edges.tolist(), "counts": h.counts.tolist()}

    @app.get("/api/climate/{city_id}/thermoglyph")
    def climate_thermoglyph(city_id: str, date_at: str | None = None):
        state.city(city_id)
        try:
            clim = state.climate.climatology(city_id)
        except cl.ClimateError as exc:
            raise ApiError(409, "no_climate_data", str(exc))
        table = cl.thermoglyph_table(clim)
        payload = {
            "city_id": city_id,
            "palette": list(cl.BAND_COLORS),
            "bands": [
                {"percentile_lo": b.percentile_lo, "percentile_hi": b.percentile_hi,
                 "temp_lo": b.temp_lo, "temp_hi": b.temp_hi,
                 "color_band_index": b.color_band_index}
                for b in table.bands
            ],
        }
        if date_at:
            day = _parse_date(date_at)
            by_day = {e.day: e.mean_temp for e in state.climate.city_series(city_id).entries}
            if day in by_day:
                t = by_day[day]
                payload["current"] = {"date": day.isoformat(), "temperature": t,
                                      "percentile": cl.percentile_of(clim, t),
                                      "band": table.band_from_temperature(t)}
        return payload

    @app.get("/api/climate/{city_id}/spatial")
    def climate_spatial(city_id: str, date_at: str, index: str = "temperature",
                        cluster_radius: float = DEFAULT_MARKER_CLUSTER_RADIUS):
        city = state.city(city_id)
        if index not in INDEX_KINDS:
            raise ApiError(400, "bad_index", f"index must be one of {INDEX_KINDS}")
        day = _parse_date(date_at)
        try:
            field_values = state.climate.grid_field(city_id, day, index=index)
        except cl.ClimateError as exc:
            raise ApiError(409, "no_climate_data", str(exc))
        cells = [{"lat": lat, "lon": lon, "value": v}
                 for (lat, lon), v in sorted(field_values.items())]
        citywide = (sum(field_values.values()) / len(field_values)) if field_values else None

        markers = []
        lowered = [n.casefold() for n in city.all_names()]
        for article in state.store.articles.values():
            text = (article.title + "\n" + article.body).casefold()
            if not any(n in text for n in lowered):
                continue
            if article.geo is not None:
                lat, lon, approx = article.geo[0], article.geo[1], False
            else:
                lat, lon = city.centroid()
                approx = True
            markers.append({"article_id": article.id, "lat": lat, "lon": lon,
                            "approx": approx,
                            "date": state.store.time_value(article).isoformat()})
        markers.sort(key=lambda m: m["article_id"])
        return {"city_id": city_id, "date": day.isoformat(), "index": index,
                "cells": cells, "citywide_mean": citywide,
                "markers": markers, "cluster_radius": cluster_radius}

    @app.get("/api/climate/{city_id}/heatwaves")
    def climate_heatwaves(city_id: str, pct: float = 97.5, min_run: int = 4):
        state.city(city_id)
        try:
            series = state.climate.city_series(city_id)
            clim = state.climate.climatology(city_id)
            events = cl.detect_heatwaves(series, clim, pct=pct, min_run=min_run)
        except cl.ClimateError as exc:
            raise ApiError(400, "bad_parameters", str(exc))
        return [
            {"start_date": e.start_date.isoformat(), "end_date": e.end_date.isoformat(),
             "duration": e.duration, "peak_temp": e.peak_temp,
             "threshold_percentile": e.threshold_percentile}
            for e in events
        ]

    @app.get("/api/keywords")
    def keywords(city_id: str, date_at: str):
        return {"keywords": suggest_keywords(state, city_id, _parse_date(date_at))}

    # -- search / news ---------------------------------------------------------

    @app.post("/api/search")
    def search(req: SearchRequest):
        if req.city_keyword:
            keyword = req.city_keyword
        elif req.city_id:
            keyword = state.city(req.city_id).name
        else:
            raise ApiError(400, "validation", "city_id or city_keyword required")
        try:
            search_state = state.store.keyword_search(
                SearchQuery(keyword, tuple(req.keywords)))
        except StoreError as exc:
            raise ApiError(400, "validation", str(exc))
        ids = list(search_state.frozen_ids)
        if req.relevant_only:
            city_names = tuple(
                n for c in state.cities.values() if c.name == keyword
                for n in c.all_names()) or (keyword,)
            ids = [aid for aid in ids
                   if (a := state.store.get(aid)).structural is not None
                   and Gateway.relevance_filter(a.structural, city_names)]
        return {"search_id": search_state.search_id, "ids": ids,
                "total": len(search_state.frozen_ids)}

    @app.get("/api/search/{sid}/topics")
    def topics_endpoint(sid: str):
        hierarchy, hexes = search_topics(state, sid)
        hex_by_topic = {h.topic_id: h for h in hexes.hexes}
        return {
            "search_id": sid,
            "topics": [
                {
                    "cluster_id": c.cluster_id, "label": c.label,
                    "article_count": c.article_count,
                    "member_tags": c.member_tags, "article_ids": c.article_ids,
                    "hex": ({"q": hex_by_topic[c.cluster_id].q,
                             "r": hex_by_topic[c.cluster_id].r,
                             "intensity": hex_by_topic[c.cluster_id].intensity}
                            if c.cluster_id in hex_by_topic else None),
                }
                for c in hierarchy.clusters
            ],
        }

    @app.post("/api/search/{sid}/filters")
    def filters(sid: str, req: RulesRequest):
        rules = req.to_rules()
        _search(state, sid)
        if rules.include_topics or rules.exclude_topics:
            search_topics(state, sid)    # ensure membership is attached
        try:
            ids = state.store.apply_filters(sid, rules, remember=True)
        except StoreError as exc:
            raise ApiError(409, "conflicting_state", str(exc))
        return {"search_id": sid, "ids": ids}

    @app.get("/api/search/{sid}/facets")
    def facets(sid: str):
        search_state = _search(state, sid)
        return state.store.facet_histograms(sid, search_state.rules)

    @app.get("/api/search/{sid}/layout")
    def layout_endpoint(sid: str):
        layout = search_layout(state, sid)
        glyphs = []
        for aid, placement in sorted(layout.placements.items()):
            article = state.store.get(aid)
            cox = ly.coxcomb_geometry(
                article.structural.casualty if article.structural else None,
                r_min=state.config.layout.coxcomb_r_min,
                scale=state.config.layout.coxcomb_scale,
                r_max=state.config.layout.coxcomb_r_max)
            glyphs.append({"article_id": aid,
                           "cell": list(placement.cell),
                           "raw": [placement.raw[0], placement.raw[1]],
                           "importance": placement.importance,
                           "coxcomb": cox.to_dict()})
        return {"search_id": sid, "cell_size": layout.cell_size, "glyphs": glyphs}

    @app.post("/api/search/{sid}/rank")
    def rank(sid: str, req: RankRequest):
        _search(state, sid)
        try:
            order = state.store.semantic_rank(sid, req.query_text, state.gateway)
        except StoreError as exc:
            raise ApiError(400, "validation", str(exc))
        except ProviderError as exc:
            raise ApiError(502, "provider_failure", str(exc))
        return {"search_id": sid, "order": order}

    @app.get("/api/search/{sid}/news")
    def news_page(sid: str, page: int = 1, page_size: int = 20):
        _search(state, sid)
        try:
            return state.store.list(sid, page=page, page_size=page_size)
        except StoreError as exc:
            raise ApiError(400, "validation", str(exc))

    @app.get("/api/news/{article_id}")
    def news_detail(article_id: str):
        try:
            article = state.store.get(article_id)
        except KeyError:
            raise ApiError(404, "unknown_article", f"unknown article {article_id!r}")
        payload = article.to_dict()
        payload["highlight_spans"] = highlight_spans(article)
        return payload

    # -- QA / session / report ---------------------------------------------------

    @app.post("/api/qa")
    def qa(req: QaRequest):
        if not req.scope:
            raise ApiError(400, "validation", "no knowledge selected")
        unknown = [aid for aid in req.scope if aid not in state.store.articles]
        if unknown:
            raise ApiError(404, "unknown_article", "scope contains unknown articles",
                           unknown)
        summary = None
        if req.session_id:
            try:
                session = state.sessions.get(req.session_id)
                if session.city_id and session.selected_date:
                    summary = numeric_summary(state, session.city_id,
                                              date.fromisoformat(session.selected_date))
            except KeyError:
                pass
        try:
            index = rag.build_index(req.scope, state.store, state.gateway,
                                    max_chunk_chars=state.config.rag.max_chunk_chars,
                                    numeric_summary=summary)
            result = rag.answer(index, req.question, state.gateway,
                                k=req.k or state.config.rag.top_k)
        except rag.RagError as exc:
            raise ApiError(400, "validation", str(exc))
        except ValueError as exc:
            raise ApiError(400, "validation", str(exc))
        except ProviderError as exc:
            raise ApiError(502, "provider_failure", str(exc))
        if req.session_id:
            state.sessions.record_qa(req.session_id, req.question, result.text,
                                     result.references)
        return {"text": result.text, "references": result.references}

    @app.post("/api/session/pin")
    def pin(req: PinRequest):
        unknown = [ref for ref in req.source_refs
                   if ref != NUMERIC_REF and ref not in state.store.articles]
        if unknown:
            raise ApiError(404, "unknown_article", "pin references unknown articles",
                           unknown)
        session = state.sessions.pin(req.session_id, req.text, req.source_refs)
        return session.to_dict()

    @app.post("/api/session/{session_id}")
    def update_session(session_id: str, req: SessionUpdate):
        if req.city_id is not None:
            state.city(req.city_id)
        if req.selected_date is not None:
            _parse_date(req.selected_date)
        if req.search_id is not None:
            _search(state, req.search_id)
        session = state.sessions.upsert(session_id, **req.model_dump(exclude_none=True))
        return session.to_dict()

    @app.get("/api/session/{session_id}")
    def get_session(session_id: str):
        try:
            return state.sessions.get(session_id).to_dict()
        except KeyError:
            raise ApiError(404, "unknown_session", f"unknown session {session_id!r}")

    @app.post("/api/report")
    def report(req: ReportRequest):
        try:
            session = state.sessions.get(req.session_id)
        except KeyError:
            raise ApiError(404, "unknown_session", f"unknown session {req.session_id!r}")
        return {"session_id": req.session_id, "report": assemble_report(state, session)}

    # -- risk ----------------------------------------------------------------------

    @app.get("/api/risk/{city_id}/curve")
    def risk_curve(city_id: str):
        state.city(city_id)
        curve = state.curves.get(city_id)
        if curve is None:
            raise ApiError(404, "no_curve", f"no risk curve loaded for {city_id!r}")
        return {"city_id": city_id, "mmt": curve.mmt,
                "points": [{"temp": t, "rr": r} for t, r in zip(curve.temps, curve.rrs)]}

    @app.get("/api/risk/{city_id}/representative")
    def risk_representative(city_id: str, bin_width: float = 1.0):
        if bin_width <= 0:
            raise ApiError(400, "validation", "bin_width must be positive")
        binding = representative_binding(state, city_id, bin_width=bin_width)
        return {"city_id": city_id, "bins": [
            {"temp_lo": b.temp_lo, "temp_hi": b.temp_hi,
             "article_id": b.article_id, "deaths": b.deaths}
            for b in binding.bins
        ]}

    # -- static frontend, when built ------------------------------------------------

    dist = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if dist.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=dist, html=True), name="ui")

    return app
