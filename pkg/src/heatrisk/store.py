"""News article store: ingest, keyword search, rule filters, facets, ranking.

Keyword matching is case-insensitive substring containment over title+body
(segmentation-free, so it works unchanged for languages without word
boundaries). Search results are frozen under a search id so downstream
layouts stay stable. A single writer mutates the store; readers see immutable
search snapshots.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .gateway import Gateway
from .gateway.schema import StructuralInfo

logger = logging.getLogger(__name__)

MEDIA_TYPES = ("web", "publication")

# Casualty facet bin lower edges; right-open except the last.
CASUALTY_BIN_EDGES = (0, 1, 10, 100, 1000)
CASUALTY_BIN_LABELS = ("0", "1-9", "10-99", "100-999", ">=1000")


class StoreError(ValueError):
    pass


@dataclass
class NewsArticle:
    id: str
    title: str
    body: str
    published_at: date
    publisher: str
    media_type: str
    geo: tuple[float, float] | None = None
    structural: StructuralInfo | None = None

    @property
    def char_count(self) -> int:
        return len(self.body)

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "title": self.title,
            "body": self.body,
            "char_count": self.char_count,
            "published_at": self.published_at.isoformat(),
            "publisher": self.publisher,
            "media_type": self.media_type,
        }
        if self.geo is not None:
            d["geo"] = {"lat": self.geo[0], "lon": self.geo[1]}
        if self.structural is not None:
            d["structural"] = self.structural.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NewsArticle":
        if d["media_type"] not in MEDIA_TYPES:
            raise StoreError(f"media_type must be one of {MEDIA_TYPES}")
        geo = None
        if d.get("geo") is not None:
            geo = (float(d["geo"]["lat"]), float(d["geo"]["lon"]))
        structural = None
        if d.get("structural") is not None:
            structural = StructuralInfo.from_dict(d["structural"])
        return cls(
            id=str(d["id"]),
            title=str(d["title"]),
            body=str(d["body"]),
            published_at=date.fromisoformat(d["published_at"]),
            publisher=str(d.get("publisher", "")),
            media_type=d["media_type"],
            geo=geo,
            structural=structural,
        )


@dataclass(frozen=True)
class SearchQuery:
    """A mandatory city keyword, optionally narrowed by any-of extra keywords."""

    city_keyword: str
    extra_keywords: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.city_keyword.strip():
            raise StoreError("city keyword must be non-empty")


@dataclass(frozen=True)
class FilterRules:
    time_range: tuple[date, date] | None = None
    temperature_range: tuple[float, float] | None = None
    casualty_range: tuple[int, int] | None = None
    include_topics: frozenset[int] = frozenset()
    exclude_topics: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        for name in ("time_range", "temperature_range", "casualty_range"):
            rng = getattr(self, name)
            if rng is not None and rng[0] > rng[1]:
                raise StoreError(f"{name} is not well-ordered")

    def is_empty(self) -> bool:
        return (self.time_range is None and self.temperature_range is None
                and self.casualty_range is None and not self.include_topics
                and not self.exclude_topics)

    def to_dict(self) -> dict:
        return {
            "time_range": [d.isoformat() for d in self.time_range] if self.time_range else None,
            "temperature_range": list(self.temperature_range) if self.temperature_range else None,
            "casualty_range": list(self.casualty_range) if self.casualty_range else None,
            "include_topics": sorted(self.include_topics),
            "exclude_topics": sorted(self.exclude_topics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterRules":
        tr = d.get("time_range")
        return cls(
            time_range=(date.fromisoformat(tr[0]), date.fromisoformat(tr[1])) if tr else None,
            temperature_range=tuple(d["temperature_range"]) if d.get("temperature_range") else None,
            casualty_range=tuple(d["casualty_range"]) if d.get("casualty_range") else None,
            include_topics=frozenset(d.get("include_topics", [])),
            exclude_topics=frozenset(d.get("exclude_topics", [])),
        )


def merge_rules(r1: FilterRules, r2: FilterRules) -> FilterRules | None:
    """Conjunction of two rule sets; None when the ranges cannot intersect."""

    def inter(a, b):
        if a is None:
            return b, True
        if b is None:
            return a, True
        lo, hi = max(a[0], b[0]), min(a[1], b[1])
        return ((lo, hi), True) if lo <= hi else (None, False)

    time_r, ok1 = inter(r1.time_range, r2.time_range)
    temp_r, ok2 = inter(r1.temperature_range, r2.temperature_range)
    cas_r, ok3 = inter(r1.casualty_range, r2.casualty_range)
    if not (ok1 and ok2 and ok3):
        return None
    include = (r1.include_topics & r2.include_topics
               if r1.include_topics and r2.include_topics
               else r1.include_topics | r2.include_topics)
    return FilterRules(
        time_range=time_r, temperature_range=temp_r, casualty_range=cas_r,
        include_topics=include,
        exclude_topics=r1.exclude_topics | r2.exclude_topics,
    )


@dataclass
class SearchState:
    search_id: str
    query: SearchQuery
    frozen_ids: tuple[str, ...]           # immutable once created
    rules: FilterRules = field(default_factory=FilterRules)
    rank_order: tuple[str, ...] | None = None
    # article_id -> set of topic cluster ids, attached after topic modeling
    topic_membership: dict[str, frozenset[int]] | None = None


@dataclass
class IngestReport:
    inserted: int = 0
    duplicates: int = 0
    rejected: int = 0
    rejected_lines: list[int] = field(default_factory=list)


class NewsStore:
    """In-memory article store with JSONL persistence and frozen search snapshots."""

    def __init__(self, data_dir: str | Path | None = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self.articles: dict[str, NewsArticle] = {}
        self.embeddings: dict[str, np.ndarray] = {}
        self.searches: dict[str, SearchState] = {}
        self._next_search = 1
        self._write_lock = threading.Lock()

    # -- ingest / persistence -------------------------------------------------

    def ingest(self, path: str | Path) -> IngestReport:
        """Line-delimited records, one JSON object per line; idempotent by id."""
        report = IngestReport()
        with self._write_lock:
            with open(path, encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        article = NewsArticle.from_dict(json.loads(line))
                    except (json.JSONDecodeError, KeyError, ValueError) as exc:
                        report.rejected += 1
                        report.rejected_lines.append(line_no)
                        logger.warning("line %d rejected: %s", line_no, exc)
                        continue
                    existing = self.articles.get(article.id)
                    if existing is not None:
                        if existing.body == article.body:
                            report.duplicates += 1
                        else:
                            report.rejected += 1
                            report.rejected_lines.append(line_no)
                            logger.warning("line %d: id %r collides with a different body",
                                           line_no, article.id)
                        continue
                    self.articles[article.id] = article
                    report.inserted += 1
        return report

    def export(self, path: str | Path) -> int:
        """Write all articles (structural info embedded) in deterministic id order."""
        with open(path, "w", encoding="utf-8") as fh:
            for aid in sorted(self.articles):
                fh.write(json.dumps(self.articles[aid].to_dict(),
                                    sort_keys=True, ensure_ascii=False) + "\n")
        return len(self.articles)

    def set_structural(self, article_id: str, info: StructuralInfo) -> None:
        with self._write_lock:
            self._get(article_id).structural = info

    def set_embedding(self, article_id: str, vec: np.ndarray) -> None:
        with self._write_lock:
            self._get(article_id)  # existence check
            self.embeddings[article_id] = np.asarray(vec, dtype=np.float64)

    def save(self) -> None:
        if self.data_dir is None:
            return
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.export(self.data_dir / "articles.jsonl")
        ids = sorted(self.embeddings)
        (self.data_dir / "embedding_ids.json").write_text(
            json.dumps(ids, sort_keys=True), encoding="utf-8")
        if ids:
            np.save(self.data_dir / "embeddings.npy",
                    np.stack([self.embeddings[i] for i in ids]))
        searches = {
            sid: {
                "query": {"city_keyword": s.query.city_keyword,
                          "extra_keywords": list(s.query.extra_keywords)},
                "frozen_ids": list(s.frozen_ids),
                "rules": s.rules.to_dict(),
                "rank_order": list(s.rank_order) if s.rank_order else None,
            }
            for sid, s in self.searches.items()
        }
        (self.data_dir / "searches.json").write_text(
            json.dumps(searches, sort_keys=True), encoding="utf-8")

    def load(self) -> None:
        if self.data_dir is None:
            return
        articles = self.data_dir / "articles.jsonl"
        if articles.exists():
            self.ingest(articles)
        ids_file = self.data_dir / "embedding_ids.json"
        emb_file = self.data_dir / "embeddings.npy"
        if ids_file.exists() and emb_file.exists():
            ids = json.loads(ids_file.read_text(encoding="utf-8"))
            matrix = np.load(emb_file)
            for i, aid in enumerate(ids):
                self.embeddings[aid] = matrix[i]
        searches_file = self.data_dir / "searches.json"
        if searches_file.exists():
            raw = json.loads(searches_file.read_text(encoding="utf-8"))
            for sid, s in raw.items():
                self.searches[sid] = SearchState(
                    search_id=sid,
                    query=SearchQuery(s["query"]["city_keyword"],
                                      tuple(s["query"]["extra_keywords"])),
                    frozen_ids=tuple(s["frozen_ids"]),
                    rules=FilterRules.from_dict(s["rules"]),
                    rank_order=tuple(s["rank_order"]) if s.get("rank_order") else None,
                )
            seqs = [int(sid[1:]) for sid in raw if sid[1:].isdigit()]
            self._next_search = max(seqs, default=0) + 1

    # -- lookup -----------------------------------------------------------------

    def _get(self, article_id: str) -> NewsArticle:
        if article_id not in self.articles:
            raise KeyError(f"unknown article {article_id!r}")
        return self.articles[article_id]

    def get(self, article_id: str) -> NewsArticle:
        return self._get(article_id)

    def search_state(self, search_id: str) -> SearchState:
        if search_id not in self.searches:
            raise KeyError(f"unknown search {search_id!r}")
        return self.searches[search_id]

    # -- search -------------------------------------------------------------------

    def keyword_search(self, query: SearchQuery) -> SearchState:
        """Substring search; the matching id set is frozen under a new search id."""
        city = query.city_keyword.casefold()
        extras = [k.casefold() for k in query.extra_keywords if k.strip()]
        matched: list[NewsArticle] = []
        for article in self.articles.values():
            text = (article.title + "\n" + article.body).casefold()
            if city not in text:
                continue
            if extras and not any(k in text for k in extras):
                continue
            matched.append(article)
        # stable order: published_at desc, then id asc
        matched.sort(key=lambda a: a.id)
        matched.sort(key=lambda a: a.published_at, reverse=True)
        with self._write_lock:
            sid = f"s{self._next_search:04d}"
            self._next_search += 1
            state = SearchState(search_id=sid, query=query,
                                frozen_ids=tuple(a.id for a in matched))
            self.searches[sid] = state
        return state

    def attach_topics(self, search_id: str,
                      membership: dict[str, frozenset[int]]) -> None:
        self.search_state(search_id).topic_membership = membership

    # -- filters --------------------------------------------------------------------

    @staticmethod
    def time_value(article: NewsArticle) -> date:
        # Extracted event date when available; publication date is its
        # completion fallback, so unextracted articles use it directly.
        if article.structural is not None:
            return article.structural.event_date
        return article.published_at

    def _passes(self, article: NewsArticle, rules: FilterRules,
                membership: dict[str, frozenset[int]] | None) -> bool:
        if rules.time_range is not None:
            t = self.time_value(article)
            if not rules.time_range[0] <= t <= rules.time_range[1]:
                return False
        if rules.temperature_range is not None:
            temp = article.structural.temperature if article.structural else None
            if temp is None or not rules.temperature_range[0] <= temp <= rules.temperature_range[1]:
                return False
        if rules.casualty_range is not None:
            total = article.structural.casualty.total() if article.structural else None
            if total is None or not rules.casualty_range[0] <= total <= rules.casualty_range[1]:
                return False
        if rules.include_topics or rules.exclude_topics:
            if membership is None:
                raise StoreError("topic rules set but no topic model attached to this search")
            clusters = membership.get(article.id, frozenset())
            if rules.exclude_topics & clusters:
                return False
            if rules.include_topics and not (rules.include_topics & clusters):
                return False
        return True

    def apply_filters(self, search_id: str, rules: FilterRules,
                      remember: bool = False) -> list[str]:
        """Conjunction of the set rules over the frozen result set."""
        state = self.search_state(search_id)
        kept = [aid for aid in state.frozen_ids
                if self._passes(self.articles[aid], rules, state.topic_membership)]
        if remember:
            state.rules = rules
        return kept

    # -- facets ------------------------------------------------------------------------

    def facet_histograms(self, search_id: str, rules: FilterRules) -> dict:
        """Month/temperature/casualty facets with total and post-filter counts."""
        state = self.search_state(search_id)
        filtered = set(self.apply_filters(search_id, rules))

        time_bins: dict[str, list[int]] = {}
        temp_bins: dict[int, list[int]] = {}
        cas_bins: dict[int, list[int]] = {}

        for aid in state.frozen_ids:
            article = self.articles[aid]
            in_filter = aid in filtered

            month = self.time_value(article).strftime("%Y-%m")
            slot = time_bins.setdefault(month, [0, 0])
            slot[0] += 1
            slot[1] += in_filter

            temp = article.structural.temperature if article.structural else None
            if temp is not None:
                k = int(np.floor(temp))
                slot = temp_bins.setdefault(k, [0, 0])
                slot[0] += 1
                slot[1] += in_filter

            total = article.structural.casualty.total() if article.structural else None
            if total is not None:
                idx = 0
                for i, edge in enumerate(CASUALTY_BIN_EDGES):
                    if total >= edge:
                        idx = i
                slot = cas_bins.setdefault(idx, [0, 0])
                slot[0] += 1
                slot[1] += in_filter

        return {
            "time": [{"bin": k, "total": v[0], "filtered": v[1]}
                     for k, v in sorted(time_bins.items())],
            "temperature": [{"bin_lo": k, "bin_hi": k + 1, "total": v[0], "filtered": v[1]}
                            for k, v in sorted(temp_bins.items())],
            "casualty": [{"bin": CASUALTY_BIN_LABELS[k], "total": v[0], "filtered": v[1]}
                         for k, v in sorted(cas_bins.items())],
            "filtered_count": len(filtered),
        }

    # -- ranking and paging ------------------------------------------------------------

    def semantic_rank(self, search_id: str, query_text: str, gateway: Gateway) -> list[str]:
        """Order the frozen set by cosine similarity to the query embedding."""
        if not query_text.strip():
            raise StoreError("empty ranking query")
        state = self.search_state(search_id)
        qvec = gateway.embed(query_text)
        scored = []
        for aid in state.frozen_ids:
            vec = self.embeddings.get(aid)
            if vec is None:
                vec = gateway.embed(self.articles[aid].body)
                self.embeddings[aid] = vec
            scored.append((-float(np.dot(qvec, vec)), aid))
        scored.sort()
        order = tuple(aid for _, aid in scored)
        state.rank_order = order
        return list(order)

    def list(self, search_id: str, page: int = 1, page_size: int = 20) -> dict:
        """Stable page over the currently filtered set: rank order if ranked,
        else published_at desc then id."""
        if page < 1 or page_size < 1:
            raise StoreError("page and page_size must be >= 1")
        state = self.search_state(search_id)
        current = self.apply_filters(search_id, state.rules)
        if state.rank_order is not None:
            pos = {aid: i for i, aid in enumerate(state.rank_order)}
            current.sort(key=lambda aid: pos.get(aid, len(pos)))
        start = (page - 1) * page_size
        items = current[start:start + page_size]
        return {
            "page": page,
            "page_size": page_size,
            "total": len(current),
            "items": [self.articles[aid].to_dict() for aid in items],
        }
