import json
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatrisk.gateway.schema import Casualty, StructuralInfo
from heatrisk.store import (
    FilterRules,
    NewsArticle,
    NewsStore,
    SearchQuery,
    StoreError,
    merge_rules,
)


def record(aid, title, body, published="2022-07-01", publisher="p",
           media_type="web", **extra):
    d = {"id": aid, "title": title, "body": body, "published_at": published,
         "publisher": publisher, "media_type": media_type}
    d.update(extra)
    return d


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path


def structural(temp=None, deaths=None, injuries=None, impacted=None,
               event="2022-07-01", tags=("a", "b", "c")):
    return StructuralInfo(
        is_heat_risk=True, location="Hong Kong",
        event_date=date.fromisoformat(event), completion_flags=frozenset(),
        risk="", consequence="", reason="", temperature=temp,
        casualty=Casualty(deaths=deaths, injuries=injuries, impacted=impacted),
        advice="", tags=tuple(tags))


@pytest.fixture
def store(tmp_path):
    s = NewsStore(tmp_path / "data")
    write_jsonl(tmp_path / "corpus.jsonl", [
        record("d1", "Hong Kong heatwave persists", "A heatwave gripped Hong Kong."),
        record("d2", "Hong Kong warning", "Another heatwave story in Hong Kong.",
               published="2022-07-03"),
        record("d3", "Hong Kong housing", "Property news unrelated to weather.",
               published="2022-07-02"),
        record("d4", "Beijing report", "Beijing saw high temperature days.",
               published="2022-07-04"),
    ])
    s.ingest(tmp_path / "corpus.jsonl")
    return s


class TestIngest:
    def test_idempotent(self, store, tmp_path):
        report = store.ingest(tmp_path / "corpus.jsonl")
        assert report.inserted == 0
        assert report.duplicates == 4

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        lines = [json.dumps(record(f"a{i}", "t", "body")) for i in range(3)]
        lines.insert(2, "{not json")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        s = NewsStore()
        report = s.ingest(path)
        assert report.inserted == 3
        assert report.rejected == 1
        assert report.rejected_lines == [3]

    def test_id_collision_differing_body_rejected(self, store, tmp_path):
        path = write_jsonl(tmp_path / "dup.jsonl",
                           [record("d1", "other", "a different body entirely")])
        report = store.ingest(path)
        assert report.rejected == 1
        assert store.get("d1").body == "A heatwave gripped Hong Kong."

    def test_bad_media_type_rejected(self, tmp_path):
        path = write_jsonl(tmp_path / "m.jsonl",
                           [record("x1", "t", "b", media_type="blog")])
        s = NewsStore()
        assert s.ingest(path).rejected == 1

    def test_char_count_derived(self, store):
        assert store.get("d1").char_count == len("A heatwave gripped Hong Kong.")


class TestKeywordSearch:
    def test_substring_scan_oracle(self, store):
        state = store.keyword_search(SearchQuery("Hong Kong", ("heatwave",)))
        # oracle: brute substring scan over title+body
        expected = {aid for aid, a in store.articles.items()
                    if "hong kong" in (a.title + "\n" + a.body).casefold()
                    and "heatwave" in (a.title + "\n" + a.body).casefold()}
        assert set(state.frozen_ids) == expected == {"d1", "d2"}

    def test_empty_city_error(self):
        with pytest.raises(StoreError):
            SearchQuery("  ")

    def test_no_extras_returns_all_city_matches(self, store):
        state = store.keyword_search(SearchQuery("Hong Kong"))
        assert set(state.frozen_ids) == {"d1", "d2", "d3"}

    def test_result_frozen_and_ordered(self, store):
        state = store.keyword_search(SearchQuery("Hong Kong"))
        # published_at desc, then id
        assert list(state.frozen_ids) == ["d2", "d3", "d1"]
        before = state.frozen_ids
        store.keyword_search(SearchQuery("Beijing"))
        assert store.search_state(state.search_id).frozen_ids == before

    @given(st.lists(st.sampled_from(["heat", "rain", "smog", "kong"]), max_size=3),
           st.integers(0, 30))
    @settings(max_examples=30)
    def test_matches_brute_force(self, extras, n_docs):
        s = NewsStore()
        words = ["heat", "rain", "smog", "hong kong", "city"]
        for i in range(n_docs):
            body = " ".join(words[j % len(words)] for j in range(i + 1))
            s.articles[f"a{i}"] = NewsArticle(
                id=f"a{i}", title=f"t{i}", body=body,
                published_at=date(2022, 7, 1 + i % 28), publisher="p", media_type="web")
        state = s.keyword_search(SearchQuery("city", tuple(extras)))
        expected = set()
        for aid, a in s.articles.items():
            text = (a.title + "\n" + a.body).casefold()
            if "city" in text and (not extras or any(k in text for k in extras)):
                expected.add(aid)
        assert set(state.frozen_ids) == expected


class TestFilters:
    def seeded(self, store):
        store.set_structural("d1", structural(temp=31.0, deaths=2, event="2022-07-01"))
        store.set_structural("d2", structural(temp=29.0, deaths=None, impacted=120,
                                              event="2022-07-03"))
        store.set_structural("d4", structural(temp=None, deaths=15, event="2022-07-04"))
        return store.keyword_search(SearchQuery("Hong Kong"))

    def test_no_rules_identity(self, store):
        state = self.seeded(store)
        assert store.apply_filters(state.search_id, FilterRules()) == list(state.frozen_ids)

    def test_temperature_rule(self, store):
        state = self.seeded(store)
        kept = store.apply_filters(state.search_id,
                                   FilterRules(temperature_range=(30.0, 35.0)))
        # d1 at 31 passes; d2 at 29 fails; d3 lacks the field entirely
        assert kept == ["d1"]

    def test_missing_field_passes_when_rule_unset(self, store):
        state = self.seeded(store)
        kept = store.apply_filters(state.search_id,
                                   FilterRules(time_range=(date(2022, 7, 1), date(2022, 7, 4))))
        assert set(kept) == {"d1", "d2", "d3"}   # d3 falls back to published_at

    def test_casualty_rule_sums_fields(self, store):
        state = self.seeded(store)
        kept = store.apply_filters(state.search_id, FilterRules(casualty_range=(100, 1000)))
        assert kept == ["d2"]   # impacted=120

    def test_conjunction_law(self, store):
        state = self.seeded(store)
        r1 = FilterRules(time_range=(date(2022, 7, 1), date(2022, 7, 3)))
        r2 = FilterRules(casualty_range=(0, 50))
        merged = merge_rules(r1, r2)
        both = store.apply_filters(state.search_id, merged)
        inter = set(store.apply_filters(state.search_id, r1)) & \
            set(store.apply_filters(state.search_id, r2))
        assert set(both) == inter

    def test_inverted_range_rejected(self):
        with pytest.raises(StoreError):
            FilterRules(temperature_range=(35.0, 30.0))

    def test_topic_rules_without_model_error(self, store):
        state = self.seeded(store)
        with pytest.raises(StoreError):
            store.apply_filters(state.search_id, FilterRules(include_topics=frozenset({1})))

    def test_topic_rules(self, store):
        state = self.seeded(store)
        store.attach_topics(state.search_id, {"d1": frozenset({0}), "d2": frozenset({0, 1})})
        kept = store.apply_filters(state.search_id,
                                   FilterRules(include_topics=frozenset({0}),
                                               exclude_topics=frozenset({1})))
        assert kept == ["d1"]   # exclusion dominates for d2


class TestFacets:
    def test_no_filter_totals_match(self, store):
        store.set_structural("d1", structural(temp=31.0, deaths=2))
        state = store.keyword_search(SearchQuery("Hong Kong"))
        facets = store.facet_histograms(state.search_id, FilterRules())
        for facet in ("time", "temperature", "casualty"):
            for row in facets[facet]:
                assert row["total"] == row["filtered"]

    def test_single_article_one_bin_per_facet(self, store):
        store.set_structural("d1", structural(temp=31.0, deaths=2, event="2022-07-01"))
        state = store.keyword_search(SearchQuery("heatwave gripped"))
        assert state.frozen_ids == ("d1",)
        facets = store.facet_histograms(state.search_id, FilterRules())
        assert len(facets["temperature"]) == 1
        assert facets["temperature"][0]["bin_lo"] == 31
        assert len(facets["casualty"]) == 1
        assert facets["casualty"][0]["bin"] == "1-9"

    def test_recount_oracle(self, store):
        store.set_structural("d1", structural(temp=31.0, deaths=2, event="2022-07-01"))
        store.set_structural("d2", structural(temp=29.4, impacted=1500, event="2022-06-11"))
        state = store.keyword_search(SearchQuery("Hong Kong"))
        rules = FilterRules(time_range=(date(2022, 6, 1), date(2022, 7, 2)))
        facets = store.facet_histograms(state.search_id, rules)
        filtered = set(store.apply_filters(state.search_id, rules))
        # per facet, post-filter counts sum to the filtered subset restricted
        # to articles having that facet's field
        def has_temp(aid):
            a = store.get(aid)
            return a.structural is not None and a.structural.temperature is not None

        def has_cas(aid):
            a = store.get(aid)
            return a.structural is not None and a.structural.casualty.total() is not None

        assert sum(r["filtered"] for r in facets["time"]) == len(filtered)
        assert sum(r["filtered"] for r in facets["temperature"]) == \
            len([aid for aid in filtered if has_temp(aid)])
        assert sum(r["filtered"] for r in facets["casualty"]) == \
            len([aid for aid in filtered if has_cas(aid)])
        assert facets["filtered_count"] == len(filtered)

    def test_casualty_bin_edges(self, store):
        cases = [(0, "0"), (1, "1-9"), (9, "1-9"), (10, "10-99"), (99, "10-99"),
                 (100, "100-999"), (999, "100-999"), (1000, ">=1000"), (50000, ">=1000")]
        for i, (deaths, _) in enumerate(cases):
            store.articles[f"c{i}"] = NewsArticle(
                id=f"c{i}", title="casualty test", body=f"case {i} in Hong Kong",
                published_at=date(2022, 7, 1), publisher="p", media_type="web",
                structural=structural(deaths=deaths))
        state = store.keyword_search(SearchQuery("casualty test"))
        facets = store.facet_histograms(state.search_id, FilterRules())
        got = {row["bin"]: row["total"] for row in facets["casualty"]}
        from collections import Counter
        expected = Counter(label for _, label in cases)
        assert got == dict(expected)


class TestRankingAndPaging:
    def test_verbatim_body_ranks_first(self, store, mock_gateway):
        state = store.keyword_search(SearchQuery("Hong Kong"))
        order = store.semantic_rank(state.search_id, store.get("d3").body, mock_gateway)
        assert order[0] == "d3"
        # oracle: cosine against each stored embedding, descending
        import numpy as np
        q = mock_gateway.embed(store.get("d3").body)
        scored = sorted(((-float(np.dot(q, store.embeddings[aid])), aid)
                         for aid in state.frozen_ids))
        assert order == [aid for _, aid in scored]

    def test_empty_query_error(self, store, mock_gateway):
        state = store.keyword_search(SearchQuery("Hong Kong"))
        with pytest.raises(StoreError):
            store.semantic_rank(state.search_id, "  ", mock_gateway)

    def test_identical_articles_tie_by_id(self, tmp_path, mock_gateway):
        s = NewsStore()
        for aid in ("z2", "z1"):
            s.articles[aid] = NewsArticle(
                id=aid, title="same", body="identical body text here",
                published_at=date(2022, 7, 1), publisher="p", media_type="web")
        state = s.keyword_search(SearchQuery("identical"))
        order = s.semantic_rank(state.search_id, "identical body text here", mock_gateway)
        assert order == ["z1", "z2"]

    def test_rank_is_permutation(self, store, mock_gateway):
        state = store.keyword_search(SearchQuery("Hong Kong"))
        order = store.semantic_rank(state.search_id, "heatwave", mock_gateway)
        assert sorted(order) == sorted(state.frozen_ids)

    def test_pagination_stable(self, store):
        state = store.keyword_search(SearchQuery("Hong Kong"))
        p1 = store.list(state.search_id, page=1, page_size=2)
        p2 = store.list(state.search_id, page=2, page_size=2)
        ids = [a["id"] for a in p1["items"]] + [a["id"] for a in p2["items"]]
        assert ids == ["d2", "d3", "d1"]
        assert p1["total"] == 3

    def test_pagination_follows_rank(self, store, mock_gateway):
        state = store.keyword_search(SearchQuery("Hong Kong"))
        order = store.semantic_rank(state.search_id, store.get("d3").body, mock_gateway)
        page = store.list(state.search_id, page=1, page_size=3)
        assert [a["id"] for a in page["items"]] == order


class TestPersistence:
    def test_round_trip(self, store, mock_gateway):
        store.set_structural("d1", structural(temp=31.0, deaths=2))
        state = store.keyword_search(SearchQuery("Hong Kong"))
        store.semantic_rank(state.search_id, "heat", mock_gateway)
        store.save()

        reloaded = NewsStore(store.data_dir)
        reloaded.load()
        assert set(reloaded.articles) == set(store.articles)
        assert reloaded.get("d1").structural is not None
        st2 = reloaded.search_state(state.search_id)
        assert st2.frozen_ids == state.frozen_ids
        assert st2.rank_order == store.search_state(state.search_id).rank_order

    def test_export_deterministic(self, store, tmp_path):
        out1, out2 = tmp_path / "o1.jsonl", tmp_path / "o2.jsonl"
        store.export(out1)
        store.export(out2)
        assert out1.read_bytes() == out2.read_bytes()
