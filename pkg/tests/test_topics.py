"""Topic engine tests. The DBSCAN oracle below is an independent BFS-based
implementation of the textbook algorithm; the production code uses union-find,
so agreement is a genuine cross-check."""

from dataclasses import dataclass
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatrisk.gateway.schema import Casualty, StructuralInfo
from heatrisk.topics import (
    NOISE_CLUSTER_ID,
    OTHER_TOPIC_LABEL,
    TagRecord,
    build_hierarchy,
    collect_tags,
    dbscan,
    filter_by_topics,
)


# ---------------------------------------------------------------------------
# brute-force DBSCAN oracle (BFS over the core graph)
# ---------------------------------------------------------------------------

def dbscan_oracle(points, eps, min_pts):
    """Returns (clusters, noise): clusters is a list of frozensets of indices,
    ordered by smallest core index; border ties go to the lowest cluster id."""
    n = len(points)
    unit = points / np.linalg.norm(points, axis=1, keepdims=True)
    dist = 1.0 - unit @ unit.T
    neighbors = [set(np.flatnonzero(dist[i] <= eps).tolist()) for i in range(n)]
    core = [i for i in range(n) if len(neighbors[i]) >= min_pts]
    core_set = set(core)

    unvisited = sorted(core_set)
    clusters = []
    seen = set()
    for seed in unvisited:
        if seed in seen:
            continue
        component = set()
        queue = [seed]
        while queue:
            p = queue.pop()
            if p in component:
                continue
            component.add(p)
            seen.add(p)
            for q in neighbors[p]:
                if q in core_set and q not in component:
                    queue.append(q)
        clusters.append(component)
    clusters.sort(key=min)

    assigned = {}
    for cid, comp in enumerate(clusters):
        for p in comp:
            assigned[p] = cid
    noise = set()
    for i in range(n):
        if i in core_set:
            continue
        touching = sorted(assigned[j] for j in neighbors[i] if j in core_set)
        if touching:
            assigned[i] = touching[0]
        else:
            noise.add(i)
    final = [frozenset(p for p, c in assigned.items() if c == cid)
             for cid in range(len(clusters))]
    return final, noise


def canonical(labels, noise):
    clusters = {}
    for i, lab in enumerate(labels):
        if i in noise:
            continue
        clusters.setdefault(int(lab), set()).add(i)
    return {frozenset(v) for v in clusters.values()}, set(noise)


@dataclass
class FakeArticle:
    id: str
    structural: StructuralInfo | None


def info_with_tags(tags):
    return StructuralInfo(
        is_heat_risk=True, location="Hong Kong", event_date=date(2022, 7, 1),
        completion_flags=frozenset(), risk="", consequence="", reason="",
        temperature=None, casualty=Casualty(), advice="", tags=tuple(tags))


class TestCollectTags:
    def test_merge_shared_tag(self):
        articles = [FakeArticle("a1", info_with_tags(("heatstroke", "x", "y"))),
                    FakeArticle("a2", info_with_tags(("heatstroke", "p", "q")))]
        records = {r.tag: r for r in collect_tags(articles)}
        assert records["heatstroke"].article_ids == ["a1", "a2"]

    def test_case_insensitive_merge(self):
        articles = [FakeArticle("a1", info_with_tags(("Heatstroke", "x", "y"))),
                    FakeArticle("a2", info_with_tags(("heatstroke", "p", "q")))]
        tags = [r.tag for r in collect_tags(articles)]
        assert tags.count("heatstroke") == 1

    def test_unextracted_articles_skipped(self):
        articles = [FakeArticle("a1", None)]
        assert collect_tags(articles) == []


class TestDbscan:
    def test_all_identical(self):
        pts = np.tile([1.0, 0.0, 0.0], (6, 1))
        labels, noise = dbscan(pts, eps=0.1, min_pts=3)
        assert noise == set()
        assert set(labels.tolist()) == {0}

    def test_two_blobs_and_outlier(self):
        rng = np.random.default_rng(7)
        a = rng.normal([10, 0, 0], 0.05, size=(10, 3))
        b = rng.normal([0, 10, 0], 0.05, size=(10, 3))
        outlier = np.array([[0.0, 0.0, 10.0]])
        pts = np.vstack([a, b, outlier])
        labels, noise = dbscan(pts, eps=0.05, min_pts=3)
        expected, expected_noise = dbscan_oracle(pts, 0.05, 3)
        got, got_noise = canonical(labels, noise)
        assert got == set(expected)
        assert got_noise == expected_noise
        assert len(got) == 2
        assert got_noise == {20}

    def test_all_noise_when_sparse(self):
        pts = np.eye(4)   # mutually orthogonal: cosine distance 1
        labels, noise = dbscan(pts, eps=0.2, min_pts=3)
        assert noise == {0, 1, 2, 3}
        assert all(l == NOISE_CLUSTER_ID for l in labels)

    def test_empty(self):
        labels, noise = dbscan(np.zeros((0, 3)), eps=0.2, min_pts=2)
        assert len(labels) == 0 and noise == set()

    def test_parameter_validation(self):
        pts = np.eye(3)
        with pytest.raises(ValueError):
            dbscan(pts, eps=0.0, min_pts=3)
        with pytest.raises(ValueError):
            dbscan(pts, eps=0.3, min_pts=1)

    @given(st.integers(0, 2 ** 31 - 1), st.integers(5, 60),
           st.floats(0.05, 0.9), st.integers(2, 5))
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle(self, seed, n, eps, min_pts):
        rng = np.random.default_rng(seed)
        centers = rng.normal(0, 5, size=(3, 4))
        pts = np.vstack([rng.normal(centers[i % 3], rng.uniform(0.05, 2.0), size=(1, 4))
                         for i in range(n)])
        labels, noise = dbscan(pts, eps=eps, min_pts=min_pts)
        expected, expected_noise = dbscan_oracle(pts, eps, min_pts)
        got, got_noise = canonical(labels, noise)
        assert got == set(expected)
        assert got_noise == expected_noise

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_partition_no_tag_lost(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.normal(0, 1, size=(30, 4))
        labels, noise = dbscan(pts, eps=0.3, min_pts=3)
        clustered = {i for i in range(30) if i not in noise}
        assert clustered | noise == set(range(30))
        assert clustered & noise == set()
        assert all(labels[i] >= 0 for i in clustered)
        assert all(labels[i] == NOISE_CLUSTER_ID for i in noise)


class TestHierarchy:
    def water_tags(self):
        return [
            TagRecord("reservoir dried up", ["a1"]),
            TagRecord("water supply problem", ["a1", "a2"]),
            TagRecord("water resources", ["a3"]),
        ]

    def test_water_cluster_named(self, mock_gateway):
        tags = self.water_tags()
        labels = np.array([0, 0, 0])
        hierarchy = build_hierarchy(tags, labels, set(), mock_gateway)
        assert len(hierarchy.clusters) == 1
        cluster = hierarchy.clusters[0]
        assert cluster.label == "topic: reservoir dried up"
        assert cluster.member_tags == ["reservoir dried up", "water resources",
                                       "water supply problem"]
        assert cluster.article_ids == ["a1", "a2", "a3"]
        assert cluster.article_count == 3

    def test_no_noise_no_other(self, mock_gateway):
        hierarchy = build_hierarchy(self.water_tags(), np.array([0, 0, 0]), set(),
                                    mock_gateway)
        assert all(c.label != OTHER_TOPIC_LABEL for c in hierarchy.clusters)

    def test_all_noise_single_other(self, mock_gateway):
        tags = self.water_tags()
        labels = np.array([-1, -1, -1])
        hierarchy = build_hierarchy(tags, labels, {0, 1, 2}, mock_gateway)
        assert len(hierarchy.clusters) == 1
        assert hierarchy.clusters[0].label == OTHER_TOPIC_LABEL
        assert hierarchy.clusters[0].cluster_id == NOISE_CLUSTER_ID

    def test_article_count_distinct(self, mock_gateway):
        tags = [TagRecord("t1", ["a1", "a2"]), TagRecord("t2", ["a1"]),
                TagRecord("t3", ["a2"])]
        hierarchy = build_hierarchy(tags, np.array([0, 0, 0]), set(), mock_gateway)
        assert hierarchy.clusters[0].article_count == 2


class TestFilterByTopics:
    def hierarchy(self, mock_gateway):
        tags = [TagRecord("water supply problem", ["a1"]),
                TagRecord("water resources", ["a1", "a3"]),
                TagRecord("heatstroke", ["a2"]),
                TagRecord("crop damage", ["a3"])]
        labels = np.array([0, 0, 1, 1])
        return build_hierarchy(tags, labels, set(), mock_gateway)

    def test_empty_sets_identity(self, mock_gateway):
        h = self.hierarchy(mock_gateway)
        ids = ["a1", "a2", "a3"]
        assert filter_by_topics(ids, h, set(), set()) == ids

    def test_include_membership(self, mock_gateway):
        h = self.hierarchy(mock_gateway)
        kept = filter_by_topics(["a1", "a2", "a3"], h, {0}, set())
        # membership oracle: a2 is tagged only in cluster 1
        assert kept == ["a1", "a3"]

    def test_exclusion_dominates(self, mock_gateway):
        h = self.hierarchy(mock_gateway)
        kept = filter_by_topics(["a1", "a2", "a3"], h, {0}, {1})
        assert kept == ["a1"]   # a3 is in both 0 and 1
