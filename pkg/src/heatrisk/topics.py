"""Two-level topic hierarchy over per-article tags.

Tags (second level) are clustered by DBSCAN in cosine-distance space with
exact brute-force neighborhoods; each cluster is named by the gateway and
becomes a first-level topic. Noise tags are kept under a fixed "other" topic
rather than dropped, so low-frequency themes stay visible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gateway import Gateway

NOISE_CLUSTER_ID = -1
OTHER_TOPIC_LABEL = "other"


@dataclass
class TagRecord:
    tag: str                       # normalized: trimmed, case-folded
    article_ids: list[str]
    embedding: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.tag:
            raise ValueError("empty tag")
        if not self.article_ids:
            raise ValueError("tag with no articles")


@dataclass
class TopicCluster:
    cluster_id: int
    label: str
    member_tags: list[str]
    article_ids: list[str]

    @property
    def article_count(self) -> int:
        return len(self.article_ids)


@dataclass
class TopicHierarchy:
    clusters: list[TopicCluster] = field(default_factory=list)

    def membership(self) -> dict[str, frozenset[int]]:
        """article_id -> cluster ids it belongs to (via any of its tags)."""
        out: dict[str, set[int]] = {}
        for cluster in self.clusters:
            for aid in cluster.article_ids:
                out.setdefault(aid, set()).add(cluster.cluster_id)
        return {aid: frozenset(cids) for aid, cids in out.items()}

    def to_dict(self) -> dict:
        return {
            "clusters": [
                {
                    "cluster_id": c.cluster_id,
                    "label": c.label,
                    "member_tags": c.member_tags,
                    "article_ids": c.article_ids,
                    "article_count": c.article_count,
                }
                for c in self.clusters
            ]
        }

    def export(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, indent=1),
            encoding="utf-8")


def collect_tags(articles) -> list[TagRecord]:
    """Dedupe tags across articles after normalization, merging article id lists."""
    records: dict[str, list[str]] = {}
    for article in articles:
        if article.structural is None:
            continue
        for tag in article.structural.tags:
            norm = tag.strip().casefold()
            if not norm:
                continue
            ids = records.setdefault(norm, [])
            if article.id not in ids:
                ids.append(article.id)
    return [TagRecord(tag=t, article_ids=sorted(ids))
            for t, ids in sorted(records.items())]


def dbscan(embeddings: np.ndarray, eps: float, min_pts: int) -> tuple[np.ndarray, set[int]]:
    """DBSCAN over cosine distance (1 - cosine similarity) with exact neighborhoods.

    Returns (labels, noise_indices). Labels are dense cluster ids numbered by
    each cluster's smallest core-point index; noise points carry -1. Border
    points reachable from several clusters join the lowest cluster id.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 2:
        raise ValueError("min_pts must be >= 2")
    n = len(embeddings)
    labels = np.full(n, NOISE_CLUSTER_ID, dtype=int)
    if n == 0:
        return labels, set()

    x = np.asarray(embeddings, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    unit = x / norms
    dist = 1.0 - unit @ unit.T
    within = dist <= eps                       # self-inclusive neighborhoods
    neighbor_counts = within.sum(axis=1)
    core = neighbor_counts >= min_pts

    # connected components of core points under the eps relation,
    # numbered by smallest core index
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    core_idx = np.flatnonzero(core)
    for i in core_idx:
        for j in core_idx:
            if j > i and within[i, j]:
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    roots = sorted({find(i) for i in core_idx})
    cluster_of_root = {r: cid for cid, r in enumerate(roots)}
    for i in core_idx:
        labels[i] = cluster_of_root[find(i)]

    noise: set[int] = set()
    for i in range(n):
        if core[i]:
            continue
        neighbor_clusters = [labels[j] for j in np.flatnonzero(within[i]) if core[j]]
        if neighbor_clusters:
            labels[i] = min(neighbor_clusters)
        else:
            noise.add(i)
    return labels, noise


def build_hierarchy(tags: list[TagRecord], labels: np.ndarray, noise: set[int],
                    gateway: Gateway) -> TopicHierarchy:
    """Name each cluster and collect noise tags under a fixed "other" topic."""
    by_cluster: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        if i in noise:
            continue
        by_cluster.setdefault(int(lab), []).append(i)

    clusters: list[TopicCluster] = []
    for cid in sorted(by_cluster):
        members = by_cluster[cid]
        member_tags = sorted(tags[i].tag for i in members)
        article_ids = sorted({aid for i in members for aid in tags[i].article_ids})
        clusters.append(TopicCluster(
            cluster_id=cid,
            label=gateway.name_cluster(member_tags),
            member_tags=member_tags,
            article_ids=article_ids,
        ))
    if noise:
        member_tags = sorted(tags[i].tag for i in noise)
        article_ids = sorted({aid for i in noise for aid in tags[i].article_ids})
        clusters.append(TopicCluster(
            cluster_id=NOISE_CLUSTER_ID,
            label=OTHER_TOPIC_LABEL,
            member_tags=member_tags,
            article_ids=article_ids,
        ))
    return TopicHierarchy(clusters=clusters)


def build_topics(articles, gateway: Gateway, eps: float, min_pts: int) -> TopicHierarchy:
    """collect_tags + embed + dbscan + build_hierarchy in one deterministic pass."""
    tags = collect_tags(articles)
    if not tags:
        return TopicHierarchy(clusters=[])
    for rec in tags:
        rec.embedding = gateway.embed(rec.tag)
    matrix = np.stack([rec.embedding for rec in tags])
    labels, noise = dbscan(matrix, eps=eps, min_pts=min_pts)
    return build_hierarchy(tags, labels, noise, gateway)


def filter_by_topics(article_ids: list[str], hierarchy: TopicHierarchy,
                     include_set: set[int], exclude_set: set[int]) -> list[str]:
    """Empty include set means include all; exclusion always dominates."""
    membership = hierarchy.membership()
    kept = []
    for aid in article_ids:
        clusters = membership.get(aid, frozenset())
        if exclude_set & clusters:
            continue
        if include_set and not (include_set & clusters):
            continue
        kept.append(aid)
    return kept
