"""Deterministic geometry for the linked views.

Articles are projected to 2D (any projector meeting the neighborhood-quality
bound can sit behind the interface), snapped to an integer grid with spiral
overlap removal, and kept at fixed positions while visibility toggles. Topics
land on axial hex coordinates; casualty counts become coxcomb sector radii.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gateway.schema import Casualty

COXCOMB_SECTORS = (("deaths", 0.0), ("injuries", 120.0), ("impacted", 240.0))
SECTOR_SWEEP = 120.0


class LayoutError(ValueError):
    pass


# ---------------------------------------------------------------------------
# 2D projection behind an interface
# ---------------------------------------------------------------------------

def _pca_project(x: np.ndarray) -> np.ndarray:
    centered = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2]
    # fix the SVD sign ambiguity so identical inputs give identical outputs
    for i in range(comps.shape[0]):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    coords = centered @ comps.T
    if coords.shape[1] < 2:
        coords = np.hstack([coords, np.zeros((coords.shape[0], 1))])
    return coords


def _tsne_project(x: np.ndarray, seed: int) -> np.ndarray:
    from sklearn.manifold import TSNE

    perplexity = min(30.0, max(2.0, (len(x) - 1) / 3))
    return TSNE(n_components=2, random_state=seed, perplexity=perplexity,
                init="pca").fit_transform(x)


def project_2d(embeddings: np.ndarray, seed: int = 0, method: str = "pca") -> np.ndarray:
    """Reduce row vectors to 2D; deterministic given (method, seed).

    Fewer than 2 points degenerate to the origin rather than erroring, so a
    single-article search still gets a layout.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2:
        raise LayoutError("embeddings must be a 2D array")
    if len(x) == 0:
        return np.zeros((0, 2))
    if len(x) == 1:
        return np.zeros((1, 2))
    if method == "pca":
        return _pca_project(x)
    if method == "tsne":
        return _tsne_project(x, seed)
    raise LayoutError(f"unknown projection method {method!r}")


def trustworthiness(original: np.ndarray, embedded: np.ndarray, k: int = 10) -> float:
    """Share of embedded k-neighborhoods free of points that are far in the
    original space; 1 is perfect, computed against exact brute-force kNN."""
    x = np.asarray(original, dtype=np.float64)
    y = np.asarray(embedded, dtype=np.float64)
    n = len(x)
    if n <= k + 1:
        raise LayoutError("need more points than k + 1")

    def pairwise(a: np.ndarray) -> np.ndarray:
        sq = (a * a).sum(axis=1)
        d = sq[:, None] + sq[None, :] - 2.0 * (a @ a.T)
        np.fill_diagonal(d, np.inf)
        return d

    dist_x = pairwise(x)
    dist_y = pairwise(y)
    # rank of j among i's original-space neighbors (1 = nearest)
    order_x = np.argsort(dist_x, axis=1, kind="stable")
    ranks = np.empty_like(order_x)
    rows = np.arange(n)[:, None]
    ranks[rows, order_x] = np.arange(n)[None, :] + 1

    knn_x = order_x[:, :k]
    knn_y = np.argsort(dist_y, axis=1, kind="stable")[:, :k]

    penalty = 0.0
    for i in range(n):
        true_set = set(knn_x[i].tolist())
        for j in knn_y[i]:
            if int(j) not in true_set:
                penalty += ranks[i, j] - k
    return 1.0 - 2.0 / (n * k * (2 * n - 3 * k - 1)) * penalty


# ---------------------------------------------------------------------------
# Grid snapping
# ---------------------------------------------------------------------------

@dataclass
class GlyphPlacement:
    article_id: str
    cell: tuple[int, int]
    raw: tuple[float, float]
    importance: float
    visible: bool = True


@dataclass
class GlyphLayout:
    search_id: str
    cell_size: float
    placements: dict[str, GlyphPlacement] = field(default_factory=dict)

    def cells(self) -> dict[str, tuple[int, int]]:
        return {aid: p.cell for aid, p in self.placements.items()}

    def to_dict(self) -> dict:
        return {
            "search_id": self.search_id,
            "cell_size": self.cell_size,
            "glyphs": {
                aid: {
                    "cell": list(p.cell),
                    "raw": [p.raw[0], p.raw[1]],
                    "importance": p.importance,
                    "visible": p.visible,
                }
                for aid, p in sorted(self.placements.items())
            },
        }

    def export(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1),
                              encoding="utf-8")


def default_cell_size(raw_coords: np.ndarray, capacity_factor: float = 4.0) -> float:
    """Cell size making the bounding-box grid hold >= capacity_factor x points."""
    n = max(len(raw_coords), 1)
    spans = raw_coords.max(axis=0) - raw_coords.min(axis=0) if len(raw_coords) else np.zeros(2)
    width = max(float(spans[0]), 1e-9)
    height = max(float(spans[1]), 1e-9)
    return math.sqrt(width * height / (capacity_factor * n))


def _spiral_cells(r: int) -> list[tuple[int, int]]:
    if r == 0:
        return [(0, 0)]
    ring = []
    for dx in range(-r, r + 1):
        for dy in range(-r, r + 1):
            if max(abs(dx), abs(dy)) == r:
                ring.append((dx, dy))
    return ring


def grid_snap(items: list[tuple[str, float, float, float]], cell_size: float,
              search_id: str = "") -> GlyphLayout:
    """Assign each item an exclusive grid cell near its raw position.

    ``items`` rows are (article_id, x, y, importance). Items are processed in
    descending importance (ties by id); an occupied target cell triggers an
    outward ring search, taking the free cell closest to the raw point
    (Euclidean, then (dx, dy) order) within the first ring containing any
    free cell.
    """
    if cell_size <= 0:
        raise LayoutError("cell size must be positive")
    layout = GlyphLayout(search_id=search_id, cell_size=cell_size)
    occupied: set[tuple[int, int]] = set()
    ordered = sorted(items, key=lambda it: (-it[3], it[0]))
    for article_id, x, y, importance in ordered:
        fx, fy = x / cell_size, y / cell_size
        base = (round(fx), round(fy))
        placed = None
        r = 0
        while placed is None:
            candidates = [
                (base[0] + dx, base[1] + dy) for dx, dy in _spiral_cells(r)
                if (base[0] + dx, base[1] + dy) not in occupied
            ]
            if candidates:
                placed = min(candidates,
                             key=lambda c: ((c[0] - fx) ** 2 + (c[1] - fy) ** 2, c))
            r += 1
        occupied.add(placed)
        layout.placements[article_id] = GlyphPlacement(
            article_id=article_id, cell=placed, raw=(x, y), importance=importance)
    return layout


def subset_visibility(layout: GlyphLayout, visible_ids: set[str]) -> GlyphLayout:
    """Same geometry, new visibility flags; cell coordinates never change."""
    out = GlyphLayout(search_id=layout.search_id, cell_size=layout.cell_size)
    for aid, p in layout.placements.items():
        out.placements[aid] = GlyphPlacement(
            article_id=p.article_id, cell=p.cell, raw=p.raw,
            importance=p.importance, visible=aid in visible_ids)
    return out


# ---------------------------------------------------------------------------
# Hex layout for topics
# ---------------------------------------------------------------------------

@dataclass
class HexPlacement:
    topic_id: int
    q: int
    r: int
    intensity: float


@dataclass
class HexLayout:
    hexes: list[HexPlacement] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"hexes": [{"topic_id": h.topic_id, "q": h.q, "r": h.r,
                           "intensity": h.intensity} for h in self.hexes]}


def _axial_round(qf: float, rf: float) -> tuple[int, int]:
    xf, zf = qf, rf
    yf = -xf - zf
    x, y, z = round(xf), round(yf), round(zf)
    dx, dy, dz = abs(x - xf), abs(y - yf), abs(z - zf)
    if dx > dy and dx > dz:
        x = -y - z
    elif dy > dz:
        y = -x - z
    else:
        z = -x - y
    return int(x), int(z)


def _xy_to_axial(x: float, y: float, size: float) -> tuple[float, float]:
    qf = (math.sqrt(3) / 3 * x - y / 3) / size
    rf = (2 / 3 * y) / size
    return qf, rf


def _hex_ring(center: tuple[int, int], radius: int) -> list[tuple[int, int]]:
    if radius == 0:
        return [center]
    directions = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]
    q, r = center[0] - radius, center[1] + radius   # start at the "south-west" corner
    ring = []
    for d in range(6):
        for _ in range(radius):
            ring.append((q, r))
            q += directions[d][0]
            r += directions[d][1]
    return ring


def hex_place(topic_embeddings: np.ndarray, counts: list[int],
              topic_ids: list[int] | None = None, seed: int = 0,
              hex_size: float = 1.0, method: str = "pca") -> HexLayout:
    """Project topics to 2D, snap to unique axial hexes, shade by count.

    Larger topics are placed first so they keep the contested center hex;
    intensity is log10(1 + count) / log10(1 + max count).
    """
    n = len(counts)
    if topic_ids is None:
        topic_ids = list(range(n))
    if len(topic_embeddings) != n or len(topic_ids) != n:
        raise LayoutError("embeddings, counts and ids must align")
    layout = HexLayout()
    if n == 0:
        return layout

    coords = project_2d(np.asarray(topic_embeddings), seed=seed, method=method)
    coords = coords - coords.mean(axis=0)
    max_count = max(counts)
    denom = math.log10(1 + max_count) if max_count > 0 else 1.0

    order = sorted(range(n), key=lambda i: (-counts[i], topic_ids[i]))
    occupied: set[tuple[int, int]] = set()
    placements: dict[int, HexPlacement] = {}
    for i in order:
        qf, rf = _xy_to_axial(float(coords[i, 0]), float(coords[i, 1]), hex_size)
        target = _axial_round(qf, rf)
        placed = None
        radius = 0
        while placed is None:
            free = [h for h in _hex_ring(target, radius) if h not in occupied]
            if free:
                placed = min(free, key=lambda h: ((h[0] - qf) ** 2 + (h[1] - rf) ** 2, h))
            radius += 1
        occupied.add(placed)
        intensity = math.log10(1 + counts[i]) / denom if denom else 0.0
        placements[i] = HexPlacement(topic_id=topic_ids[i], q=placed[0], r=placed[1],
                                     intensity=intensity)
    layout.hexes = [placements[i] for i in range(n)]
    return layout


# ---------------------------------------------------------------------------
# Coxcomb glyph geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoxcombSector:
    label: str
    start_angle: float
    sweep: float
    radius: float
    count: int | None


@dataclass
class CoxcombSpec:
    has_casualty: bool
    sectors: list[CoxcombSector]
    center_radius: float

    def to_dict(self) -> dict:
        return {
            "has_casualty": self.has_casualty,
            "center_radius": self.center_radius,
            "sectors": [
                {"label": s.label, "start_angle": s.start_angle, "sweep": s.sweep,
                 "radius": s.radius, "count": s.count}
                for s in self.sectors
            ],
        }


def coxcomb_geometry(casualty: Casualty | None, r_min: float = 3.0,
                     scale: float = 4.0, r_max: float = 24.0) -> CoxcombSpec:
    """Three 120-degree sectors with log-scaled radii; a lone grey center node
    when no casualty figure is reported at all."""
    if r_min <= 0 or scale <= 0 or r_max < r_min:
        raise LayoutError("bad coxcomb parameters")
    counts = {
        "deaths": casualty.deaths if casualty else None,
        "injuries": casualty.injuries if casualty else None,
        "impacted": casualty.impacted if casualty else None,
    }
    if all(v is None for v in counts.values()):
        return CoxcombSpec(has_casualty=False, sectors=[], center_radius=r_min)
    sectors = []
    for label, start in COXCOMB_SECTORS:
        c = counts[label]
        radius = min(r_min + scale * math.log10(1 + c), r_max) if c is not None else r_min
        sectors.append(CoxcombSector(label=label, start_angle=start,
                                     sweep=SECTOR_SWEEP, radius=radius, count=c))
    return CoxcombSpec(has_casualty=True, sectors=sectors, center_radius=r_min)
