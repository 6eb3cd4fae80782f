"""Temperature-mortality exposure-response curves and representative news binding.

Curves are the familiar "U" shape: relative risk is 1 at the minimum mortality
temperature (MMT) and grows roughly exponentially away from it, so evaluation
interpolates log-linearly between curve points.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path


class RiskError(ValueError):
    """Contract violation in curve data or parameters."""


@dataclass
class RiskCurve:
    city_id: str
    temps: list[float]          # strictly increasing
    rrs: list[float]            # > 0, min == 1 after normalization
    mmt: float

    def __post_init__(self) -> None:
        if len(self.temps) != len(self.rrs):
            raise RiskError("temps and rrs length mismatch")


@dataclass(frozen=True)
class RepresentativeBin:
    temp_lo: float
    temp_hi: float
    article_id: str
    deaths: int


@dataclass
class RepresentativeBinding:
    bins: list[RepresentativeBin]


def _normalize(city_id: str, temps: list[float], rrs: list[float]) -> RiskCurve:
    if len(temps) < 3:
        raise RiskError("curve needs at least 3 points")
    if any(t1 <= t0 for t0, t1 in zip(temps, temps[1:])):
        raise RiskError("curve temperatures must be strictly increasing")
    if any(r <= 0 for r in rrs):
        raise RiskError("relative risk must be positive everywhere")
    rr_min = min(rrs)
    normalized = [r / rr_min for r in rrs]
    mmt = temps[normalized.index(min(normalized))]   # ties: lowest temperature
    return RiskCurve(city_id=city_id, temps=list(temps), rrs=normalized, mmt=mmt)


def load_curve(path: str | Path) -> RiskCurve:
    """Curve file: a ``city_id,<id>`` header line, then temp,relative_risk rows."""
    temps: list[float] = []
    rrs: list[float] = []
    city_id = ""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "city_id":
            raise RiskError("curve file must start with a city_id header line")
        city_id = header[1].strip()
        for row in reader:
            if not row or row[0].strip().startswith("#") or row[0].strip() == "temp":
                continue
            temps.append(float(row[0]))
            rrs.append(float(row[1]))
    return _normalize(city_id, temps, rrs)


def normalize_curve(curve: RiskCurve) -> RiskCurve:
    """Re-derive normalization and MMT; idempotent on an already-loaded curve."""
    return _normalize(curve.city_id, curve.temps, curve.rrs)


def relative_risk(curve: RiskCurve, t: float) -> float:
    """Piecewise log-linear interpolation, clamped to endpoint values outside range."""
    temps, rrs = curve.temps, curve.rrs
    if t <= temps[0]:
        return rrs[0]
    if t >= temps[-1]:
        return rrs[-1]
    # find the bracketing segment; exact node hits return the stored value
    lo, hi = 0, len(temps) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if temps[mid] <= t:
            lo = mid
        else:
            hi = mid
    if t == temps[lo]:
        return rrs[lo]
    w = (t - temps[lo]) / (temps[hi] - temps[lo])
    return math.exp((1 - w) * math.log(rrs[lo]) + w * math.log(rrs[hi]))


def synthesize_curve(mmt: float, beta_cold: float, beta_heat: float,
                     temp_range: tuple[float, float], step: float,
                     city_id: str = "synthetic") -> RiskCurve:
    """Parametric U curve: RR grows exp(beta * distance) on each side of the MMT."""
    if beta_cold < 0 or beta_heat < 0:
        raise RiskError("betas must be non-negative")
    if step <= 0:
        raise RiskError("step must be positive")
    lo, hi = temp_range
    if hi <= lo:
        raise RiskError("empty temperature range")
    n = int(math.floor((hi - lo) / step))
    grid = sorted({lo + i * step for i in range(n + 1)} | {mmt})
    grid = [t for t in grid if lo <= t <= hi] if lo <= mmt <= hi else grid + [mmt]
    grid = sorted(set(grid))
    if len(grid) < 3:
        raise RiskError("temperature range too narrow for a curve")

    def rr(t: float) -> float:
        if t > mmt:
            return math.exp(beta_heat * (t - mmt))
        if t < mmt:
            return math.exp(beta_cold * (mmt - t))
        return 1.0

    return _normalize(city_id, grid, [rr(t) for t in grid])


def bind_representative_news(
    articles: list[tuple[str, date, float | None, int | None]],
    bin_width: float = 1.0,
) -> RepresentativeBinding:
    """Per temperature bin, the article with the most documented deaths.

    ``articles`` rows are (article_id, published_at, extracted_temp, deaths).
    Articles without an extracted temperature are excluded; missing death
    counts rank as 0. Ties go to the earlier publication date, then the
    lexicographically smaller id. Bins with no article are omitted.
    """
    if bin_width <= 0:
        raise RiskError("bin width must be positive")
    best: dict[int, tuple[int, date, str]] = {}
    for article_id, published, temp, deaths in articles:
        if temp is None:
            continue
        k = math.floor(temp / bin_width)
        d = deaths if deaths is not None else 0
        contender = (-d, published, article_id)
        if k not in best or contender < (-best[k][0], best[k][1], best[k][2]):
            best[k] = (d, published, article_id)
    bins = [
        RepresentativeBin(temp_lo=k * bin_width, temp_hi=(k + 1) * bin_width,
                          article_id=aid, deaths=d)
        for k, (d, _pub, aid) in sorted(best.items())
    ]
    return RepresentativeBinding(bins=bins)
