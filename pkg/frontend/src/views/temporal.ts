// Dual-axis temporal view model: index line over news-volume bars.
// Both y-axes always start at zero so relative magnitudes stay comparable.

import type { SeriesPayload } from "../types.js";

export interface LinearScale {
  domainMin: number;
  domainMax: number;
  rangeMin: number;
  rangeMax: number;
  apply(v: number): number;
}

export function linearScale(domainMin: number, domainMax: number,
                            rangeMin: number, rangeMax: number): LinearScale {
  const span = domainMax - domainMin || 1;
  return {
    domainMin, domainMax, rangeMin, rangeMax,
    apply: (v: number) =>
      rangeMin + ((v - domainMin) / span) * (rangeMax - rangeMin),
  };
}

export interface TemporalBar {
  period: string;
  x: number;
  y: number;
  width: number;
  height: number;
  highlightHeight: number;   // red portion when a topic is hovered
  count: number;
}

export interface TemporalModel {
  width: number;
  height: number;
  valueScale: LinearScale;   // left axis (index); domainMin always 0
  countScale: LinearScale;   // right axis (news volume); domainMin always 0
  observedPath: string;
  forecastPath: string;
  bars: TemporalBar[];
  periods: string[];
  rangeHandles: { startX: number; endX: number };
}

export function temporalModel(
  series: SeriesPayload,
  size: { width: number; height: number },
  highlightCounts: Map<string, number> = new Map(),
): TemporalModel {
  const points = series.points;
  const periods = points.map((p) => p.period);
  const values = points.map((p) => p.value).filter((v): v is number => v !== null);
  const maxValue = values.length ? Math.max(...values) : 1;
  const maxCount = Math.max(1, ...points.map((p) => p.news_count));

  // both axes anchored at zero by construction
  const valueScale = linearScale(0, maxValue * 1.05, size.height, 0);
  const countScale = linearScale(0, maxCount, size.height, 0);

  const step = points.length ? size.width / points.length : size.width;
  const barWidth = Math.max(1, step * 0.7);

  const bars: TemporalBar[] = points.map((p, i) => {
    const h = size.height - countScale.apply(p.news_count);
    const hi = Math.min(highlightCounts.get(p.period) ?? 0, p.news_count);
    const hiH = size.height - countScale.apply(hi);
    return {
      period: p.period,
      x: i * step + (step - barWidth) / 2,
      y: countScale.apply(p.news_count),
      width: barWidth,
      height: h,
      highlightHeight: hiH,
      count: p.news_count,
    };
  });

  const path = (source: "observed" | "forecast") => {
    let d = "";
    points.forEach((p, i) => {
      if (p.value === null || p.source !== source) return;
      const x = i * step + step / 2;
      const y = valueScale.apply(p.value);
      d += (d ? " L" : "M") + `${x.toFixed(2)},${y.toFixed(2)}`;
    });
    return d;
  };

  return {
    width: size.width,
    height: size.height,
    valueScale,
    countScale,
    observedPath: path("observed"),
    forecastPath: path("forecast"),
    bars,
    periods,
    rangeHandles: { startX: 0, endX: size.width },
  };
}

/** Per-period counts for one topic's articles; drives the red bar recolor. */
export function topicPeriodCounts(articleDates: Map<string, string>,
                                  articleIds: string[],
                                  resolution: string): Map<string, number> {
  const counts = new Map<string, number>();
  for (const id of articleIds) {
    const iso = articleDates.get(id);
    if (!iso) continue;
    const period = resolution === "daily" ? iso
      : resolution === "monthly" ? iso.slice(0, 7) : iso.slice(0, 4);
    counts.set(period, (counts.get(period) ?? 0) + 1);
  }
  return counts;
}
