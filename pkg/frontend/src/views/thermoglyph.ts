// Thermometer-style glyph: two parallel axes (temperature, percentile) whose
// bands share one color per band index; a dashed marker links the current
// value across the axes, a solid one follows the hover.

import type { ThermoglyphPayload } from "../types.js";
import { linearScale } from "./temporal.js";

export interface BandRect {
  bandIndex: number;
  color: string;
  tempY0: number;
  tempY1: number;
  pctY0: number;
  pctY1: number;
}

export interface LinkLine {
  tempY: number;
  pctY: number;
  dashed: boolean;
}

export interface ThermoglyphModel {
  height: number;
  axisGap: number;
  bands: BandRect[];
  currentLink: LinkLine | null;
  hoverLink: LinkLine | null;
  tempDomain: [number, number];
}

export function thermoglyphModel(
  payload: ThermoglyphPayload,
  size: { height: number; axisGap: number },
  hoverTemperature: number | null = null,
): ThermoglyphModel {
  const bands = payload.bands;
  const tempLo = bands[0].temp_lo;
  const tempHi = bands[bands.length - 1].temp_hi;
  const tempScale = linearScale(tempLo, tempHi, size.height, 0);
  const pctScale = linearScale(0, 100, size.height, 0);

  const rects: BandRect[] = bands.map((b) => ({
    bandIndex: b.color_band_index,
    color: payload.palette[b.color_band_index],
    tempY0: tempScale.apply(b.temp_lo),
    tempY1: tempScale.apply(b.temp_hi),
    pctY0: pctScale.apply(b.percentile_lo),
    pctY1: pctScale.apply(b.percentile_hi),
  }));

  const link = (temperature: number, percentile: number, dashed: boolean): LinkLine => ({
    tempY: tempScale.apply(Math.min(Math.max(temperature, tempLo), tempHi)),
    pctY: pctScale.apply(percentile),
    dashed,
  });

  let currentLink: LinkLine | null = null;
  if (payload.current) {
    currentLink = link(payload.current.temperature, payload.current.percentile, true);
  }

  let hoverLink: LinkLine | null = null;
  if (hoverTemperature !== null) {
    hoverLink = link(hoverTemperature, percentileFor(payload, hoverTemperature), false);
  }

  return {
    height: size.height,
    axisGap: size.axisGap,
    bands: rects,
    currentLink,
    hoverLink,
    tempDomain: [tempLo, tempHi],
  };
}

/** Piecewise-linear percentile readout along the band edges (display only;
 * the authoritative values come from the API). */
export function percentileFor(payload: ThermoglyphPayload, temperature: number): number {
  const bands = payload.bands;
  if (temperature <= bands[0].temp_lo) return 0;
  for (const b of bands) {
    if (temperature <= b.temp_hi) {
      const span = b.temp_hi - b.temp_lo;
      const w = span > 0 ? (temperature - b.temp_lo) / span : 1;
      return b.percentile_lo + w * (b.percentile_hi - b.percentile_lo);
    }
  }
  return 100;
}
