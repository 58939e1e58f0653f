/** Loss-history sparkline: map points onto an SVG polyline, log-scaled. */

import type { LossPoint } from "./types.js";

export interface SparklineGeometry {
  width: number;
  height: number;
  pad: number;
}

export const DEFAULT_GEOMETRY: SparklineGeometry = { width: 220, height: 48, pad: 3 };

/**
 * SVG polyline `points` attribute for a total-loss history. Uses log10 of the
 * totals (losses span orders of magnitude) and survives flat histories.
 */
export function sparklinePoints(
  history: readonly LossPoint[],
  geom: SparklineGeometry = DEFAULT_GEOMETRY,
): string {
  if (history.length === 0) return "";
  const floor = 1e-12;
  const values = history.map((p) => Math.log10(Math.max(p.total, floor)));
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  const innerW = geom.width - 2 * geom.pad;
  const innerH = geom.height - 2 * geom.pad;
  const lastIter = history[history.length - 1]!.iter || 1;
  return history
    .map((p, i) => {
      const v = values[i]!;
      const x = geom.pad + (innerW * p.iter) / lastIter;
      const y = geom.pad + innerH * (1 - (v - lo) / span);
      return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
}
