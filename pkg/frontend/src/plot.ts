// SVG builders for the membership plot and plant gauges. Pure string
// generation over model values so the rendering can be unit-tested in node.

import type { GaugeModel, MembershipPlotModel } from "./state.js";

const CURVE_COLORS = ["#4c9ae8", "#53b87a", "#d9a03f", "#c16ad1", "#d16a6a", "#6ad1c6"];

export interface PlotGeometry {
  width: number;
  height: number;
  padding: number;
}

const DEFAULT_GEOMETRY: PlotGeometry = { width: 460, height: 220, padding: 28 };

function scaleX(points: number[], geometry: PlotGeometry): (x: number) => number {
  const lo = points[0];
  const hi = points[points.length - 1];
  const span = hi - lo || 1;
  return (x) =>
    geometry.padding + ((x - lo) / span) * (geometry.width - 2 * geometry.padding);
}

function scaleY(geometry: PlotGeometry): (mu: number) => number {
  return (mu) =>
    geometry.height - geometry.padding - mu * (geometry.height - 2 * geometry.padding);
}

export function curvePath(
  points: number[],
  values: number[],
  geometry: PlotGeometry = DEFAULT_GEOMETRY,
): string {
  const sx = scaleX(points, geometry);
  const sy = scaleY(geometry);
  return points
    .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p).toFixed(1)},${sy(values[i]).toFixed(1)}`)
    .join(" ");
}

export function renderMembershipSvg(
  model: MembershipPlotModel,
  geometry: PlotGeometry = DEFAULT_GEOMETRY,
): string {
  const { width, height, padding } = geometry;
  const sx = scaleX(model.points, geometry);
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${width} ${height}" class="membership-plot" role="img" ` +
      `aria-label="membership functions of ${model.variable}">`,
  );
  parts.push(
    `<line x1="${padding}" y1="${height - padding}" x2="${width - padding}" ` +
      `y2="${height - padding}" class="axis"/>`,
  );
  parts.push(
    `<line x1="${padding}" y1="${padding}" x2="${padding}" y2="${height - padding}" class="axis"/>`,
  );
  for (const p of model.points) {
    const x = sx(p).toFixed(1);
    parts.push(`<line x1="${x}" y1="${height - padding}" x2="${x}" y2="${height - padding + 4}" class="axis"/>`);
    parts.push(
      `<text x="${x}" y="${height - padding + 16}" class="tick-label" text-anchor="middle">${p}</text>`,
    );
  }
  model.curves.forEach((curve, index) => {
    const color = CURVE_COLORS[index % CURVE_COLORS.length];
    parts.push(
      `<path d="${curvePath(model.points, curve.values, geometry)}" fill="none" ` +
        `stroke="${color}" stroke-width="2" data-term="${curve.label}"/>`,
    );
    parts.push(
      `<text x="${width - padding + 4}" y="${padding + 14 * index}" fill="${color}" ` +
        `class="legend">${curve.label}</text>`,
    );
  });
  if (model.overlay) {
    parts.push(
      `<path d="${curvePath(model.points, model.overlay, geometry)}" fill="none" ` +
        `stroke="#222" stroke-width="2" stroke-dasharray="5,3" data-overlay="${model.overlaySource}"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

export function renderGaugeSvg(model: GaugeModel, width = 220, height = 56): string {
  const span = model.max - model.min || 1;
  const toX = (v: number) => 8 + ((v - model.min) / span) * (width - 16);
  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 ${width} ${height}" class="gauge" role="img" aria-label="${model.name}">`);
  parts.push(`<rect x="8" y="22" width="${width - 16}" height="12" class="gauge-track"/>`);
  if (model.band) {
    const x0 = toX(model.band.low);
    const x1 = toX(model.band.high);
    parts.push(
      `<rect x="${x0.toFixed(1)}" y="22" width="${(x1 - x0).toFixed(1)}" height="12" class="gauge-band"/>`,
    );
  }
  const x = toX(model.value);
  parts.push(`<line x1="${x.toFixed(1)}" y1="16" x2="${x.toFixed(1)}" y2="40" class="gauge-needle"/>`);
  parts.push(`<text x="8" y="12" class="gauge-label">${model.name}: ${model.value}</text>`);
  parts.push("</svg>");
  return parts.join("");
}
