/**
 * The five figure kinds rendered from solver outputs.
 *
 * convergence  – log-log error-versus-step table with fitted slopes
 * cpu_vs_error – log-log wall-seconds against achieved error
 * energy_curves – energy evolution, one curve per input series
 * angle_map    – in-plane angle atan2(m2, m1) of a field dump, mid-z slice
 * quiver       – in-plane arrows of the first two components, mid-z slice
 */

import { basename } from "path";

import { CsvTable, cell, num, readCsv, rowIsNumeric } from "./csv.js";
import { FieldDump, at, readField } from "./field.js";
import { fitOrder } from "./fit.js";
import {
  HEIGHT,
  MARGIN,
  SERIES_COLORS,
  SvgDoc,
  WIDTH,
  drawAxes,
  drawLegend,
  makeScale,
} from "./svg.js";

export const KINDS = ["convergence", "cpu_vs_error", "energy_curves", "angle_map", "quiver"] as const;
export type Kind = (typeof KINDS)[number];

export function renderPlot(kind: Kind, inputs: string[]): string {
  if (inputs.length === 0) {
    throw new Error(`${kind}: at least one --in path is required`);
  }
  switch (kind) {
    case "convergence":
      return convergencePlot(readCsv(inputs[0], "scheme,k,h,linf,l2,h1"));
    case "cpu_vs_error":
      return cpuVsErrorPlot(readCsv(inputs[0], "scheme,sweep,k,h,wall_seconds,linf"));
    case "energy_curves":
      return energyCurvesPlot(inputs.map((p) => readCsv(p, "step,time,exchange,anisotropy,zeeman,stray,total")));
    case "angle_map":
      return angleMapPlot(readField(inputs[0]));
    case "quiver":
      return quiverPlot(readField(inputs[0]));
    default:
      throw new Error(`unknown plot kind "${kind satisfies never}"`);
  }
}

interface Series {
  label: string;
  points: Array<[number, number]>;
}

function groupByScheme(table: CsvTable, xColumn: string, yColumn: string): Series[] {
  const order: string[] = [];
  const bySchema = new Map<string, Array<[number, number]>>();
  for (let i = 0; i < table.rows.length; i++) {
    if (!rowIsNumeric(table, i, [xColumn, yColumn])) {
      continue; // blown-up entries carry "failed" markers
    }
    const scheme = cell(table, i, "scheme");
    if (!bySchema.has(scheme)) {
      bySchema.set(scheme, []);
      order.push(scheme);
    }
    bySchema.get(scheme)!.push([num(table, i, xColumn), num(table, i, yColumn)]);
  }
  return order.map((label) => ({ label, points: bySchema.get(label)! }));
}

function bounds(series: Series[]): { x: [number, number]; y: [number, number] } {
  const xs = series.flatMap((s) => s.points.map(([x]) => x));
  const ys = series.flatMap((s) => s.points.map(([, y]) => y));
  if (xs.length === 0) {
    throw new Error("no plottable rows after filtering failed entries");
  }
  return {
    x: [Math.min(...xs), Math.max(...xs)],
    y: [Math.min(...ys), Math.max(...ys)],
  };
}

function convergencePlot(table: CsvTable): string {
  // the sweep variable is whichever of k and h actually varies
  const ks = new Set(table.rows.map((_, i) => cell(table, i, "k")));
  const xColumn = ks.size > 1 ? "k" : "h";
  const series = groupByScheme(table, xColumn, "linf");
  const { x, y } = bounds(series);
  const doc = new SvgDoc();
  const sx = makeScale(x[0], x[1], MARGIN.left, WIDTH - MARGIN.right, true);
  const sy = makeScale(y[0], y[1], HEIGHT - MARGIN.bottom, MARGIN.top, true);
  drawAxes(doc, sx, sy, {
    x: xColumn === "k" ? "time step k" : "mesh spacing h",
    y: "max-norm error",
    title: `convergence against ${xColumn === "k" ? "time step" : "spacing"}`,
  });
  const legend: Array<{ label: string; color: string }> = [];
  series.forEach((s, index) => {
    const color = SERIES_COLORS[index % SERIES_COLORS.length];
    const pts = s.points.map(([px, py]) => [sx(px), sy(py)] as [number, number]);
    doc.polyline(pts, color);
    pts.forEach(([px, py]) => doc.circle(px, py, 3, color));
    const slope = fitOrder(s.points).toFixed(2);
    const [lastX, lastY] = pts[pts.length - 1];
    doc.text(lastX + 8, lastY - 6, `slope ${slope}`, { size: 12, fill: color });
    legend.push({ label: `${s.label} (${slope})`, color });
  });
  drawLegend(doc, legend);
  return doc.render();
}

function cpuVsErrorPlot(table: CsvTable): string {
  const order: string[] = [];
  const groups = new Map<string, Array<[number, number]>>();
  for (let i = 0; i < table.rows.length; i++) {
    if (!rowIsNumeric(table, i, ["wall_seconds", "linf"])) {
      continue;
    }
    const label = `${cell(table, i, "scheme")} (${cell(table, i, "sweep")}-sweep)`;
    if (!groups.has(label)) {
      groups.set(label, []);
      order.push(label);
    }
    groups.get(label)!.push([num(table, i, "linf"), num(table, i, "wall_seconds")]);
  }
  const series = order.map((label) => {
    const points = groups.get(label)!;
    points.sort((a, b) => a[0] - b[0]);
    return { label, points };
  });
  const { x, y } = bounds(series);
  const doc = new SvgDoc();
  const sx = makeScale(x[0], x[1], MARGIN.left, WIDTH - MARGIN.right, true);
  const sy = makeScale(y[0], y[1], HEIGHT - MARGIN.bottom, MARGIN.top, true);
  drawAxes(doc, sx, sy, {
    x: "max-norm error at final time",
    y: "wall seconds",
    title: "cost to reach a given accuracy",
  });
  const legend: Array<{ label: string; color: string }> = [];
  series.forEach((s, index) => {
    const color = SERIES_COLORS[index % SERIES_COLORS.length];
    const pts = s.points.map(([px, py]) => [sx(px), sy(py)] as [number, number]);
    doc.polyline(pts, color);
    pts.forEach(([px, py]) => doc.circle(px, py, 3, color));
    legend.push({ label: s.label, color });
  });
  drawLegend(doc, legend);
  return doc.render();
}

function energyCurvesPlot(tables: CsvTable[]): string {
  const series: Series[] = tables.map((table) => ({
    label: basename(table.path).replace(/\.csv$/, ""),
    points: table.rows.map((_, i) => [num(table, i, "time"), num(table, i, "total")] as [number, number]),
  }));
  const { x, y } = bounds(series);
  const pad = (y[1] - y[0] || Math.abs(y[1]) || 1) * 0.05;
  const doc = new SvgDoc();
  const sx = makeScale(x[0], x[1], MARGIN.left, WIDTH - MARGIN.right, false);
  const sy = makeScale(y[0] - pad, y[1] + pad, HEIGHT - MARGIN.bottom, MARGIN.top, false);
  drawAxes(doc, sx, sy, { x: "time (dimensionless)", y: "total energy", title: "energy evolution" });
  const legend: Array<{ label: string; color: string }> = [];
  series.forEach((s, index) => {
    const color = SERIES_COLORS[index % SERIES_COLORS.length];
    doc.polyline(s.points.map(([px, py]) => [sx(px), sy(py)] as [number, number]), color);
    legend.push({ label: s.label, color });
  });
  drawLegend(doc, legend);
  return doc.render();
}

/** Cyclic color for an angle in (-pi, pi]. */
function angleColor(angle: number): string {
  const hue = ((angle + Math.PI) / (2 * Math.PI)) * 360;
  return `hsl(${hue.toFixed(1)}, 75%, 52%)`;
}

function inPlaneAngle(field: FieldDump, i: number, j: number, k: number): number {
  if (field.ncomp >= 2) {
    return Math.atan2(at(field, 1, i, j, k), at(field, 0, i, j, k));
  }
  return at(field, 0, i, j, k); // precomputed angle dump
}

function angleMapPlot(field: FieldDump): string {
  const k = Math.floor(field.nz / 2);
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const cw = plotW / field.nx;
  const ch = plotH / field.ny;
  const doc = new SvgDoc();
  for (let j = 0; j < field.ny; j++) {
    for (let i = 0; i < field.nx; i++) {
      const angle = inPlaneAngle(field, i, j, k);
      // y axis points up: row j=0 sits at the bottom
      const px = MARGIN.left + i * cw;
      const py = HEIGHT - MARGIN.bottom - (j + 1) * ch;
      doc.rect(px, py, cw + 0.5, ch + 0.5, angleColor(angle));
    }
  }
  doc.text(WIDTH / 2, 24, `in-plane angle atan2(m2, m1), z-slice ${k}`, { anchor: "middle", size: 15 });
  // colorbar for the cyclic scale
  const barX = WIDTH - MARGIN.right + 24;
  const barH = plotH;
  for (let s = 0; s < barH; s++) {
    const angle = -Math.PI + (2 * Math.PI * s) / (barH - 1);
    doc.rect(barX, HEIGHT - MARGIN.bottom - s - 1, 16, 1.5, angleColor(angle));
  }
  doc.text(barX + 22, HEIGHT - MARGIN.bottom, "-pi", { size: 11 });
  doc.text(barX + 22, MARGIN.top + 10, "pi", { size: 11 });
  return doc.render();
}

function quiverPlot(field: FieldDump): string {
  if (field.ncomp < 2) {
    throw new Error("quiver needs a vector dump with at least two components");
  }
  const k = Math.floor(field.nz / 2);
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const maxArrows = 32;
  const strideX = Math.max(1, Math.ceil(field.nx / maxArrows));
  const strideY = Math.max(1, Math.ceil(field.ny / maxArrows));
  const cellW = plotW / Math.ceil(field.nx / strideX);
  const cellH = plotH / Math.ceil(field.ny / strideY);
  const arrowLen = Math.min(cellW, cellH) * 0.45;
  const doc = new SvgDoc();
  doc.rect(MARGIN.left, MARGIN.top, plotW, plotH, "#fafafa");
  for (let j = 0; j < field.ny; j += strideY) {
    for (let i = 0; i < field.nx; i += strideX) {
      const mx = at(field, 0, i, j, k);
      const my = at(field, 1, i, j, k);
      const angle = Math.atan2(my, mx);
      const scale = Math.min(1, Math.hypot(mx, my));
      const cx = MARGIN.left + (i / strideX + 0.5) * cellW;
      const cy = HEIGHT - MARGIN.bottom - (j / strideY + 0.5) * cellH;
      const dx = Math.cos(angle) * arrowLen * scale;
      const dy = -Math.sin(angle) * arrowLen * scale;
      const color = angleColor(angle);
      doc.line(cx - dx, cy - dy, cx + dx, cy + dy, color, 1.6);
      // arrowhead
      const hx = cx + dx;
      const hy = cy + dy;
      const back = 0.35 * arrowLen * scale;
      const spread = 0.5;
      doc.line(hx, hy, hx - back * Math.cos(angle - spread), hy + back * Math.sin(angle - spread), color, 1.2);
      doc.line(hx, hy, hx - back * Math.cos(angle + spread), hy + back * Math.sin(angle + spread), color, 1.2);
    }
  }
  doc.text(WIDTH / 2, 24, `in-plane magnetization (m1, m2), z-slice ${k}`, { anchor: "middle", size: 15 });
  return doc.render();
}
