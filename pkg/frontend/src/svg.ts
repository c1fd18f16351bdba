/**
 * Minimal deterministic SVG assembly: fixed canvas, explicit scales, no
 * timestamps or randomness, so re-rendering a figure is byte-stable.
 */

export const WIDTH = 760;
export const HEIGHT = 520;
export const MARGIN = { left: 80, right: 170, top: 40, bottom: 64 };

export const SERIES_COLORS = ["#1f6fb2", "#d1495b", "#3e8e41", "#8d5a97", "#c87d2f", "#5b5b5b"];

export interface Scale {
  (value: number): number;
  min: number;
  max: number;
  log: boolean;
}

export function makeScale(min: number, max: number, outMin: number, outMax: number, log: boolean): Scale {
  const lo = log ? Math.log10(min) : min;
  const hi = log ? Math.log10(max) : max;
  const span = hi === lo ? 1 : hi - lo;
  const scale = ((value: number) => {
    const v = log ? Math.log10(value) : value;
    return outMin + ((v - lo) / span) * (outMax - outMin);
  }) as Scale;
  scale.min = min;
  scale.max = max;
  scale.log = log;
  return scale;
}

export function niceTicks(scale: Scale, count = 6): number[] {
  if (scale.log) {
    const lo = Math.ceil(Math.log10(scale.min) - 1e-9);
    const hi = Math.floor(Math.log10(scale.max) + 1e-9);
    const ticks: number[] = [];
    const stride = Math.max(1, Math.ceil((hi - lo) / count));
    for (let e = lo; e <= hi; e += stride) {
      ticks.push(10 ** e);
    }
    return ticks.length >= 2 ? ticks : [scale.min, scale.max];
  }
  const span = scale.max - scale.min;
  if (span <= 0) {
    return [scale.min];
  }
  const step = 10 ** Math.floor(Math.log10(span / count));
  const stride = [1, 2, 5, 10].map((m) => m * step).find((s) => span / s <= count) ?? step * 10;
  const ticks: number[] = [];
  for (let v = Math.ceil(scale.min / stride) * stride; v <= scale.max + 1e-12 * span; v += stride) {
    ticks.push(v);
  }
  return ticks;
}

export function fmtTick(value: number, log: boolean): string {
  if (log) {
    const e = Math.round(Math.log10(value));
    return `1e${e}`;
  }
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) {
    return value.toExponential(1);
  }
  return String(Number(value.toPrecision(6)));
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(width = WIDTH, height = HEIGHT) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${r(x1)}" y1="${r(y1)}" x2="${r(x2)}" y2="${r(y2)}" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.6): void {
    const attr = points.map(([x, y]) => `${r(x)},${r(y)}`).join(" ");
    this.parts.push(`<polyline points="${attr}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  circle(x: number, y: number, radius: number, fill: string): void {
    this.parts.push(`<circle cx="${r(x)}" cy="${r(y)}" r="${radius}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(`<rect x="${r(x)}" y="${r(y)}" width="${r(w)}" height="${r(h)}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string; fill?: string; rotate?: number } = {}): void {
    const size = opts.size ?? 13;
    const anchor = opts.anchor ?? "start";
    const fill = opts.fill ?? "#222";
    const transform = opts.rotate ? ` transform="rotate(${opts.rotate} ${r(x)} ${r(y)})"` : "";
    this.parts.push(
      `<text x="${r(x)}" y="${r(y)}" font-size="${size}" text-anchor="${anchor}" fill="${fill}"${transform}>${escapeXml(content)}</text>`,
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function drawAxes(
  doc: SvgDoc,
  x: Scale,
  y: Scale,
  labels: { x: string; y: string; title: string },
): void {
  const { left, right, top, bottom } = MARGIN;
  const x0 = left;
  const x1 = WIDTH - right;
  const y0 = HEIGHT - bottom;
  const y1 = top;
  doc.line(x0, y0, x1, y0, "#222", 1.2);
  doc.line(x0, y0, x0, y1, "#222", 1.2);
  for (const tick of niceTicks(x)) {
    const px = x(tick);
    doc.line(px, y0, px, y0 + 5, "#222");
    doc.line(px, y0, px, y1, "#eee");
    doc.text(px, y0 + 20, fmtTick(tick, x.log), { anchor: "middle", size: 11 });
  }
  for (const tick of niceTicks(y)) {
    const py = y(tick);
    doc.line(x0 - 5, py, x0, py, "#222");
    doc.line(x0, py, x1, py, "#eee");
    doc.text(x0 - 8, py + 4, fmtTick(tick, y.log), { anchor: "end", size: 11 });
  }
  doc.text((x0 + x1) / 2, HEIGHT - 18, labels.x, { anchor: "middle" });
  doc.text(20, (y0 + y1) / 2, labels.y, { anchor: "middle", rotate: -90 });
  doc.text((x0 + x1) / 2, 24, labels.title, { anchor: "middle", size: 15 });
}

export function drawLegend(doc: SvgDoc, entries: Array<{ label: string; color: string }>): void {
  const x = WIDTH - MARGIN.right + 14;
  let y = MARGIN.top + 10;
  for (const entry of entries) {
    doc.line(x, y - 4, x + 22, y - 4, entry.color, 2.5);
    doc.text(x + 28, y, entry.label, { size: 12 });
    y += 18;
  }
}

function r(value: number): string {
  return Number(value.toFixed(2)).toString();
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
