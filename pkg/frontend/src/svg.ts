/**
 * Deterministic SVG assembly: fixed styling, fixed number formatting, no
 * timestamps or environment-dependent content, so identical inputs produce
 * byte-identical files.
 */

import type { Scale } from "./scales.js";

export const FONT = "Helvetica, Arial, sans-serif";

export function fmt(x: number): string {
  if (x === 0) return "0";
  const a = Math.abs(x);
  if (a >= 0.01 && a < 10000) {
    return String(Number(x.toPrecision(6)));
  }
  return x.toExponential(2).replace("e-", "e-").replace("e+", "e+");
}

function coord(x: number): string {
  return String(Number(x.toFixed(2)));
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  push(s: string): void {
    this.parts.push(s);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string,
       width = 1, dash?: string): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.push(`<line x1="${coord(x1)}" y1="${coord(y1)}" x2="${coord(x2)}" ` +
              `y2="${coord(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`);
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${coord(x)},${coord(y)}`).join(" ");
    this.push(`<polyline points="${pts}" fill="none" stroke="${stroke}" ` +
              `stroke-width="${width}"/>`);
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.push(`<circle cx="${coord(cx)}" cy="${coord(cy)}" r="${r}" ` +
              `fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, opts: { size?: number; anchor?: string;
       fill?: string; rotate?: number } = {}): void {
    const size = opts.size ?? 11;
    const anchor = opts.anchor ?? "start";
    const fill = opts.fill ?? "#222";
    const transform = opts.rotate
      ? ` transform="rotate(${opts.rotate} ${coord(x)} ${coord(y)})"` : "";
    this.push(`<text x="${coord(x)}" y="${coord(y)}" font-family="${FONT}" ` +
              `font-size="${size}" text-anchor="${anchor}" fill="${fill}"` +
              `${transform}>${escapeXml(s)}</text>`);
  }

  group(attrs: string, body: () => void): void {
    this.push(`<g ${attrs}>`);
    body();
    this.push("</g>");
  }

  render(): string {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
           `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
           `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
           this.parts.join("\n") + "\n</svg>\n";
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Frame {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/** Axes, ticks, labels, and a boxed plotting frame. */
export function drawAxes(doc: SvgDoc, frame: Frame, xs: Scale, ys: Scale,
                         xLabel: string, yLabel: string): void {
  doc.push(`<rect x="${frame.x0}" y="${frame.y0}" ` +
           `width="${frame.x1 - frame.x0}" height="${frame.y1 - frame.y0}" ` +
           `fill="none" stroke="#888" stroke-width="1"/>`);
  for (const t of xs.ticks()) {
    const x = xs(t);
    doc.line(x, frame.y1, x, frame.y1 + 4, "#444");
    doc.line(x, frame.y0, x, frame.y1, "#eee");
    const label = xs.isLog ? `1e${Math.round(Math.log10(t))}` : fmt(t);
    doc.text(x, frame.y1 + 16, label, { anchor: "middle" });
  }
  for (const t of ys.ticks()) {
    const y = ys(t);
    doc.line(frame.x0 - 4, y, frame.x0, y, "#444");
    doc.line(frame.x0, y, frame.x1, y, "#eee");
    const label = ys.isLog ? `1e${Math.round(Math.log10(t))}` : fmt(t);
    doc.text(frame.x0 - 7, y + 3.5, label, { anchor: "end" });
  }
  doc.text((frame.x0 + frame.x1) / 2, frame.y1 + 34, xLabel,
           { anchor: "middle", size: 12 });
  doc.text(frame.x0 - 46, (frame.y0 + frame.y1) / 2, yLabel,
           { anchor: "middle", size: 12, rotate: -90 });
}

export function errorBar(doc: SvgDoc, x: number, yLo: number, yHi: number,
                         color: string): void {
  doc.line(x, yLo, x, yHi, color, 1);
  doc.line(x - 3, yLo, x + 3, yLo, color, 1);
  doc.line(x - 3, yHi, x + 3, yHi, color, 1);
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                 "#8c564b"];

const METHOD_COLORS: Record<string, string> = {
  supervised: "#1f77b4",
  criterion: "#d62728",
  cv: "#1f77b4",
  amortized: "#d62728",
  gcv: "#2ca02c",
};

export function methodColor(method: string, index: number): string {
  return METHOD_COLORS[method] ?? PALETTE[index % PALETTE.length];
}

export function legend(doc: SvgDoc, frame: Frame,
                       entries: Array<[string, string]>): void {
  let y = frame.y0 + 16;
  for (const [name, color] of entries) {
    doc.line(frame.x1 - 130, y - 4, frame.x1 - 106, y - 4, color, 2);
    doc.text(frame.x1 - 100, y, name, { size: 11 });
    y += 16;
  }
}
