/**
 * The three figure kinds. Each renderer consumes validated tables and
 * performs plotting transforms only: axis mapping and error-bar half-widths
 * read directly from columns. No statistics are computed here.
 */

import { EmptyDataError, numericColumn, column, Table, validateSchema } from "./csv.js";
import { extent, linearScale, logScale } from "./scales.js";
import { SvgDoc, drawAxes, errorBar, fmt, legend, methodColor } from "./svg.js";

export type FigureKind = "ipl_vs_b" | "ridge_curves" | "mnist_paths";

export function render(kind: FigureKind, tables: Table[]): string {
  switch (kind) {
    case "ipl_vs_b":
      return renderIplVsB(tables[0]);
    case "ridge_curves":
      return renderRidgeCurves(tables[0]);
    case "mnist_paths":
      return renderMnistPaths(tables[0]);
    default:
      throw new Error(`unknown figure kind '${kind}'`);
  }
}

export const REQUIRED_INPUTS: Record<FigureKind, string[]> = {
  ipl_vs_b: ["toy_gms_ipl_summary"],
  ridge_curves: ["ridge_curves"],
  mnist_paths: ["mnist_curve"],
};

interface Series {
  method: string;
  x: number[];
  y: number[];
  err: number[];
}

function bySeries(table: Table, xCol: string, yCol: string,
                  errCol: string | null): Series[] {
  const methods = column(table, "method");
  const xs = numericColumn(table, xCol);
  const ys = numericColumn(table, yCol);
  const errs = errCol ? numericColumn(table, errCol) : ys.map(() => 0);
  const order: string[] = [];
  const series = new Map<string, Series>();
  methods.forEach((m, i) => {
    if (!series.has(m)) {
      series.set(m, { method: m, x: [], y: [], err: [] });
      order.push(m);
    }
    const s = series.get(m)!;
    s.x.push(xs[i]);
    s.y.push(ys[i]);
    s.err.push(errs[i]);
  });
  return order.map((m) => series.get(m)!);
}

function renderIplVsB(table: Table): string {
  validateSchema(table, "toy_gms_ipl_summary");
  const series = bySeries(table, "budget", "ipl_mean", "ipl_std_err");
  const doc = new SvgDoc(760, 480);
  const frame = { x0: 80, y0: 40, x1: 720, y1: 420 };
  const allX = series.flatMap((s) => s.x);
  const allLo = series.flatMap((s) => s.y.map((v, i) => v - s.err[i]));
  const allHi = series.flatMap((s) => s.y.map((v, i) => v + s.err[i]));
  const xs = logScale([Math.min(...allX), Math.max(...allX)],
                      [frame.x0 + 30, frame.x1 - 30]);
  const ys = linearScale(extent([...allLo, ...allHi, 0]), [frame.y1, frame.y0]);
  drawAxes(doc, frame, xs, ys, "labeled optimizer solves B",
           "integrated prediction loss");
  const entries: Array<[string, string]> = [];
  series.forEach((s, i) => {
    const color = methodColor(s.method, i);
    entries.push([s.method, color]);
    const pts = s.x.map((x, j) => [xs(x), ys(s.y[j])] as [number, number]);
    doc.polyline(pts, color, 2);
    s.x.forEach((x, j) => {
      doc.circle(xs(x), ys(s.y[j]), 3, color);
      if (s.err[j] > 0) {
        errorBar(doc, xs(x), ys(s.y[j] - s.err[j]), ys(s.y[j] + s.err[j]),
                 color);
      }
    });
  });
  legend(doc, frame, entries);
  return doc.render();
}

function renderRidgeCurves(table: Table): string {
  validateSchema(table, "ridge_curves");
  const series = bySeries(table, "lambda", "value", "std_err");
  const selected = numericColumn(table, "selected");
  const methods = column(table, "method");
  const lambdas = numericColumn(table, "lambda");

  const doc = new SvgDoc(760, 480);
  const frame = { x0: 80, y0: 40, x1: 720, y1: 420 };
  const allX = series.flatMap((s) => s.x);
  const allLo = series.flatMap((s) => s.y.map((v, i) => v - s.err[i]));
  const allHi = series.flatMap((s) => s.y.map((v, i) => v + s.err[i]));
  const xs = logScale([Math.min(...allX), Math.max(...allX)],
                      [frame.x0, frame.x1]);
  const ys = linearScale(extent([...allLo, ...allHi]), [frame.y1, frame.y0]);
  drawAxes(doc, frame, xs, ys, "penalty strength", "estimated risk");

  const colorOf = new Map<string, string>();
  const entries: Array<[string, string]> = [];
  series.forEach((s, i) => {
    const color = methodColor(s.method, i);
    colorOf.set(s.method, color);
    entries.push([s.method, color]);
    doc.polyline(s.x.map((x, j) => [xs(x), ys(s.y[j])] as [number, number]),
                 color, 2);
    s.x.forEach((x, j) => {
      if (s.err[j] > 0) {
        errorBar(doc, xs(x), ys(s.y[j] - s.err[j]), ys(s.y[j] + s.err[j]),
                 color);
      }
    });
  });
  // one vertical selected-lambda marker per method present in the data
  doc.group('class="selected-markers"', () => {
    selected.forEach((flag, i) => {
      if (flag === 1) {
        const x = xs(lambdas[i]);
        const color = colorOf.get(methods[i]) ?? "#444";
        doc.line(x, frame.y0, x, frame.y1, color, 1.5, "5,4");
        doc.text(x + 3, frame.y0 + 12, `${methods[i]}: ${fmt(lambdas[i])}`,
                 { size: 10, fill: color });
      }
    });
  });
  legend(doc, frame, entries);
  return doc.render();
}

function renderMnistPaths(table: Table): string {
  validateSchema(table, "mnist_curve");
  const lambdas = numericColumn(table, "lambda");
  const losses = numericColumn(table, "val_loss");
  const accs = numericColumn(table, "val_acc");
  if (lambdas.length === 0) throw new EmptyDataError("mnist_curve is empty");

  const doc = new SvgDoc(980, 440);
  const panels = [
    { frame: { x0: 70, y0: 40, x1: 460, y1: 380 }, y: losses,
      label: "validation loss" },
    { frame: { x0: 560, y0: 40, x1: 950, y1: 380 }, y: accs,
      label: "validation accuracy" },
  ];
  for (const p of panels) {
    doc.group(`class="panel-${p.label.split(" ")[1]}"`, () => {
      const xs = logScale([Math.min(...lambdas), Math.max(...lambdas)],
                          [p.frame.x0, p.frame.x1]);
      const ys = linearScale(extent(p.y), [p.frame.y1, p.frame.y0]);
      drawAxes(doc, p.frame, xs, ys, "penalty strength", p.label);
      doc.polyline(lambdas.map((x, j) => [xs(x), ys(p.y[j])] as [number, number]),
                   "#1f77b4", 2);
      lambdas.forEach((x, j) => doc.circle(xs(x), ys(p.y[j]), 2.5, "#1f77b4"));
    });
  }
  return doc.render();
}
