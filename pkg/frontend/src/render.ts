import { aggregateSeries, ErrorColumn } from "./aggregate.js";
import { parseTraceCsv } from "./csv.js";
import { linearScale, logScale, tickLabel } from "./scales.js";
import * as svg from "./svg.js";
import { PlotSpec, PolyfitSidecar, Series } from "./types.js";

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { left: 64, right: 16, top: 36, bottom: 48 };

interface Frame {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

const FRAME: Frame = {
  x0: MARGIN.left,
  x1: WIDTH - MARGIN.right,
  y0: HEIGHT - MARGIN.bottom,
  y1: MARGIN.top,
};

function axes(
  xScale: ReturnType<typeof logScale>,
  yScale: ReturnType<typeof logScale>,
  xLabel: string,
  yLabel: string,
  title: string,
): string[] {
  const parts: string[] = [];
  for (const t of xScale.ticks) {
    const x = xScale.toPixel(t);
    parts.push(svg.line(x, FRAME.y0, x, FRAME.y1, "#dddddd", 0.5));
    parts.push(svg.text(x, FRAME.y0 + 16, tickLabel(t, xScale.kind)));
  }
  for (const t of yScale.ticks) {
    const y = yScale.toPixel(t);
    parts.push(svg.line(FRAME.x0, y, FRAME.x1, y, "#dddddd", 0.5));
    parts.push(svg.text(FRAME.x0 - 6, y + 3.5, tickLabel(t, yScale.kind), "end"));
  }
  parts.push(svg.line(FRAME.x0, FRAME.y0, FRAME.x1, FRAME.y0, "#000000"));
  parts.push(svg.line(FRAME.x0, FRAME.y0, FRAME.x0, FRAME.y1, "#000000"));
  parts.push(svg.text((FRAME.x0 + FRAME.x1) / 2, HEIGHT - 12, xLabel, "middle", 12));
  parts.push(
    `<g transform="rotate(-90 16 ${(FRAME.y0 + FRAME.y1) / 2})">` +
      svg.text(16, (FRAME.y0 + FRAME.y1) / 2, yLabel, "middle", 12) +
      "</g>",
  );
  parts.push(svg.text((FRAME.x0 + FRAME.x1) / 2, 20, title, "middle", 13,
                      ' font-weight="bold"'));
  return parts;
}

function legend(series: Series[]): string[] {
  const parts: string[] = [];
  series.forEach((s, i) => {
    const y = FRAME.y1 + 14 + 16 * i;
    const x = FRAME.x1 - 150;
    parts.push(svg.line(x, y - 4, x + 22, y - 4, svg.PALETTE[i % svg.PALETTE.length], 2));
    parts.push(svg.text(x + 28, y, s.label, "start"));
  });
  return parts;
}

/** Median trace per method on log-log axes with an interquartile band. */
export function renderErrorTraces(
  csvText: string,
  column: ErrorColumn,
  title: string,
  labels?: Record<string, string>,
): string {
  const rows = parseTraceCsv(csvText);
  const series = aggregateSeries(rows, column, labels);

  let floor = Infinity;
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMax = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      xMin = Math.min(xMin, p.x);
      xMax = Math.max(xMax, p.x);
      for (const v of [p.median, p.q25, p.q75]) {
        if (v > 0) {
          floor = Math.min(floor, v);
          yMax = Math.max(yMax, v);
        }
      }
    }
  }
  if (!Number.isFinite(floor)) {
    throw new Error("no positive error values to plot on log axes");
  }

  const xScale = logScale(xMin, xMax, FRAME.x0, FRAME.x1);
  const yScale = logScale(floor, yMax, FRAME.y0, FRAME.y1);
  const clamp = (v: number) => (v > 0 ? v : floor);

  const body = axes(xScale, yScale, "rows accessed", "relative error", title);
  series.forEach((s, i) => {
    const color = svg.PALETTE[i % svg.PALETTE.length];
    const upper = s.points.map(
      (p) => [xScale.toPixel(p.x), yScale.toPixel(clamp(p.q75))] as [number, number],
    );
    const lower = s.points.map(
      (p) => [xScale.toPixel(p.x), yScale.toPixel(clamp(p.q25))] as [number, number],
    );
    body.push(svg.bandPath(upper, lower, color));
    const mid = s.points.map(
      (p) => [xScale.toPixel(p.x), yScale.toPixel(clamp(p.median))] as [number, number],
    );
    body.push(svg.polyline(mid, color));
  });
  body.push(...legend(series));
  return svg.document(WIDTH, HEIGHT, body);
}

/** Computed polynomials against the target function on linear axes. */
export function renderPolyfit(
  sidecar: PolyfitSidecar,
  labels?: Record<string, string>,
): string {
  const u = sidecar.curves.u;
  if (!Array.isArray(u) || u.length === 0) {
    throw new Error("sidecar is missing the u grid");
  }
  const names = Object.keys(sidecar.curves).filter((k) => k !== "u");
  if (!names.includes("target")) {
    throw new Error("sidecar is missing the target curve");
  }
  const curveNames = ["target", ...names.filter((n) => n !== "target")];
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const name of curveNames) {
    const curve = sidecar.curves[name];
    if (curve.length !== u.length) {
      throw new Error(`curve ${name} has length ${curve.length}, want ${u.length}`);
    }
    for (const v of curve) {
      yMin = Math.min(yMin, v);
      yMax = Math.max(yMax, v);
    }
  }

  const xScale = linearScale(u[0], u[u.length - 1], FRAME.x0, FRAME.x1);
  const yScale = linearScale(yMin, yMax, FRAME.y0, FRAME.y1);
  const body = axes(xScale, yScale, "u", "value",
                    `computed polynomials (${sidecar.basis} basis)`);

  const series: Series[] = [];
  curveNames.forEach((name, i) => {
    const pts = sidecar.curves[name].map(
      (v, j) => [xScale.toPixel(u[j]), yScale.toPixel(v)] as [number, number],
    );
    if (name === "target") {
      body.push(svg.polyline(pts, "#000000", 2, "6 3"));
    } else {
      body.push(svg.polyline(pts, svg.PALETTE[(i - 1) % svg.PALETTE.length]));
    }
    series.push({
      method: name,
      label: labels?.[name] ?? name,
      points: [],
    });
  });
  body.push(...legendForNames(series));
  return svg.document(WIDTH, HEIGHT, body);
}

function legendForNames(series: Series[]): string[] {
  const parts: string[] = [];
  series.forEach((s, i) => {
    const y = FRAME.y1 + 14 + 16 * i;
    const x = FRAME.x1 - 150;
    const color = s.method === "target" ? "#000000"
      : svg.PALETTE[(i - 1) % svg.PALETTE.length];
    parts.push(svg.line(x, y - 4, x + 22, y - 4, color, 2));
    parts.push(svg.text(x + 28, y, s.label, "start"));
  });
  return parts;
}

/** Render a plot spec from already-loaded file contents. */
export function renderFromContents(spec: PlotSpec, contents: string): string {
  if (spec.kind === "convergence") {
    return renderErrorTraces(contents, "rel_err_lstsq",
                             spec.title ?? "relative error vs rows accessed",
                             spec.labels);
  }
  if (spec.kind === "ridge_compare") {
    return renderErrorTraces(contents, "rel_err_ridge",
                             spec.title ?? "error to the regularized solution",
                             spec.labels);
  }
  if (spec.kind === "polyfit") {
    const sidecar = JSON.parse(contents) as PolyfitSidecar;
    return renderPolyfit(sidecar, spec.labels);
  }
  throw new Error(`unknown plot kind ${(spec as PlotSpec).kind}`);
}
