/** Tiny deterministic SVG assembly: fixed attribute order, fixed precision. */

import { px } from "./scales.js";

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function polyline(
  points: Array<[number, number]>,
  stroke: string,
  width = 1.5,
  dash = "",
): string {
  const d = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline points="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`;
}

export function bandPath(
  upper: Array<[number, number]>,
  lower: Array<[number, number]>,
  fill: string,
): string {
  const fwd = upper.map(([x, y], i) => `${i === 0 ? "M" : "L"}${px(x)} ${px(y)}`);
  const back = [...lower].reverse().map(([x, y]) => `L${px(x)} ${px(y)}`);
  return `<path d="${fwd.join(" ")} ${back.join(" ")} Z" fill="${fill}" fill-opacity="0.15" stroke="none"/>`;
}

export function line(x1: number, y1: number, x2: number, y2: number,
                     stroke: string, width = 1): string {
  return `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function text(x: number, y: number, content: string, anchor = "middle",
                     size = 11, extra = ""): string {
  return `<text x="${px(x)}" y="${px(y)}" text-anchor="${anchor}" font-size="${size}" font-family="sans-serif"${extra}>${esc(content)}</text>`;
}

export function document(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect x="0" y="0" width="${width}" height="${height}" fill="white"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
