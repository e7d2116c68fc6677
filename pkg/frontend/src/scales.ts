/** Axis scales and tick generation. All outputs are pure in their inputs. */

export interface Scale {
  toPixel(value: number): number;
  ticks: number[];
  kind: "log" | "linear";
}

/** Fixed-notation number used inside SVG path data (deterministic). */
export function px(value: number): string {
  const s = value.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

/** Human tick label: powers of ten as 10^k, otherwise compact decimal. */
export function tickLabel(value: number, kind: "log" | "linear"): string {
  if (kind === "log") {
    const k = Math.round(Math.log10(value));
    return `1e${k}`;
  }
  const s = value.toPrecision(3);
  return String(Number(s));
}

export function logScale(min: number, max: number, pixelLo: number, pixelHi: number): Scale {
  if (!(min > 0) || !(max > 0)) {
    throw new Error("log scale needs positive bounds");
  }
  if (min === max) {
    min = min / 10;
    max = max * 10;
  }
  const lmin = Math.log10(min);
  const lmax = Math.log10(max);
  const ticks: number[] = [];
  for (let k = Math.ceil(lmin - 1e-9); k <= Math.floor(lmax + 1e-9); k++) {
    ticks.push(Math.pow(10, k));
  }
  return {
    kind: "log",
    ticks,
    toPixel(value: number): number {
      const f = (Math.log10(value) - lmin) / (lmax - lmin);
      return pixelLo + f * (pixelHi - pixelLo);
    },
  };
}

export function linearScale(min: number, max: number, pixelLo: number, pixelHi: number): Scale {
  if (min === max) {
    min -= 1;
    max += 1;
  }
  const span = max - min;
  const rawStep = span / 5;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return {
    kind: "linear",
    ticks,
    toPixel(value: number): number {
      const f = (value - min) / span;
      return pixelLo + f * (pixelHi - pixelLo);
    },
  };
}
