import { Series, TraceRow } from "./types.js";
import { methodOrder } from "./csv.js";

/** Linearly interpolated quantile of an unsorted sample. */
export function quantile(values: number[], q: number): number {
  if (values.length === 0) {
    throw new Error("quantile of an empty sample");
  }
  const sorted = [...values].sort((a, b) => a - b);
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

export type ErrorColumn = "rel_err_lstsq" | "rel_err_ridge";

function pick(row: TraceRow, column: ErrorColumn): number | null {
  return column === "rel_err_lstsq" ? row.relErrLstsq : row.relErrRidge;
}

/**
 * Collapse per-trial traces into one median series per method, with the
 * interquartile band. Methods missing the requested column entirely are
 * dropped; mixed presence within a method is an input error.
 */
export function aggregateSeries(
  rows: TraceRow[],
  column: ErrorColumn,
  labels?: Record<string, string>,
): Series[] {
  const series: Series[] = [];
  for (const method of methodOrder(rows)) {
    const mine = rows.filter((r) => r.method === method);
    const values = new Map<number, number[]>();
    let missing = 0;
    for (const row of mine) {
      const v = pick(row, column);
      if (v === null) {
        missing += 1;
        continue;
      }
      const bucket = values.get(row.rowsAccessed);
      if (bucket === undefined) {
        values.set(row.rowsAccessed, [v]);
      } else {
        bucket.push(v);
      }
    }
    if (values.size === 0) continue; // method has no data in this column
    if (missing > 0) {
      throw new Error(`method ${method}: column ${column} only partially present`);
    }
    const xs = [...values.keys()].sort((a, b) => a - b);
    series.push({
      method,
      label: labels?.[method] ?? method,
      points: xs.map((x) => {
        const sample = values.get(x)!;
        return {
          x,
          median: quantile(sample, 0.5),
          q25: quantile(sample, 0.25),
          q75: quantile(sample, 0.75),
        };
      }),
    });
  }
  if (series.length === 0) {
    throw new Error(`no method carries column ${column}`);
  }
  return series;
}
