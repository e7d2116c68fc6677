import { TraceRow } from "./types.js";

export const TRACE_HEADER =
  "method,trial,rows_accessed,rel_err_lstsq,rel_err_ridge,residual_norm,wall_ns";

/**
 * Parse the benchmark trace CSV. The producer writes a fixed seven-column
 * schema with no quoting, so a straight split is exact.
 */
export function parseTraceCsv(text: string): TraceRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  if (lines[0] !== TRACE_HEADER) {
    throw new Error(
      `unexpected CSV header: got "${lines[0]}", want "${TRACE_HEADER}"`,
    );
  }
  const rows: TraceRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 7) {
      throw new Error(`line ${i + 1}: expected 7 fields, got ${parts.length}`);
    }
    const ridge = parts[4] === "" ? null : Number(parts[4]);
    const row: TraceRow = {
      method: parts[0],
      trial: Number(parts[1]),
      rowsAccessed: Number(parts[2]),
      relErrLstsq: Number(parts[3]),
      relErrRidge: ridge,
      residualNorm: Number(parts[5]),
      wallNs: Number(parts[6]),
    };
    if (
      !Number.isFinite(row.trial) ||
      !Number.isFinite(row.rowsAccessed) ||
      !Number.isFinite(row.relErrLstsq) ||
      (row.relErrRidge !== null && !Number.isFinite(row.relErrRidge))
    ) {
      throw new Error(`line ${i + 1}: non-numeric field in "${lines[i]}"`);
    }
    rows.push(row);
  }
  return rows;
}

/** Method names in first-appearance order (stable legend ordering). */
export function methodOrder(rows: TraceRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.method)) seen.push(row.method);
  }
  return seen;
}
