/** One checkpoint row from the solver benchmark trace CSV. */
export interface TraceRow {
  method: string;
  trial: number;
  rowsAccessed: number;
  relErrLstsq: number;
  relErrRidge: number | null;
  residualNorm: number;
  wallNs: number;
}

/** Median trace point with interquartile band, one per (method, x). */
export interface SeriesPoint {
  x: number;
  median: number;
  q25: number;
  q75: number;
}

export interface Series {
  method: string;
  label: string;
  points: SeriesPoint[];
}

export type PlotKind = "convergence" | "polyfit" | "ridge_compare";

export interface PlotSpec {
  kind: PlotKind;
  /** Trace CSV path for convergence/ridge_compare, JSON sidecar for polyfit. */
  input: string;
  output: string;
  /** Optional method tag -> display label overrides. */
  labels?: Record<string, string>;
  title?: string;
}

/** Polynomial-overlay sidecar written by the benchmark CLI. */
export interface PolyfitSidecar {
  basis: string;
  coefficients: Record<string, number[]>;
  curves: Record<string, number[]> & { u: number[]; target: number[] };
}
