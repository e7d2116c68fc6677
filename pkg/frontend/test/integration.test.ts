import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { renderErrorTraces, renderPolyfit } from "../src/render.js";
import { PolyfitSidecar } from "../src/types.js";

// real trace produced by the benchmark harness (scaled-down run)
const FIXTURE_CSV = join(__dirname, "fixtures", "fig1_small.csv");
const FIXTURE_JSON = join(__dirname, "fixtures", "fig1_small.json");

const tmp = mkdtempSync(join(tmpdir(), "tark-figures-"));
afterAll(() => rmSync(tmp, { recursive: true, force: true }));

describe("figure reproduction from harness output", () => {
  it("renders a four-series convergence SVG from the benchmark CSV", () => {
    const csv = readFileSync(FIXTURE_CSV, "utf8");
    const out = renderErrorTraces(csv, "rel_err_lstsq", "convergence");
    expect(out.match(/<polyline /g)).toHaveLength(4);
    for (const m of ["RK", "TARK", "RKU", "RKA"]) {
      expect(out).toContain(`>${m}</text>`);
    }
  });

  it("renders the polynomial overlay from the sidecar", () => {
    const sidecar = JSON.parse(readFileSync(FIXTURE_JSON, "utf8")) as PolyfitSidecar;
    const out = renderPolyfit(sidecar);
    // target plus RK and TARK curves
    expect(out.match(/<polyline /g)).toHaveLength(3);
    expect(out).toContain(">target</text>");
  });

  it("produces byte-identical output across runs via the CLI", () => {
    const out1 = join(tmp, "a.svg");
    const out2 = join(tmp, "b.svg");
    expect(main(["--kind", "convergence", "--input", FIXTURE_CSV, "--out", out1])).toBe(0);
    expect(main(["--kind", "convergence", "--input", FIXTURE_CSV, "--out", out2])).toBe(0);
    expect(readFileSync(out1, "utf8")).toBe(readFileSync(out2, "utf8"));
    const poly1 = join(tmp, "p1.svg");
    const poly2 = join(tmp, "p2.svg");
    expect(main(["--kind", "polyfit", "--input", FIXTURE_JSON, "--out", poly1])).toBe(0);
    expect(main(["--kind", "polyfit", "--input", FIXTURE_JSON, "--out", poly2])).toBe(0);
    expect(readFileSync(poly1, "utf8")).toBe(readFileSync(poly2, "utf8"));
  });

  it("cli reports usage errors with exit code 2", () => {
    expect(main(["--kind", "nope", "--input", "x", "--out", "y"])).toBe(2);
    expect(main(["--input", "x"])).toBe(2);
  });

  it("cli reports missing files with exit code 1", () => {
    expect(main(["--kind", "convergence", "--input", join(tmp, "missing.csv"),
                 "--out", join(tmp, "z.svg")])).toBe(1);
  });
});
