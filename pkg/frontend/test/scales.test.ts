import { describe, expect, it } from "vitest";

import { linearScale, logScale, px, tickLabel } from "../src/scales.js";

describe("px formatting", () => {
  it("is fixed to two decimals", () => {
    expect(px(12.345)).toBe("12.35");
    expect(px(100)).toBe("100.00");
  });

  it("never emits negative zero", () => {
    expect(px(-0.0001)).toBe("0.00");
  });
});

describe("logScale", () => {
  it("maps bounds to pixel bounds and decades to ticks", () => {
    const s = logScale(1, 1000, 0, 300);
    expect(s.toPixel(1)).toBeCloseTo(0, 9);
    expect(s.toPixel(1000)).toBeCloseTo(300, 9);
    expect(s.toPixel(10)).toBeCloseTo(100, 9);
    expect(s.ticks).toEqual([1, 10, 100, 1000]);
  });

  it("rejects nonpositive bounds", () => {
    expect(() => logScale(0, 10, 0, 100)).toThrow();
    expect(() => logScale(-1, 10, 0, 100)).toThrow();
  });

  it("labels decades compactly", () => {
    expect(tickLabel(1000, "log")).toBe("1e3");
    expect(tickLabel(0.01, "log")).toBe("1e-2");
  });
});

describe("linearScale", () => {
  it("maps endpoints and picks round ticks", () => {
    const s = linearScale(0, 10, 0, 200);
    expect(s.toPixel(0)).toBeCloseTo(0, 9);
    expect(s.toPixel(10)).toBeCloseTo(200, 9);
    expect(s.ticks).toContain(0);
    expect(s.ticks).toContain(10);
  });

  it("handles inverted pixel ranges (screen y)", () => {
    const s = linearScale(0, 1, 400, 40);
    expect(s.toPixel(0)).toBeCloseTo(400, 9);
    expect(s.toPixel(1)).toBeCloseTo(40, 9);
  });
});
