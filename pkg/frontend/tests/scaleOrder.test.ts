import { describe, expect, it } from "vitest";

import {
  SCALE_ANCHORS,
  scaleOrderFor,
  scaleSequence,
} from "../src/scaleOrder.js";

describe("scaleOrderFor", () => {
  it("puts the speech scale first on even parity and background first on odd", () => {
    expect(scaleOrderFor(0, 0)).toBe("sig_first");
    expect(scaleOrderFor(0, 1)).toBe("bak_first");
    expect(scaleOrderFor(1, 0)).toBe("bak_first");
    expect(scaleOrderFor(1, 1)).toBe("sig_first");
    expect(scaleOrderFor(2147483646, 0)).toBe("sig_first");
    expect(scaleOrderFor(2147483646, 3)).toBe("bak_first");
  });

  it("is a pure function of seed and clip index", () => {
    for (let seed = 0; seed < 6; seed++) {
      for (let index = 0; index < 6; index++) {
        const expected = (seed + index) % 2 === 0 ? "sig_first" : "bak_first";
        expect(scaleOrderFor(seed, index)).toBe(expected);
        expect(scaleOrderFor(seed, index)).toBe(scaleOrderFor(seed, index));
      }
    }
  });

  it("alternates between consecutive clips of the same task", () => {
    const orders = [0, 1, 2, 3].map((index) => scaleOrderFor(17, index));
    expect(orders).toEqual(["bak_first", "sig_first", "bak_first", "sig_first"]);
  });

  it("rejects negative or fractional inputs", () => {
    expect(() => scaleOrderFor(-1, 0)).toThrow(/non-negative/);
    expect(() => scaleOrderFor(0.5, 0)).toThrow(/non-negative integer/);
    expect(() => scaleOrderFor(0, -2)).toThrow(/clip index/);
    expect(() => scaleOrderFor(0, 1.5)).toThrow(/clip index/);
  });
});

describe("scaleSequence", () => {
  it("keeps the overall scale last in both orders", () => {
    expect(scaleSequence("sig_first")).toEqual(["sig", "bak", "ovrl"]);
    expect(scaleSequence("bak_first")).toEqual(["bak", "sig", "ovrl"]);
  });
});

describe("SCALE_ANCHORS", () => {
  it("spans the documented endpoints for each scale", () => {
    expect(SCALE_ANCHORS.sig.labels[0]).toBe("1 - Very distorted");
    expect(SCALE_ANCHORS.sig.labels[4]).toBe("5 - Not distorted");
    expect(SCALE_ANCHORS.bak.labels[0]).toBe("1 - Very intrusive");
    expect(SCALE_ANCHORS.bak.labels[4]).toBe("5 - Not noticeable");
    expect(SCALE_ANCHORS.ovrl.labels[0]).toBe("1 - Bad");
    expect(SCALE_ANCHORS.ovrl.labels[4]).toBe("5 - Excellent");
  });

  it("offers exactly five categories per scale", () => {
    for (const anchors of Object.values(SCALE_ANCHORS)) {
      expect(anchors.labels).toHaveLength(5);
      expect(anchors.prompt.length).toBeGreaterThan(0);
    }
  });
});
