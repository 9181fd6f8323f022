import { describe, expect, it } from "vitest";

import { TrialState } from "../src/trial.js";

const fixedClock = () => "2026-08-16T12:00:00Z";

function makeTrial(seed = 0, index = 0): TrialState {
  return new TrialState("clip-a", seed, index, fixedClock);
}

/** Drive one full clean listen. */
function listen(trial: TrialState): void {
  trial.beginPass();
  trial.noteEnded();
}

describe("TrialState", () => {
  it("starts on the first scale with every rating locked", () => {
    const trial = makeTrial();
    expect(trial.scaleOrder).toBe("sig_first");
    expect(trial.currentScale).toBe("sig");
    expect(trial.currentSlot).toBe("first");
    for (const scale of ["sig", "bak", "ovrl"] as const) {
      expect(trial.ratingEnabled(scale)).toBe(false);
    }
  });

  it("derives the scale sequence from the seed parity", () => {
    expect(makeTrial(0, 1).sequence).toEqual(["bak", "sig", "ovrl"]);
    expect(makeTrial(5, 1).sequence).toEqual(["sig", "bak", "ovrl"]);
  });

  it("unlocks only the current scale after a full playback", () => {
    const trial = makeTrial();
    listen(trial);
    expect(trial.ratingEnabled("sig")).toBe(true);
    expect(trial.ratingEnabled("bak")).toBe(false);
    expect(trial.ratingEnabled("ovrl")).toBe(false);
  });

  it("rejects scores before the playback completes", () => {
    const trial = makeTrial();
    expect(() => trial.setScore("sig", 3)).toThrow(/not open for rating/);
  });

  it("does not credit a playback spoiled by seeking", () => {
    const trial = makeTrial();
    trial.beginPass();
    trial.noteSeek();
    trial.noteEnded();
    expect(trial.ratingEnabled("sig")).toBe(false);
    listen(trial);
    expect(trial.ratingEnabled("sig")).toBe(true);
  });

  it("clears the seek taint at each fresh pass", () => {
    const trial = makeTrial();
    trial.beginPass();
    trial.noteSeek();
    trial.beginPass();
    trial.noteEnded();
    expect(trial.ratingEnabled("sig")).toBe(true);
  });

  it("requires a new playback for each scale", () => {
    const trial = makeTrial();
    listen(trial);
    trial.setScore("sig", 4);
    expect(trial.currentScale).toBe("bak");
    expect(trial.currentSlot).toBe("second");
    expect(trial.ratingEnabled("bak")).toBe(false);
    listen(trial);
    expect(trial.ratingEnabled("bak")).toBe(true);
  });

  it("never presents the overall scale before both others are answered", () => {
    const trial = makeTrial();
    listen(trial);
    expect(trial.currentScale).not.toBe("ovrl");
    trial.setScore("sig", 4);
    listen(trial);
    expect(trial.currentScale).toBe("bak");
    expect(trial.ratingEnabled("ovrl")).toBe(false);
    trial.setScore("bak", 2);
    expect(trial.currentScale).toBe("ovrl");
    expect(trial.currentSlot).toBe("overall");
    expect(trial.ratingEnabled("ovrl")).toBe(false);
    listen(trial);
    expect(trial.ratingEnabled("ovrl")).toBe(true);
  });

  it("freezes a scale once answered", () => {
    const trial = makeTrial();
    listen(trial);
    trial.setScore("sig", 4);
    expect(() => trial.setScore("sig", 5)).toThrow(/not open/);
    expect(trial.score("sig")).toBe(4);
  });

  it("rejects out-of-range and fractional scores", () => {
    const trial = makeTrial();
    listen(trial);
    expect(() => trial.setScore("sig", 0)).toThrow(/1\.\.5/);
    expect(() => trial.setScore("sig", 6)).toThrow(/1\.\.5/);
    expect(() => trial.setScore("sig", 2.5)).toThrow(/1\.\.5/);
  });

  it("completes with three scores and three playback flags", () => {
    const trial = makeTrial();
    for (const [scale, score] of [
      ["sig", 4],
      ["bak", 3],
      ["ovrl", 5],
    ] as const) {
      expect(trial.complete).toBe(false);
      listen(trial);
      trial.setScore(scale, score);
    }
    expect(trial.complete).toBe(true);
    expect(trial.result()).toEqual({
      clip_id: "clip-a",
      scale_order: "sig_first",
      sig: 4,
      bak: 3,
      ovrl: 5,
      playback: { sig: true, bak: true, ovrl: true },
      submitted_at: "2026-08-16T12:00:00Z",
    });
  });

  it("refuses to emit a result while incomplete", () => {
    const trial = makeTrial();
    expect(() => trial.result()).toThrow(/not complete/);
  });

  it("reports a load failure as an unanswerable trial", () => {
    const trial = makeTrial();
    trial.markUnanswerable();
    expect(trial.unanswerable).toBe(true);
    expect(trial.currentScale).toBeNull();
    expect(trial.complete).toBe(true);
    expect(() => trial.setScore("sig", 3)).toThrow(/not open/);
    const result = trial.result();
    expect(result.unanswerable).toBe(true);
    expect(result.sig).toBeNull();
    expect(result.bak).toBeNull();
    expect(result.ovrl).toBeNull();
  });
});
