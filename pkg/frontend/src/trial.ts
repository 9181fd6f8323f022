import { scaleOrderFor, scaleSequence } from "./scaleOrder.js";
import type { ScaleId, ScaleOrder, ScaleSlot, TrialResult } from "./types.js";

export const SCALES: readonly ScaleId[] = ["sig", "bak", "ovrl"];

/**
 * State machine for one rating trial.
 *
 * The scales are presented one at a time in the seeded order, overall
 * always last. A scale's radios unlock only after a full playback earned
 * while that scale was pending, and a score can only be set on the scale
 * currently presented, so earlier answers are final.
 */
export class TrialState {
  readonly clipId: string;
  readonly scaleOrder: ScaleOrder;
  readonly sequence: readonly [ScaleId, ScaleId, ScaleId];

  private readonly scores = new Map<ScaleId, number>();
  private readonly playbackDone: Record<ScaleId, boolean> = {
    sig: false,
    bak: false,
    ovrl: false,
  };
  private passDirty = false;
  private unanswerableFlag = false;
  private completedAt = "";

  constructor(
    clipId: string,
    scaleOrderSeed: number,
    clipIndex: number,
    private readonly clock: () => string = () => new Date().toISOString(),
  ) {
    this.clipId = clipId;
    this.scaleOrder = scaleOrderFor(scaleOrderSeed, clipIndex);
    this.sequence = scaleSequence(this.scaleOrder);
  }

  get unanswerable(): boolean {
    return this.unanswerableFlag;
  }

  /** The scale awaiting a rating, or null when the trial is finished. */
  get currentScale(): ScaleId | null {
    if (this.unanswerableFlag) {
      return null;
    }
    for (const scale of this.sequence) {
      if (!this.scores.has(scale)) {
        return scale;
      }
    }
    return null;
  }

  get currentSlot(): ScaleSlot | null {
    const scale = this.currentScale;
    if (scale === null) {
      return null;
    }
    return (["first", "second", "overall"] as const)[this.sequence.indexOf(scale)];
  }

  playbackComplete(scale: ScaleId): boolean {
    return this.playbackDone[scale];
  }

  /** Radios stay disabled until the scale is current and freshly heard. */
  ratingEnabled(scale: ScaleId): boolean {
    return !this.unanswerableFlag && this.currentScale === scale && this.playbackDone[scale];
  }

  beginPass(): void {
    this.passDirty = false;
  }

  noteSeek(): void {
    this.passDirty = true;
  }

  /** Natural end of a clean pass credits the scale currently pending. */
  noteEnded(): void {
    const scale = this.currentScale;
    if (!this.passDirty && scale !== null) {
      this.playbackDone[scale] = true;
    }
    this.passDirty = false;
  }

  /** The clip failed to load; the trial is reported instead of rated. */
  markUnanswerable(): void {
    this.unanswerableFlag = true;
    if (this.completedAt === "") {
      this.completedAt = this.clock();
    }
  }

  setScore(scale: ScaleId, score: number): void {
    if (!this.ratingEnabled(scale)) {
      throw new Error(`scale ${scale} is not open for rating on clip ${this.clipId}`);
    }
    if (!Number.isInteger(score) || score < 1 || score > 5) {
      throw new Error(`score must be an integer in 1..5, got ${score}`);
    }
    this.scores.set(scale, score);
    if (this.currentScale === null && this.completedAt === "") {
      this.completedAt = this.clock();
    }
  }

  score(scale: ScaleId): number | null {
    return this.scores.get(scale) ?? null;
  }

  get complete(): boolean {
    return this.unanswerableFlag || SCALES.every((scale) => this.scores.has(scale));
  }

  result(): TrialResult {
    if (!this.complete) {
      throw new Error(`trial for clip ${this.clipId} is not complete`);
    }
    const out: TrialResult = {
      clip_id: this.clipId,
      scale_order: this.scaleOrder,
      sig: this.score("sig"),
      bak: this.score("bak"),
      ovrl: this.score("ovrl"),
      playback: {
        sig: this.playbackDone.sig,
        bak: this.playbackDone.bak,
        ovrl: this.playbackDone.ovrl,
      },
      submitted_at: this.completedAt,
    };
    if (this.unanswerableFlag) {
      out.unanswerable = true;
    }
    return out;
  }
}
