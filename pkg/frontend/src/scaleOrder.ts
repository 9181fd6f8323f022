import type { ScaleId, ScaleOrder } from "./types.js";

export const SCALE_ORDER_SIG_FIRST: ScaleOrder = "sig_first";
export const SCALE_ORDER_BAK_FIRST: ScaleOrder = "bak_first";

/**
 * Which of the first two scales leads for a given trial.
 *
 * Even parity of (task seed + clip index) puts the speech-signal scale
 * first, odd parity the background scale. The overall scale always comes
 * last. Deterministic, so the server can replay the order from the plan.
 */
export function scaleOrderFor(scaleOrderSeed: number, clipIndex: number): ScaleOrder {
  if (!Number.isInteger(scaleOrderSeed) || scaleOrderSeed < 0) {
    throw new Error(`scale order seed must be a non-negative integer, got ${scaleOrderSeed}`);
  }
  if (!Number.isInteger(clipIndex) || clipIndex < 0) {
    throw new Error(`clip index must be a non-negative integer, got ${clipIndex}`);
  }
  return (scaleOrderSeed + clipIndex) % 2 === 0 ? SCALE_ORDER_SIG_FIRST : SCALE_ORDER_BAK_FIRST;
}

/** Presentation sequence for an order; the overall scale is always last. */
export function scaleSequence(order: ScaleOrder): readonly [ScaleId, ScaleId, ScaleId] {
  return order === SCALE_ORDER_SIG_FIRST ? ["sig", "bak", "ovrl"] : ["bak", "sig", "ovrl"];
}

export interface ScaleAnchors {
  prompt: string;
  /** Category labels indexed by score - 1. */
  labels: readonly [string, string, string, string, string];
}

export const SCALE_ANCHORS: Record<ScaleId, ScaleAnchors> = {
  sig: {
    prompt: "Attending only to the speech signal, select the category which best describes it.",
    labels: [
      "1 - Very distorted",
      "2 - Fairly distorted",
      "3 - Somewhat distorted",
      "4 - Slightly distorted",
      "5 - Not distorted",
    ],
  },
  bak: {
    prompt: "Attending only to the background, select the category which best describes it.",
    labels: [
      "1 - Very intrusive",
      "2 - Somewhat intrusive",
      "3 - Noticeable but not intrusive",
      "4 - Slightly noticeable",
      "5 - Not noticeable",
    ],
  },
  ovrl: {
    prompt: "Select the category which best describes the overall quality of this sample.",
    labels: ["1 - Bad", "2 - Poor", "3 - Fair", "4 - Good", "5 - Excellent"],
  },
};
