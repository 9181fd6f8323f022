import type {
  ComparisonPairItem,
  DigitTripletItem,
  QualificationAnswers,
  SectionId,
} from "./types.js";

export const SECTION_ORDER: readonly SectionId[] = [
  "qualification",
  "setup",
  "training",
  "ratings",
];

// Mirrors the screening thresholds on the collection side.
export const HEARING_PASS_FRACTION = 0.8;
export const ENVIRONMENT_PASS_FRACTION = 0.8;

/**
 * Sections to present, in the fixed order with the ones not required
 * skipped. Ratings is the point of the page and is always included.
 */
export function sectionFlow(required: Iterable<SectionId>): SectionId[] {
  const wanted = new Set<SectionId>(required);
  wanted.add("ratings");
  for (const section of wanted) {
    if (!SECTION_ORDER.includes(section)) {
      throw new Error(`unknown section ${section}`);
    }
  }
  return SECTION_ORDER.filter((section) => wanted.has(section));
}

/** Walks the section sequence; a failed qualification ends the flow. */
export class SectionFlow {
  private readonly pending: SectionId[];
  private failedQualification = false;

  constructor(required: Iterable<SectionId>) {
    this.pending = sectionFlow(required);
  }

  get current(): SectionId | null {
    return this.pending.length > 0 ? this.pending[0] : null;
  }

  get qualificationFailed(): boolean {
    return this.failedQualification;
  }

  completeCurrent(options: { passed?: boolean } = {}): SectionId | null {
    const finished = this.pending.shift();
    if (finished === undefined) {
      throw new Error("no section in progress");
    }
    if (finished === "qualification" && options.passed === false) {
      this.failedQualification = true;
      this.pending.length = 0;
    }
    return this.current;
  }
}

const TRIPLET_PATTERN = /^[0-9]{3}$/;

/**
 * Collects the hearing and environment test answers.
 *
 * Transcriptions are stored verbatim; judging compares them to the spoken
 * digits with plain string equality, all digits or nothing.
 */
export class QualificationSection {
  private readonly tripletAnswers = new Map<string, string>();
  private readonly pairAnswers = new Map<string, "a" | "b">();

  constructor(
    readonly triplets: readonly DigitTripletItem[],
    readonly pairs: readonly ComparisonPairItem[],
  ) {}

  answerTriplet(itemId: string, text: string): void {
    if (!this.triplets.some((item) => item.item_id === itemId)) {
      throw new Error(`unknown triplet item ${itemId}`);
    }
    this.tripletAnswers.set(itemId, text);
  }

  answerPair(itemId: string, choice: "a" | "b"): void {
    if (!this.pairs.some((item) => item.item_id === itemId)) {
      throw new Error(`unknown pair item ${itemId}`);
    }
    this.pairAnswers.set(itemId, choice);
  }

  /** Every item answered, transcriptions well formed (three digits). */
  get complete(): boolean {
    return (
      this.triplets.every((item) =>
        TRIPLET_PATTERN.test(this.tripletAnswers.get(item.item_id) ?? ""),
      ) && this.pairs.every((item) => this.pairAnswers.has(item.item_id))
    );
  }

  hearingFraction(): number {
    if (this.triplets.length === 0) {
      return 1.0;
    }
    let correct = 0;
    for (const item of this.triplets) {
      if (this.tripletAnswers.get(item.item_id) === item.digits) {
        correct += 1;
      }
    }
    return correct / this.triplets.length;
  }

  environmentFraction(): number {
    if (this.pairs.length === 0) {
      return 1.0;
    }
    let correct = 0;
    for (const item of this.pairs) {
      if (this.pairAnswers.get(item.item_id) === item.expected_choice) {
        correct += 1;
      }
    }
    return correct / this.pairs.length;
  }

  get passed(): boolean {
    return (
      this.hearingFraction() >= HEARING_PASS_FRACTION &&
      this.environmentFraction() >= ENVIRONMENT_PASS_FRACTION
    );
  }

  /** Answers echoed verbatim, paired with what was actually spoken. */
  answers(): QualificationAnswers {
    return {
      triplets: this.triplets.map((item) => [
        item.digits,
        this.tripletAnswers.get(item.item_id) ?? "",
      ]),
      pairs: this.pairs.map(
        (item) => this.pairAnswers.get(item.item_id) === item.expected_choice,
      ),
    };
  }
}
