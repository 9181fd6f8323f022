// Shared shapes for the rating page and its submission payload.

export type ScaleId = "sig" | "bak" | "ovrl";

export type ScaleOrder = "sig_first" | "bak_first";

/** Position of a scale within one trial's presentation sequence. */
export type ScaleSlot = "first" | "second" | "overall";

export type SectionId = "qualification" | "setup" | "training" | "ratings";

export interface TaskStimulus {
  clip_id: string;
  url: string;
}

/** One hearing-test item: the worker transcribes three spoken digits. */
export interface DigitTripletItem {
  item_id: string;
  url: string;
  /** The three digits actually spoken, used to judge the transcription. */
  digits: string;
}

/** One environment-test item: the worker picks the cleaner of two clips. */
export interface ComparisonPairItem {
  item_id: string;
  url_a: string;
  url_b: string;
  expected_choice: "a" | "b";
}

export interface QualificationData {
  triplets: DigitTripletItem[];
  pairs: ComparisonPairItem[];
}

/** The JSON blob a generated task page embeds. */
export interface PageData {
  worker_id: string;
  task: {
    task_id: string;
    scale_order_seed: number;
    stimuli: TaskStimulus[];
  };
  required_sections: SectionId[];
  qualification?: QualificationData;
  training?: TaskStimulus[];
}

export interface TrialResult {
  clip_id: string;
  scale_order: ScaleOrder;
  sig: number | null;
  bak: number | null;
  ovrl: number | null;
  playback: { sig: boolean; bak: boolean; ovrl: boolean };
  submitted_at: string;
  /** Present and true only when the clip failed to load. */
  unanswerable?: boolean;
}

export interface QualificationAnswers {
  /** [spoken digits, transcription typed by the worker] per item, verbatim. */
  triplets: [string, string][];
  /** Whether the worker picked the expected clip, per pair. */
  pairs: boolean[];
}

export interface Submission {
  worker_id: string;
  task_id: string;
  trials: TrialResult[];
  qualification: QualificationAnswers;
  qualification_failed?: boolean;
}
