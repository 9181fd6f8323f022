import type { QualificationAnswers, Submission, TrialResult } from "./types.js";

/** Column layout of the votes CSV the screening pipeline consumes. */
export const VOTES_CSV_HEADER = [
  "worker_id",
  "task_id",
  "clip_id",
  "scale_order",
  "sig",
  "bak",
  "ovrl",
  "playback_sig",
  "playback_bak",
  "playback_ovrl",
  "submitted_at",
] as const;

export function buildSubmission(
  workerId: string,
  taskId: string,
  trials: { result(): TrialResult }[],
  qualification: QualificationAnswers = { triplets: [], pairs: [] },
  options: { qualificationFailed?: boolean } = {},
): Submission {
  const submission: Submission = {
    worker_id: workerId,
    task_id: taskId,
    trials: trials.map((trial) => trial.result()),
    qualification,
  };
  if (options.qualificationFailed) {
    submission.qualification_failed = true;
  }
  return submission;
}

function csvField(value: string): string {
  if (/[",\r\n]/.test(value)) {
    return '"' + value.replace(/"/g, '""') + '"';
  }
  return value;
}

/**
 * Render the submission as the votes CSV, one row per answered trial.
 *
 * Field for field the layout matches VOTES_CSV_HEADER, booleans written
 * as lowercase true/false and rows terminated with CRLF, so the file is
 * byte-compatible with the screening reader. Unanswerable trials carry no
 * scores and are skipped; they stay visible in the JSON payload.
 */
export function submissionToVotesCsv(submission: Submission): string {
  const lines = [VOTES_CSV_HEADER.join(",")];
  for (const trial of submission.trials) {
    if (trial.unanswerable || trial.sig === null || trial.bak === null || trial.ovrl === null) {
      continue;
    }
    lines.push(
      [
        csvField(submission.worker_id),
        csvField(submission.task_id),
        csvField(trial.clip_id),
        csvField(trial.scale_order),
        String(trial.sig),
        String(trial.bak),
        String(trial.ovrl),
        String(trial.playback.sig),
        String(trial.playback.bak),
        String(trial.playback.ovrl),
        csvField(trial.submitted_at),
      ].join(","),
    );
  }
  return lines.join("\r\n") + "\r\n";
}

function splitCsvLine(line: string): string[] {
  const fields: string[] = [];
  let current = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          current += '"';
          i += 1;
        } else {
          quoted = false;
        }
      } else {
        current += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      fields.push(current);
      current = "";
    } else {
      current += ch;
    }
  }
  fields.push(current);
  return fields;
}

export interface VoteRow {
  worker_id: string;
  task_id: string;
  clip_id: string;
  scale_order: string;
  sig: number;
  bak: number;
  ovrl: number;
  playback_sig: boolean;
  playback_bak: boolean;
  playback_ovrl: boolean;
  submitted_at: string;
}

/**
 * Inverse of submissionToVotesCsv, for verifying the round trip. Rejects
 * any header that is not exactly the expected column list.
 */
export function parseVotesCsv(text: string): VoteRow[] {
  const lines = text.split(/\r\n|\n/).filter((line) => line.length > 0);
  if (lines.length === 0 || lines[0] !== VOTES_CSV_HEADER.join(",")) {
    throw new Error(
      "malformed votes CSV header; expected exactly: " + VOTES_CSV_HEADER.join(","),
    );
  }
  return lines.slice(1).map((line) => {
    const fields = splitCsvLine(line);
    if (fields.length !== VOTES_CSV_HEADER.length) {
      throw new Error(`expected ${VOTES_CSV_HEADER.length} fields, got ${fields.length}`);
    }
    const [worker, task, clip, order, sig, bak, ovrl, pSig, pBak, pOvrl, at] = fields;
    for (const score of [sig, bak, ovrl]) {
      if (!/^[1-5]$/.test(score)) {
        throw new Error(`score out of range: ${score}`);
      }
    }
    for (const flag of [pSig, pBak, pOvrl]) {
      if (flag !== "true" && flag !== "false") {
        throw new Error(`malformed playback flag: ${flag}`);
      }
    }
    return {
      worker_id: worker,
      task_id: task,
      clip_id: clip,
      scale_order: order,
      sig: Number(sig),
      bak: Number(bak),
      ovrl: Number(ovrl),
      playback_sig: pSig === "true",
      playback_bak: pBak === "true",
      playback_ovrl: pOvrl === "true",
      submitted_at: at,
    };
  });
}
