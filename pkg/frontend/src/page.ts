import { buildSubmission, submissionToVotesCsv } from "./payload.js";
import { PlaybackGate, wirePlayback } from "./playback.js";
import { QualificationSection, SectionFlow } from "./sections.js";
import { SCALE_ANCHORS } from "./scaleOrder.js";
import { TrialState } from "./trial.js";
import type { PageData, ScaleId, SectionId, Submission } from "./types.js";

export interface PageOptions {
  /** Timestamp source, injectable for deterministic tests. */
  clock?: () => string;
  onSubmit?: (submission: Submission) => void;
}

export interface PageController {
  readonly trials: readonly TrialState[];
  readonly flow: SectionFlow;
  /** The payload captured by the submit click, if any. */
  submission(): Submission | null;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  if (text !== "") {
    node.textContent = text;
  }
  return node;
}

/**
 * Render the whole worker page into `root` and wire its behavior.
 *
 * Sections appear one at a time in the fixed order, only those required.
 * Each trial presents its scales in the seeded order with the overall
 * scale last; a scale's radios unlock only after a full, unseeked
 * playback, and the submit button stays disabled until every trial is
 * finished. Submitting serializes the payload into the hidden
 * submission_payload field.
 */
export function renderTaskPage(
  root: HTMLElement,
  data: PageData,
  options: PageOptions = {},
): PageController {
  const doc = root.ownerDocument;
  const clock = options.clock ?? (() => new Date().toISOString());
  const flow = new SectionFlow(data.required_sections);

  const trials = data.task.stimuli.map(
    (stimulus, index) =>
      new TrialState(stimulus.clip_id, data.task.scale_order_seed, index, clock),
  );

  root.textContent = "";
  const page = el(doc, "div", { class: "task-page" });
  root.appendChild(page);

  const sections = new Map<SectionId, HTMLElement>();
  const status = el(doc, "p", { "data-role": "status" });
  const payloadField = el(doc, "textarea", {
    "data-role": "payload",
    name: "submission_payload",
    readonly: "readonly",
    hidden: "hidden",
  });
  const submitButton = el(doc, "button", { "data-role": "submit", type: "button" }, "Submit");
  submitButton.disabled = true;

  let submitted: Submission | null = null;
  let qualification: QualificationSection | null = null;
  const trialBlocks = new Map<TrialState, HTMLElement>();

  function showCurrentSection(): void {
    for (const [id, node] of sections) {
      node.hidden = id !== flow.current;
    }
    if (submitted !== null) {
      status.textContent = "Submitted. Thank you!";
    } else if (flow.qualificationFailed) {
      status.textContent =
        "You did not pass the listening qualification; the rating task is unavailable. " +
        "Please submit so your answers are recorded.";
    } else {
      status.textContent = `Section: ${flow.current ?? "done"}`;
    }
  }

  function submitReady(): boolean {
    if (submitted !== null) {
      return false;
    }
    if (flow.qualificationFailed) {
      return true;
    }
    return flow.current === "ratings" && trials.every((trial) => trial.complete);
  }

  function refresh(): void {
    for (const trial of trials) {
      const container = trialBlocks.get(trial);
      if (!container) {
        continue;
      }
      for (const input of container.querySelectorAll<HTMLInputElement>("input[type=radio]")) {
        const scale = input.dataset.scale as ScaleId;
        input.disabled = submitted !== null || !trial.ratingEnabled(scale);
      }
      const note = container.querySelector<HTMLElement>("[data-role=unanswerable]");
      if (note) {
        note.hidden = !trial.unanswerable;
      }
    }
    submitButton.disabled = !submitReady();
  }

  function buildQualificationSection(): HTMLElement {
    const items = data.qualification;
    if (!items) {
      throw new Error("qualification section required but no items embedded");
    }
    qualification = new QualificationSection(items.triplets, items.pairs);
    const section = el(doc, "section", { "data-section": "qualification" });
    section.appendChild(el(doc, "h2", {}, "Listening check"));

    for (const item of items.triplets) {
      const row = el(doc, "div", { class: "triplet", "data-item": item.item_id });
      row.appendChild(el(doc, "audio", { src: item.url, controls: "controls" }));
      const input = el(doc, "input", {
        type: "text",
        inputmode: "numeric",
        maxlength: "3",
        placeholder: "three digits",
        "data-item": item.item_id,
      });
      input.addEventListener("input", () => {
        qualification?.answerTriplet(item.item_id, input.value);
        refreshQualification();
      });
      row.appendChild(input);
      section.appendChild(row);
    }

    for (const item of items.pairs) {
      const row = el(doc, "div", { class: "pair", "data-item": item.item_id });
      row.appendChild(el(doc, "audio", { src: item.url_a, controls: "controls" }));
      row.appendChild(el(doc, "audio", { src: item.url_b, controls: "controls" }));
      for (const choice of ["a", "b"] as const) {
        const label = el(doc, "label", {}, `Clip ${choice.toUpperCase()} is cleaner`);
        const radio = el(doc, "input", {
          type: "radio",
          name: `pair-${item.item_id}`,
          value: choice,
        });
        radio.addEventListener("change", () => {
          qualification?.answerPair(item.item_id, choice);
          refreshQualification();
        });
        label.prepend(radio);
        row.appendChild(label);
      }
      section.appendChild(row);
    }

    const cont = el(doc, "button", { "data-role": "continue", type: "button" }, "Continue");
    cont.disabled = true;
    cont.addEventListener("click", () => {
      if (!qualification || !qualification.complete) {
        return;
      }
      flow.completeCurrent({ passed: qualification.passed });
      showCurrentSection();
      refresh();
    });
    section.appendChild(cont);

    function refreshQualification(): void {
      cont.disabled = !(qualification?.complete ?? false);
    }

    return section;
  }

  function buildSetupSection(): HTMLElement {
    const section = el(doc, "section", { "data-section": "setup" });
    section.appendChild(el(doc, "h2", {}, "Setup"));
    const confirmations = [
      "I am wearing both headphones",
      "I am in a quiet room",
      "I have set a comfortable volume and will not change it",
    ];
    const boxes: HTMLInputElement[] = [];
    for (const [index, textLabel] of confirmations.entries()) {
      const label = el(doc, "label", {}, textLabel);
      const box = el(doc, "input", { type: "checkbox", "data-setup": String(index) });
      label.prepend(box);
      boxes.push(box);
      section.appendChild(label);
    }
    const cont = el(doc, "button", { "data-role": "continue", type: "button" }, "Continue");
    cont.disabled = true;
    for (const box of boxes) {
      box.addEventListener("change", () => {
        cont.disabled = !boxes.every((b) => b.checked);
      });
    }
    cont.addEventListener("click", () => {
      if (boxes.every((b) => b.checked)) {
        flow.completeCurrent();
        showCurrentSection();
        refresh();
      }
    });
    section.appendChild(cont);
    return section;
  }

  function buildTrainingSection(): HTMLElement {
    const clips = data.training ?? [];
    if (clips.length === 0) {
      throw new Error("training section required but no training clips embedded");
    }
    const section = el(doc, "section", { "data-section": "training" });
    section.appendChild(el(doc, "h2", {}, "Training"));
    section.appendChild(
      el(doc, "p", {}, "Listen to each example in full to anchor the rating scales."),
    );
    const gates = clips.map(() => new PlaybackGate());
    const cont = el(doc, "button", { "data-role": "continue", type: "button" }, "Continue");
    cont.disabled = true;
    for (const [index, clip] of clips.entries()) {
      const row = el(doc, "div", { class: "training-clip", "data-clip": clip.clip_id });
      const audio = el(doc, "audio", { src: clip.url, preload: "auto" });
      const play = el(doc, "button", { "data-role": "play", type: "button" }, "Play");
      const gate = gates[index];
      wirePlayback(audio, play, {
        beginPass: () => gate.beginPass(),
        noteSeek: () => gate.noteSeek(),
        noteEnded: () => {
          gate.noteEnded();
          cont.disabled = !gates.every((g) => g.complete);
        },
      });
      row.appendChild(audio);
      row.appendChild(play);
      section.appendChild(row);
    }
    cont.addEventListener("click", () => {
      if (gates.every((g) => g.complete)) {
        flow.completeCurrent();
        showCurrentSection();
        refresh();
      }
    });
    section.appendChild(cont);
    return section;
  }

  function buildTrialBlock(trial: TrialState, index: number): HTMLElement {
    const block = el(doc, "div", { class: "trial", "data-clip": trial.clipId });
    trialBlocks.set(trial, block);
    block.appendChild(el(doc, "h3", {}, `Clip ${index + 1} of ${trials.length}`));

    const audio = el(doc, "audio", {
      src: data.task.stimuli[index].url,
      preload: "auto",
      "data-role": "trial-audio",
    });
    const play = el(doc, "button", { "data-role": "play", type: "button" }, "Play");
    wirePlayback(audio, play, {
      beginPass: () => trial.beginPass(),
      noteSeek: () => trial.noteSeek(),
      noteEnded: () => {
        trial.noteEnded();
        refresh();
      },
    });
    audio.addEventListener("error", () => {
      trial.markUnanswerable();
      refresh();
    });
    block.appendChild(audio);
    block.appendChild(play);

    const note = el(
      doc,
      "p",
      { "data-role": "unanswerable" },
      "This clip could not be loaded; it will be reported as unanswerable.",
    );
    note.hidden = true;
    block.appendChild(note);

    for (const scale of trial.sequence) {
      const fieldset = el(doc, "fieldset", { "data-scale": scale });
      const anchors = SCALE_ANCHORS[scale];
      fieldset.appendChild(el(doc, "legend", {}, anchors.prompt));
      for (const [labelIndex, labelText] of anchors.labels.entries()) {
        const score = labelIndex + 1;
        const label = el(doc, "label", {}, labelText);
        const radio = el(doc, "input", {
          type: "radio",
          name: `trial${index}-${scale}`,
          value: String(score),
          "data-scale": scale,
        });
        radio.disabled = true;
        radio.addEventListener("change", () => {
          trial.setScore(scale, score);
          refresh();
        });
        label.prepend(radio);
        fieldset.appendChild(label);
      }
      block.appendChild(fieldset);
    }
    return block;
  }

  function buildRatingsSection(): HTMLElement {
    const section = el(doc, "section", { "data-section": "ratings" });
    section.appendChild(el(doc, "h2", {}, "Rate each clip"));
    for (const [index, trial] of trials.entries()) {
      section.appendChild(buildTrialBlock(trial, index));
    }
    return section;
  }

  const builders: Record<SectionId, () => HTMLElement> = {
    qualification: buildQualificationSection,
    setup: buildSetupSection,
    training: buildTrainingSection,
    ratings: buildRatingsSection,
  };
  for (const id of ["qualification", "setup", "training", "ratings"] as const) {
    if (id === "ratings" || data.required_sections.includes(id)) {
      const node = builders[id]();
      sections.set(id, node);
      page.appendChild(node);
    }
  }

  submitButton.addEventListener("click", () => {
    if (!submitReady()) {
      return;
    }
    const failed = flow.qualificationFailed;
    const answeredTrials = failed ? [] : trials;
    const submission = buildSubmission(
      data.worker_id,
      data.task.task_id,
      answeredTrials,
      qualification ? qualification.answers() : { triplets: [], pairs: [] },
      { qualificationFailed: failed },
    );
    submitted = submission;
    payloadField.value = JSON.stringify(submission, null, 2);
    if (!failed) {
      flow.completeCurrent();
    }
    showCurrentSection();
    refresh();
    options.onSubmit?.(submission);
  });

  page.appendChild(status);
  page.appendChild(submitButton);
  page.appendChild(payloadField);

  showCurrentSection();
  refresh();

  return {
    trials,
    flow,
    submission: () => submitted,
  };
}

/** Entry point for the generated page: reads the embedded task JSON. */
export function bootstrap(doc: Document = document): PageController {
  const holder = doc.getElementById("task-data");
  if (holder === null) {
    throw new Error("missing #task-data element");
  }
  const root = doc.getElementById("app");
  if (root === null) {
    throw new Error("missing #app container");
  }
  const data = JSON.parse(holder.textContent ?? "null") as PageData | null;
  if (data === null) {
    throw new Error("empty task data");
  }
  return renderTaskPage(root, data);
}

export { submissionToVotesCsv };
