/**
 * Tracks whether a clip has been heard in full.
 *
 * A pass counts only when the audio reaches its natural end without any
 * seek in between; seeking spoils the running pass but never revokes a
 * completion already earned. Used directly for training clips; trials
 * keep per-scale flags with the same pass rules.
 */
export class PlaybackGate {
  private dirty = false;
  private completed = false;

  get complete(): boolean {
    return this.completed;
  }

  /** A fresh start from the beginning of the clip. */
  beginPass(): void {
    this.dirty = false;
  }

  noteSeek(): void {
    this.dirty = true;
  }

  noteEnded(): void {
    if (!this.dirty) {
      this.completed = true;
    }
    this.dirty = false;
  }
}

/**
 * Wire a play button to an audio element so every click restarts the clip
 * as a fresh pass. The rewind we issue ourselves must not count as a
 * worker seek, so it is flagged and swallowed once.
 */
export function wirePlayback(
  audio: HTMLAudioElement,
  button: HTMLButtonElement,
  sink: { beginPass(): void; noteSeek(): void; noteEnded(): void },
): void {
  let suppressSeek = false;
  button.addEventListener("click", () => {
    audio.pause();
    sink.beginPass();
    if (audio.currentTime !== 0) {
      suppressSeek = true;
      audio.currentTime = 0;
    }
    const pending = audio.play();
    if (pending !== undefined) {
      pending.catch(() => undefined);
    }
  });
  audio.addEventListener("seeking", () => {
    if (suppressSeek) {
      suppressSeek = false;
      return;
    }
    sink.noteSeek();
  });
  audio.addEventListener("ended", () => {
    sink.noteEnded();
  });
}
