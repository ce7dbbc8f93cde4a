/** Annotation flow state, kept free of DOM so it is directly testable.
 *
 * `TaskState` models one task screen: the chosen option, the selected
 * influential words, and the playback speeds used while listening.
 * `SessionController` walks the task sequence through the service API.
 */

import type { ApiClient } from "./api.js";
import type {
  Choice,
  StoredRecord,
  SubmitPayload,
  TaskView,
} from "./types.js";

function sameSet(a: ReadonlySet<number>, b: readonly number[]): boolean {
  return a.size === b.length && b.every((x) => a.has(x));
}

export function splitWords(transcript: string): string[] {
  return transcript.split(/\s+/).filter((w) => w.length > 0);
}

export class TaskState {
  choice: Choice | null;
  private readonly selectedWords: Set<number>;
  private readonly speedLog: number[] = [];

  constructor(
    readonly view: TaskView,
    readonly stored: StoredRecord | null = null,
  ) {
    // Revisited tasks come back pre-filled with the saved judgment.
    this.choice = stored?.choice ?? null;
    this.selectedWords = new Set(stored?.influential_words ?? []);
  }

  /** Which transcript the word-selection panel applies to, if any. */
  get wordPanelSide(): "a" | "b" | null {
    if (this.choice === "prefer_a") return "a";
    if (this.choice === "prefer_b") return "b";
    return null;
  }

  /** Words of the transcript the panel currently targets. */
  get panelWords(): string[] {
    const side = this.wordPanelSide;
    if (side === null) return [];
    return splitWords(
      side === "a" ? this.view.transcript_a : this.view.transcript_b,
    );
  }

  selectChoice(choice: Choice): void {
    if (choice === this.choice) return;
    this.choice = choice;
    // Word indices are only meaningful relative to the transcript they
    // were picked on, so switching options resets them — back to the
    // saved selection when returning to the saved choice, empty otherwise.
    this.selectedWords.clear();
    if (this.stored && this.stored.choice === choice) {
      for (const index of this.stored.influential_words) {
        this.selectedWords.add(index);
      }
    }
  }

  toggleWord(index: number): void {
    if (this.wordPanelSide === null) return;
    if (index < 0 || index >= this.panelWords.length) return;
    if (this.selectedWords.has(index)) {
      this.selectedWords.delete(index);
    } else {
      this.selectedWords.add(index);
    }
  }

  get words(): number[] {
    return [...this.selectedWords].sort((a, b) => a - b);
  }

  isWordSelected(index: number): boolean {
    return this.selectedWords.has(index);
  }

  /** Record a playback speed the annotator listened at. */
  logSpeed(speed: number): void {
    if (this.speedLog[this.speedLog.length - 1] !== speed) {
      this.speedLog.push(speed);
    }
  }

  get speeds(): number[] {
    return [...this.speedLog];
  }

  /** True once the current selection differs from what the service has. */
  get dirty(): boolean {
    if (this.stored === null) return this.choice !== null;
    return (
      this.choice !== this.stored.choice ||
      !sameSet(this.selectedWords, this.stored.influential_words)
    );
  }

  /** Submit stays disabled until an option is chosen, and on revisits
   * until the selection actually changes. */
  get canSubmit(): boolean {
    return this.choice !== null && this.dirty;
  }

  payload(): SubmitPayload {
    if (this.choice === null || !this.canSubmit) {
      throw new Error("nothing to submit");
    }
    return {
      task_id: this.view.task_id,
      choice: this.choice,
      influential_words: this.wordPanelSide === null ? [] : this.words,
      playback_speeds: this.speeds,
    };
  }
}

export class SessionController {
  index = 0;
  total = 0;
  /** First never-submitted position; navigation is allowed in [0, cursor]. */
  cursor = 0;
  complete = false;
  current: TaskState | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  async start(): Promise<void> {
    const progress = await this.api.progress(this.sessionId);
    this.total = progress.total;
    this.cursor = progress.index;
    this.complete = progress.complete;
    if (this.complete) {
      this.current = null;
      this.index = this.total;
      return;
    }
    await this.goTo(this.cursor);
  }

  async goTo(index: number): Promise<void> {
    if (index < 0 || index > this.cursor || index >= this.total) {
      throw new Error(`index ${index} is not visitable`);
    }
    const response = await this.api.getTask(this.sessionId, index);
    this.index = index;
    this.complete = false;
    this.current = new TaskState(response.task, response.record);
  }

  get canGoBack(): boolean {
    return !this.complete && this.index > 0;
  }

  get canGoForward(): boolean {
    return !this.complete && this.index < this.cursor &&
      this.index + 1 < this.total;
  }

  async back(): Promise<void> {
    if (!this.canGoBack) return;
    await this.goTo(this.index - 1);
  }

  async forward(): Promise<void> {
    if (!this.canGoForward) return;
    await this.goTo(this.index + 1);
  }

  /** Submit the current screen, then advance (or finish). */
  async submit(): Promise<void> {
    const state = this.current;
    if (state === null) throw new Error("no active task");
    await this.api.submit(this.sessionId, state.payload());
    if (this.index === this.cursor) {
      this.cursor += 1;
    }
    const next = this.index + 1;
    if (next >= this.total) {
      this.complete = true;
      this.current = null;
      this.index = this.total;
    } else {
      await this.goTo(next);
    }
  }
}
