/** DOM rendering for the annotation screen.
 *
 * The layout is rebuilt per task; within a task, selection changes only
 * touch the dynamic parts so the audio element (and its playback
 * position) survives re-renders.
 */

import type { ApiClient } from "./api.js";
import type { SessionController, TaskState } from "./state.js";
import { splitWords } from "./state.js";
import type { Choice } from "./types.js";
import { PLAYBACK_SPEEDS } from "./types.js";

const OPTION_LABELS: readonly { choice: Choice; label: string }[] = [
  { choice: "prefer_a", label: "Transcript A is better" },
  { choice: "prefer_b", label: "Transcript B is better" },
  { choice: "tie_good", label: "Both are equally good" },
  { choice: "tie_poor", label: "Both are equally poor" },
];

export class AnnotationApp {
  private audio: HTMLAudioElement | null = null;
  private currentSpeed = 1.0;

  constructor(
    private readonly root: HTMLElement,
    private readonly controller: SessionController,
    private readonly api: ApiClient,
  ) {}

  async init(): Promise<void> {
    await this.controller.start();
    this.render();
    this.root.ownerDocument.addEventListener("keydown", (event) =>
      this.handleKey(event),
    );
  }

  handleKey(event: KeyboardEvent): void {
    const state = this.controller.current;
    if (state === null) return;
    const target = event.target as HTMLElement | null;
    if (target && ["INPUT", "TEXTAREA"].includes(target.tagName)) return;
    const optionIndex = "1234".indexOf(event.key);
    if (optionIndex >= 0) {
      this.selectChoice(OPTION_LABELS[optionIndex].choice);
      event.preventDefault();
    } else if (event.key === " ") {
      this.togglePlayback();
      event.preventDefault();
    }
  }

  render(): void {
    this.root.textContent = "";
    this.audio = null;
    const state = this.controller.current;
    if (this.controller.complete || state === null) {
      const done = this.el("div", "complete");
      done.textContent =
        "All tasks submitted. Thank you — you can close this window.";
      this.root.appendChild(done);
      return;
    }
    this.root.appendChild(this.buildHeader(state));
    this.root.appendChild(this.buildPlayer(state));
    this.root.appendChild(this.buildTranscripts(state));
    this.root.appendChild(this.buildOptions(state));
    this.root.appendChild(this.el("section", "word-panel"));
    this.root.appendChild(this.buildNav());
    this.refresh();
  }

  /** Re-sync the parts that depend on the current selection. */
  refresh(): void {
    const state = this.controller.current;
    if (state === null) return;
    for (const input of this.root.querySelectorAll<HTMLInputElement>(
      "input[name=choice]",
    )) {
      input.checked = input.value === state.choice;
    }
    this.rebuildWordPanel(state);
    const submit = this.root.querySelector<HTMLButtonElement>("button.submit");
    if (submit) submit.disabled = !state.canSubmit;
    const back = this.root.querySelector<HTMLButtonElement>("button.back");
    if (back) back.disabled = !this.controller.canGoBack;
    const forward = this.root.querySelector<HTMLButtonElement>(
      "button.forward",
    );
    if (forward) {
      forward.disabled = !this.controller.canGoForward;
      forward.hidden = !this.controller.canGoForward;
    }
    for (const button of this.root.querySelectorAll<HTMLButtonElement>(
      "button.speed",
    )) {
      button.classList.toggle(
        "active",
        Number(button.dataset.speed) === this.currentSpeed,
      );
    }
  }

  private el(tag: string, className?: string): HTMLElement {
    const node = this.root.ownerDocument.createElement(tag);
    if (className) node.className = className;
    return node;
  }

  private buildHeader(state: TaskState): HTMLElement {
    const header = this.el("header", "progress");
    header.textContent =
      `Task ${state.view.index + 1} of ${state.view.total}`;
    return header;
  }

  private buildPlayer(state: TaskState): HTMLElement {
    const player = this.el("section", "player");
    const audio = this.el("audio") as HTMLAudioElement;
    audio.src = this.api.audioUrl(state.view.utterance_id);
    audio.preload = "auto";
    this.audio = audio;
    this.currentSpeed = 1.0;

    const error = this.el("div", "audio-error");
    error.hidden = true;
    const message = this.el("span");
    message.textContent = "Audio failed to load.";
    const retry = this.el("button", "retry") as HTMLButtonElement;
    retry.type = "button";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => {
      error.hidden = true;
      audio.load();
    });
    error.append(message, retry);
    audio.addEventListener("error", () => {
      error.hidden = false;
    });

    const play = this.el("button", "play-toggle") as HTMLButtonElement;
    play.type = "button";
    play.textContent = "Play / Pause";
    play.addEventListener("click", () => this.togglePlayback());

    const speeds = this.el("div", "speeds");
    for (const speed of PLAYBACK_SPEEDS) {
      const button = this.el("button", "speed") as HTMLButtonElement;
      button.type = "button";
      button.dataset.speed = String(speed);
      button.textContent = `${speed}×`;
      button.addEventListener("click", () => this.setSpeed(speed));
      speeds.appendChild(button);
    }

    player.append(audio, play, speeds, error);
    return player;
  }

  private buildTranscripts(state: TaskState): HTMLElement {
    const section = this.el("section", "transcripts");
    for (const side of ["a", "b"] as const) {
      const card = this.el("article", "transcript");
      card.dataset.side = side;
      const title = this.el("h2");
      title.textContent = side === "a" ? "Transcript A" : "Transcript B";
      const body = this.el("p", "phones");
      const text =
        side === "a" ? state.view.transcript_a : state.view.transcript_b;
      splitWords(text).forEach((word, index) => {
        const span = this.el("span", "word");
        span.dataset.wordIndex = String(index);
        span.textContent = word;
        body.appendChild(span);
      });
      card.append(title, body);
      section.appendChild(card);
    }
    return section;
  }

  private buildOptions(state: TaskState): HTMLElement {
    const fieldset = this.el("fieldset", "options") as HTMLFieldSetElement;
    const legend = this.el("legend");
    legend.textContent = "Which transcript matches the audio better?";
    fieldset.appendChild(legend);
    OPTION_LABELS.forEach(({ choice, label }, position) => {
      const wrapper = this.el("label", "option");
      const input = this.el("input") as HTMLInputElement;
      input.type = "radio";
      input.name = "choice";
      input.value = choice;
      input.addEventListener("change", () => this.selectChoice(choice));
      const text = this.el("span");
      text.textContent = `${position + 1}. ${label}`;
      wrapper.append(input, text);
      fieldset.appendChild(wrapper);
    });
    return fieldset;
  }

  private rebuildWordPanel(state: TaskState): void {
    const panel = this.root.querySelector<HTMLElement>("section.word-panel");
    if (!panel) return;
    panel.textContent = "";
    const side = state.wordPanelSide;
    panel.hidden = side === null;
    if (side === null) return;
    const title = this.el("h3");
    title.textContent =
      `Select the word(s) that sounded better in Transcript ` +
      `${side.toUpperCase()} (optional)`;
    panel.appendChild(title);
    const chips = this.el("div", "chips");
    state.panelWords.forEach((word, index) => {
      const chip = this.el("button", "word-chip") as HTMLButtonElement;
      chip.type = "button";
      chip.dataset.wordIndex = String(index);
      chip.textContent = word;
      chip.setAttribute(
        "aria-pressed",
        state.isWordSelected(index) ? "true" : "false",
      );
      chip.addEventListener("click", () => {
        state.toggleWord(index);
        this.refresh();
      });
      chips.appendChild(chip);
    });
    panel.appendChild(chips);
  }

  private buildNav(): HTMLElement {
    const nav = this.el("footer", "nav");
    const back = this.el("button", "back") as HTMLButtonElement;
    back.type = "button";
    back.textContent = "Back";
    back.addEventListener("click", () => {
      void this.controller.back().then(() => this.render());
    });
    const forward = this.el("button", "forward") as HTMLButtonElement;
    forward.type = "button";
    forward.textContent = "Forward";
    forward.addEventListener("click", () => {
      void this.controller.forward().then(() => this.render());
    });
    const submit = this.el("button", "submit") as HTMLButtonElement;
    submit.type = "button";
    submit.textContent = "Submit";
    submit.disabled = true;
    submit.addEventListener("click", () => {
      void this.controller.submit().then(() => this.render());
    });
    nav.append(back, forward, submit);
    return nav;
  }

  private selectChoice(choice: Choice): void {
    this.controller.current?.selectChoice(choice);
    this.refresh();
  }

  private setSpeed(speed: number): void {
    this.currentSpeed = speed;
    if (this.audio) {
      this.audio.playbackRate = speed;
      if (!this.audio.paused) {
        this.controller.current?.logSpeed(speed);
      }
    }
    this.refresh();
  }

  private togglePlayback(): void {
    const audio = this.audio;
    if (!audio) return;
    if (audio.paused) {
      this.controller.current?.logSpeed(this.currentSpeed);
      const result = audio.play();
      if (result && typeof result.catch === "function") {
        result.catch(() => undefined);
      }
    } else {
      audio.pause();
    }
  }
}
