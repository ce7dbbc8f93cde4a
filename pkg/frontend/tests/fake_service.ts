/** In-memory stand-in for the annotation service, mirroring its HTTP
 * semantics closely enough for client and UI tests: cursor-gated
 * navigation, overwrite-on-resubmit, and the same status codes.
 */

import type { FetchLike } from "../src/api.js";
import type { Choice, StoredRecord } from "../src/types.js";

export interface FakeTask {
  task_id: string;
  language: string;
  utterance_id: string;
  audio: string;
  transcript_a: string;
  transcript_b: string;
}

export function makeTasks(count: number): FakeTask[] {
  return Array.from({ length: count }, (_, i) => ({
    task_id: `xx__u${i}__m1`,
    language: "xx",
    utterance_id: `u${i}`,
    audio: `audio/u${i}.wav`,
    transcript_a: `pa ta u${i}`,
    transcript_b: `ba da u${i}`,
  }));
}

const VALID_CHOICES = new Set<string>([
  "prefer_a",
  "prefer_b",
  "tie_good",
  "tie_poor",
]);

export class FakeService {
  cursor = 0;
  readonly records = new Map<string, StoredRecord>();
  readonly sessionId: string;

  constructor(
    readonly tasks: FakeTask[],
    sessionId = "ann1",
  ) {
    this.sessionId = sessionId;
  }

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  }

  private taskView(index: number): Response {
    if (index < 0 || index > this.cursor) {
      return this.json(409, { detail: `index ${index} is outside range` });
    }
    if (index >= this.tasks.length) {
      return this.json(409, { detail: "session complete" });
    }
    const task = this.tasks[index];
    return this.json(200, {
      task: { ...task, index, total: this.tasks.length },
      record: this.records.get(task.task_id) ?? null,
    });
  }

  private submit(raw: string): Response {
    const payload = JSON.parse(raw) as {
      task_id?: string;
      choice?: string;
      influential_words?: number[];
      playback_speeds?: number[];
    };
    const position = this.tasks.findIndex(
      (t) => t.task_id === payload.task_id,
    );
    if (position < 0) {
      return this.json(404, { detail: `unknown task ${payload.task_id}` });
    }
    if (position > this.cursor) {
      return this.json(409, { detail: "stale session" });
    }
    if (!payload.choice || !VALID_CHOICES.has(payload.choice)) {
      return this.json(422, { detail: `bad choice ${payload.choice}` });
    }
    const words = payload.influential_words ?? [];
    if (payload.choice.startsWith("tie") && words.length > 0) {
      return this.json(422, { detail: "ties cannot carry word selections" });
    }
    this.records.set(payload.task_id!, {
      task_id: payload.task_id!,
      annotator_id: this.sessionId,
      choice: payload.choice as Choice,
      influential_words: words,
      playback_speeds: payload.playback_speeds ?? [],
      timestamp: "2026-08-23T00:00:00+00:00",
    });
    if (position === this.cursor) this.cursor += 1;
    return this.json(200, {
      accepted: true,
      task_id: payload.task_id,
      index: position,
      total: this.tasks.length,
    });
  }

  private progress(): Response {
    return this.json(200, {
      session_id: this.sessionId,
      annotator_id: this.sessionId,
      index: this.cursor,
      total: this.tasks.length,
      submitted: this.records.size,
      complete: this.cursor >= this.tasks.length,
    });
  }

  readonly fetch: FetchLike = async (url, init) => {
    const parsed = new URL(url, "http://fake.test");
    const parts = parsed.pathname.split("/").filter(Boolean);
    if (parts[0] === "session" && parts[1] === this.sessionId) {
      if (parts[2] === "next") {
        const raw = parsed.searchParams.get("index");
        return this.taskView(raw === null ? this.cursor : Number(raw));
      }
      if (parts[2] === "submit" && init?.method === "POST") {
        return this.submit(String(init.body));
      }
      if (parts[2] === "progress") {
        return this.progress();
      }
    }
    if (parts[0] === "session") {
      return this.json(404, { detail: `unknown session ${parts[1]}` });
    }
    return this.json(404, { detail: "not found" });
  };
}
