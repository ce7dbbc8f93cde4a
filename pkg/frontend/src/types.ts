/** Wire types for the annotation service JSON API. */

export type Choice = "prefer_a" | "prefer_b" | "tie_good" | "tie_poor";

export const CHOICES: readonly Choice[] = [
  "prefer_a",
  "prefer_b",
  "tie_good",
  "tie_poor",
];

export const PLAYBACK_SPEEDS: readonly number[] = [0.25, 0.5, 0.75, 1.0];

/** One task as the annotator is allowed to see it: two unlabeled transcripts. */
export interface TaskView {
  task_id: string;
  language: string;
  utterance_id: string;
  audio: string;
  transcript_a: string;
  transcript_b: string;
  index: number;
  total: number;
}

/** A judgment as stored by the service. */
export interface StoredRecord {
  task_id: string;
  annotator_id: string;
  choice: Choice;
  influential_words: number[];
  playback_speeds: number[];
  timestamp: string;
}

export interface TaskResponse {
  task: TaskView;
  record: StoredRecord | null;
}

export interface SubmitPayload {
  task_id: string;
  choice: Choice;
  influential_words: number[];
  playback_speeds: number[];
}

export interface SubmitResponse {
  accepted: boolean;
  task_id: string;
  index: number;
  total: number;
}

export interface ProgressResponse {
  session_id: string;
  annotator_id: string;
  index: number;
  total: number;
  submitted: number;
  complete: boolean;
}
