/** Thin typed client over the annotation service HTTP API. */

import type {
  ProgressResponse,
  SubmitPayload,
  SubmitResponse,
  TaskResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export interface ApiClientOptions {
  /** Injectable fetch for tests. */
  fetchImpl?: FetchLike;
  /** Called with every decoded response body; used to audit what the
   * client actually observes on the wire. */
  onResponse?: (payload: unknown) => void;
}

export class ApiClient {
  private readonly baseUrl: string;

  constructor(
    baseUrl: string,
    private readonly options: ApiClientOptions = {},
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const doFetch = this.options.fetchImpl ?? fetch;
    const response = await doFetch(this.baseUrl + path, init);
    const text = await response.text();
    let body: unknown = null;
    if (text) {
      try {
        body = JSON.parse(text);
      } catch {
        body = text;
      }
    }
    this.options.onResponse?.(body);
    if (!response.ok) {
      const detail =
        body !== null && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  /** Current task when `index` is omitted; any already-visited task otherwise. */
  getTask(sessionId: string, index?: number): Promise<TaskResponse> {
    const query = index === undefined ? "" : `?index=${index}`;
    return this.request(
      `/session/${encodeURIComponent(sessionId)}/next${query}`,
    );
  }

  submit(sessionId: string, payload: SubmitPayload): Promise<SubmitResponse> {
    return this.request(
      `/session/${encodeURIComponent(sessionId)}/submit`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      },
    );
  }

  progress(sessionId: string): Promise<ProgressResponse> {
    return this.request(
      `/session/${encodeURIComponent(sessionId)}/progress`,
    );
  }

  audioUrl(utteranceId: string): string {
    return `${this.baseUrl}/audio/${encodeURIComponent(utteranceId)}`;
  }
}
