/** Thin client for the annotation service HTTP API.
 *
 * This is the only path through which the UI talks to the backend; the base
 * URL is the app's single configuration setting.
 */

import { isLabelCode, type LabelCode } from "./labels.js";

export interface PairRef {
  book_id: string;
  page_index: number;
  first_panel_index: number;
  second_panel_index: number;
}

export interface Progress {
  completed: number;
  total: number;
}

/** What the annotator sees for one pair. Deliberately excludes any model
 * prediction fields the server might ever add: labeling stays blind. */
export interface UiTask {
  pairKey: string;
  pair: PairRef;
  imageUrls: { first: string; second: string } | null;
  mode: string;
  progress: Progress;
}

export type NextResponse =
  | { status: "task"; task: UiTask }
  | { status: "complete"; summary: Record<string, number>; progress: Progress };

export interface SubmitResult {
  ok: boolean;
  conflict: boolean;
  done: boolean;
  progress: Progress | null;
}

export interface SessionProgress extends Progress {
  done: boolean;
  labels?: { pair: PairRef; label: string }[];
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export function pairKeyOf(pair: PairRef): string {
  return `${pair.book_id}:${pair.page_index}:${pair.first_panel_index}`;
}

export class ApiClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    return this.fetchImpl(`${this.base}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
  }

  async createSession(
    annotatorId: string,
    pairs: PairRef[],
    mode: "ground_truth" | "round_feedback" = "ground_truth",
  ): Promise<{ sessionId: string; total: number; warning?: string }> {
    const resp = await this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ annotator_id: annotatorId, mode, pairs }),
    });
    if (!resp.ok) throw new ApiError(await resp.text(), resp.status);
    const body = await resp.json();
    return { sessionId: body.session_id, total: body.total, warning: body.warning };
  }

  async nextTask(sessionId: string): Promise<NextResponse> {
    const resp = await this.request(`/sessions/${sessionId}/next`);
    if (!resp.ok) throw new ApiError(await resp.text(), resp.status);
    const body = await resp.json();
    if (body.status === "complete") {
      return { status: "complete", summary: body.summary, progress: body.progress };
    }
    const pair = body.pair as PairRef;
    const key = body.pair_key ?? pairKeyOf(pair);
    return {
      status: "task",
      task: {
        pairKey: key,
        pair,
        imageUrls: body.image_refs
          ? {
              first: `${this.base}/pairs/${key}/images/first`,
              second: `${this.base}/pairs/${key}/images/second`,
            }
          : null,
        mode: body.mode,
        progress: body.progress,
      },
    };
  }

  /** Submit one label. Only the six transition codes can ever leave the
   * client; a 409 (already labeled / outside the queue) is reported as a
   * conflict rather than thrown so callers can reconcile silently. */
  async submitLabel(
    sessionId: string,
    pair: PairRef,
    label: LabelCode,
  ): Promise<SubmitResult> {
    if (!isLabelCode(label)) {
      throw new Error(`refusing to submit non-transition label ${String(label)}`);
    }
    const resp = await this.request(`/sessions/${sessionId}/labels`, {
      method: "POST",
      body: JSON.stringify({ pair, label }),
    });
    if (resp.status === 409) {
      return { ok: false, conflict: true, done: false, progress: null };
    }
    if (!resp.ok) throw new ApiError(await resp.text(), resp.status);
    const body = await resp.json();
    return { ok: true, conflict: false, done: body.done, progress: body.progress };
  }

  async progress(sessionId: string): Promise<SessionProgress> {
    const resp = await this.request(`/sessions/${sessionId}/progress`);
    if (!resp.ok) throw new ApiError(await resp.text(), resp.status);
    return resp.json();
  }
}
