/** Client-side session state machine: keyboard-first label selection,
 * idempotent submission, per-label tallies, and progress view-models. */

import {
  ApiClient,
  type NextResponse,
  type PairRef,
  type Progress,
  type UiTask,
} from "./api.js";
import {
  LABEL_CODES,
  isLabelCode,
  shortcutToLabel,
  type LabelCode,
} from "./labels.js";

export interface DashboardViewModel {
  completed: number;
  total: number;
  percent: number;
  tally: Record<LabelCode, number>;
  done: boolean;
  offline: boolean;
}

export function emptyTally(): Record<LabelCode, number> {
  return Object.fromEntries(LABEL_CODES.map((c) => [c, 0])) as Record<
    LabelCode,
    number
  >;
}

export class SessionController {
  /** Pair keys with an acknowledged (or conflicting) submission. */
  private readonly submitted = new Map<string, LabelCode>();
  private readonly inFlight = new Set<string>();
  readonly tally = emptyTally();
  selected: LabelCode | null = null;
  /** Manga reading order: right-to-left by default. */
  rightToLeft = true;
  offline = false;
  private task: UiTask | null = null;
  private completion: Record<string, number> | null = null;
  private progress: Progress = { completed: 0, total: 0 };

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  get currentTask(): UiTask | null {
    return this.task;
  }

  get completionSummary(): Record<string, number> | null {
    return this.completion;
  }

  toggleOrder(): void {
    this.rightToLeft = !this.rightToLeft;
  }

  async advance(): Promise<NextResponse> {
    let next: NextResponse;
    try {
      next = await this.api.nextTask(this.sessionId);
      this.offline = false;
    } catch (err) {
      this.offline = true;
      throw err;
    }
    if (next.status === "complete") {
      this.task = null;
      this.completion = next.summary;
    } else {
      this.task = next.task;
      this.completion = null;
    }
    this.progress = next.status === "complete" ? next.progress : next.task.progress;
    this.selected = null;
    return next;
  }

  /** Digits 1-6 select a label; Enter confirms the selection. Returns true
   * when the key was consumed. */
  async handleKey(key: string): Promise<boolean> {
    const label = shortcutToLabel(key);
    if (label) {
      this.selected = label;
      return true;
    }
    if (key === "Enter" && this.selected && this.task) {
      await this.submit(this.selected);
      return true;
    }
    return false;
  }

  /** Submit a label for the current task. Duplicate clicks and replays are
   * no-ops: at most one log record reaches the server per pair. */
  async submit(label: LabelCode): Promise<void> {
    if (!isLabelCode(label)) {
      throw new Error(`not a transition label: ${String(label)}`);
    }
    const task = this.task;
    if (!task) return;
    const key = task.pairKey;
    if (this.submitted.has(key) || this.inFlight.has(key)) return;
    this.inFlight.add(key);
    try {
      const result = await this.api.submitLabel(this.sessionId, task.pair, label);
      // a conflict means the server already has a record; reconcile silently
      this.submitted.set(key, label);
      this.tally[label] += 1;
      if (result.progress) this.progress = result.progress;
      this.offline = false;
    } catch (err) {
      this.offline = true;
      throw err;
    } finally {
      this.inFlight.delete(key);
    }
    await this.advance();
  }

  dashboard(): DashboardViewModel {
    const { completed, total } = this.progress;
    return {
      completed,
      total,
      percent: total > 0 ? Math.round((100 * completed) / total) : 0,
      tally: { ...this.tally },
      done: this.completion !== null,
      offline: this.offline,
    };
  }
}

/** Order the two panel images for display; manga order puts the first panel
 * on the right. */
export function displayOrder(
  urls: { first: string; second: string },
  rightToLeft: boolean,
): [string, string] {
  return rightToLeft ? [urls.second, urls.first] : [urls.first, urls.second];
}

export type { PairRef, UiTask };
