/** Browser entry point. The server base URL is the single configuration
 * setting, read from ?server=... or a global set by the hosting page. */

import { ApiClient, ApiError } from "./api.js";
import {
  renderCompletion,
  renderDashboard,
  renderOnboarding,
  renderSessionExpired,
  renderTask,
} from "./dom.js";
import { SessionController } from "./session.js";

declare global {
  interface Window {
    PANELSCOPE_SERVER?: string;
  }
}

export function serverBaseUrl(win: Window): string {
  const fromQuery = new URLSearchParams(win.location.search).get("server");
  return fromQuery ?? win.PANELSCOPE_SERVER ?? "http://127.0.0.1:8000";
}

export async function start(win: Window): Promise<void> {
  const doc = win.document;
  const taskRoot = doc.getElementById("task")!;
  const dashRoot = doc.getElementById("dashboard")!;
  const sessionId = new URLSearchParams(win.location.search).get("session");
  if (!sessionId) {
    renderOnboarding(doc, taskRoot);
    return;
  }
  const api = new ApiClient(serverBaseUrl(win));
  const controller = new SessionController(api, sessionId);

  const refresh = async () => {
    try {
      const next = await controller.advance();
      if (next.status === "complete") {
        renderCompletion(doc, taskRoot, next.summary);
      } else {
        renderTask(doc, taskRoot, controller, next.task);
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        renderSessionExpired(doc, taskRoot);
        return;
      }
      throw err;
    }
    renderDashboard(doc, dashRoot, controller.dashboard());
  };

  doc.addEventListener("keydown", (event) => {
    void controller.handleKey(event.key).then((consumed) => {
      if (consumed) void refresh();
    });
  });

  await refresh();
}

if (typeof document !== "undefined" && document.getElementById("task")) {
  void start(window);
}
