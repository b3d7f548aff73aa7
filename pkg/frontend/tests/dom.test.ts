// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  renderCompletion,
  renderDashboard,
  renderOnboarding,
  renderTask,
} from "../src/dom.js";
import { SessionController } from "../src/session.js";
import { MockServer, makePair } from "./mock_server.js";

const BASE = "http://service.test";

async function taskView(withImages = true) {
  const server = new MockServer([makePair(0)], "round_feedback", withImages);
  const c = new SessionController(new ApiClient(BASE, server.fetch), "s1");
  const next = await c.advance();
  if (next.status !== "task") throw new Error("expected a task");
  const container = document.createElement("div");
  renderTask(document, container, c, next.task);
  return { container, controller: c, server };
}

describe("task view", () => {
  it("shows both panels side by side with mode badge and counter", async () => {
    const { container } = await taskView();
    expect(container.querySelectorAll(".panel img")).toHaveLength(2);
    expect(container.querySelector(".mode-badge")?.textContent).toBe(
      "round_feedback",
    );
    expect(container.querySelector(".progress-counter")?.textContent).toBe("0/1");
  });

  it("renders panels right-to-left by default and flips on toggle", async () => {
    const { container, controller } = await taskView();
    const srcs = () =>
      [...container.querySelectorAll<HTMLImageElement>(".panel img")].map(
        (img) => img.src,
      );
    expect(srcs()[0]).toContain("/images/second");
    (container.querySelector(".order-toggle") as HTMLButtonElement).click();
    expect(controller.rightToLeft).toBe(false);
    expect(srcs()[0]).toContain("/images/first");
  });

  it("offers exactly six label buttons with shortcut hints", async () => {
    const { container } = await taskView();
    const buttons = [...container.querySelectorAll(".label-button")];
    expect(buttons.map((b) => (b as HTMLElement).dataset.label)).toEqual([
      "ACT",
      "ASP",
      "SUB",
      "SCE",
      "MOM",
      "NON",
    ]);
    expect(buttons[0].textContent).toBe("1 ACT");
  });

  it("shows help definitions for all six labels", async () => {
    const { container } = await taskView();
    expect(container.querySelectorAll(".help-panel dt")).toHaveLength(6);
    expect(container.querySelector(".help-panel")?.textContent).toContain(
      "action-to-action",
    );
  });

  it("clicking a button submits that label", async () => {
    const { container, server } = await taskView();
    (
      container.querySelector('[data-label="MOM"]') as HTMLButtonElement
    ).click();
    await new Promise((r) => setTimeout(r, 0));
    expect(server.labels.get("b1:0:0")).toBe("MOM");
  });

  it("replaces a broken image with a placeholder and retry button", async () => {
    const { container } = await taskView();
    const img = container.querySelector<HTMLImageElement>(".panel img")!;
    img.onerror!(new Event("error"));
    expect(container.querySelector(".panel-placeholder")?.textContent).toBe(
      "image unavailable",
    );
    (container.querySelector(".retry") as HTMLButtonElement).click();
    expect(container.querySelectorAll(".panel img")).toHaveLength(2);
  });
});

describe("dashboard and terminal screens", () => {
  it("renders the progress bar at the completed percentage", () => {
    const container = document.createElement("div");
    renderDashboard(document, container, {
      completed: 40,
      total: 100,
      percent: 40,
      tally: { ACT: 30, ASP: 0, SUB: 10, SCE: 0, MOM: 0, NON: 0 },
      done: false,
      offline: false,
    });
    const fill = container.querySelector<HTMLElement>(".progress-fill")!;
    expect(fill.style.width).toBe("40%");
    expect(container.querySelector(".progress-text")?.textContent).toBe(
      "40/100 complete",
    );
    expect(container.querySelector(".offline-banner")).toBeNull();
  });

  it("shows the round report after a completed feedback session", () => {
    const container = document.createElement("div");
    renderDashboard(
      document,
      container,
      {
        completed: 100,
        total: 100,
        percent: 100,
        tally: { ACT: 100, ASP: 0, SUB: 0, SCE: 0, MOM: 0, NON: 0 },
        done: true,
        offline: false,
      },
      { round_index: 3, holdout_accuracy: 0.91, kappa_vs_feedback: 0.62 },
    );
    const report = container.querySelector(".round-report")?.textContent;
    expect(report).toContain("round 3");
    expect(report).toContain("0.91");
    expect(report).toContain("0.62");
  });

  it("shows the offline banner when the server is unreachable", () => {
    const container = document.createElement("div");
    renderDashboard(document, container, {
      completed: 0,
      total: 0,
      percent: 0,
      tally: { ACT: 0, ASP: 0, SUB: 0, SCE: 0, MOM: 0, NON: 0 },
      done: false,
      offline: true,
    });
    expect(container.querySelector(".offline-banner")).not.toBeNull();
  });

  it("renders completion counts per label", () => {
    const container = document.createElement("div");
    renderCompletion(document, container, { SUB: 7, ACT: 3 });
    expect(container.querySelector(".complete")).not.toBeNull();
    expect(container.textContent).toContain("SUB: 7");
    expect(container.textContent).toContain("NON: 0");
  });

  it("renders the onboarding screen when no session is open", () => {
    const container = document.createElement("div");
    renderOnboarding(document, container);
    expect(container.querySelector(".onboarding")?.textContent).toBe(
      "no open sessions",
    );
  });
});
