/** DOM rendering: task view (side-by-side panels, six label buttons, help
 * panel), dashboard, completion and onboarding screens. Kept as thin glue
 * over the view-model logic in session.ts. */

import {
  LABEL_CODES,
  LABEL_DEFINITIONS,
  LABEL_NAMES,
  type LabelCode,
} from "./labels.js";
import {
  SessionController,
  displayOrder,
  type DashboardViewModel,
  type UiTask,
} from "./session.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function panelImage(doc: Document, url: string, alt: string): HTMLElement {
  const wrap = el(doc, "figure", "panel");
  const img = el(doc, "img");
  img.src = url;
  img.alt = alt;
  img.onerror = () => {
    wrap.replaceChildren(
      el(doc, "div", "panel-placeholder", "image unavailable"),
      retryButton(doc, () => {
        wrap.replaceChildren(img);
        img.src = url;
      }),
    );
  };
  wrap.append(img);
  return wrap;
}

function retryButton(doc: Document, onClick: () => void): HTMLButtonElement {
  const btn = el(doc, "button", "retry", "retry");
  btn.onclick = onClick;
  return btn;
}

export function renderTask(
  doc: Document,
  container: HTMLElement,
  controller: SessionController,
  task: UiTask,
): void {
  container.replaceChildren();

  const badge = el(doc, "span", "mode-badge", task.mode);
  const counter = el(
    doc,
    "span",
    "progress-counter",
    `${task.progress.completed}/${task.progress.total}`,
  );
  const header = el(doc, "header");
  header.append(badge, counter);

  const pairView = el(doc, "div", "pair-view");
  if (task.imageUrls) {
    const [left, right] = displayOrder(task.imageUrls, controller.rightToLeft);
    pairView.append(
      panelImage(doc, left, "left panel"),
      panelImage(doc, right, "right panel"),
    );
  } else {
    pairView.append(el(doc, "div", "pair-key", task.pairKey));
  }

  const toggle = el(doc, "button", "order-toggle", "switch reading order");
  toggle.onclick = () => {
    controller.toggleOrder();
    renderTask(doc, container, controller, task);
  };

  const buttons = el(doc, "div", "label-buttons");
  LABEL_CODES.forEach((code, i) => {
    const btn = el(doc, "button", "label-button", `${i + 1} ${code}`);
    btn.dataset.label = code;
    btn.onclick = () => void controller.submit(code);
    if (controller.selected === code) btn.classList.add("selected");
    buttons.append(btn);
  });

  const help = el(doc, "aside", "help-panel");
  for (const code of LABEL_CODES) {
    help.append(
      el(doc, "dt", undefined, `${code} (${LABEL_NAMES[code]})`),
      el(doc, "dd", undefined, LABEL_DEFINITIONS[code]),
    );
  }

  container.append(header, pairView, toggle, buttons, help);
}

export function renderCompletion(
  doc: Document,
  container: HTMLElement,
  summary: Record<string, number>,
): void {
  container.replaceChildren();
  container.append(el(doc, "h2", "complete", "session complete"));
  const list = el(doc, "ul", "summary");
  for (const code of LABEL_CODES) {
    list.append(el(doc, "li", undefined, `${code}: ${summary[code] ?? 0}`));
  }
  container.append(list);
}

export function renderDashboard(
  doc: Document,
  container: HTMLElement,
  vm: DashboardViewModel,
  roundReport?: Record<string, number>,
): void {
  container.replaceChildren();
  if (vm.offline) {
    container.append(
      el(doc, "div", "offline-banner", "server unreachable - retrying"),
    );
  }
  const bar = el(doc, "div", "progress-bar");
  const fill = el(doc, "div", "progress-fill");
  fill.style.width = `${vm.percent}%`;
  bar.append(fill);
  container.append(
    bar,
    el(doc, "p", "progress-text", `${vm.completed}/${vm.total} complete`),
  );
  const tally = el(doc, "ul", "tally");
  for (const code of Object.keys(vm.tally) as LabelCode[]) {
    tally.append(el(doc, "li", undefined, `${code}: ${vm.tally[code]}`));
  }
  container.append(tally);
  if (vm.done && roundReport) {
    container.append(
      el(
        doc,
        "p",
        "round-report",
        `round ${roundReport.round_index}: holdout accuracy ` +
          `${roundReport.holdout_accuracy}, kappa ${roundReport.kappa_vs_feedback}`,
      ),
    );
  }
}

export function renderOnboarding(doc: Document, container: HTMLElement): void {
  container.replaceChildren(
    el(doc, "h2", "onboarding", "no open sessions"),
    el(
      doc,
      "p",
      undefined,
      "Start a labeling round from the command line, then reload this page.",
    ),
  );
}

export function renderSessionExpired(doc: Document, container: HTMLElement): void {
  container.replaceChildren(
    el(doc, "h2", "expired", "session expired"),
    el(doc, "p", undefined, "Return to the start screen to open a new session."),
  );
}
