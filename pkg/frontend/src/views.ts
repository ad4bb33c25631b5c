// DOM renderers. Each render throws the previous screen away and rebuilds
// from the current ViewState, so what is on screen is exactly what the
// server last said plus the staged selection. No renderer talks to the
// network; everything outbound goes through the handlers.

import type { ViewState } from "./state";
import {
  agreementPercent,
  budgetLine,
  cellView,
  chainTitle,
  chainsFromStart,
  fsqText,
  pendingIsChain,
  routeComplete,
  routeText,
} from "./state";

export interface Handlers {
  clickCell(node: string): void;
  revealCity(name: string): void;
  stageStep(node: string): void;
  stagePlan(chain: string[]): void;
  clearPending(): void;
  submitChoice(): void;
  endTrial(): void;
  nextTrial(): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svg(tag: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function header(state: ViewState): HTMLElement {
  const head = el("div", "session-header");
  head.appendChild(el("h2", "env-title", titleFor(state)));
  const status = el("span", `status-chip status-${state.snapshot.status}`, state.snapshot.status);
  head.appendChild(status);
  head.appendChild(el("span", "budget-line", budgetLine(state.snapshot)));
  if (state.study) {
    const done = state.study.completed;
    head.appendChild(el("span", "study-progress", `Trial ${done} of ${state.study.total}`));
  }
  return head;
}

function titleFor(state: ViewState): string {
  switch (state.snapshot.kind) {
    case "mortgage":
      return "Compare mortgage plans";
    case "roadtrip":
      return "Plan your road trip";
    default:
      return "Uncover the best path";
  }
}

function aidBanner(state: ViewState): HTMLElement | null {
  const steps = state.snapshot.aid_steps;
  const text = state.snapshot.aid_text;
  if (!text) return null;
  const banner = el("div", "aid-banner");
  banner.appendChild(el("strong", undefined, "Strategy to follow"));
  if (steps && steps.length > 1) {
    const list = el("ol");
    for (const step of steps) list.appendChild(el("li", undefined, step));
    banner.appendChild(list);
  } else {
    banner.appendChild(el("p", undefined, text));
  }
  return banner;
}

function errorStrip(state: ViewState): HTMLElement | null {
  if (!state.error) return null;
  return el("div", "error-strip", state.error);
}

// ---------------------------------------------------------------------------
// mouselab: node-link tree

function renderTree(state: ViewState, handlers: Handlers): HTMLElement {
  const { env } = state;
  const wrap = el("div", "task-area task-mouselab");
  const board = svg("svg", { viewBox: "0 0 640 420", class: "board" });
  const px = (n: string): [number, number] => {
    const [x, y] = env.coords[n] ?? [0.5, 0.5];
    return [40 + x * 560, 40 + y * 330];
  };
  for (const [a, b] of env.edges) {
    const [x1, y1] = px(a);
    const [x2, y2] = px(b);
    board.appendChild(svg("line", { x1, y1, x2, y2, class: "edge" }));
  }
  for (const node of env.nodes) {
    const [x, y] = px(node);
    const group = svg("g", { class: "node", "data-node": node });
    if (node === env.start) {
      group.appendChild(svg("circle", { cx: x, cy: y, r: 12, class: "cell start" }));
    } else {
      const view = cellView(state, node);
      const circle = svg("circle", {
        cx: x,
        cy: y,
        r: 24,
        class: `cell ${view.revealed ? "revealed" : "hidden"}${view.clickable ? " clickable" : ""}`,
      });
      const value = svg("text", { x, y: y + 5, class: "cell-text" });
      value.textContent = view.display;
      if (view.clickable) {
        group.addEventListener("click", () => handlers.clickCell(node));
      }
      group.appendChild(circle);
      group.appendChild(value);
    }
    board.appendChild(group);
  }
  wrap.appendChild(board);

  const controls = el("div", "controls");
  const stop = el("button", "end-trial", "Stop and score");
  stop.disabled = state.busy || state.snapshot.status === "finished";
  stop.addEventListener("click", () => handlers.endTrial());
  controls.appendChild(stop);
  wrap.appendChild(controls);
  return wrap;
}

// ---------------------------------------------------------------------------
// roadtrip: city map, text-entry reveal, staged route

function renderMap(state: ViewState, handlers: Handlers): HTMLElement {
  const { env } = state;
  const wrap = el("div", "task-area task-roadtrip");
  const board = svg("svg", { viewBox: "0 0 640 420", class: "board" });
  const px = (n: string): [number, number] => {
    const [x, y] = env.coords[n] ?? [0.5, 0.5];
    return [50 + x * 540, 30 + y * 340];
  };
  for (const [a, b] of env.edges) {
    const [x1, y1] = px(a);
    const [x2, y2] = px(b);
    board.appendChild(svg("line", { x1, y1, x2, y2, class: "edge road" }));
  }
  for (const node of env.nodes) {
    const [x, y] = px(node);
    const onRoute = node === env.start || state.pending.includes(node);
    const group = svg("g", { class: "node city", "data-node": node });
    const view = cellView(state, node);
    group.appendChild(
      svg("circle", {
        cx: x,
        cy: y,
        r: 14,
        class: `cell city-dot${view.revealed ? " revealed" : ""}${onRoute ? " on-route" : ""}`,
      }),
    );
    const name = svg("text", { x, y: y + 30, class: "city-name" });
    name.textContent = view.label;
    group.appendChild(name);
    if (view.revealed) {
      const cost = svg("text", { x, y: y - 20, class: "city-cost" });
      cost.textContent = view.display;
      group.appendChild(cost);
    }
    if (node !== env.start && !state.busy && state.snapshot.status !== "finished") {
      group.addEventListener("click", () => handlers.stageStep(node));
    }
    board.appendChild(group);
  }
  wrap.appendChild(board);

  const lookup = el("div", "lookup-form");
  const label = el("label", undefined, "Look up a price by city name: ");
  const input = el("input", "city-input");
  input.type = "text";
  input.placeholder = "e.g. Harbor City";
  input.disabled = state.busy || state.snapshot.status === "finished";
  const reveal = el("button", "reveal-button", "Reveal price");
  reveal.disabled = input.disabled;
  reveal.addEventListener("click", () => handlers.revealCity(input.value));
  input.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") handlers.revealCity(input.value);
  });
  label.appendChild(input);
  lookup.appendChild(label);
  lookup.appendChild(reveal);
  wrap.appendChild(lookup);

  const routeBar = el("div", "route-bar");
  const text =
    state.pending.length === 0
      ? `Click cities to build a route from ${env.labels[env.start] ?? env.start}.`
      : `Route: ${routeText(env, state.pending)}`;
  routeBar.appendChild(el("span", "route-text", text));
  const clear = el("button", "clear-route", "Clear route");
  clear.disabled = state.busy || state.pending.length === 0;
  clear.addEventListener("click", () => handlers.clearPending());
  const submit = el("button", "submit-route", "Take this route");
  submit.disabled =
    state.busy || state.snapshot.status === "finished" || !routeComplete(env, state.pending);
  submit.addEventListener("click", () => handlers.submitChoice());
  routeBar.appendChild(clear);
  routeBar.appendChild(submit);
  wrap.appendChild(routeBar);
  return wrap;
}

// ---------------------------------------------------------------------------
// mortgage: rate grid plus plan picker

function renderGrid(state: ViewState, handlers: Handlers): HTMLElement {
  const { env } = state;
  const wrap = el("div", "task-area task-mortgage");
  const chains = chainsFromStart(env);
  const periods = chains[0]?.length ?? 0;

  const table = el("table", "rate-grid");
  const head = el("tr");
  head.appendChild(el("th"));
  for (let p = 1; p <= periods; p += 1) head.appendChild(el("th", undefined, `Period ${p}`));
  table.appendChild(head);
  for (const chain of chains) {
    const row = el("tr");
    const staged = pendingIsChain(env, state.pending) && state.pending[0] === chain[0];
    row.className = staged ? "plan-row staged" : "plan-row";
    row.appendChild(el("th", undefined, chainTitle(env, chain)));
    for (const node of chain) {
      const view = cellView(state, node);
      const cell = el("td", `cell ${view.revealed ? "revealed" : "hidden"}`, view.display);
      cell.dataset.node = node;
      if (view.clickable) {
        cell.classList.add("clickable");
        cell.addEventListener("click", () => handlers.clickCell(node));
      }
      row.appendChild(cell);
    }
    table.appendChild(row);
  }
  wrap.appendChild(table);

  const planBar = el("div", "plan-bar");
  planBar.appendChild(el("span", undefined, "Your choice: "));
  for (const chain of chains) {
    const button = el("button", "plan-button", chainTitle(env, chain));
    button.dataset.plan = chain[0];
    if (pendingIsChain(env, state.pending) && state.pending[0] === chain[0]) {
      button.classList.add("staged");
    }
    button.disabled = state.busy || state.snapshot.status === "finished";
    button.addEventListener("click", () => handlers.stagePlan(chain));
    planBar.appendChild(button);
  }
  const submit = el("button", "submit-choice", "Submit choice");
  submit.disabled =
    state.busy ||
    state.snapshot.status === "finished" ||
    !pendingIsChain(env, state.pending);
  submit.addEventListener("click", () => handlers.submitChoice());
  planBar.appendChild(submit);
  wrap.appendChild(planBar);
  return wrap;
}

// ---------------------------------------------------------------------------

function feedbackPanel(state: ViewState, handlers: Handlers): HTMLElement | null {
  if (!state.report) return null;
  const report = state.report;
  const panel = el("div", "feedback-panel");
  panel.appendChild(el("h3", undefined, "How you did"));
  const list = el("ul");
  const a = report.agreement;
  list.appendChild(
    el(
      "li",
      "feedback-agreement",
      `Agreement with the strategy: ${agreementPercent(report)} ` +
        `(${a.consistent} matching clicks, ${a.inconsistent} off-strategy, ` +
        `${a.missed.toFixed(1)} missed)`,
    ),
  );
  list.appendChild(
    el("li", "feedback-fsq", `Far-sightedness of your first ${report.fsq.k} clicks: ${fsqText(report)}`),
  );
  list.appendChild(el("li", "feedback-score", `Score: ${report.performance}`));
  panel.appendChild(list);
  if (state.study) {
    const next = el("button", "next-trial", "Continue");
    next.disabled = state.busy;
    next.addEventListener("click", () => handlers.nextTrial());
    panel.appendChild(next);
  }
  return panel;
}

export function renderApp(root: HTMLElement, state: ViewState, handlers: Handlers): void {
  const page = el("div", "studio");
  page.appendChild(header(state));
  const banner = aidBanner(state);
  if (banner) page.appendChild(banner);
  const error = errorStrip(state);
  if (error) page.appendChild(error);
  switch (state.snapshot.kind) {
    case "mouselab":
      page.appendChild(renderTree(state, handlers));
      break;
    case "roadtrip":
      page.appendChild(renderMap(state, handlers));
      break;
    case "mortgage":
      page.appendChild(renderGrid(state, handlers));
      break;
  }
  const feedback = feedbackPanel(state, handlers);
  if (feedback) page.appendChild(feedback);
  root.replaceChildren(page);
}

export function renderStudyDone(root: HTMLElement, total: number): void {
  const page = el("div", "studio");
  page.appendChild(el("h2", undefined, "Study complete"));
  page.appendChild(el("p", "study-done", `You finished all ${total} trials. Thank you!`));
  root.replaceChildren(page);
}
