import { beforeEach, describe, expect, it, vi } from "vitest";

import { initialView } from "../src/state";
import type { ViewState } from "../src/state";
import { renderApp } from "../src/views";
import type { Handlers } from "../src/views";
import {
  MORTGAGE_AID,
  MORTGAGE_DOC,
  MOUSELAB_DOC,
  ROADTRIP_DOC,
  freshSnapshot,
  perfectReport,
} from "./fixtures";

function stubHandlers(): Handlers {
  return {
    clickCell: vi.fn(),
    revealCity: vi.fn(),
    stageStep: vi.fn(),
    stagePlan: vi.fn(),
    clearPending: vi.fn(),
    submitChoice: vi.fn(),
    endTrial: vi.fn(),
    nextTrial: vi.fn(),
  };
}

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
});

describe("mortgage grid", () => {
  it("renders nine hidden cells as a 3x3 table", () => {
    const state = initialView(freshSnapshot(MORTGAGE_DOC), MORTGAGE_DOC, true);
    renderApp(root, state, stubHandlers());
    const cells = root.querySelectorAll("td.cell");
    expect(cells.length).toBe(9);
    for (const cell of cells) expect(cell.textContent).toBe("?");
    const rows = root.querySelectorAll("tr.plan-row");
    expect(rows.length).toBe(3);
    expect(rows[0].querySelector("th")!.textContent).toBe("Plan A");
  });

  it("dispatches a cell click to the handler with the node id", () => {
    const state = initialView(freshSnapshot(MORTGAGE_DOC), MORTGAGE_DOC, true);
    const handlers = stubHandlers();
    renderApp(root, state, handlers);
    (root.querySelector('td[data-node="b3"]') as HTMLElement).click();
    expect(handlers.clickCell).toHaveBeenCalledWith("b3");
  });

  it("shows the revealed display string, not the raw value", () => {
    const snap = freshSnapshot(MORTGAGE_DOC, {
      revealed: { a3: { value: -2.61, display: "2.61%" } },
      n_clicks: 1,
      clicks_left: 2,
    });
    const state = initialView(snap, MORTGAGE_DOC, true);
    renderApp(root, state, stubHandlers());
    const cell = root.querySelector('td[data-node="a3"]')!;
    expect(cell.textContent).toBe("2.61%");
    expect(cell.classList.contains("revealed")).toBe(true);
  });

  it("ignores clicks on already revealed cells", () => {
    const snap = freshSnapshot(MORTGAGE_DOC, {
      revealed: { a3: { value: -2.61, display: "2.61%" } },
      n_clicks: 1,
      clicks_left: 2,
    });
    const handlers = stubHandlers();
    renderApp(root, initialView(snap, MORTGAGE_DOC, true), handlers);
    (root.querySelector('td[data-node="a3"]') as HTMLElement).click();
    expect(handlers.clickCell).not.toHaveBeenCalled();
  });

  it("enables submit only once a full plan is staged", () => {
    const state = initialView(freshSnapshot(MORTGAGE_DOC), MORTGAGE_DOC, true);
    const handlers = stubHandlers();
    renderApp(root, state, handlers);
    const submit = root.querySelector("button.submit-choice") as HTMLButtonElement;
    expect(submit.disabled).toBe(true);

    (root.querySelector('button[data-plan="b1"]') as HTMLElement).click();
    expect(handlers.stagePlan).toHaveBeenCalledWith(["b1", "b2", "b3"]);

    state.pending = ["b1", "b2", "b3"];
    renderApp(root, state, handlers);
    const submitNow = root.querySelector("button.submit-choice") as HTMLButtonElement;
    expect(submitNow.disabled).toBe(false);
    submitNow.click();
    expect(handlers.submitChoice).toHaveBeenCalled();
  });
});

describe("aid banner", () => {
  it("sits above the task for aided sessions", () => {
    const snap = freshSnapshot(MORTGAGE_DOC, {
      condition: "aided",
      aid_text: MORTGAGE_AID,
      aid_steps: [MORTGAGE_AID],
    });
    renderApp(root, initialView(snap, MORTGAGE_DOC, true), stubHandlers());
    const banner = root.querySelector(".aid-banner");
    expect(banner).not.toBeNull();
    expect(banner!.textContent).toContain("long-term interest rates");
    const page = root.querySelector(".studio")!;
    const order = Array.from(page.children).map((c) => c.className.split(" ")[0]);
    expect(order.indexOf("aid-banner")).toBeLessThan(order.indexOf("task-area"));
  });

  it("is absent for control sessions", () => {
    const snap = freshSnapshot(MORTGAGE_DOC, { condition: "control" });
    renderApp(root, initialView(snap, MORTGAGE_DOC, true), stubHandlers());
    expect(root.querySelector(".aid-banner")).toBeNull();
  });
});

describe("error strip", () => {
  it("surfaces the server rejection inline", () => {
    const state = initialView(freshSnapshot(MORTGAGE_DOC, { clicks_left: 0, n_clicks: 3 }), MORTGAGE_DOC, true);
    state.error = "click budget exhausted (3 clicks allowed)";
    renderApp(root, state, stubHandlers());
    expect(root.querySelector(".error-strip")!.textContent).toContain("budget exhausted");
  });

  it("is absent while there is nothing to report", () => {
    renderApp(root, initialView(freshSnapshot(MORTGAGE_DOC), MORTGAGE_DOC, true), stubHandlers());
    expect(root.querySelector(".error-strip")).toBeNull();
  });
});

describe("mouselab tree", () => {
  it("draws every node and edge of the task graph", () => {
    const state = initialView(freshSnapshot(MOUSELAB_DOC), MOUSELAB_DOC, true);
    renderApp(root, state, stubHandlers());
    expect(root.querySelectorAll("svg line.edge").length).toBe(12);
    expect(root.querySelectorAll("svg g.node").length).toBe(13);
    // 12 clickable value nodes plus the start marker
    expect(root.querySelectorAll("svg circle.cell").length).toBe(13);
  });

  it("reveals through the handler and offers a stop button", () => {
    const handlers = stubHandlers();
    const state = initialView(freshSnapshot(MOUSELAB_DOC), MOUSELAB_DOC, true);
    renderApp(root, state, handlers);
    const node = root.querySelector('g[data-node="n7"]') as SVGElement;
    node.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect(handlers.clickCell).toHaveBeenCalledWith("n7");
    (root.querySelector("button.end-trial") as HTMLButtonElement).click();
    expect(handlers.endTrial).toHaveBeenCalled();
  });
});

describe("roadtrip map", () => {
  it("labels cities by name and hides prices until revealed", () => {
    const snap = freshSnapshot(ROADTRIP_DOC, {
      revealed: { stoneport: { value: -20, display: "-$20" } },
      n_clicks: 1,
    });
    renderApp(root, initialView(snap, ROADTRIP_DOC, true), stubHandlers());
    const names = Array.from(root.querySelectorAll("text.city-name")).map((t) => t.textContent);
    expect(names).toContain("Cedar Grove");
    expect(names).toContain("Harbor City");
    const costs = Array.from(root.querySelectorAll("text.city-cost")).map((t) => t.textContent);
    expect(costs).toEqual(["-$20"]);
  });

  it("passes typed city names to the reveal handler", () => {
    const handlers = stubHandlers();
    renderApp(root, initialView(freshSnapshot(ROADTRIP_DOC), ROADTRIP_DOC, true), handlers);
    const input = root.querySelector("input.city-input") as HTMLInputElement;
    input.value = "Harbor City";
    (root.querySelector("button.reveal-button") as HTMLButtonElement).click();
    expect(handlers.revealCity).toHaveBeenCalledWith("Harbor City");
  });

  it("builds the route from map clicks and gates the submit button", () => {
    const handlers = stubHandlers();
    const state = initialView(freshSnapshot(ROADTRIP_DOC), ROADTRIP_DOC, true);
    renderApp(root, state, handlers);
    const city = root.querySelector('g[data-node="maple_hollow"]') as SVGElement;
    city.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect(handlers.stageStep).toHaveBeenCalledWith("maple_hollow");
    expect((root.querySelector("button.submit-route") as HTMLButtonElement).disabled).toBe(true);

    state.pending = ["maple_hollow", "elm_ridge", "harbor_city"];
    renderApp(root, state, handlers);
    expect(root.querySelector(".route-text")!.textContent).toContain(
      "Cedar Grove to Maple Hollow to Elm Ridge to Harbor City",
    );
    expect((root.querySelector("button.submit-route") as HTMLButtonElement).disabled).toBe(false);
  });
});

describe("busy state", () => {
  it("disables every control while a request is in flight", () => {
    const state = initialView(freshSnapshot(MORTGAGE_DOC), MORTGAGE_DOC, true);
    state.busy = true;
    renderApp(root, state, stubHandlers());
    for (const button of root.querySelectorAll("button")) {
      expect((button as HTMLButtonElement).disabled).toBe(true);
    }
    expect(root.querySelectorAll("td.clickable").length).toBe(0);
  });
});

describe("feedback panel", () => {
  it("summarizes the report after the choice", () => {
    const snap = freshSnapshot(MORTGAGE_DOC, {
      status: "finished",
      condition: "aided",
      n_clicks: 3,
      clicks_left: 0,
      choice: ["a1", "a2", "a3"],
    });
    const state = initialView(snap, MORTGAGE_DOC, true);
    state.report = perfectReport();
    renderApp(root, state, stubHandlers());
    const panel = root.querySelector(".feedback-panel")!;
    expect(panel.querySelector(".feedback-agreement")!.textContent).toContain("100%");
    expect(panel.querySelector(".feedback-fsq")!.textContent).toContain("1.00");
    expect(panel.querySelector(".feedback-score")!.textContent).toContain("1");
  });

  it("stays hidden until a report exists", () => {
    const snap = freshSnapshot(MORTGAGE_DOC, { status: "finished" });
    renderApp(root, initialView(snap, MORTGAGE_DOC, true), stubHandlers());
    expect(root.querySelector(".feedback-panel")).toBeNull();
  });
});
