import { describe, expect, it } from "vitest";

import {
  budgetLine,
  cellView,
  chainTitle,
  chainsFromStart,
  extendRoute,
  initialView,
  matchCity,
  pendingIsChain,
  routeComplete,
  routeText,
} from "../src/state";
import { MORTGAGE_DOC, ROADTRIP_DOC, freshSnapshot } from "./fixtures";

describe("extendRoute", () => {
  it("starts at the origin's neighbours", () => {
    expect(extendRoute(ROADTRIP_DOC, [], "maple_hollow")).toEqual(["maple_hollow"]);
    expect(extendRoute(ROADTRIP_DOC, [], "birch_creek")).toEqual(["birch_creek"]);
  });

  it("rejects cities with no road from the origin", () => {
    expect(extendRoute(ROADTRIP_DOC, [], "harbor_city")).toBeNull();
    expect(extendRoute(ROADTRIP_DOC, [], "willow_bend")).toBeNull();
  });

  it("follows roads step by step", () => {
    const one = extendRoute(ROADTRIP_DOC, [], "maple_hollow")!;
    const two = extendRoute(ROADTRIP_DOC, one, "elm_ridge")!;
    expect(extendRoute(ROADTRIP_DOC, two, "harbor_city")).toEqual([
      "maple_hollow",
      "elm_ridge",
      "harbor_city",
    ]);
    expect(extendRoute(ROADTRIP_DOC, two, "willow_bend")).toBeNull();
  });
});

describe("routeComplete", () => {
  it("is false for an empty or partial route", () => {
    expect(routeComplete(ROADTRIP_DOC, [])).toBe(false);
    expect(routeComplete(ROADTRIP_DOC, ["maple_hollow"])).toBe(false);
    expect(routeComplete(ROADTRIP_DOC, ["maple_hollow", "elm_ridge"])).toBe(false);
  });

  it("is true once the route reaches a final stop", () => {
    expect(routeComplete(ROADTRIP_DOC, ["maple_hollow", "elm_ridge", "harbor_city"])).toBe(true);
    expect(routeComplete(MORTGAGE_DOC, ["b1", "b2", "b3"])).toBe(true);
  });
});

describe("routeText", () => {
  it("spells the route with city names from the origin", () => {
    expect(routeText(ROADTRIP_DOC, ["maple_hollow", "willow_bend"])).toBe(
      "Cedar Grove to Maple Hollow to Willow Bend",
    );
  });
});

describe("matchCity", () => {
  const state = initialView(freshSnapshot(ROADTRIP_DOC), ROADTRIP_DOC, true);

  it("resolves names case-insensitively with surrounding space", () => {
    expect(matchCity(state, "  harbor city ")).toEqual({ node: "harbor_city" });
    expect(matchCity(state, "MAPLE HOLLOW")).toEqual({ node: "maple_hollow" });
  });

  it("rejects names that are not on the map", () => {
    const out = matchCity(state, "Springfield");
    expect(out).toHaveProperty("error");
    expect((out as { error: string }).error).toContain("Springfield");
  });

  it("rejects the origin and empty input", () => {
    expect(matchCity(state, "Cedar Grove")).toHaveProperty("error");
    expect(matchCity(state, "   ")).toEqual({ error: "Type a city name first." });
  });

  it("rejects cities that are already revealed", () => {
    const snap = freshSnapshot(ROADTRIP_DOC, {
      revealed: { stoneport: { value: -20, display: "-$20" } },
      n_clicks: 1,
    });
    const revealedState = initialView(snap, ROADTRIP_DOC, true);
    const out = matchCity(revealedState, "Stoneport");
    expect((out as { error: string }).error).toContain("already revealed");
  });
});

describe("chainsFromStart", () => {
  it("reads the three plans off the mortgage grid in order", () => {
    expect(chainsFromStart(MORTGAGE_DOC)).toEqual([
      ["a1", "a2", "a3"],
      ["b1", "b2", "b3"],
      ["c1", "c2", "c3"],
    ]);
  });

  it("titles each plan from the first cell's label", () => {
    const chains = chainsFromStart(MORTGAGE_DOC);
    expect(chains.map((c) => chainTitle(MORTGAGE_DOC, c))).toEqual([
      "Plan A",
      "Plan B",
      "Plan C",
    ]);
  });
});

describe("pendingIsChain", () => {
  it("accepts exactly a full plan", () => {
    expect(pendingIsChain(MORTGAGE_DOC, ["a1", "a2", "a3"])).toBe(true);
    expect(pendingIsChain(MORTGAGE_DOC, ["a1", "a2"])).toBe(false);
    expect(pendingIsChain(MORTGAGE_DOC, [])).toBe(false);
    expect(pendingIsChain(MORTGAGE_DOC, ["a1", "b2", "c3"])).toBe(false);
  });
});

describe("cellView", () => {
  it("hides values until the server reveals them", () => {
    const state = initialView(freshSnapshot(MORTGAGE_DOC), MORTGAGE_DOC, true);
    const cell = cellView(state, "a3");
    expect(cell.display).toBe("?");
    expect(cell.revealed).toBe(false);
    expect(cell.clickable).toBe(true);
  });

  it("shows the server's display string verbatim once revealed", () => {
    const snap = freshSnapshot(MORTGAGE_DOC, {
      revealed: { a3: { value: -2.61, display: "2.61%" } },
      n_clicks: 1,
      clicks_left: 2,
    });
    const state = initialView(snap, MORTGAGE_DOC, true);
    const cell = cellView(state, "a3");
    expect(cell.display).toBe("2.61%");
    expect(cell.revealed).toBe(true);
    expect(cell.clickable).toBe(false);
  });

  it("goes inert when the budget runs out or a request is in flight", () => {
    const spent = initialView(freshSnapshot(MORTGAGE_DOC, { clicks_left: 0 }), MORTGAGE_DOC, true);
    expect(cellView(spent, "a3").clickable).toBe(false);

    const busy = initialView(freshSnapshot(MORTGAGE_DOC), MORTGAGE_DOC, true);
    busy.busy = true;
    expect(cellView(busy, "a3").clickable).toBe(false);
  });
});

describe("budgetLine", () => {
  it("mentions the remaining budget only when there is one", () => {
    expect(budgetLine(freshSnapshot(MORTGAGE_DOC, { n_clicks: 1, clicks_left: 2 }))).toBe(
      "Clicks so far: 1 (2 left)",
    );
    expect(budgetLine(freshSnapshot(ROADTRIP_DOC, { n_clicks: 4 }))).toBe("Clicks so far: 4");
  });
});
