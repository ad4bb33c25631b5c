// Hand-rolled documents matching what the service returns, so the unit
// tests run without a server. Shapes mirror GET /envs/{name} and the
// session snapshot exactly.

import type { EnvDoc, SessionReport, SessionSnapshot } from "../src/api";

export const MORTGAGE_DOC: EnvDoc = {
  format_version: 1,
  name: "mortgage",
  kind: "mortgage",
  start: "start",
  nodes: ["start", "a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3"],
  edges: [
    ["start", "a1"],
    ["start", "b1"],
    ["start", "c1"],
    ["a1", "a2"],
    ["b1", "b2"],
    ["c1", "c2"],
    ["a2", "a3"],
    ["b2", "b3"],
    ["c2", "c3"],
  ],
  dists: {},
  click_cost: 0,
  click_budget: 3,
  labels: {
    start: "start",
    a1: "Plan A, period 1",
    a2: "Plan A, period 2",
    a3: "Plan A, period 3",
    b1: "Plan B, period 1",
    b2: "Plan B, period 2",
    b3: "Plan B, period 3",
    c1: "Plan C, period 1",
    c2: "Plan C, period 2",
    c3: "Plan C, period 3",
  },
  farsighted: ["a3", "b3", "c3"],
  forced: null,
  coords: {
    start: [0, 1],
    a1: [1, 0],
    a2: [2, 0],
    a3: [3, 0],
    b1: [1, 1],
    b2: [2, 1],
    b3: [3, 1],
    c1: [1, 2],
    c2: [2, 2],
    c3: [3, 2],
  },
  period_weights: [1, 5, 25],
};

export const ROADTRIP_DOC: EnvDoc = {
  format_version: 1,
  name: "roadtrip",
  kind: "roadtrip",
  start: "start",
  nodes: ["start", "maple_hollow", "birch_creek", "elm_ridge", "willow_bend", "harbor_city", "stoneport"],
  edges: [
    ["start", "maple_hollow"],
    ["start", "birch_creek"],
    ["maple_hollow", "elm_ridge"],
    ["maple_hollow", "willow_bend"],
    ["birch_creek", "willow_bend"],
    ["elm_ridge", "harbor_city"],
    ["elm_ridge", "stoneport"],
    ["willow_bend", "stoneport"],
  ],
  dists: {},
  click_cost: 10,
  click_budget: null,
  labels: {
    start: "Cedar Grove",
    maple_hollow: "Maple Hollow",
    birch_creek: "Birch Creek",
    elm_ridge: "Elm Ridge",
    willow_bend: "Willow Bend",
    harbor_city: "Harbor City",
    stoneport: "Stoneport",
  },
  farsighted: ["harbor_city", "stoneport"],
  forced: { nodes: ["harbor_city", "stoneport"], value: -20 },
  coords: {
    start: [0.08, 0.5],
    maple_hollow: [0.32, 0.18],
    birch_creek: [0.3, 0.52],
    elm_ridge: [0.58, 0.12],
    willow_bend: [0.56, 0.4],
    harbor_city: [0.88, 0.1],
    stoneport: [0.86, 0.38],
  },
  period_weights: null,
};

export const MOUSELAB_DOC: EnvDoc = {
  format_version: 1,
  name: "mouselab3",
  kind: "mouselab",
  start: "n0",
  nodes: ["n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7", "n8", "n9", "n10", "n11", "n12"],
  edges: [
    ["n0", "n1"],
    ["n0", "n2"],
    ["n0", "n3"],
    ["n1", "n4"],
    ["n2", "n5"],
    ["n3", "n6"],
    ["n4", "n7"],
    ["n4", "n8"],
    ["n5", "n9"],
    ["n5", "n10"],
    ["n6", "n11"],
    ["n6", "n12"],
  ],
  dists: {},
  click_cost: 1,
  click_budget: null,
  labels: Object.fromEntries(
    ["n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7", "n8", "n9", "n10", "n11", "n12"].map((n) => [n, n]),
  ),
  farsighted: ["n7", "n8", "n9", "n10", "n11", "n12"],
  forced: null,
  coords: {
    n0: [0.5, 0.0],
    n1: [0.2, 0.25],
    n2: [0.5, 0.25],
    n3: [0.8, 0.25],
    n4: [0.2, 0.55],
    n5: [0.5, 0.55],
    n6: [0.8, 0.55],
    n7: [0.12, 0.9],
    n8: [0.28, 0.9],
    n9: [0.42, 0.9],
    n10: [0.58, 0.9],
    n11: [0.72, 0.9],
    n12: [0.88, 0.9],
  },
  period_weights: null,
};

export function freshSnapshot(
  doc: EnvDoc,
  overrides: Partial<SessionSnapshot> = {},
): SessionSnapshot {
  return {
    format_version: 1,
    id: "s-test",
    env: doc.name,
    kind: doc.kind,
    condition: "control",
    status: "active",
    n_clicks: 0,
    clicks_left: doc.click_budget,
    revealed: {},
    hidden: doc.nodes.filter((n) => n !== doc.start),
    choice: null,
    study: null,
    ...overrides,
  };
}

export const MORTGAGE_AID =
  "Click the most long-term interest rates that you have not clicked yet." +
  " Repeat this step until all the long-term interest rates are clicked" +
  " or you have encountered the lowest possible interest rate.";

export function perfectReport(overrides: Partial<SessionReport> = {}): SessionReport {
  return {
    format_version: 1,
    id: "s-test",
    env: "mortgage",
    condition: "aided",
    agreement: { consistent: 3, inconsistent: 0, missed: 0, agreement: 1 },
    fsq: { k: 3, value: 1 },
    performance: 1,
    ...overrides,
  };
}
