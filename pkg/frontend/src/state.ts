// View state and the pure helpers the renderers build on. The screen is a
// function of the latest server snapshot plus whatever the participant has
// staged locally (a partial route, a plan they have not submitted yet).
// Nothing in here mutates the snapshot or guesses at hidden values.

import type { EnvDoc, SessionReport, SessionSnapshot, StudySnapshot } from "./api";

export interface ViewState {
  snapshot: SessionSnapshot;
  env: EnvDoc;
  /** Staged route or plan, in travel order. Empty until the participant picks. */
  pending: string[];
  /** A request is in flight; inputs are inert until the response lands. */
  busy: boolean;
  /** Last server rejection (budget exhausted, bad route, ...), shown inline. */
  error: string | null;
  report: SessionReport | null;
  showFeedback: boolean;
  study: StudySnapshot | null;
}

export function initialView(
  snapshot: SessionSnapshot,
  env: EnvDoc,
  showFeedback: boolean,
  study: StudySnapshot | null = null,
): ViewState {
  return { snapshot, env, pending: [], busy: false, error: null, report: null, showFeedback, study };
}

export interface CellView {
  node: string;
  label: string;
  display: string;
  revealed: boolean;
  clickable: boolean;
}

export function cellView(state: ViewState, node: string): CellView {
  const { snapshot, env } = state;
  const hit = snapshot.revealed[node];
  return {
    node,
    label: env.labels[node] ?? node,
    display: hit ? hit.display : "?",
    revealed: hit !== undefined,
    clickable:
      snapshot.status === "active" &&
      !state.busy &&
      hit === undefined &&
      node !== env.start &&
      (snapshot.clicks_left === null || snapshot.clicks_left > 0),
  };
}

export function budgetLine(snapshot: SessionSnapshot): string {
  if (snapshot.clicks_left === null) return `Clicks so far: ${snapshot.n_clicks}`;
  return `Clicks so far: ${snapshot.n_clicks} (${snapshot.clicks_left} left)`;
}

function childrenOf(env: EnvDoc, node: string): string[] {
  return env.edges.filter(([a]) => a === node).map(([, b]) => b);
}

/**
 * Append a node to a staged route when the map allows it. Routes always
 * start at the origin's neighbours. Returns null for a move the map does
 * not have, so callers can ignore the click.
 */
export function extendRoute(env: EnvDoc, route: string[], node: string): string[] | null {
  const from = route.length === 0 ? env.start : route[route.length - 1];
  if (!childrenOf(env, from).includes(node)) return null;
  return [...route, node];
}

export function routeComplete(env: EnvDoc, route: string[]): boolean {
  if (route.length === 0) return false;
  return childrenOf(env, route[route.length - 1]).length === 0;
}

export function routeText(env: EnvDoc, route: string[]): string {
  const names = [env.start, ...route].map((n) => env.labels[n] ?? n);
  return names.join(" to ");
}

/**
 * Resolve a typed city name against the map. Only hidden cities can be
 * looked up; everything else is a local error and never reaches the server.
 */
export function matchCity(
  state: ViewState,
  text: string,
): { node: string } | { error: string } {
  const wanted = text.trim().toLowerCase();
  if (!wanted) return { error: "Type a city name first." };
  const { env, snapshot } = state;
  const node = env.nodes.find(
    (n) => n !== env.start && (env.labels[n] ?? n).toLowerCase() === wanted,
  );
  if (!node) return { error: `No city called "${text.trim()}" on this map.` };
  if (snapshot.revealed[node]) {
    return { error: `${env.labels[node]} is already revealed.` };
  }
  return { node };
}

/**
 * Start-to-end chains of the task graph, one per child of the start node.
 * For the mortgage grid these are the three plans in reading order; each
 * chain is also a valid choice path.
 */
export function chainsFromStart(env: EnvDoc): string[][] {
  return childrenOf(env, env.start).map((first) => {
    const chain = [first];
    let next = childrenOf(env, chain[chain.length - 1]);
    while (next.length === 1) {
      chain.push(next[0]);
      next = childrenOf(env, chain[chain.length - 1]);
    }
    return chain;
  });
}

/** "Plan A, period 1" -> "Plan A"; used as the row header of the grid. */
export function chainTitle(env: EnvDoc, chain: string[]): string {
  const label = env.labels[chain[0]] ?? chain[0];
  return label.split(",")[0].trim();
}

export function pendingIsChain(env: EnvDoc, pending: string[]): boolean {
  if (pending.length === 0) return false;
  return chainsFromStart(env).some(
    (chain) => chain.length === pending.length && chain.every((n, i) => n === pending[i]),
  );
}

export function agreementPercent(report: SessionReport): string {
  return `${Math.round(report.agreement.agreement * 100)}%`;
}

export function fsqText(report: SessionReport): string {
  if (report.fsq.value === null) return "n/a (no clicks)";
  return report.fsq.value.toFixed(2);
}
