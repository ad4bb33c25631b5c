// Typed client for the forge session service. Every piece of game state
// lives on the server; this module only shapes requests and decodes
// responses. Nothing here inspects distributions or computes values.

export type TaskKind = "mouselab" | "roadtrip" | "mortgage";
export type Condition = "aided" | "control";
export type SessionStatus = "active" | "stopped" | "finished";

export interface RevealedCell {
  value: number;
  display: string;
}

export interface SessionSnapshot {
  format_version: number;
  id: string;
  env: string;
  kind: TaskKind;
  condition: Condition;
  status: SessionStatus;
  n_clicks: number;
  clicks_left: number | null;
  revealed: Record<string, RevealedCell>;
  hidden: string[];
  choice: string[] | null;
  study: string | null;
  aid_text?: string;
  aid_steps?: string[];
}

export interface EnvDoc {
  format_version: number;
  name: string;
  kind: TaskKind;
  start: string;
  nodes: string[];
  edges: [string, string][];
  dists: Record<string, unknown>;
  click_cost: number;
  click_budget: number | null;
  labels: Record<string, string>;
  farsighted: string[];
  forced: { nodes: string[]; value: number } | null;
  coords: Record<string, [number, number]>;
  period_weights: number[] | null;
}

export interface AidDoc {
  format_version: number;
  formula: string;
  text: string;
  steps: string[];
}

export interface SessionReport {
  format_version: number;
  id: string;
  env: string;
  condition: Condition;
  agreement: {
    consistent: number;
    inconsistent: number;
    missed: number;
    agreement: number;
  };
  fsq: { k: number; value: number | null };
  performance: number;
}

export interface ReplayCheck {
  format_version: number;
  id: string;
  ok: boolean;
  events: number;
}

export interface StudySnapshot {
  format_version: number;
  id: string;
  condition: Condition;
  blocks: string[];
  trials_per_block: number;
  seed: number;
  sessions: string[];
  completed: number;
  total: number;
  done: boolean;
  next?: { block: number; trial: number; env: string };
}

export interface NextTrial {
  format_version: number;
  done: boolean;
  index?: number;
  session: SessionSnapshot | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function decodeError(res: Response): Promise<never> {
  let detail = `${res.status} ${res.statusText}`;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(res.status, detail);
}

export class StudioApi {
  constructor(readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await fetch(`${this.base}/api/v1${path}`, init);
    if (!res.ok) await decodeError(res);
    return (await res.json()) as T;
  }

  listEnvs(): Promise<{ format_version: number; envs: string[] }> {
    return this.request("GET", "/envs");
  }

  envDoc(name: string): Promise<EnvDoc> {
    return this.request("GET", `/envs/${name}`);
  }

  createSession(env: string, condition: Condition, seed?: number): Promise<SessionSnapshot> {
    return this.request("POST", "/sessions", { env, condition, seed: seed ?? null });
  }

  getSession(id: string): Promise<SessionSnapshot> {
    return this.request("GET", `/sessions/${id}`);
  }

  click(id: string, node: string): Promise<SessionSnapshot> {
    return this.request("POST", `/sessions/${id}/actions`, { kind: "click", node });
  }

  terminate(id: string): Promise<SessionSnapshot> {
    return this.request("POST", `/sessions/${id}/actions`, { kind: "terminate" });
  }

  choose(id: string, path: string[]): Promise<SessionSnapshot> {
    return this.request("POST", `/sessions/${id}/choice`, { path });
  }

  aid(id: string): Promise<AidDoc> {
    return this.request("GET", `/sessions/${id}/aid`);
  }

  report(id: string): Promise<SessionReport> {
    return this.request("GET", `/sessions/${id}/report`);
  }

  replay(id: string): Promise<ReplayCheck> {
    return this.request("GET", `/sessions/${id}/replay`);
  }

  createStudy(
    condition: Condition,
    tasks: string[],
    trialsPerBlock: number,
    seed?: number,
  ): Promise<StudySnapshot> {
    return this.request("POST", "/studies", {
      condition,
      tasks,
      trials_per_block: trialsPerBlock,
      seed: seed ?? null,
    });
  }

  getStudy(id: string): Promise<StudySnapshot> {
    return this.request("GET", `/studies/${id}`);
  }

  nextTrial(id: string): Promise<NextTrial> {
    return this.request("POST", `/studies/${id}/next`);
  }
}
